#pragma once

namespace damarl {

/// One agent's decision: filter gains plus the raw policy acceleration.
struct ActionTriple {
    double alpha = 0.0; ///< headway gain [1/s]
    double beta = 0.0;  ///< relative-speed gain [1/s]
    double u_hat = 0.0; ///< raw acceleration [m/s^2]

    friend bool operator==(const ActionTriple&, const ActionTriple&) = default;
};

inline constexpr int kActionDim = 3;

/// Valid ranges of each triple coordinate.
struct ActionBounds {
    double alpha_max = 1.0;
    double beta_max = 1.0;
    double u_min = -2.0;
    double u_max = 2.0;

    [[nodiscard]] bool contains(const ActionTriple& a) const {
        return a.alpha >= 0.0 && a.alpha <= alpha_max && a.beta >= 0.0 && a.beta <= beta_max &&
               a.u_hat >= u_min && a.u_hat <= u_max;
    }
    [[nodiscard]] ActionTriple clamp(const ActionTriple& a) const;
    friend bool operator==(const ActionBounds&, const ActionBounds&) = default;
};

/// Neutral OVM-consistent action used to fill delay buffers at reset.
inline constexpr ActionTriple kNeutralAction{0.5, 0.5, 0.0};

} // namespace damarl
