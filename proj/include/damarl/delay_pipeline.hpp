#pragma once

#include <array>
#include <deque>
#include <span>
#include <vector>

#include "damarl/action.hpp"

namespace damarl {

inline constexpr int kObsDim = 5;

/// FIFO of committed-but-unexecuted actions. An action committed at step t is
/// executed at step t + k; with k = 0 the buffer is a pass-through.
class ActionBuffer {
public:
    ActionBuffer() = default;
    ActionBuffer(int k, const ActionTriple& fill);

    /// Appends `next` and returns the action committed k steps ago.
    ActionTriple commit_and_pop(const ActionTriple& next);

    /// Planned actions, oldest (next to execute) first.
    [[nodiscard]] std::vector<ActionTriple> planned_sequence() const;

    [[nodiscard]] int delay() const { return static_cast<int>(queue_.size()); }

private:
    std::deque<ActionTriple> queue_;
};

inline ActionBuffer init_buffer(int k, const ActionTriple& fill) { return ActionBuffer(k, fill); }

/// floor(tau / dt), computed with a small tolerance so that e.g. 0.5 / 0.1
/// yields 5 despite binary rounding.
int delay_steps(double tau, double dt);

/// Environment features plus the planned action sequence of one agent.
struct AugmentedObservation {
    std::array<double, kObsDim> obs{};
    std::vector<ActionTriple> planned;

    [[nodiscard]] int dim() const { return kObsDim + kActionDim * static_cast<int>(planned.size()); }

    /// obs followed by (alpha, beta, u_hat) of each planned action.
    void flatten_into(std::span<double> out) const;
    [[nodiscard]] std::vector<double> flatten() const;
};

} // namespace damarl
