#pragma once

#include <span>
#include <vector>

#include "damarl/delay_pipeline.hpp"
#include "damarl/policy_network.hpp"

namespace damarl {

/// Packing of all agents' augmented observations into one global state vector
/// x = (o_1, ..., o_N), and extraction of each actor's inputs from it.
class ObsLayout {
public:
    ObsLayout() = default;
    /// `use_planned_actions = false` hides o_act from the actors (the critic
    /// still sees the full global state).
    ObsLayout(std::vector<int> delays, bool use_planned_actions);

    [[nodiscard]] int num_agents() const { return static_cast<int>(delays_.size()); }
    [[nodiscard]] int delay(int i) const { return delays_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const std::vector<int>& delays() const { return delays_; }
    [[nodiscard]] bool use_planned_actions() const { return use_planned_; }
    [[nodiscard]] int agent_dim(int i) const { return kObsDim + kActionDim * delay(i); }
    [[nodiscard]] int offset(int i) const { return offsets_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] int state_dim() const { return state_dim_; }
    [[nodiscard]] int critic_input_dim() const { return state_dim_ + kActionDim * num_agents(); }
    [[nodiscard]] int actor_input_dim(int i) const { return use_planned_ ? agent_dim(i) : kObsDim; }

    [[nodiscard]] Vector flatten(std::span<const AugmentedObservation> obs) const;

    /// Inputs of agent i for every column of the global-state batch `x`.
    [[nodiscard]] ActorBatch actor_batch(const Matrix& x, int i) const;

    [[nodiscard]] ActorBatch actor_batch(std::span<const AugmentedObservation> obs, int i) const;

private:
    std::vector<int> delays_;
    std::vector<int> offsets_;
    int state_dim_ = 0;
    bool use_planned_ = true;
};

} // namespace damarl
