#include "damarl/agent_io.hpp"

#include "damarl/error.hpp"

namespace damarl {

ObsLayout::ObsLayout(std::vector<int> delays, bool use_planned_actions)
    : delays_(std::move(delays)), use_planned_(use_planned_actions) {
    if (delays_.empty()) throw ValidationError("layout: no agents");
    for (int i = 0; i < num_agents(); ++i) {
        if (delay(i) < 0) throw ValidationError("layout: negative delay");
        offsets_.push_back(state_dim_);
        state_dim_ += agent_dim(i);
    }
}

Vector ObsLayout::flatten(std::span<const AugmentedObservation> obs) const {
    if (static_cast<int>(obs.size()) != num_agents()) throw ContractError("layout: wrong number of observations");
    Vector x(state_dim_);
    for (int i = 0; i < num_agents(); ++i) {
        const auto& o = obs[static_cast<std::size_t>(i)];
        if (o.dim() != agent_dim(i)) throw ContractError("layout: observation dimension does not match delay");
        o.flatten_into(std::span<double>(x.data() + offset(i), static_cast<std::size_t>(agent_dim(i))));
    }
    return x;
}

ActorBatch ObsLayout::actor_batch(const Matrix& x, int i) const {
    if (x.rows() != state_dim_) throw ContractError("layout: global state has wrong dimension");
    if (i < 0 || i >= num_agents()) throw ContractError("layout: agent index out of range");
    const Eigen::Index n = x.cols();
    const int d = actor_input_dim(i);
    ActorBatch b;
    b.self = x.middleRows(offset(i), d);
    b.has_predecessor = i > 0;
    b.has_follower = i + 1 < num_agents();
    b.predecessor = Matrix::Zero(d, n);
    b.follower = Matrix::Zero(d, n);
    if (b.has_predecessor) b.predecessor.topRows(kObsDim) = x.middleRows(offset(i - 1), kObsDim);
    if (b.has_follower) b.follower.topRows(kObsDim) = x.middleRows(offset(i + 1), kObsDim);
    return b;
}

ActorBatch ObsLayout::actor_batch(std::span<const AugmentedObservation> obs, int i) const {
    return actor_batch(Matrix(flatten(obs)), i);
}

} // namespace damarl
