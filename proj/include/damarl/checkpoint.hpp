#pragma once

#include <string>
#include <vector>

#include "damarl/agent_io.hpp"
#include "damarl/policy_network.hpp"

namespace damarl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Trained parameters of a platoon: one actor per agent and, optionally, the
/// centralized critics.
struct PolicySet {
    ObsLayout layout;
    std::vector<Actor> actors;
    std::vector<Critic> critics;
};

/// Binary file: the magic "DAMARLCK", a little-endian u32 format version, a
/// u64 header length, a JSON header listing the architecture and every
/// parameter block's name and shape, then the raw float64 values of each block
/// in header order.
void save_checkpoint(const std::string& path, const PolicySet& policy);

/// Rebuilds the networks from the header and loads their values. Any shape or
/// name disagreement raises ValidationError.
PolicySet load_checkpoint(const std::string& path);

/// Throws ValidationError unless the checkpoint's platoon size and delays
/// match those of `delays`.
void require_compatible(const PolicySet& policy, const std::vector<int>& delays);

} // namespace damarl
