#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "damarl/cacc_env.hpp"
#include "damarl/error.hpp"
#include "damarl/trainer.hpp"

namespace damarl {

/// A config problem tied to one field, e.g. "scenario.platoon_size".
class ConfigError : public ValidationError {
public:
    ConfigError(std::string field, const std::string& message)
        : ValidationError(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Contents of an INI-style run configuration:
///
///   [scenario]  kind, platoon_size (required); episode_steps, h_star, ...
///   [dynamics]  dt, h_min, v_max, u_min, u_max, h_s, h_g
///   [reward]    w1, w2, w3, c, collision_penalty
///   [action]    alpha_max, beta_max
///   [train]     seeds (required for training), episodes, batch_size, ...
///   [run]       provenance written into snapshots; ignored when parsing
///
/// Unknown keys are rejected.
struct RunConfig {
    EnvConfig env;
    TrainConfig train;
    std::vector<std::uint64_t> seeds;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// Fully resolved INI text; parsing it yields an identical RunConfig.
std::string to_ini(const RunConfig& cfg);

std::string to_string(ScenarioKind kind);

} // namespace damarl
