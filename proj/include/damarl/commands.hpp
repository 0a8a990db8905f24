#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "damarl/evaluation.hpp"

namespace damarl {

struct TrainingOutputs {
    std::vector<std::filesystem::path> checkpoints;
    std::vector<std::filesystem::path> logs;
    std::filesystem::path resolved_config;
};

/// Trains one set of networks per listed seed and writes, into `out_dir`,
/// checkpoint_seed<S>.bin, train_log_seed<S>.csv and resolved_config.ini.
TrainingOutputs run_training(const std::string& config_path, const std::filesystem::path& out_dir,
                             std::ostream* progress = nullptr);

/// Writes eval_trials.csv, eval_summary.csv and resolved_config.ini.
EvalReport run_evaluation(const std::string& checkpoint, const std::string& config_path, int trials,
                          std::uint64_t seed, const std::filesystem::path& out_dir);

/// Writes trace.csv and resolved_config.ini; returns the trace path.
std::filesystem::path run_trace(const std::string& checkpoint, const std::string& config_path, std::uint64_t seed,
                                const std::filesystem::path& out_dir);

} // namespace damarl
