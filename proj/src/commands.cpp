#include "damarl/commands.hpp"

#include <fstream>

#include "damarl/checkpoint.hpp"
#include "damarl/config.hpp"
#include "damarl/trainer.hpp"

namespace damarl {

namespace fs = std::filesystem;

namespace {

void write_snapshot(const fs::path& path, const RunConfig& cfg, const std::string& run_section) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << to_ini(cfg);
    if (!run_section.empty()) out << "\n[run]\n" << run_section;
}

} // namespace

TrainingOutputs run_training(const std::string& config_path, const fs::path& out_dir, std::ostream* progress) {
    RunConfig cfg = load_config(config_path);
    if (cfg.seeds.empty()) throw ConfigError("train.seeds", "missing required field");
    fs::create_directories(out_dir);

    TrainingOutputs outputs;
    outputs.resolved_config = out_dir / "resolved_config.ini";
    write_snapshot(outputs.resolved_config, cfg, "command = train\n");

    for (std::uint64_t seed : cfg.seeds) {
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        Trainer trainer(cfg.env, tc);
        const auto log = trainer.train([&](const EpisodeLog& row) {
            if (progress && (row.episode % 10 == 0 || row.collision)) {
                *progress << "seed " << seed << " episode " << row.episode << " steps " << row.total_steps
                          << " return " << row.mean_return << (row.collision ? " collision" : "") << '\n';
            }
        });

        PolicySet policy;
        policy.layout = trainer.layout();
        for (int i = 0; i < trainer.num_agents(); ++i) {
            policy.actors.push_back(trainer.agent(i).actor);
            policy.critics.push_back(trainer.agent(i).critic);
        }
        const std::string tag = "seed" + std::to_string(seed);
        outputs.checkpoints.push_back(out_dir / ("checkpoint_" + tag + ".bin"));
        outputs.logs.push_back(out_dir / ("train_log_" + tag + ".csv"));
        save_checkpoint(outputs.checkpoints.back().string(), policy);
        write_training_log(outputs.logs.back().string(), log, trainer.num_agents());
    }
    return outputs;
}

EvalReport run_evaluation(const std::string& checkpoint, const std::string& config_path, int trials,
                          std::uint64_t seed, const fs::path& out_dir) {
    const RunConfig cfg = load_config(config_path);
    const PolicySet policy = load_checkpoint(checkpoint);
    const EvalReport report = evaluate(policy, cfg.env, trials, seed);
    fs::create_directories(out_dir);
    write_trials_csv((out_dir / "eval_trials.csv").string(), report);
    write_summary_csv((out_dir / "eval_summary.csv").string(), report);
    write_snapshot(out_dir / "resolved_config.ini", cfg,
                   "command = eval\ncheckpoint = " + checkpoint + "\ntrials = " + std::to_string(trials) +
                       "\nseed = " + std::to_string(seed) + "\n");
    return report;
}

fs::path run_trace(const std::string& checkpoint, const std::string& config_path, std::uint64_t seed,
                   const fs::path& out_dir) {
    const RunConfig cfg = load_config(config_path);
    const PolicySet policy = load_checkpoint(checkpoint);
    const auto rows = trace_episode(policy, cfg.env, seed);
    fs::create_directories(out_dir);
    const fs::path path = out_dir / "trace.csv";
    write_trace_csv(path.string(), rows);
    write_snapshot(out_dir / "resolved_config.ini", cfg,
                   "command = trace\ncheckpoint = " + checkpoint + "\nseed = " + std::to_string(seed) + "\n");
    return path;
}

} // namespace damarl
