// Command-line entry point: train / eval / trace.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "damarl/allocator.hpp"
#include "damarl/commands.hpp"
#include "damarl/config.hpp"
#include "damarl/error.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfig = 2,
    kValidation = 3,
    kIo = 4,
    kInternal = 5,
};

std::filesystem::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("DAMARL_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    return "damarl_out";
}

} // namespace

int main(int argc, char** argv) {
    damarl::tune_allocator();
    CLI::App app{"Delay-aware multi-agent RL for CACC platoons"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_flag;
    app.add_option("-o,--out", out_flag, "Output directory (default: $DAMARL_OUTPUT_DIR or ./damarl_out)");

    std::string config;
    std::string checkpoint;
    int trials = 50;
    std::uint64_t seed = 0;

    auto* train = app.add_subcommand("train", "Train one checkpoint per configured seed");
    train->add_option("config", config, "Run configuration (INI)")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint over seeded noise-free trials");
    eval->add_option("checkpoint", checkpoint)->required();
    eval->add_option("config", config)->required();
    eval->add_option("--trials", trials, "Number of episodes")->check(CLI::PositiveNumber);
    eval->add_option("--seed", seed, "Base seed for trial initial conditions");

    auto* trace = app.add_subcommand("trace", "Emit a per-step CSV of one episode");
    trace->add_option("checkpoint", checkpoint)->required();
    trace->add_option("config", config)->required();
    trace->add_option("--seed", seed, "Initial-condition seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }
    const auto out = output_dir(out_flag);

    try {
        if (train->parsed()) {
            const auto res = damarl::run_training(config, out, &std::cerr);
            for (const auto& c : res.checkpoints) std::cout << c.string() << '\n';
        } else if (eval->parsed()) {
            const auto rep = damarl::run_evaluation(checkpoint, config, trials, seed, out);
            std::cout << "trials " << rep.trials << "\navg_headway " << rep.avg_headway << "\navg_velocity "
                      << rep.avg_velocity << "\ncollision_count " << rep.collision_count << "\navg_return "
                      << rep.avg_return << '\n';
        } else if (trace->parsed()) {
            std::cout << damarl::run_trace(checkpoint, config, seed, out).string() << '\n';
        }
    } catch (const damarl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const damarl::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const damarl::ContractError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    } catch (const damarl::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
