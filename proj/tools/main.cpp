#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "kernid/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct CommonArgs {
    std::string config_path;
    bool paper = false;
    std::string method;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int sweep = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_sweep) {
    cmd->add_option("--config", args.config_path, "experiment configuration (JSON)");
    cmd->add_flag("--paper", args.paper, "use the built-in reference configuration");
    cmd->add_option("--method", args.method,
                    "identification route: first_kind, second_kind or two_initial");
    cmd->add_option("--out", args.out_dir, "data directory (default: out)");
    cmd->add_option("--seed", args.seed, "noise seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    if (with_sweep) cmd->add_option("--sweep", args.sweep, "repeat over k consecutive seeds");
}

kernid::ExperimentConfig make_config(const CommonArgs& args) {
    if (!args.paper && args.config_path.empty())
        throw kernid::ConfigError("either --config or --paper is required");
    kernid::ExperimentConfig cfg = args.config_path.empty()
                                       ? kernid::ExperimentConfig::paper()
                                       : kernid::ExperimentConfig::from_json_file(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.method.empty()) {
        if (args.method == "first_kind") cfg.inverse.method = kernid::Method::first_kind;
        else if (args.method == "second_kind") cfg.inverse.method = kernid::Method::second_kind;
        else if (args.method == "two_initial") cfg.inverse.method = kernid::Method::two_initial;
        else throw kernid::ConfigError("unknown method '" + args.method + "'");
    }
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic identification of the memory kernel of a 1-D system "
                 "with persistent memory from two boundary flux measurements"};
    app.require_subcommand(1);

    CommonArgs sim_args, id_args, pipe_args;
    CLI::App* sim = app.add_subcommand("simulate", "run the forward model and write "
                                                   "noisy measurement files");
    add_common(sim, sim_args, false);
    CLI::App* ident = app.add_subcommand("identify", "reconstruct M and N from "
                                                     "measurement files");
    add_common(ident, id_args, false);
    CLI::App* pipe = app.add_subcommand("pipeline", "simulate + identify, optionally "
                                                    "sweeping seeds");
    add_common(pipe, pipe_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (sim->parsed()) {
            kernid::run_simulate(make_config(sim_args), sim_args.out_dir);
        } else if (ident->parsed()) {
            const auto report = kernid::run_identify(make_config(id_args), id_args.out_dir);
            if (report.rel_l2_M)
                std::printf("rel_l2_M = %.6g\n", *report.rel_l2_M);
            if (report.rel_l2_N)
                std::printf("rel_l2_N = %.6g\n", *report.rel_l2_N);
        } else if (pipe->parsed()) {
            const auto rows =
                kernid::run_pipeline(make_config(pipe_args), pipe_args.out_dir, pipe_args.sweep);
            for (const auto& row : rows)
                std::printf("seed %llu: rel_l2_M = %.6g, rel_l2_N = %.6g\n",
                            static_cast<unsigned long long>(row.seed), row.rel_l2_M,
                            row.rel_l2_N);
        }
    } catch (const kernid::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const kernid::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const kernid::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return 0;
}
