#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return 2;
    }
    out << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tamp;
    CLI::App app{"Topology-aware parallel computation simulator"};
    app.require_subcommand(1);

    cli::ExperimentConfig cfg;
    std::string out_path, trace_path;
    auto* run = app.add_subcommand("run", "Run an algorithm over seeded trials and emit a cost CSV");
    run->add_option("--task", cfg.task, "intersect|cartesian|sort|join")->required();
    run->add_option("--algo", cfg.algo, "algorithm name; defaults by task and topology");
    run->add_option("--topo", cfg.topo, "topology file or star:w1,w2,...")->required();
    run->add_option("--dist", cfg.dist, "distribution file or gen:SPEC")->required();
    run->add_option("--seed", cfg.seed, "base seed");
    run->add_option("--trials", cfg.trials, "number of trials");
    run->add_option("--width-bits", cfg.width_bits, "element width in bits");
    run->add_option("--out", out_path, "CSV output path (default stdout)");
    run->add_option("--trace", trace_path, "per-round edge traffic CSV");
    run->add_flag("--oracle", cfg.oracle, "add sandwich columns on tiny instances");

    std::string topo, dist, task = "intersect";
    std::uint64_t seed = 1, max_states = 100'000'000;
    auto* bounds = app.add_subcommand("bounds", "Evaluate every applicable lower bound");
    bounds->add_option("--topo", topo)->required();
    bounds->add_option("--dist", dist)->required();
    bounds->add_option("--seed", seed);
    bounds->add_option("--out", out_path);

    auto* validate = app.add_subcommand("validate", "Check topology and distribution inputs");
    validate->add_option("--topo", topo)->required();
    validate->add_option("--dist", dist);
    validate->add_option("--task", task);
    validate->add_option("--seed", seed);

    auto* oracle = app.add_subcommand("oracle", "Exhaustive one-round optimum on a tiny instance");
    oracle->add_option("--task", task, "intersect|cartesian|join")->required();
    oracle->add_option("--topo", topo)->required();
    oracle->add_option("--dist", dist)->required();
    oracle->add_option("--seed", seed);
    oracle->add_option("--max-states", max_states);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            auto res = cli::run_experiment(cfg);
            if (!trace_path.empty() && write_or_print(trace_path, res.trace_csv) != 0) return 2;
            return write_or_print(out_path, res.csv);
        }
        if (*bounds) {
            Topology t = cli::load_topology(topo);
            Distribution d = cli::load_distribution(t, dist, seed);
            return write_or_print(out_path, cli::bounds_table(t, d));
        }
        if (*validate) {
            bool ok = true;
            std::cout << cli::validate_report(topo, dist.empty() ? std::nullopt : std::optional<std::string>(dist), task,
                                              seed, &ok);
            return ok ? 0 : 2;
        }
        if (*oracle) {
            Topology t = cli::load_topology(topo);
            Distribution d = cli::load_distribution(t, dist, seed);
            std::cout << cli::oracle_report(t, d, cli::parse_task(task), seed, max_states);
            return 0;
        }
    } catch (const cli::VerifyError& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
