// distexp: run experiments, emit plot data, dump diagnostic snapshots.
//
// Exit codes: 0 success, 1 run failure, 2 bad input.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "distexp/experiment.hpp"

namespace fs = std::filesystem;
using namespace distexp;

namespace {

fs::path output_root()
{
    const char *root = std::getenv("DISTEXP_OUTPUT_ROOT");
    return root && *root ? fs::path(root) : fs::current_path();
}

int cmd_run(const std::string &config_path, int jobs)
{
    ExperimentConfig cfg;
    try {
        cfg = load_experiment(config_path);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto summary = run_experiment(cfg, output_root(), jobs, &std::cerr);
        std::cout << summary.dump(2) << '\n';
    } catch (const RunError &e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int cmd_plotdata(const fs::path &dir, const std::string &out)
{
    std::vector<PlotRow> rows;
    try {
        rows = collect_plotdata(dir);
    } catch (const std::exception &e) {
        std::cerr << "plotdata: " << e.what() << '\n';
        return 2;
    }
    const fs::path target = out.empty() ? dir / "plotdata.csv" : fs::path(out);
    try {
        write_plotdata_csv(target, rows);
    } catch (const std::exception &e) {
        std::cerr << "plotdata: " << e.what() << '\n';
        return 1;
    }
    std::cout << target.string() << '\n';
    return 0;
}

int cmd_snapshot(const fs::path &run_dir, int episode, int draws, std::uint64_t seed)
{
    const fs::path file = run_dir / "snapshots.jsonl";
    std::optional<Snapshot> snap;
    try {
        snap = read_snapshot(file, episode);
    } catch (const std::exception &e) {
        std::cerr << "snapshot: " << file.string() << ": " << e.what() << '\n';
        return 2;
    }
    if (!snap) {
        std::cerr << "snapshot: no snapshot for episode " << episode << " in " << file.string() << '\n';
        return 2;
    }
    std::cout << snapshot_report(*snap, draws, seed).dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Distributional exploration experiments"};
    app.require_subcommand(1);

    std::string config_path;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto *run = app.add_subcommand("run", "Run every method and repetition in a config file");
    run->add_option("config", config_path, "Experiment config (TOML)")->required();
    run->add_option("-j,--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    std::string plot_dir, plot_out;
    auto *plot = app.add_subcommand("plotdata", "Merge aggregate curves into one long-format CSV");
    plot->add_option("dir", plot_dir, "Experiment output directory")->required();
    plot->add_option("-o,--output", plot_out, "Output file (default <dir>/plotdata.csv)");

    std::string run_dir;
    int episode = 0;
    int draws = 10000;
    std::uint64_t seed = 0;
    auto *snap = app.add_subcommand("snapshot", "Print per-state distributions and selection probabilities");
    snap->add_option("dir", run_dir, "Run directory containing snapshots.jsonl")->required();
    snap->add_option("--episode", episode, "Snapshot episode")->required();
    snap->add_option("--draws", draws, "Policy draws per state")->check(CLI::PositiveNumber);
    snap->add_option("--seed", seed, "Seed for the policy draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*run) {
        return cmd_run(config_path, jobs);
    }
    if (*plot) {
        return cmd_plotdata(plot_dir, plot_out);
    }
    return cmd_snapshot(run_dir, episode, draws, seed);
}
