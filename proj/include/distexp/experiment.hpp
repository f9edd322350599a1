#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "distexp/agent.hpp"

namespace distexp {

struct EnvConfig {
    std::string name = "chain";  // chain | toy_tree | frozenlake
    int length = 10;             // chain only
    bool ordered = false;        // chain only
    int max_episode_steps = 200;

    bool operator==(const EnvConfig &) const = default;
};

struct MethodConfig {
    std::string name;
    HeadSpec head;
    PolicySpec policy;

    bool operator==(const MethodConfig &) const = default;
};

/// One config file: an environment, shared agent settings, and the methods to compare.
/// agent.head, agent.policy and agent.seed are filled per method and run.
struct ExperimentConfig {
    EnvConfig env;
    AgentConfig agent;
    std::vector<MethodConfig> methods;
    int repetitions = 1;
    std::uint64_t seed_base = 0;
    std::string output_dir = "runs";
    int final_window = 100;

    bool operator==(const ExperimentConfig &) const = default;
};

/// Invalid config; what() is "<source>:<line>: <message>".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string &source, int line, const std::string &message);
    int line() const { return line_; }

private:
    int line_;
};

/// Run-time failure of one repetition.
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ExperimentConfig parse_experiment(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_experiment(const std::filesystem::path &path);
/// TOML with every default written out.
std::string serialize_experiment(const ExperimentConfig &config);

/// Default categorical support: 7 bins on the chain, 31 elsewhere, over [-0.2, 1.2].
HeadSpec default_head(Family family, const EnvConfig &env);

std::unique_ptr<Environment> make_env(const EnvConfig &env, std::uint64_t seed);
AgentConfig run_agent_config(const ExperimentConfig &config, const MethodConfig &method, std::uint64_t seed);

void write_curve_csv(const std::filesystem::path &path, const LearningCurve &curve);
std::vector<EpisodeRecord> read_curve_csv(const std::filesystem::path &path);

void write_snapshots(const std::filesystem::path &path, const LearningCurve &curve);
std::optional<Snapshot> read_snapshot(const std::filesystem::path &path, int episode);

struct AggregateRow {
    int episode = 0;
    double mean_return = 0.0;
    double stderr_return = 0.0;  // sample std / sqrt(reps); 0 for a single run
};

/// Per-episode mean and standard error across runs, truncated to the shortest run.
std::vector<AggregateRow> aggregate_returns(const std::vector<std::vector<EpisodeRecord>> &runs);
void write_aggregate_csv(const std::filesystem::path &path, const std::vector<AggregateRow> &rows);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path &path);

struct PlotRow {
    std::string method;
    AggregateRow row;
};

/// Long-format rows from <dir>/<method>/aggregate.csv, sorted by (method, episode).
std::vector<PlotRow> collect_plotdata(const std::filesystem::path &dir);
void write_plotdata_csv(const std::filesystem::path &path, const std::vector<PlotRow> &rows);

/// Per-state distributions plus Thompson and UCB selection frequencies.
nlohmann::json snapshot_report(const Snapshot &snap, int draws, std::uint64_t seed);

/// Runs every (method, repetition) pair under <root>/<output_dir> and writes
///   <method>/run_<seed>/curve.csv, <method>/run_<seed>/snapshots.jsonl,
///   <method>/aggregate.csv, summary.json and config.toml.
/// Returns the summary. Throws RunError naming the failing run.
nlohmann::json run_experiment(const ExperimentConfig &config,
                              const std::filesystem::path &root,
                              int jobs,
                              std::ostream *log = nullptr);

}  // namespace distexp
