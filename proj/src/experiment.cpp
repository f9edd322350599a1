#include "distexp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <toml.hpp>

namespace distexp {

namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string &source, int line, const std::string &message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line)
{
}

namespace {

int line_of(const toml::node &n)
{
    return static_cast<int>(n.source().begin.line);
}

// Typed access to one TOML table with line-anchored errors and unknown-key detection.
class TableReader {
public:
    TableReader(const toml::table &table, std::string prefix, std::string source)
        : table_(table), prefix_(std::move(prefix)), source_(std::move(source))
    {
    }

    [[noreturn]] void fail(const toml::node *at, const std::string &key, const std::string &msg) const
    {
        if (!at) {
            at = table_.get(key);
        }
        const int line = at ? line_of(*at) : line_of(table_);
        throw ConfigError(source_, std::max(line, 1), prefix_ + key + ": " + msg);
    }

    [[noreturn]] void fail_table(const std::string &msg) const
    {
        throw ConfigError(source_, std::max(line_of(table_), 1), msg);
    }

    const toml::node *find(const std::string &key)
    {
        used_.insert(key);
        return table_.get(key);
    }

    double real(const std::string &key, double fallback)
    {
        const toml::node *n = find(key);
        if (!n) {
            return fallback;
        }
        if (!n->is_number()) {
            fail(n, key, "expected a number");
        }
        const double v = *n->value<double>();
        if (!std::isfinite(v)) {
            fail(n, key, "must be finite");
        }
        return v;
    }

    std::int64_t integer(const std::string &key, std::int64_t fallback)
    {
        const toml::node *n = find(key);
        if (!n) {
            return fallback;
        }
        if (!n->is_integer()) {
            fail(n, key, "expected an integer");
        }
        return *n->value<std::int64_t>();
    }

    int small_int(const std::string &key, int fallback, int min_value)
    {
        const std::int64_t v = integer(key, fallback);
        if (v < min_value || v > 1'000'000'000) {
            fail(table_.get(key), key, "must be >= " + std::to_string(min_value));
        }
        return static_cast<int>(v);
    }

    bool boolean(const std::string &key, bool fallback)
    {
        const toml::node *n = find(key);
        if (!n) {
            return fallback;
        }
        if (!n->is_boolean()) {
            fail(n, key, "expected true or false");
        }
        return *n->value<bool>();
    }

    std::optional<std::string> text(const std::string &key)
    {
        const toml::node *n = find(key);
        if (!n) {
            return std::nullopt;
        }
        if (!n->is_string()) {
            fail(n, key, "expected a string");
        }
        return *n->value<std::string>();
    }

    /// Checks a value already read against a predicate.
    template <class T, class Pred>
    T check(const std::string &key, T value, Pred ok, const std::string &msg) const
    {
        if (!ok(value)) {
            fail(table_.get(key), key, msg);
        }
        return value;
    }

    void reject_unknown() const
    {
        for (auto &&[k, v] : table_) {
            const std::string name(k.str());
            if (!used_.contains(name)) {
                fail(&v, name, "unknown key");
            }
        }
    }

    int line() const { return std::max(line_of(table_), 1); }

private:
    const toml::table &table_;
    std::string prefix_;
    std::string source_;
    std::set<std::string> used_;
};

template <class Parse>
auto parse_enum(TableReader &r, const std::string &key, std::optional<std::string> value, Parse parse)
    -> decltype(parse(std::string_view{}))
{
    try {
        return parse(*value);
    } catch (const std::invalid_argument &e) {
        r.fail(nullptr, key, e.what());
    }
}

EnvConfig read_env(const toml::table &t, const std::string &source)
{
    TableReader r(t, "env.", source);
    EnvConfig env;
    const auto name = r.text("name");
    if (!name) {
        r.fail_table("env.name: required");
    }
    env.name = *name;
    if (env.name != "chain" && env.name != "toy_tree" && env.name != "frozenlake") {
        r.fail(t.get("name"), "name", "unknown environment '" + env.name + "' (chain, toy_tree, frozenlake)");
    }
    env.length = r.small_int("length", env.length, 2);
    env.ordered = r.boolean("ordered", env.ordered);
    env.max_episode_steps = r.small_int("max_episode_steps", env.max_episode_steps, 1);
    r.reject_unknown();
    return env;
}

AgentConfig read_agent(const toml::table &t, const std::string &source)
{
    TableReader r(t, "agent.", source);
    AgentConfig a;
    a.gamma = r.check("gamma", r.real("gamma", a.gamma), [](double v) { return v >= 0.0 && v <= 1.0; },
                      "must lie in [0, 1]");
    a.lr = r.check("lr", r.real("lr", a.lr), [](double v) { return v > 0.0; }, "must be positive");
    a.batch_size = r.small_int("batch_size", a.batch_size, 1);
    a.replay_capacity = r.small_int("replay_capacity", a.replay_capacity, 1);
    a.grad_clip = r.check("grad_clip", r.real("grad_clip", a.grad_clip), [](double v) { return v > 0.0; },
                          "must be positive");
    a.episodes = r.small_int("episodes", a.episodes, 0);
    a.hidden_units = r.small_int("hidden_units", a.hidden_units, 1);
    a.hidden_layers = r.small_int("hidden_layers", a.hidden_layers, 1);
    a.episodes_per_iteration = r.small_int("episodes_per_iteration", a.episodes_per_iteration, 1);
    if (auto v = r.text("replay_bootstrap")) {
        if (*v == "policy") {
            a.replay_bootstrap = ReplayBootstrap::policy;
        } else if (*v == "greedy") {
            a.replay_bootstrap = ReplayBootstrap::greedy;
        } else {
            r.fail(t.get("replay_bootstrap"), "replay_bootstrap", "expected 'policy' or 'greedy'");
        }
    }
    if (auto v = r.text("loss")) {
        if (*v == "closed_form") {
            a.loss = LossKind::closed_form;
        } else if (*v == "sample_nll") {
            a.loss = LossKind::sample_nll;
        } else {
            r.fail(t.get("loss"), "loss", "expected 'closed_form' or 'sample_nll'");
        }
    }
    a.nll_samples = r.small_int("nll_samples", a.nll_samples, 1);
    a.snapshot_every = r.small_int("snapshot_every", a.snapshot_every, 0);
    r.reject_unknown();
    return a;
}

MethodConfig read_method(const toml::table &t, const std::string &source, const EnvConfig &env, std::size_t index)
{
    TableReader r(t, "method[" + std::to_string(index) + "].", source);
    MethodConfig m;
    const auto family = r.text("family");
    if (!family) {
        r.fail_table("method[" + std::to_string(index) + "].family: required");
    }
    m.head = default_head(parse_enum(r, "family", family, parse_family), env);
    const auto policy = r.text("policy");
    if (!policy) {
        r.fail_table("method[" + std::to_string(index) + "].policy: required");
    }
    m.policy.kind = parse_enum(r, "policy", policy, parse_policy);
    m.head.n_bins = r.small_int("n_bins", m.head.n_bins, 2);
    m.head.z_min = r.real("z_min", m.head.z_min);
    m.head.z_max = r.check("z_max", r.real("z_max", m.head.z_max), [&](double v) { return v > m.head.z_min; },
                           "must exceed z_min");
    m.head.n_components = r.small_int("n_components", m.head.n_components, 1);
    m.policy.ucb_c_low = r.real("ucb_c_low", m.policy.ucb_c_low);
    m.policy.ucb_c_high = r.check("ucb_c_high", r.real("ucb_c_high", m.policy.ucb_c_high),
                                  [&](double v) { return v >= m.policy.ucb_c_low; }, "must be >= ucb_c_low");
    m.policy.epsilon = r.check("epsilon", r.real("epsilon", m.policy.epsilon),
                               [](double v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
    m.name = r.text("name").value_or(std::string(family_name(m.head.family)) + "-" + std::string(policy_name(m.policy.kind)));
    r.check("name", m.name,
            [](const std::string &s) {
                return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
                });
            },
            "use letters, digits, '-', '_' or '.'");
    r.reject_unknown();
    return m;
}

}  // namespace

HeadSpec default_head(Family family, const EnvConfig &env)
{
    HeadSpec h;
    h.family = family;
    h.n_bins = env.name == "chain" ? 7 : 31;
    h.z_min = -0.2;
    h.z_max = 1.2;
    h.n_components = 5;
    return h;
}

ExperimentConfig parse_experiment(std::string_view text, std::string_view source)
{
    const std::string src(source);
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error &e) {
        throw ConfigError(src, static_cast<int>(e.source().begin.line), std::string(e.description()));
    }

    TableReader r(root, "", src);
    ExperimentConfig cfg;
    cfg.output_dir = r.text("output_dir").value_or(cfg.output_dir);
    cfg.repetitions = r.small_int("repetitions", cfg.repetitions, 1);
    const std::int64_t seed_base = r.integer("seed_base", 0);
    cfg.seed_base = static_cast<std::uint64_t>(
        r.check("seed_base", seed_base, [](std::int64_t v) { return v >= 0; }, "must be >= 0"));
    cfg.final_window = r.small_int("final_window", cfg.final_window, 1);

    const toml::node *env = r.find("env");
    if (!env || !env->is_table()) {
        r.fail(env, "env", "a [env] table is required");
    }
    cfg.env = read_env(*env->as_table(), src);

    if (const toml::node *agent = r.find("agent")) {
        if (!agent->is_table()) {
            r.fail(agent, "agent", "expected a table");
        }
        cfg.agent = read_agent(*agent->as_table(), src);
    }

    const toml::node *methods = r.find("method");
    if (!methods || !methods->is_array() || methods->as_array()->empty()) {
        r.fail(methods, "method", "at least one [[method]] table is required");
    }
    std::set<std::string> names;
    std::size_t i = 0;
    for (const toml::node &m : *methods->as_array()) {
        if (!m.is_table()) {
            r.fail(&m, "method", "entries must be tables");
        }
        MethodConfig mc = read_method(*m.as_table(), src, cfg.env, i++);
        if (!names.insert(mc.name).second) {
            throw ConfigError(src, line_of(m), "method name '" + mc.name + "' is used twice");
        }
        cfg.methods.push_back(std::move(mc));
    }
    r.reject_unknown();

    // Cross-field checks the per-key readers cannot see.
    for (const auto &m : cfg.methods) {
        try {
            run_agent_config(cfg, m, cfg.seed_base).validate();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(src, r.line(), "method '" + m.name + "': " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_experiment(const fs::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), 0, "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment(buf.str(), path.string());
}

std::string serialize_experiment(const ExperimentConfig &c)
{
    toml::table env{{"name", c.env.name}, {"max_episode_steps", c.env.max_episode_steps}};
    if (c.env.name == "chain") {
        env.insert_or_assign("length", c.env.length);
        env.insert_or_assign("ordered", c.env.ordered);
    }
    const AgentConfig &a = c.agent;
    toml::table agent{
        {"gamma", a.gamma},
        {"lr", a.lr},
        {"batch_size", a.batch_size},
        {"replay_capacity", a.replay_capacity},
        {"grad_clip", a.grad_clip},
        {"episodes", a.episodes},
        {"hidden_units", a.hidden_units},
        {"hidden_layers", a.hidden_layers},
        {"episodes_per_iteration", a.episodes_per_iteration},
        {"replay_bootstrap", a.replay_bootstrap == ReplayBootstrap::greedy ? "greedy" : "policy"},
        {"loss", a.loss == LossKind::sample_nll ? "sample_nll" : "closed_form"},
        {"nll_samples", a.nll_samples},
        {"snapshot_every", a.snapshot_every},
    };
    toml::array methods;
    for (const auto &m : c.methods) {
        methods.push_back(toml::table{
            {"name", m.name},
            {"family", std::string(family_name(m.head.family))},
            {"policy", std::string(policy_name(m.policy.kind))},
            {"n_bins", m.head.n_bins},
            {"z_min", m.head.z_min},
            {"z_max", m.head.z_max},
            {"n_components", m.head.n_components},
            {"ucb_c_low", m.policy.ucb_c_low},
            {"ucb_c_high", m.policy.ucb_c_high},
            {"epsilon", m.policy.epsilon},
        });
    }
    toml::table root{
        {"output_dir", c.output_dir},
        {"repetitions", c.repetitions},
        {"seed_base", static_cast<std::int64_t>(c.seed_base)},
        {"final_window", c.final_window},
        {"env", std::move(env)},
        {"agent", std::move(agent)},
        {"method", std::move(methods)},
    };
    std::ostringstream out;
    out << root << "\n";
    return out.str();
}

std::unique_ptr<Environment> make_env(const EnvConfig &env, std::uint64_t seed)
{
    if (env.name == "chain") {
        return chain_new(env.length, seed, env.ordered, env.max_episode_steps);
    }
    if (env.name == "toy_tree") {
        return toy_tree_new(env.max_episode_steps);
    }
    if (env.name == "frozenlake") {
        return frozenlake_det_new(env.max_episode_steps);
    }
    throw std::invalid_argument("unknown environment '" + env.name + "'");
}

AgentConfig run_agent_config(const ExperimentConfig &config, const MethodConfig &method, std::uint64_t seed)
{
    AgentConfig a = config.agent;
    a.head = method.head;
    a.policy = method.policy;
    a.seed = seed;
    return a;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path &path, const std::string &header)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw std::runtime_error(path.string() + ": expected header '" + header + "'");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

// Shortest text that parses back to the same double.
std::string num(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path &path)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

}  // namespace

void write_curve_csv(const fs::path &path, const LearningCurve &curve)
{
    std::ofstream out = open_out(path);
    out << "episode,return,mean_loss,wall_ms\n";
    for (const auto &r : curve.episodes) {
        out << r.episode << ',' << num(r.episode_return) << ',' << num(r.mean_loss) << ',' << num(r.wall_ms) << '\n';
    }
}

std::vector<EpisodeRecord> read_curve_csv(const fs::path &path)
{
    std::vector<EpisodeRecord> out;
    for (const auto &c : read_csv(path, "episode,return,mean_loss,wall_ms")) {
        if (c.size() != 4) {
            throw std::runtime_error(path.string() + ": malformed row");
        }
        out.push_back({std::stoi(c[0]), std::stod(c[1]), std::stod(c[2]), std::stod(c[3])});
    }
    return out;
}

void write_snapshots(const fs::path &path, const LearningCurve &curve)
{
    std::ofstream out = open_out(path);
    for (const auto &snap : curve.snapshots) {
        nlohmann::json states = nlohmann::json::array();
        for (const auto &per_action : snap.distributions) {
            nlohmann::json actions = nlohmann::json::array();
            for (const auto &d : per_action) {
                actions.push_back(to_json(d));
            }
            states.push_back(std::move(actions));
        }
        out << nlohmann::json{{"episode", snap.episode}, {"states", std::move(states)}}.dump() << '\n';
    }
}

std::optional<Snapshot> read_snapshot(const fs::path &path, int episode)
{
    std::ifstream in(path);
    if (!in) {
        return std::nullopt;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto j = nlohmann::json::parse(line);
        if (j.at("episode").get<int>() != episode) {
            continue;
        }
        Snapshot snap;
        snap.episode = episode;
        for (const auto &actions : j.at("states")) {
            std::vector<ReturnDistribution> row;
            for (const auto &d : actions) {
                row.push_back(distribution_from_json(d));
            }
            snap.distributions.push_back(std::move(row));
        }
        return snap;
    }
    return std::nullopt;
}

std::vector<AggregateRow> aggregate_returns(const std::vector<std::vector<EpisodeRecord>> &runs)
{
    if (runs.empty()) {
        return {};
    }
    std::size_t len = runs.front().size();
    for (const auto &r : runs) {
        len = std::min(len, r.size());
    }
    const auto n = static_cast<double>(runs.size());
    std::vector<AggregateRow> out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        double sum = 0.0;
        for (const auto &r : runs) {
            sum += r[i].episode_return;
        }
        const double mean = sum / n;
        double sq = 0.0;
        for (const auto &r : runs) {
            sq += (r[i].episode_return - mean) * (r[i].episode_return - mean);
        }
        const double se = runs.size() > 1 ? std::sqrt(sq / (n - 1.0)) / std::sqrt(n) : 0.0;
        out.push_back({runs.front()[i].episode, mean, se});
    }
    return out;
}

void write_aggregate_csv(const fs::path &path, const std::vector<AggregateRow> &rows)
{
    std::ofstream out = open_out(path);
    out << "episode,mean_return,stderr\n";
    for (const auto &r : rows) {
        out << r.episode << ',' << num(r.mean_return) << ',' << num(r.stderr_return) << '\n';
    }
}

std::vector<AggregateRow> read_aggregate_csv(const fs::path &path)
{
    std::vector<AggregateRow> out;
    for (const auto &c : read_csv(path, "episode,mean_return,stderr")) {
        if (c.size() != 3) {
            throw std::runtime_error(path.string() + ": malformed row");
        }
        out.push_back({std::stoi(c[0]), std::stod(c[1]), std::stod(c[2])});
    }
    return out;
}

std::vector<PlotRow> collect_plotdata(const fs::path &dir)
{
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("no such directory: " + dir.string());
    }
    std::vector<PlotRow> rows;
    for (const auto &entry : fs::directory_iterator(dir)) {
        const fs::path agg = entry.path() / "aggregate.csv";
        if (!entry.is_directory() || !fs::exists(agg)) {
            continue;
        }
        const std::string method = entry.path().filename().string();
        for (const auto &r : read_aggregate_csv(agg)) {
            rows.push_back({method, r});
        }
    }
    if (rows.empty()) {
        throw std::runtime_error("no aggregate.csv found under " + dir.string());
    }
    std::sort(rows.begin(), rows.end(), [](const PlotRow &a, const PlotRow &b) {
        return a.method != b.method ? a.method < b.method : a.row.episode < b.row.episode;
    });
    return rows;
}

void write_plotdata_csv(const fs::path &path, const std::vector<PlotRow> &rows)
{
    std::ofstream out = open_out(path);
    out << "method,episode,mean_return,stderr\n";
    for (const auto &r : rows) {
        out << r.method << ',' << r.row.episode << ',' << num(r.row.mean_return) << ',' << num(r.row.stderr_return) << '\n';
    }
}

nlohmann::json snapshot_report(const Snapshot &snap, int draws, std::uint64_t seed)
{
    Rng rng(seed);
    PolicySpec thompson{PolicyKind::thompson};
    PolicySpec ucb{PolicyKind::ucb};
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t s = 0; s < snap.distributions.size(); ++s) {
        const auto &dists = snap.distributions[s];
        nlohmann::json actions = nlohmann::json::array();
        for (std::size_t a = 0; a < dists.size(); ++a) {
            actions.push_back({{"action", a},
                               {"mean", mean(dists[a])},
                               {"stddev", stddev(dists[a])},
                               {"distribution", to_json(dists[a])}});
        }
        states.push_back({{"state", s},
                          {"actions", std::move(actions)},
                          {"thompson", selection_frequencies(thompson, dists, draws, rng)},
                          {"ucb", selection_frequencies(ucb, dists, draws, rng)}});
    }
    return {{"episode", snap.episode}, {"draws", draws}, {"states", std::move(states)}};
}

nlohmann::json run_experiment(const ExperimentConfig &config, const fs::path &root, int jobs, std::ostream *log)
{
    const fs::path out = root / config.output_dir;
    fs::create_directories(out);
    {
        std::ofstream cfg = open_out(out / "config.toml");
        cfg << serialize_experiment(config);
    }

    struct Job {
        std::size_t method;
        std::uint64_t seed;
        std::vector<EpisodeRecord> records;
        double final_mean = 0.0;
        std::string error;
    };
    std::vector<Job> work;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        for (int i = 0; i < config.repetitions; ++i) {
            work.push_back({m, config.seed_base + static_cast<std::uint64_t>(i), {}, 0.0, {}});
        }
    }

    std::mutex log_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
            Job &job = work[k];
            const MethodConfig &method = config.methods[job.method];
            try {
                const auto t0 = std::chrono::steady_clock::now();
                auto env = make_env(config.env, job.seed);
                const LearningCurve curve = run_training(*env, run_agent_config(config, method, job.seed));
                const fs::path run_dir = out / method.name / ("run_" + std::to_string(job.seed));
                write_curve_csv(run_dir / "curve.csv", curve);
                if (!curve.snapshots.empty()) {
                    write_snapshots(run_dir / "snapshots.jsonl", curve);
                }
                job.records = curve.episodes;
                job.final_mean = final_window_mean(curve, config.final_window);
                if (log) {
                    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    char line[256];
                    std::snprintf(line, sizeof line, "%s seed %llu: final %.3f (%.1f s)\n", method.name.c_str(),
                                  static_cast<unsigned long long>(job.seed), job.final_mean, secs);
                    std::lock_guard lock(log_mutex);
                    *log << line << std::flush;
                }
            } catch (const std::exception &e) {
                job.error = e.what();
            }
        }
    };
    const int n_threads = std::clamp(jobs, 1, static_cast<int>(work.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    for (const auto &job : work) {
        if (!job.error.empty()) {
            throw RunError("method " + config.methods[job.method].name + " seed " + std::to_string(job.seed) + ": " +
                           job.error);
        }
    }

    nlohmann::json methods = nlohmann::json::object();
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        std::vector<std::vector<EpisodeRecord>> runs;
        nlohmann::json per_run = nlohmann::json::array();
        std::vector<double> finals;
        for (const auto &job : work) {
            if (job.method != m) {
                continue;
            }
            runs.push_back(job.records);
            finals.push_back(job.final_mean);
            per_run.push_back({{"seed", job.seed}, {"final_window_mean", job.final_mean}});
        }
        write_aggregate_csv(out / config.methods[m].name / "aggregate.csv", aggregate_returns(runs));
        const double n = static_cast<double>(finals.size());
        double sum = 0.0;
        for (double f : finals) {
            sum += f;
        }
        const double avg = sum / n;
        double sq = 0.0;
        for (double f : finals) {
            sq += (f - avg) * (f - avg);
        }
        methods[config.methods[m].name] = {
            {"final_window_mean", avg},
            {"final_window_stderr", finals.size() > 1 ? std::sqrt(sq / (n - 1.0)) / std::sqrt(n) : 0.0},
            {"runs", std::move(per_run)},
        };
    }
    nlohmann::json summary{{"env", config.env.name},
                           {"repetitions", config.repetitions},
                           {"final_window", config.final_window},
                           {"methods", std::move(methods)}};
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
    return summary;
}

}  // namespace distexp
