#include "distexp/agent.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>

namespace distexp {

void AgentConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in [0, 1]");
    }
    if (!(lr > 0.0)) {
        throw std::invalid_argument("lr must be positive");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (replay_capacity < 1) {
        throw std::invalid_argument("replay_capacity must be >= 1");
    }
    if (episodes < 0) {
        throw std::invalid_argument("episodes must be >= 0");
    }
    if (episodes_per_iteration < 1) {
        throw std::invalid_argument("episodes_per_iteration must be >= 1");
    }
    if (snapshot_every < 0) {
        throw std::invalid_argument("snapshot_every must be >= 0");
    }
    policy.validate();
    head.validate();
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity)
{
    if (capacity == 0) {
        throw std::invalid_argument("replay capacity must be positive");
    }
}

void ReplayBuffer::push(Transition t)
{
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
        return;
    }
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition &ReplayBuffer::at(std::size_t i) const
{
    return data_.at((head_ + i) % data_.size());
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, Rng &rng) const
{
    std::vector<std::size_t> idx(data_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k < idx.size()) {
        // Partial Fisher-Yates: the first k slots become a uniform k-subset.
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(k);
    }
    std::vector<Transition> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        out.push_back(data_[i]);
    }
    return out;
}

Episode collect_episode(Environment &env, const Approximator &approx, const PolicySpec &policy, Rng &rng)
{
    Episode ep;
    StateEncoding s = env.reset();
    int a = select_action(policy, approx.predict_all(s), rng);
    while (true) {
        StepResult res = env.step(a);
        Transition t;
        t.s = std::move(s);
        t.a = a;
        t.r = res.reward;
        t.s_next = res.next_state;
        t.terminal = res.terminal;
        ep.episode_return += res.reward;
        if (!res.terminal) {
            t.a_next = select_action(policy, approx.predict_all(res.next_state), rng);
        }
        const int next_a = t.a_next;
        ep.transitions.push_back(std::move(t));
        if (res.terminal || res.truncated) {
            ep.truncated = res.truncated;
            break;
        }
        s = std::move(res.next_state);
        a = next_a;
    }
    return ep;
}

namespace {

struct Pending {
    const Transition *t;
    bool replayed;
};

double train_chunk(Approximator &approx, std::span<const Pending> chunk, const AgentConfig &config, Rng &rng)
{
    const int n_actions = approx.config().n_actions;
    std::vector<StateEncoding> next_states;
    for (const Pending &p : chunk) {
        if (!p.t->terminal) {
            next_states.push_back(p.t->s_next);
        }
    }
    // next_dists[a][k]: prediction for action a at the k-th bootstrapped s'.
    std::vector<std::vector<ReturnDistribution>> next_dists;
    if (!next_states.empty()) {
        for (int a = 0; a < n_actions; ++a) {
            next_dists.push_back(approx.predict_batch(next_states, a));
        }
    }

    // Terminal targets ignore the bootstrap; any value of the head's family will do.
    const ReturnDistribution unused_bootstrap =
        approx.head_to_dist(std::vector<double>(static_cast<std::size_t>(approx.config().head.output_size()), 0.0));

    std::vector<TrainingExample> batch;
    batch.reserve(chunk.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        const Transition &t = *chunk[i].t;
        if (t.terminal) {
            batch.push_back({t.s, t.a, make_target(t, config.gamma, unused_bootstrap)});
            continue;
        }
        std::vector<ReturnDistribution> at_next;
        at_next.reserve(static_cast<std::size_t>(n_actions));
        for (int a = 0; a < n_actions; ++a) {
            at_next.push_back(next_dists[static_cast<std::size_t>(a)][k]);
        }
        int a_next = t.a_next;
        if (chunk[i].replayed) {
            a_next = config.replay_bootstrap == ReplayBootstrap::greedy ? greedy_select(at_next, rng)
                                                                        : select_action(config.policy, at_next, rng);
        }
        batch.push_back({t.s, t.a, make_target(t, config.gamma, at_next[static_cast<std::size_t>(a_next)])});
        ++k;
    }

    const TrainStats stats = approx.train_step(batch, config.lr);
    if (!stats.applied) {
        throw TrainingError(stats.diagnostics);
    }
    return stats.mean_loss;
}

}  // namespace

double process_batch(Approximator &approx,
                     std::span<const Transition> fresh,
                     std::span<const Transition> replayed,
                     const AgentConfig &config,
                     Rng &rng)
{
    std::vector<Pending> work;
    work.reserve(fresh.size() + replayed.size());
    for (const auto &t : fresh) {
        work.push_back({&t, false});
    }
    for (const auto &t : replayed) {
        work.push_back({&t, true});
    }
    if (work.empty()) {
        return 0.0;
    }
    std::shuffle(work.begin(), work.end(), rng);

    double weighted = 0.0;
    const auto bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < work.size(); start += bs) {
        const std::size_t len = std::min(bs, work.size() - start);
        weighted += train_chunk(approx, std::span(work).subspan(start, len), config, rng) * static_cast<double>(len);
    }
    return weighted / static_cast<double>(work.size());
}

ApproximatorConfig approximator_config(const AgentConfig &config, const Environment &env)
{
    ApproximatorConfig ac;
    ac.state_dim = env.state_dim();
    ac.n_actions = env.n_actions();
    ac.head = config.head;
    ac.hidden_units = config.hidden_units;
    ac.hidden_layers = config.hidden_layers;
    ac.grad_clip = config.grad_clip;
    ac.loss = config.loss;
    ac.nll_samples = config.nll_samples;
    return ac;
}

Snapshot take_snapshot(const Approximator &approx, const Environment &env, int episode)
{
    Snapshot snap;
    snap.episode = episode;
    for (int s = 0; s < env.n_states(); ++s) {
        snap.distributions.push_back(approx.predict_all(env.encode_state(s)));
    }
    return snap;
}

LearningCurve run_training(Environment &env, const AgentConfig &config, const EpisodeObserver &observer)
{
    Approximator trained(approximator_config(config, env), config.seed);
    return run_training(env, config, trained, observer);
}

LearningCurve run_training(Environment &env,
                           const AgentConfig &config,
                           Approximator &trained,
                           const EpisodeObserver &observer)
{
    config.validate();
    // Independent streams for network init, acting, and replay/minibatch shuffling.
    std::seed_seq seq{config.seed, std::uint64_t{0x5eed}};
    std::array<std::uint64_t, 3> seeds{};
    seq.generate(seeds.begin(), seeds.end());
    trained = Approximator(approximator_config(config, env), seeds[0]);
    Rng act_rng(seeds[1]);
    Rng train_rng(seeds[2]);

    ReplayBuffer replay(static_cast<std::size_t>(config.replay_capacity));
    LearningCurve curve;
    int episode = 0;
    while (episode < config.episodes) {
        const auto t0 = std::chrono::steady_clock::now();
        const int n_rollouts = std::min(config.episodes_per_iteration, config.episodes - episode);
        std::vector<Transition> fresh;
        std::vector<double> returns;
        for (int i = 0; i < n_rollouts; ++i) {
            Episode ep = collect_episode(env, trained, config.policy, act_rng);
            returns.push_back(ep.episode_return);
            std::move(ep.transitions.begin(), ep.transitions.end(), std::back_inserter(fresh));
        }
        double loss = 0.0;
        try {
            const std::vector<Transition> replayed = replay.sample(fresh.size(), train_rng);
            loss = process_batch(trained, fresh, replayed, config, train_rng);
        } catch (const TrainingError &e) {
            throw TrainingError("episode " + std::to_string(episode) + ": " + e.what());
        }
        for (auto &t : fresh) {
            replay.push(std::move(t));
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / n_rollouts;
        for (double ret : returns) {
            EpisodeRecord rec{episode, ret, loss, ms};
            curve.episodes.push_back(rec);
            ++episode;
            if (config.snapshot_every > 0 && episode % config.snapshot_every == 0) {
                curve.snapshots.push_back(take_snapshot(trained, env, episode));
            }
            if (observer) {
                observer(rec, trained);
            }
        }
    }
    return curve;
}

double final_window_mean(const LearningCurve &curve, int window)
{
    const auto n = curve.episodes.size();
    if (n == 0) {
        return 0.0;
    }
    const std::size_t w = std::min(n, static_cast<std::size_t>(window));
    double sum = 0.0;
    for (std::size_t i = n - w; i < n; ++i) {
        sum += curve.episodes[i].episode_return;
    }
    return sum / static_cast<double>(w);
}

}  // namespace distexp
