#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "distexp/approximator.hpp"
#include "distexp/bellman.hpp"
#include "distexp/envs.hpp"
#include "distexp/explore.hpp"

namespace distexp {

/// How the bootstrap action a' is chosen for replayed transitions.
enum class ReplayBootstrap { policy, greedy };

struct AgentConfig {
    double gamma = 0.995;
    double lr = 0.0005;
    int batch_size = 32;
    int replay_capacity = 50000;
    PolicySpec policy;
    HeadSpec head;
    double grad_clip = 5.0;
    int episodes = 0;
    std::uint64_t seed = 0;

    int hidden_units = 256;
    int hidden_layers = 3;
    int episodes_per_iteration = 1;
    ReplayBootstrap replay_bootstrap = ReplayBootstrap::policy;
    LossKind loss = LossKind::closed_form;
    int nll_samples = 8;
    /// Record per-state distributions every k episodes; 0 disables.
    int snapshot_every = 0;

    void validate() const;
    bool operator==(const AgentConfig &) const = default;
};

/// Fixed-capacity FIFO store of transitions.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// i-th oldest stored transition.
    const Transition &at(std::size_t i) const;
    /// k distinct transitions drawn uniformly; the whole buffer if k >= size().
    std::vector<Transition> sample(std::size_t k, Rng &rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // index of the oldest element once full
    std::vector<Transition> data_;
};

struct Episode {
    std::vector<Transition> transitions;
    double episode_return = 0.0;
    bool truncated = false;
};

/// Rolls out one episode. Each non-terminal transition records the action that
/// the policy actually selected at s' as a'.
Episode collect_episode(Environment &env, const Approximator &approx, const PolicySpec &policy, Rng &rng);

/// Trains on fresh (stored a') and replayed (a' recomputed) transitions in
/// shuffled minibatches. Returns the mean pre-update loss; 0 if nothing was processed.
double process_batch(Approximator &approx,
                     std::span<const Transition> fresh,
                     std::span<const Transition> replayed,
                     const AgentConfig &config,
                     Rng &rng);

struct EpisodeRecord {
    int episode = 0;
    double episode_return = 0.0;
    double mean_loss = 0.0;
    double wall_ms = 0.0;
};

struct Snapshot {
    int episode = 0;
    /// distributions[state][action]
    std::vector<std::vector<ReturnDistribution>> distributions;
};

struct LearningCurve {
    std::vector<EpisodeRecord> episodes;
    std::vector<Snapshot> snapshots;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ApproximatorConfig approximator_config(const AgentConfig &config, const Environment &env);

/// Snapshot of every internal state of a small environment.
Snapshot take_snapshot(const Approximator &approx, const Environment &env, int episode);

/// Optional observer called after every episode with the current networks.
using EpisodeObserver = std::function<void(const EpisodeRecord &, const Approximator &)>;

LearningCurve run_training(Environment &env, const AgentConfig &config, const EpisodeObserver &observer = {});

/// Same as run_training but also hands back the trained approximator.
LearningCurve run_training(Environment &env,
                           const AgentConfig &config,
                           Approximator &trained,
                           const EpisodeObserver &observer = {});

/// Mean of the last `window` episode returns (fewer if the curve is shorter).
double final_window_mean(const LearningCurve &curve, int window = 100);

}  // namespace distexp
