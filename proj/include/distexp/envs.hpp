#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "distexp/bellman.hpp"

namespace distexp {

struct EnvSpec {
    std::string name;
    int n_actions = 2;
    int state_dim = 1;
    int max_episode_steps = 200;
};

struct StepResult {
    StateEncoding next_state;
    double reward = 0.0;
    bool terminal = false;
    /// Horizon reached without environment termination; the transition is bootstrapped.
    bool truncated = false;
};

/// Deterministic model outcome of taking an action in an internal state.
struct Outcome {
    int next_state = 0;
    double reward = 0.0;
    bool terminal = false;
};

/// Deterministic episodic MDP over an enumerable set of internal states.
/// The episode API (reset/step) is built on the pure transition model.
class Environment {
public:
    explicit Environment(int max_episode_steps);
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual int n_actions() const = 0;
    virtual int state_dim() const = 0;
    /// Internal states are 0 .. n_states() - 1.
    virtual int n_states() const = 0;
    virtual int start_state() const = 0;
    virtual Outcome transition(int state, int action) const = 0;
    virtual StateEncoding encode_state(int state) const = 0;

    EnvSpec spec() const;
    int max_episode_steps() const { return max_episode_steps_; }

    StateEncoding reset();
    StepResult step(int action);
    int current_state() const { return state_; }
    bool done() const { return done_; }

private:
    int max_episode_steps_;
    int state_ = 0;
    int steps_ = 0;
    bool done_ = true;
};

/// Randomized chain: one correct action per position drawn at construction.
/// The wrong action terminates with reward 0; the correct action at the last
/// position terminates with reward 1.
class ChainEnv final : public Environment {
public:
    ChainEnv(int length, std::uint64_t seed, bool ordered = false, int max_episode_steps = 200);

    std::string name() const override { return "chain"; }
    int n_actions() const override { return 2; }
    int state_dim() const override { return 1; }
    int n_states() const override { return length_; }
    int start_state() const override { return 0; }
    Outcome transition(int state, int action) const override;
    StateEncoding encode_state(int state) const override;

    int length() const { return length_; }
    const std::vector<int> &correct_actions() const { return correct_; }

private:
    int length_;
    std::vector<int> correct_;
};

/// Two-step binary tree with repo-defined leaf rewards (1.0, 0.2, 0.4, 0.0).
class ToyTreeEnv final : public Environment {
public:
    explicit ToyTreeEnv(int max_episode_steps = 200);

    std::string name() const override { return "toy_tree"; }
    int n_actions() const override { return 2; }
    int state_dim() const override { return 1; }
    int n_states() const override { return 3; }
    int start_state() const override { return 0; }
    Outcome transition(int state, int action) const override;
    StateEncoding encode_state(int state) const override;

    static constexpr double kLeafRewards[2][2] = {{1.0, 0.2}, {0.4, 0.0}};
};

/// Deterministic 4x4 FrozenLake. Actions: 0 left, 1 down, 2 right, 3 up.
class FrozenLakeEnv final : public Environment {
public:
    explicit FrozenLakeEnv(int max_episode_steps = 200);

    std::string name() const override { return "frozenlake"; }
    int n_actions() const override { return 4; }
    int state_dim() const override { return 2; }
    int n_states() const override { return 16; }
    int start_state() const override { return 0; }
    Outcome transition(int state, int action) const override;
    StateEncoding encode_state(int state) const override;

    static constexpr const char *kMap[4] = {"SFFF", "FHFH", "FFFH", "HFFG"};
    static char cell(int state) { return kMap[state / 4][state % 4]; }
};

std::unique_ptr<Environment> chain_new(int length, std::uint64_t seed, bool ordered = false, int max_episode_steps = 200);
std::unique_ptr<Environment> toy_tree_new(int max_episode_steps = 200);
std::unique_ptr<Environment> frozenlake_det_new(int max_episode_steps = 200);

}  // namespace distexp
