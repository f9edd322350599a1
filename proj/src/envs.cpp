#include "distexp/envs.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace distexp {

Environment::Environment(int max_episode_steps) : max_episode_steps_(max_episode_steps)
{
    if (max_episode_steps < 1) {
        throw std::invalid_argument("max_episode_steps must be >= 1");
    }
}

EnvSpec Environment::spec() const
{
    return {name(), n_actions(), state_dim(), max_episode_steps_};
}

StateEncoding Environment::reset()
{
    state_ = start_state();
    steps_ = 0;
    done_ = false;
    return encode_state(state_);
}

StepResult Environment::step(int action)
{
    if (done_) {
        throw std::logic_error("step called on a finished episode; call reset()");
    }
    if (action < 0 || action >= n_actions()) {
        throw std::out_of_range("action index out of range");
    }
    const Outcome o = transition(state_, action);
    state_ = o.next_state;
    ++steps_;
    StepResult r{encode_state(state_), o.reward, o.terminal, false};
    if (!o.terminal && steps_ >= max_episode_steps_) {
        r.truncated = true;
    }
    done_ = r.terminal || r.truncated;
    return r;
}

ChainEnv::ChainEnv(int length, std::uint64_t seed, bool ordered, int max_episode_steps)
    : Environment(max_episode_steps), length_(length), correct_(static_cast<std::size_t>(length), 1)
{
    if (length < 2) {
        throw std::invalid_argument("chain length must be >= 2");
    }
    if (!ordered) {
        Rng rng(seed);
        std::bernoulli_distribution coin(0.5);
        for (int &c : correct_) {
            c = coin(rng) ? 1 : 0;
        }
    }
}

Outcome ChainEnv::transition(int state, int action) const
{
    if (action != correct_[static_cast<std::size_t>(state)]) {
        return {state, 0.0, true};
    }
    if (state == length_ - 1) {
        return {state, 1.0, true};
    }
    return {state + 1, 0.0, false};
}

StateEncoding ChainEnv::encode_state(int state) const
{
    return {static_cast<double>(state) / length_};
}

ToyTreeEnv::ToyTreeEnv(int max_episode_steps) : Environment(max_episode_steps) {}

Outcome ToyTreeEnv::transition(int state, int action) const
{
    if (state == 0) {
        return {1 + action, 0.0, false};
    }
    return {state, kLeafRewards[state - 1][action], true};
}

StateEncoding ToyTreeEnv::encode_state(int state) const
{
    return {static_cast<double>(state) / 3.0};
}

FrozenLakeEnv::FrozenLakeEnv(int max_episode_steps) : Environment(max_episode_steps) {}

Outcome FrozenLakeEnv::transition(int state, int action) const
{
    int row = state / 4;
    int col = state % 4;
    switch (action) {
    case 0:
        col = std::max(col - 1, 0);
        break;
    case 1:
        row = std::min(row + 1, 3);
        break;
    case 2:
        col = std::min(col + 1, 3);
        break;
    case 3:
        row = std::max(row - 1, 0);
        break;
    default:
        throw std::out_of_range("frozenlake: action index out of range");
    }
    const int next = row * 4 + col;
    switch (cell(next)) {
    case 'H':
        return {next, 0.0, true};
    case 'G':
        return {next, 1.0, true};
    default:
        return {next, 0.0, false};
    }
}

StateEncoding FrozenLakeEnv::encode_state(int state) const
{
    return {static_cast<double>(state / 4) / 3.0, static_cast<double>(state % 4) / 3.0};
}

std::unique_ptr<Environment> chain_new(int length, std::uint64_t seed, bool ordered, int max_episode_steps)
{
    return std::make_unique<ChainEnv>(length, seed, ordered, max_episode_steps);
}

std::unique_ptr<Environment> toy_tree_new(int max_episode_steps)
{
    return std::make_unique<ToyTreeEnv>(max_episode_steps);
}

std::unique_ptr<Environment> frozenlake_det_new(int max_episode_steps)
{
    return std::make_unique<FrozenLakeEnv>(max_episode_steps);
}

}  // namespace distexp
