#include <doctest.h>

#include <deque>
#include <set>

#include "distexp/envs.hpp"

using namespace distexp;

namespace {

double play(Environment &env, const std::vector<int> &actions, int *steps = nullptr)
{
    env.reset();
    double ret = 0.0;
    int n = 0;
    for (int a : actions) {
        const auto res = env.step(a);
        ret += res.reward;
        ++n;
        if (res.terminal || res.truncated) {
            break;
        }
    }
    if (steps) {
        *steps = n;
    }
    return ret;
}

}  // namespace

TEST_CASE("chain dynamics")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ChainEnv env(10, seed);
        const auto &c = env.correct_actions();
        int steps = 0;
        CHECK(play(env, c, &steps) == 1.0);
        CHECK(steps == 10);
        CHECK(env.done());
        CHECK(play(env, {1 - c[0]}, &steps) == 0.0);
        CHECK(steps == 1);
        CHECK(env.done());
        CHECK_THROWS_AS(env.step(0), std::logic_error);
    }
}

TEST_CASE("chain of length two")
{
    // Find a seed whose correct vector is (0, 1) and replay the example.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ChainEnv env(2, seed);
        if (env.correct_actions() != std::vector<int>{0, 1}) {
            continue;
        }
        env.reset();
        auto r0 = env.step(0);
        CHECK(r0.reward == 0.0);
        CHECK_FALSE(r0.terminal);
        auto r1 = env.step(1);
        CHECK(r1.reward == 1.0);
        CHECK(r1.terminal);
        return;
    }
    FAIL("no seed produced (0, 1)");
}

TEST_CASE("chain is deterministic per seed and random across seeds")
{
    CHECK(ChainEnv(25, 7).correct_actions() == ChainEnv(25, 7).correct_actions());
    std::set<std::vector<int>> distinct;
    int ones = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto c = ChainEnv(25, seed).correct_actions();
        distinct.insert(c);
        for (int x : c) {
            ones += x;
        }
    }
    CHECK(distinct.size() == 200);
    CHECK(std::abs(ones / 5000.0 - 0.5) < 0.03);
    const auto ordered = ChainEnv(5, 3, true).correct_actions();
    CHECK(ordered == std::vector<int>(5, 1));
    CHECK_THROWS(ChainEnv(1, 0));
}

TEST_CASE("random play succeeds with probability 2^-N")
{
    Rng rng(5);
    std::bernoulli_distribution coin(0.5);
    ChainEnv env(3, 11);
    int wins = 0;
    const int trials = 200'000;
    for (int i = 0; i < trials; ++i) {
        env.reset();
        while (!env.done()) {
            wins += env.step(coin(rng) ? 1 : 0).reward > 0.0;
        }
    }
    CHECK(std::abs(wins / static_cast<double>(trials) - 0.125) < 0.005);
}

TEST_CASE("encodings")
{
    ChainEnv chain(10, 0);
    CHECK(chain.encode_state(5) == StateEncoding{0.5});
    FrozenLakeEnv lake;
    CHECK(lake.encode_state(0) == StateEncoding{0.0, 0.0});
    CHECK(lake.encode_state(15) == StateEncoding{1.0, 1.0});
    ToyTreeEnv tree;
    for (const Environment *env : std::initializer_list<const Environment *>{&chain, &lake, &tree}) {
        std::set<StateEncoding> seen;
        for (int s = 0; s < env->n_states(); ++s) {
            const auto e = env->encode_state(s);
            CHECK(static_cast<int>(e.size()) == env->state_dim());
            for (double x : e) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
            seen.insert(e);
        }
        CHECK(static_cast<int>(seen.size()) == env->n_states());
    }
}

TEST_CASE("toy tree")
{
    ToyTreeEnv env;
    CHECK(play(env, {0, 0}) == 1.0);
    CHECK(play(env, {0, 1}) == doctest::Approx(0.2));
    CHECK(play(env, {1, 0}) == doctest::Approx(0.4));
    CHECK(play(env, {1, 1}) == 0.0);
    int steps = 0;
    play(env, {1, 1}, &steps);
    CHECK(steps == 2);
}

TEST_CASE("frozenlake")
{
    FrozenLakeEnv env;
    CHECK(env.spec().n_actions == 4);
    env.reset();
    auto r = env.step(0);
    CHECK(env.current_state() == 0);
    CHECK_FALSE(r.terminal);
    CHECK(r.reward == 0.0);

    // Breadth-first search over the model: the shortest path to the goal has 6 moves.
    std::vector<int> dist(16, -1);
    std::deque<int> queue{0};
    dist[0] = 0;
    int goal_dist = -1;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        for (int a = 0; a < 4; ++a) {
            const auto o = env.transition(s, a);
            if (o.terminal) {
                if (o.reward > 0 && goal_dist < 0) {
                    goal_dist = dist[s] + 1;
                }
                continue;
            }
            if (dist[o.next_state] < 0) {
                dist[o.next_state] = dist[s] + 1;
                queue.push_back(o.next_state);
            }
        }
    }
    CHECK(goal_dist == 6);
    // down, down, right, down, right, right
    CHECK(play(env, {1, 1, 2, 1, 2, 2}) == 1.0);
    for (int h : {5, 7, 11, 12}) {
        CHECK(FrozenLakeEnv::cell(h) == 'H');
    }
    CHECK(play(env, {2, 1}) == 0.0);  // (0,1) -> (1,1) is a hole
}

TEST_CASE("truncation")
{
    FrozenLakeEnv env(3);
    env.reset();
    CHECK_FALSE(env.step(0).truncated);
    CHECK_FALSE(env.step(0).truncated);
    const auto last = env.step(0);
    CHECK(last.truncated);
    CHECK_FALSE(last.terminal);
    CHECK(env.done());
    CHECK_THROWS(FrozenLakeEnv(0));
}
