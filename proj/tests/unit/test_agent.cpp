#include <doctest.h>

#include <algorithm>

#include "distexp/agent.hpp"
#include "oracles.hpp"

using namespace distexp;

namespace {

AgentConfig small_agent(Family family, PolicyKind policy, int episodes, std::uint64_t seed)
{
    AgentConfig c;
    c.head.family = family;
    c.policy.kind = policy;
    c.episodes = episodes;
    c.seed = seed;
    c.hidden_units = 64;
    return c;
}

Transition transition_with_reward(double r)
{
    Transition t;
    t.s = {0.0};
    t.s_next = {0.1};
    t.r = r;
    return t;
}

}  // namespace

TEST_CASE("agent defaults")
{
    const AgentConfig c;
    CHECK(c.gamma == 0.995);
    CHECK(c.lr == 0.0005);
    CHECK(c.batch_size == 32);
    CHECK(c.replay_capacity == 50000);
    CHECK(c.grad_clip == 5.0);
    AgentConfig bad;
    bad.gamma = 1.5;
    CHECK_THROWS(bad.validate());
    bad = AgentConfig{};
    bad.batch_size = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("replay buffer is a FIFO ring")
{
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) {
        buf.push(transition_with_reward(i));
        CHECK(buf.size() <= buf.capacity());
    }
    CHECK(buf.size() == 3);
    CHECK(buf.at(0).r == 2.0);
    CHECK(buf.at(1).r == 3.0);
    CHECK(buf.at(2).r == 4.0);

    Rng rng(3);
    CHECK(buf.sample(10, rng).size() == 3);
    const auto two = buf.sample(2, rng);
    CHECK(two.size() == 2);
    CHECK(two[0].r != two[1].r);
    CHECK_THROWS(ReplayBuffer(0));
}

TEST_CASE("replay sampling is uniform")
{
    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) {
        buf.push(transition_with_reward(i));
    }
    Rng rng(5);
    std::vector<int> counts(10, 0);
    for (int k = 0; k < 20000; ++k) {
        for (const auto &t : buf.sample(3, rng)) {
            ++counts[static_cast<std::size_t>(t.r)];
        }
    }
    for (int c : counts) {
        CHECK(std::abs(c / 60000.0 - 0.1) < 0.01);
    }
}

TEST_CASE("collect_episode bookkeeping")
{
    ChainEnv env(6, 2);
    const Approximator ap(approximator_config(small_agent(Family::gaussian, PolicyKind::ucb, 0, 0), env), 1);
    PolicySpec random_policy{PolicyKind::epsilon_greedy};
    random_policy.epsilon = 1.0;
    Rng rng(7);
    bool saw_win = false, saw_first_fail = false;
    for (int i = 0; i < 2000; ++i) {
        const Episode ep = collect_episode(env, ap, random_policy, rng);
        double total = 0.0;
        for (std::size_t k = 0; k < ep.transitions.size(); ++k) {
            const auto &t = ep.transitions[k];
            total += t.r;
            if (k + 1 < ep.transitions.size()) {
                CHECK_FALSE(t.terminal);
                CHECK(t.a_next == ep.transitions[k + 1].a);
                CHECK(t.s_next == ep.transitions[k + 1].s);
            }
        }
        CHECK(ep.transitions.back().terminal);
        CHECK(total == ep.episode_return);
        if (ep.episode_return == 1.0) {
            saw_win = true;
            CHECK(ep.transitions.size() == 6);
        }
        if (ep.transitions.front().a != env.correct_actions()[0]) {
            saw_first_fail = true;
            CHECK(ep.transitions.size() == 1);
            CHECK(ep.episode_return == 0.0);
        }
    }
    CHECK(saw_win);
    CHECK(saw_first_fail);
}

TEST_CASE("terminal reward target in process_batch")
{
    ChainEnv env(4, 1);
    const AgentConfig cfg = small_agent(Family::gaussian, PolicyKind::ucb, 0, 0);
    Approximator ap(approximator_config(cfg, env), 9);
    Transition t = transition_with_reward(1.0);
    t.a = 1;
    t.terminal = true;
    const auto before = std::get<GaussianDist>(ap.predict(t.s, t.a));
    Rng rng(11);
    const std::vector<Transition> fresh{t};
    const double loss = process_batch(ap, fresh, {}, cfg, rng);
    CHECK(loss == doctest::Approx(gaussian_cross_entropy(GaussianDist(1.0, 0.0), before)).epsilon(1e-12));
    CHECK(ap.step() == 1);
}

TEST_CASE("process_batch splits into minibatches")
{
    ChainEnv env(4, 1);
    AgentConfig cfg = small_agent(Family::categorical, PolicyKind::thompson, 0, 0);
    cfg.batch_size = 4;
    Approximator ap(approximator_config(cfg, env), 13);
    std::vector<Transition> fresh(6, transition_with_reward(0.0)), replayed(5, transition_with_reward(0.0));
    Rng rng(17);
    process_batch(ap, fresh, replayed, cfg, rng);
    CHECK(ap.step() == 3);
    CHECK(process_batch(ap, {}, {}, cfg, rng) == 0.0);
}

TEST_CASE("zero-episode run")
{
    ChainEnv env(5, 1);
    Approximator ap(approximator_config(AgentConfig{}, env), 0);
    const auto curve = run_training(env, small_agent(Family::gaussian, PolicyKind::ucb, 0, 3), ap);
    CHECK(curve.episodes.empty());
    CHECK(curve.snapshots.empty());
    CHECK(ap.step() == 0);
}

TEST_CASE("runs are reproducible")
{
    AgentConfig cfg = small_agent(Family::mixture, PolicyKind::thompson, 40, 21);
    cfg.snapshot_every = 20;
    ToyTreeEnv a, b;
    const auto ca = run_training(a, cfg);
    const auto cb = run_training(b, cfg);
    REQUIRE(ca.episodes.size() == 40);
    REQUIRE(cb.episodes.size() == 40);
    for (std::size_t i = 0; i < ca.episodes.size(); ++i) {
        CHECK(ca.episodes[i].episode_return == cb.episodes[i].episode_return);
        CHECK(ca.episodes[i].mean_loss == cb.episodes[i].mean_loss);
    }
    REQUIRE(ca.snapshots.size() == 2);
    CHECK(ca.snapshots[1].episode == 40);
    CHECK(ca.snapshots[1].distributions.size() == 3);
    CHECK(to_json(ca.snapshots[1].distributions[0][1]) == to_json(cb.snapshots[1].distributions[0][1]));
}

TEST_CASE("chain of length two converges to the tabular value")
{
    ChainEnv env(2, 4);
    const auto vi = oracles::tabular_value_iteration(env, 0.995);
    const int good = env.correct_actions()[0];
    CHECK(vi.q[0][static_cast<std::size_t>(good)] == doctest::Approx(0.995));
    Approximator ap(approximator_config(AgentConfig{}, env), 0);
    run_training(env, small_agent(Family::gaussian, PolicyKind::ucb, 400, 4), ap);
    CHECK(std::abs(mean(ap.predict(env.encode_state(0), good)) - 0.995) < 0.05);
}

TEST_CASE("wrong actions narrow before correct ones on the chain")
{
    const int n = 6;
    int crossed = 0;
    for (Family f : {Family::gaussian, Family::categorical}) {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            ChainEnv env(n, seed);
            AgentConfig cfg = small_agent(f, PolicyKind::ucb, 300, seed);
            cfg.hidden_units = 256;
            cfg.head.n_bins = 7;
            cfg.snapshot_every = 10;
            const auto curve = run_training(env, cfg);
            for (const auto &snap : curve.snapshots) {
                double total = 0.0;
                const int from = std::max(0, snap.episode - 20);
                for (int i = from; i < snap.episode; ++i) {
                    total += curve.episodes[static_cast<std::size_t>(i)].episode_return;
                }
                if (total / (snap.episode - from) <= 0.5) {
                    continue;
                }
                double wrong = 0.0, right = 0.0;
                for (int s = 0; s < n / 2; ++s) {
                    const int good = env.correct_actions()[static_cast<std::size_t>(s)];
                    right += stddev(snap.distributions[static_cast<std::size_t>(s)][static_cast<std::size_t>(good)]);
                    wrong += stddev(snap.distributions[static_cast<std::size_t>(s)][static_cast<std::size_t>(1 - good)]);
                }
                CHECK_MESSAGE(wrong < right, family_name(f), " seed ", seed, " episode ", snap.episode);
                ++crossed;
                break;
            }
        }
    }
    CHECK(crossed >= 2);
}
