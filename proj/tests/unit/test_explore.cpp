#include <doctest.h>

#include <cmath>
#include <functional>

#include "distexp/explore.hpp"

using namespace distexp;

namespace {

double frequency(int trials, const std::function<bool()> &hit)
{
    int n = 0;
    for (int i = 0; i < trials; ++i) {
        n += hit();
    }
    return static_cast<double>(n) / trials;
}

}  // namespace

TEST_CASE("thompson")
{
    Rng rng(71);
    const std::vector<ReturnDistribution> separated{GaussianDist(10, 0), GaussianDist(0, 0)};
    for (int i = 0; i < 1000; ++i) {
        CHECK(thompson_select(separated, rng) == 0);
    }
    const std::vector<ReturnDistribution> same{GaussianDist(0, 1), GaussianDist(0, 1)};
    const double f0 = frequency(1'000'000, [&] { return thompson_select(same, rng) == 0; });
    CHECK(f0 >= 0.49);
    CHECK(f0 <= 0.51);
    const std::vector<ReturnDistribution> shifted{GaussianDist(0, 1), GaussianDist(1, 1)};
    const double f1 = frequency(1'000'000, [&] { return thompson_select(shifted, rng) == 1; });
    CHECK(std::abs(f1 - 0.5 * std::erfc(-0.5)) < 0.005);

    // Point masses at equal values tie and are broken uniformly.
    const std::vector<ReturnDistribution> tied{GaussianDist(1, 0), GaussianDist(1, 0)};
    const double ft = frequency(100'000, [&] { return thompson_select(tied, rng) == 0; });
    CHECK(std::abs(ft - 0.5) < 0.01);
}

TEST_CASE("thompson prefers a stochastically dominant action")
{
    Rng rng(73);
    const std::vector<ReturnDistribution> d{CategoricalDist(-0.2, 1.2, {0.5, 0.3, 0.2}),
                                            CategoricalDist(-0.2, 1.2, {0.2, 0.3, 0.5})};
    CHECK(frequency(100'000, [&] { return thompson_select(d, rng) == 1; }) >= 0.5);
}

TEST_CASE("ucb")
{
    Rng rng(79);
    const std::vector<double> c{2.0, 2.0};
    const std::vector<ReturnDistribution> greedy_case{GaussianDist(1, 0), GaussianDist(0, 0)};
    CHECK(ucb_select(greedy_case, c, rng) == 0);
    const std::vector<ReturnDistribution> wide{GaussianDist(0, 0.1), GaussianDist(0, 1.0)};
    CHECK(ucb_select(wide, c, rng) == 1);

    std::uniform_real_distribution<double> u(-1, 1), s(0, 1), k(-5, 5);
    for (int t = 0; t < 1000; ++t) {
        std::vector<ReturnDistribution> d, shifted;
        const double shift = k(rng);
        for (int a = 0; a < 3; ++a) {
            const double mu = u(rng), sd = s(rng);
            d.push_back(GaussianDist(mu, sd));
            shifted.push_back(GaussianDist(mu + shift, sd));
        }
        const auto cs = draw_ucb_constants(3, 1.7, 2.3, rng);
        CHECK(ucb_select(d, cs, rng) == ucb_select(shifted, cs, rng));
    }
}

TEST_CASE("ucb constants")
{
    Rng rng(83);
    for (double c : draw_ucb_constants(4, 2.0, 2.0, rng)) {
        CHECK(c == 2.0);
    }
    double sum = 0.0;
    for (int i = 0; i < 500'000; ++i) {
        for (double c : draw_ucb_constants(2, 1.7, 2.3, rng)) {
            CHECK_MESSAGE((c >= 1.7 && c <= 2.3), c);
            sum += c;
        }
    }
    const double avg = sum / 1e6;
    CHECK(avg >= 1.995);
    CHECK(avg <= 2.005);
}

TEST_CASE("epsilon greedy")
{
    Rng rng(89);
    const std::vector<ReturnDistribution> d{GaussianDist(0, 1), GaussianDist(1, 1)};
    for (int i = 0; i < 1000; ++i) {
        CHECK(epsilon_greedy_select(d, 0.0, rng) == 1);
    }
    const double f = frequency(1'000'000, [&] { return epsilon_greedy_select(d, 1.0, rng) == 0; });
    CHECK(std::abs(f - 0.5) < 0.01);
    const std::vector<ReturnDistribution> rev{GaussianDist(1, 1), GaussianDist(0, 1)};
    const double off = frequency(1'000'000, [&] { return epsilon_greedy_select(rev, 0.05, rng) == 1; });
    CHECK(std::abs(off - 0.025) < 0.002);
}

TEST_CASE("every selector handles 1, 2 and 4 actions")
{
    Rng rng(97);
    for (int n : {1, 2, 4}) {
        std::vector<ReturnDistribution> d;
        for (int a = 0; a < n; ++a) {
            d.push_back(GaussianDist(0.1 * a, 0.5));
        }
        for (PolicyKind k : {PolicyKind::thompson, PolicyKind::ucb, PolicyKind::epsilon_greedy, PolicyKind::greedy}) {
            PolicySpec spec;
            spec.kind = k;
            for (int i = 0; i < 100; ++i) {
                const int a = select_action(spec, d, rng);
                CHECK(a >= 0);
                CHECK(a < n);
            }
            const auto freq = selection_frequencies(spec, d, 1000, rng);
            double total = 0.0;
            for (double f : freq) {
                total += f;
            }
            CHECK(total == doctest::Approx(1.0));
        }
    }
    CHECK_THROWS(select_action(PolicySpec{}, std::vector<ReturnDistribution>{}, rng));
}

TEST_CASE("argmax ties are uniform")
{
    Rng rng(101);
    const std::vector<double> scores{1.0, 3.0, 3.0, 3.0};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 300'000; ++i) {
        ++counts[static_cast<std::size_t>(argmax_random_tie(scores, rng))];
    }
    CHECK(counts[0] == 0);
    for (int a = 1; a < 4; ++a) {
        CHECK(std::abs(counts[static_cast<std::size_t>(a)] / 300'000.0 - 1.0 / 3.0) < 0.005);
    }
}

TEST_CASE("policy spec")
{
    PolicySpec p;
    CHECK(p.kind == PolicyKind::ucb);
    CHECK(p.ucb_c_low == 1.7);
    CHECK(p.ucb_c_high == 2.3);
    CHECK(p.epsilon == 0.05);
    p.ucb_c_low = 3.0;
    CHECK_THROWS(p.validate());
    p = PolicySpec{};
    p.epsilon = 1.5;
    CHECK_THROWS(p.validate());
    CHECK(parse_policy("thompson") == PolicyKind::thompson);
    CHECK(policy_name(PolicyKind::epsilon_greedy) == "epsilon_greedy");
    CHECK_THROWS(parse_policy("softmax"));
}
