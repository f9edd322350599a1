#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

using namespace distexp;

TEST_CASE("quadrature reference values")
{
    const GaussianDist n01(0, 1);
    CHECK(oracles::quad_cross_entropy(n01, n01, oracles::cover(n01, n01)) == doctest::Approx(1.41894).epsilon(1e-5));
    const MixtureDist a({1.0}, {0.0}, {1.0}), b({1.0}, {1.0}, {1.0});
    CHECK(oracles::quad_l2(a, b, oracles::cover(a, b)) == doctest::Approx(0.12479).epsilon(1e-4));
}

TEST_CASE("quadrature is converged")
{
    const GaussianDist q(0.3, 0.4), p(-0.2, 1.3);
    const double base = oracles::quad_cross_entropy(q, p, oracles::cover(q, p));
    const double fine = oracles::quad_cross_entropy(q, p, oracles::cover(q, p, 400001));
    CHECK(std::abs(base - fine) < 1e-9);
    const MixtureDist mq({0.4, 0.6}, {0.0, 0.8}, {0.2, 0.5}), mp({1.0}, {0.5}, {0.7});
    CHECK(std::abs(oracles::quad_l2(mq, mp, oracles::cover(mq, mp)) -
                   oracles::quad_l2(mq, mp, oracles::cover(mq, mp, 400001))) < 1e-9);
}

TEST_CASE("value iteration on the chain")
{
    ChainEnv three(3, 1);
    const auto vi3 = oracles::tabular_value_iteration(three, 1.0);
    for (int s = 0; s < 3; ++s) {
        const int good = three.correct_actions()[static_cast<std::size_t>(s)];
        CHECK(vi3.q[s][good] == doctest::Approx(1.0));
        CHECK(vi3.q[s][1 - good] == 0.0);
    }

    ChainEnv ten(10, 2);
    const auto vi = oracles::tabular_value_iteration(ten, 0.995);
    CHECK(vi.q[0][ten.correct_actions()[0]] == doctest::Approx(std::pow(0.995, 9)).epsilon(1e-12));
    CHECK(vi.sweeps <= 11);
}

TEST_CASE("value iteration on the toy tree")
{
    ToyTreeEnv tree;
    const auto vi = oracles::tabular_value_iteration(tree, 0.995);
    CHECK(vi.q[0][0] == doctest::Approx(0.995));
    CHECK(vi.q[0][1] == doctest::Approx(0.4 * 0.995));
    CHECK(vi.sweeps <= 3);
}

TEST_CASE("finite differences")
{
    const auto g = oracles::central_difference(
        [](const std::vector<double> &x) { return x[0] * x[0] + std::sin(x[1]); }, {1.5, 0.2});
    CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(std::cos(0.2)).epsilon(1e-8));
    CHECK(oracles::relative_error(1e-9, 2e-9) <= 1e-3);
    CHECK(oracles::relative_error(1.0, 1.1) == doctest::Approx(0.1 / 1.1));
}
