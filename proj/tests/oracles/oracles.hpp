#pragma once

// Brute-force reference computations for the test suite. Densities, sampling and
// projection are re-derived here rather than calling into the library.

#include <functional>
#include <vector>

#include "distexp/dist.hpp"
#include "distexp/envs.hpp"

namespace oracles {

using distexp::CategoricalDist;
using distexp::GaussianDist;
using distexp::MixtureDist;

struct QuadratureSpec {
    double lower = -10.0;
    double upper = 10.0;
    int n_points = 200001;  // odd, composite Simpson
};

/// Interval holding essentially all mass of the given Gaussians (mean +- 12 sd).
QuadratureSpec cover(const GaussianDist &a, const GaussianDist &b, int n_points = 200001);
QuadratureSpec cover(const MixtureDist &a, const MixtureDist &b, int n_points = 200001);

double pdf(const GaussianDist &d, double z);
double pdf(const MixtureDist &d, double z);

/// -int q log p. Throws std::domain_error if q has less than 1 - 1e-10 mass in the interval.
double quad_cross_entropy(const GaussianDist &q, const GaussianDist &p, const QuadratureSpec &spec);
/// int (q - p)^2, same coverage rule applied to both q and p.
double quad_l2(const MixtureDist &q, const MixtureDist &p, const QuadratureSpec &spec);

/// -sum_i q_i log p_i by explicit loop.
double brute_cross_entropy(const CategoricalDist &q, const CategoricalDist &p);

/// Per-atom projection of r + gamma * Z' onto the support of `next`: every source atom
/// lands at clip(r + gamma z'_j, z_0, z_{N-1}) and spreads its mass to each atom i with
/// weight max(0, 1 - |t - z_i| / dz). Terminal transitions project the point r.
std::vector<double> brute_project(const CategoricalDist &next, double r, double gamma, bool terminal);

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Sample mean and standard deviation from n independent draws.
Moments mc_moments(const distexp::ReturnDistribution &d, int n, std::uint64_t seed);

struct ValueIteration {
    std::vector<std::vector<double>> q;  // q[state][action]
    int sweeps = 0;
};

/// Optimal Q of a deterministic episodic model by synchronous sweeps to 1e-12.
ValueIteration tabular_value_iteration(const distexp::Environment &env, double gamma);

/// Central finite differences of f at x with step h.
std::vector<double> central_difference(const std::function<double(const std::vector<double> &)> &f,
                                       const std::vector<double> &x,
                                       double h = 1e-5);

/// Scales non-negative weights to sum to one.
std::vector<double> normalized(std::vector<double> w);

/// |a - b| / max(|a|, |b|), with absolute error used below `floor`.
double relative_error(double a, double b, double floor = 1e-6);

}  // namespace oracles
