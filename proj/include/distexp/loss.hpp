#pragma once

#include <span>
#include <vector>

#include "distexp/dist.hpp"

namespace distexp {

/// Loss value together with its gradient w.r.t. the prediction's distribution
/// parameters. Parameter order per family:
///   gaussian:    (mu, sigma)
///   categorical: (p_0 .. p_{N-1})
///   mixture:     (w_0 .. w_{M-1}, mu_0 .. mu_{M-1}, sigma_0 .. sigma_{M-1})
/// Targets are constants; no gradient flows into q.
struct LossValue {
    double value = 0.0;
    std::vector<double> gradients;
};

/// Closed-form H(q, p). q.sigma may be zero; p.sigma must be positive.
double gaussian_cross_entropy(const GaussianDist &q, const GaussianDist &p);
LossValue gaussian_cross_entropy_grad(const GaussianDist &q, const GaussianDist &p);

/// -sum q_i log p_i over a shared support.
double categorical_cross_entropy(const CategoricalDist &q, const CategoricalDist &p);
LossValue categorical_cross_entropy_grad(const CategoricalDist &q, const CategoricalDist &p);

/// Squared L2 distance between two mixture densities. Pairwise Gaussian products
/// integrate to N(mu_i | mu_j, sigma_i^2 + sigma_j^2), a normal with that variance.
double mixture_l2(const MixtureDist &q, const MixtureDist &p);
LossValue mixture_l2_grad(const MixtureDist &q, const MixtureDist &p);
/// mixture_l2 minus the target self term int q^2, which does not depend on p and
/// is infinite for point-mass targets. Same gradients as mixture_l2_grad.
LossValue mixture_l2_objective_grad(const MixtureDist &q, const MixtureDist &p);

/// Floor applied to log densities in sample_nll.
inline constexpr double kMinLogDensity = -30.0;

/// Sample-based negative log-likelihood -sum_k log p(r + gamma * z_k).
/// p must be Gaussian or a mixture with all sigma > 0.
double sample_nll(const ReturnDistribution &p, double r, double gamma, std::span<const double> next_samples);
LossValue sample_nll_grad(const ReturnDistribution &p, double r, double gamma, std::span<const double> next_samples);

/// Number of distribution parameters in the gradient layout above.
std::size_t gradient_size(const ReturnDistribution &d);

}  // namespace distexp
