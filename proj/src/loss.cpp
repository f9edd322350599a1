#include "distexp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace distexp {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Gaussian density with variance (not standard deviation) `var`.
double normal_pdf_var(double x, double m, double var)
{
    const double d = x - m;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// sum_{i,j} a_i b_j N(mu_i | mu_j, sigma_i^2 + sigma_j^2)
double pair_sum(const MixtureDist &a, const MixtureDist &b)
{
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double var = a.sigmas[i] * a.sigmas[i] + b.sigmas[j] * b.sigmas[j];
            if (var <= 0.0) {
                throw std::domain_error("mixture_l2: zero variance in a cross term");
            }
            total += a.weights[i] * b.weights[j] * normal_pdf_var(a.mus[i], b.mus[j], var);
        }
    }
    return total;
}

double gaussian_nll_point(const GaussianDist &p, double x)
{
    const double d = x - p.mu;
    return 0.5 * kLog2Pi + std::log(p.sigma) + 0.5 * d * d / (p.sigma * p.sigma);
}

void require_positive_sigma(const GaussianDist &p, const char *what)
{
    if (!(p.sigma > 0.0)) {
        throw std::domain_error(std::string(what) + ": prediction sigma must be positive");
    }
}

}  // namespace

double gaussian_cross_entropy(const GaussianDist &q, const GaussianDist &p)
{
    require_positive_sigma(p, "gaussian_cross_entropy");
    const double vp = p.sigma * p.sigma;
    const double d = q.mu - p.mu;
    return 0.5 * std::log(2.0 * std::numbers::pi * vp) + (q.sigma * q.sigma + d * d) / (2.0 * vp);
}

LossValue gaussian_cross_entropy_grad(const GaussianDist &q, const GaussianDist &p)
{
    LossValue out;
    out.value = gaussian_cross_entropy(q, p);
    const double vp = p.sigma * p.sigma;
    const double d = q.mu - p.mu;
    const double spread = q.sigma * q.sigma + d * d;
    out.gradients = {-d / vp, 1.0 / p.sigma - spread / (vp * p.sigma)};
    return out;
}

double categorical_cross_entropy(const CategoricalDist &q, const CategoricalDist &p)
{
    if (!q.same_support(p)) {
        throw std::invalid_argument("categorical_cross_entropy: target and prediction supports differ");
    }
    double h = 0.0;
    for (std::size_t i = 0; i < q.n_bins(); ++i) {
        const double qi = q.probs()[i];
        if (qi > 0.0) {
            h -= qi * std::log(std::max(p.probs()[i], std::numeric_limits<double>::min()));
        }
    }
    return h;
}

LossValue categorical_cross_entropy_grad(const CategoricalDist &q, const CategoricalDist &p)
{
    LossValue out;
    out.value = categorical_cross_entropy(q, p);
    out.gradients.resize(p.n_bins());
    for (std::size_t i = 0; i < p.n_bins(); ++i) {
        out.gradients[i] = -q.probs()[i] / std::max(p.probs()[i], std::numeric_limits<double>::min());
    }
    return out;
}

double mixture_l2(const MixtureDist &q, const MixtureDist &p)
{
    // Both cross-term orderings are averaged so that swapping q and p is bit-identical.
    const double cross = pair_sum(q, p) + pair_sum(p, q);
    return (pair_sum(q, q) + pair_sum(p, p)) - cross;
}

namespace {

LossValue mixture_l2_gradients(const MixtureDist &q, const MixtureDist &p)
{
    LossValue out;
    const std::size_t m = p.size();
    out.gradients.assign(3 * m, 0.0);
    auto dw = [&](std::size_t j) -> double & { return out.gradients[j]; };
    auto dmu = [&](std::size_t j) -> double & { return out.gradients[m + j]; };
    auto dsig = [&](std::size_t j) -> double & { return out.gradients[2 * m + j]; };

    // p-p self term: every ordered pair (a, b) contributes w_a w_b N(mu_a | mu_b, v_a + v_b).
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            const double var = p.sigmas[a] * p.sigmas[a] + p.sigmas[b] * p.sigmas[b];
            const double diff = p.mus[a] - p.mus[b];
            const double n = normal_pdf_var(p.mus[a], p.mus[b], var);
            const double ww = p.weights[a] * p.weights[b];
            dw(a) += p.weights[b] * n;
            dw(b) += p.weights[a] * n;
            dmu(a) += ww * (-n * diff / var);
            dmu(b) += ww * (n * diff / var);
            const double dn_dvar = n * (0.5 * diff * diff / (var * var) - 0.5 / var);
            dsig(a) += ww * dn_dvar * 2.0 * p.sigmas[a];
            dsig(b) += ww * dn_dvar * 2.0 * p.sigmas[b];
        }
    }
    // Cross term -2 sum q_i p_j N(mu_i | mu_j, v_i + v_j).
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double var = q.sigmas[i] * q.sigmas[i] + p.sigmas[j] * p.sigmas[j];
            const double diff = q.mus[i] - p.mus[j];
            const double n = normal_pdf_var(q.mus[i], p.mus[j], var);
            const double dn_dvar = n * (0.5 * diff * diff / (var * var) - 0.5 / var);
            dw(j) -= 2.0 * q.weights[i] * n;
            dmu(j) -= 2.0 * q.weights[i] * p.weights[j] * (n * diff / var);
            dsig(j) -= 2.0 * q.weights[i] * p.weights[j] * dn_dvar * 2.0 * p.sigmas[j];
        }
    }
    return out;
}

}  // namespace

LossValue mixture_l2_grad(const MixtureDist &q, const MixtureDist &p)
{
    LossValue out = mixture_l2_gradients(q, p);
    out.value = mixture_l2(q, p);
    return out;
}

LossValue mixture_l2_objective_grad(const MixtureDist &q, const MixtureDist &p)
{
    LossValue out = mixture_l2_gradients(q, p);
    out.value = pair_sum(p, p) - (pair_sum(q, p) + pair_sum(p, q));
    return out;
}

double sample_nll(const ReturnDistribution &p, double r, double gamma, std::span<const double> next_samples)
{
    return sample_nll_grad(p, r, gamma, next_samples).value;
}

LossValue sample_nll_grad(const ReturnDistribution &p, double r, double gamma, std::span<const double> next_samples)
{
    LossValue out;
    if (const auto *g = std::get_if<GaussianDist>(&p)) {
        require_positive_sigma(*g, "sample_nll");
        out.gradients.assign(2, 0.0);
        for (double z : next_samples) {
            const double x = r + gamma * z;
            const double nll = gaussian_nll_point(*g, x);
            if (-nll < kMinLogDensity) {
                out.value -= kMinLogDensity;
                continue;
            }
            out.value += nll;
            const double d = x - g->mu;
            const double v = g->sigma * g->sigma;
            out.gradients[0] += -d / v;
            out.gradients[1] += 1.0 / g->sigma - d * d / (v * g->sigma);
        }
        return out;
    }
    if (const auto *mix = std::get_if<MixtureDist>(&p)) {
        const std::size_t m = mix->size();
        for (double s : mix->sigmas) {
            if (!(s > 0.0)) {
                throw std::domain_error("sample_nll: mixture component sigma must be positive");
            }
        }
        out.gradients.assign(3 * m, 0.0);
        std::vector<double> comp(m);
        for (double z : next_samples) {
            const double x = r + gamma * z;
            double f = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                comp[i] = normal_pdf(x, mix->mus[i], mix->sigmas[i]);
                f += mix->weights[i] * comp[i];
            }
            if (!(f > 0.0) || std::log(f) < kMinLogDensity) {
                out.value -= kMinLogDensity;
                continue;
            }
            out.value -= std::log(f);
            for (std::size_t i = 0; i < m; ++i) {
                const double s = mix->sigmas[i];
                const double d = x - mix->mus[i];
                out.gradients[i] -= comp[i] / f;
                out.gradients[m + i] -= mix->weights[i] * comp[i] * d / (s * s) / f;
                out.gradients[2 * m + i] -= mix->weights[i] * comp[i] * (d * d / (s * s * s) - 1.0 / s) / f;
            }
        }
        return out;
    }
    throw std::invalid_argument("sample_nll: categorical predictions have no density");
}

std::size_t gradient_size(const ReturnDistribution &d)
{
    switch (family_of(d)) {
    case Family::gaussian:
        return 2;
    case Family::categorical:
        return std::get<CategoricalDist>(d).n_bins();
    case Family::mixture:
        return 3 * std::get<MixtureDist>(d).size();
    }
    return 0;
}

}  // namespace distexp
