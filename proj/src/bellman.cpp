#include "distexp/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distexp {

namespace {

void check_gamma(double gamma)
{
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1]");
    }
}

// Splits `mass` located at `target` between the two neighbouring bin centres.
void project_point(double target, double mass, double z_min, double z_max, std::vector<double> &out)
{
    const std::size_t n = out.size();
    const double dz = (z_max - z_min) / static_cast<double>(n);
    const double clipped = std::clamp(target, z_min, z_max);
    // Position in units of bins relative to the first centre.
    const double b = (clipped - z_min) / dz - 0.5;
    if (b <= 0.0) {
        out.front() += mass;
        return;
    }
    if (b >= static_cast<double>(n - 1)) {
        out.back() += mass;
        return;
    }
    const auto lower = static_cast<std::size_t>(std::floor(b));
    const double frac = b - static_cast<double>(lower);
    out[lower] += mass * (1.0 - frac);
    if (frac > 0.0) {
        out[lower + 1] += mass * frac;
    }
}

}  // namespace

GaussianDist propagate_gaussian(double r, double gamma, const GaussianDist &next, bool terminal)
{
    check_gamma(gamma);
    if (terminal) {
        return {r, 0.0};
    }
    return {r + gamma * next.mu, gamma * next.sigma};
}

CategoricalDist propagate_categorical(double r, double gamma, const CategoricalDist &next, bool terminal)
{
    check_gamma(gamma);
    std::vector<double> out(next.n_bins(), 0.0);
    if (terminal) {
        project_point(r, 1.0, next.z_min(), next.z_max(), out);
    } else {
        for (std::size_t j = 0; j < next.n_bins(); ++j) {
            const double p = next.probs()[j];
            if (p > 0.0) {
                project_point(r + gamma * next.atom(j), p, next.z_min(), next.z_max(), out);
            }
        }
    }
    return {next.z_min(), next.z_max(), std::move(out)};
}

MixtureDist propagate_mixture(double r, double gamma, const MixtureDist &next, bool terminal)
{
    check_gamma(gamma);
    std::vector<double> mus(next.size());
    std::vector<double> sigmas(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
        mus[i] = terminal ? r : r + gamma * next.mus[i];
        sigmas[i] = terminal ? 0.0 : gamma * next.sigmas[i];
    }
    return {next.weights, std::move(mus), std::move(sigmas)};
}

BellmanTarget make_target(const Transition &t, double gamma, const ReturnDistribution &bootstrap)
{
    if (const auto *g = std::get_if<GaussianDist>(&bootstrap)) {
        return {propagate_gaussian(t.r, gamma, *g, t.terminal)};
    }
    if (const auto *c = std::get_if<CategoricalDist>(&bootstrap)) {
        return {propagate_categorical(t.r, gamma, *c, t.terminal)};
    }
    return {propagate_mixture(t.r, gamma, std::get<MixtureDist>(bootstrap), t.terminal)};
}

}  // namespace distexp
