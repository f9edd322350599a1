#include "distexp/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace distexp {

namespace {

constexpr double kSimplexTolerance = 1e-6;

// Rescales weights that are already within tolerance of the simplex so the sum is 1
// to machine precision.
void normalize_simplex(std::vector<double> &w, const char *what)
{
    if (w.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty");
    }
    for (double x : w) {
        if (!std::isfinite(x) || x < 0.0) {
            throw std::invalid_argument(std::string(what) + ": negative or non-finite entry");
        }
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument(std::string(what) + ": does not sum to 1");
    }
    for (double &x : w) {
        x /= total;
    }
}

struct Moments {
    double mean;
    double variance;
};

Moments categorical_moments(const CategoricalDist &c)
{
    double m = 0.0;
    for (std::size_t i = 0; i < c.n_bins(); ++i) {
        m += c.atom(i) * c.probs()[i];
    }
    double v = 0.0;
    for (std::size_t i = 0; i < c.n_bins(); ++i) {
        const double d = c.atom(i) - m;
        v += c.probs()[i] * d * d;
    }
    return {m, v};
}

Moments mixture_moments(const MixtureDist &mix)
{
    double m = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
        m += mix.weights[i] * mix.mus[i];
    }
    double v = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
        const double d = mix.mus[i] - m;
        v += mix.weights[i] * (mix.sigmas[i] * mix.sigmas[i] + d * d);
    }
    return {m, v};
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

GaussianDist::GaussianDist(double mu, double sigma) : mu(mu), sigma(sigma)
{
    if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma < 0.0) {
        throw std::invalid_argument("GaussianDist: requires finite mu and sigma >= 0");
    }
}

CategoricalDist::CategoricalDist(double z_min, double z_max, std::vector<double> probs)
    : z_min_(z_min), z_max_(z_max), probs_(std::move(probs))
{
    if (!(z_min_ < z_max_)) {
        throw std::invalid_argument("CategoricalDist: z_min must be below z_max");
    }
    normalize_simplex(probs_, "CategoricalDist probs");
}

CategoricalDist CategoricalDist::uniform(double z_min, double z_max, std::size_t n_bins)
{
    return {z_min, z_max, std::vector<double>(n_bins, 1.0 / static_cast<double>(n_bins))};
}

bool CategoricalDist::same_support(const CategoricalDist &other) const
{
    return z_min_ == other.z_min_ && z_max_ == other.z_max_ && n_bins() == other.n_bins();
}

MixtureDist::MixtureDist(std::vector<double> w, std::vector<double> m, std::vector<double> s)
    : weights(std::move(w)), mus(std::move(m)), sigmas(std::move(s))
{
    if (mus.size() != weights.size() || sigmas.size() != weights.size()) {
        throw std::invalid_argument("MixtureDist: component vectors differ in length");
    }
    normalize_simplex(weights, "MixtureDist weights");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!std::isfinite(mus[i]) || !std::isfinite(sigmas[i]) || sigmas[i] < 0.0) {
            throw std::invalid_argument("MixtureDist: requires finite means and sigmas >= 0");
        }
    }
}

Family family_of(const ReturnDistribution &d)
{
    return static_cast<Family>(d.index());
}

std::string_view family_name(Family f)
{
    switch (f) {
    case Family::gaussian:
        return "gaussian";
    case Family::categorical:
        return "categorical";
    case Family::mixture:
        return "mixture";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    if (name == "gaussian") {
        return Family::gaussian;
    }
    if (name == "categorical") {
        return Family::categorical;
    }
    if (name == "mixture") {
        return Family::mixture;
    }
    throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

double mean(const ReturnDistribution &d)
{
    return std::visit(Overloaded{
                          [](const GaussianDist &g) { return g.mu; },
                          [](const CategoricalDist &c) { return categorical_moments(c).mean; },
                          [](const MixtureDist &m) { return mixture_moments(m).mean; },
                      },
                      d);
}

double stddev(const ReturnDistribution &d)
{
    return std::visit(Overloaded{
                          [](const GaussianDist &g) { return g.sigma; },
                          [](const CategoricalDist &c) { return std::sqrt(categorical_moments(c).variance); },
                          [](const MixtureDist &m) { return std::sqrt(mixture_moments(m).variance); },
                      },
                      d);
}

double sample(const ReturnDistribution &d, Rng &rng)
{
    return std::visit(Overloaded{
                          [&](const GaussianDist &g) {
                              if (g.sigma == 0.0) {
                                  return g.mu;
                              }
                              return std::normal_distribution<double>(g.mu, g.sigma)(rng);
                          },
                          [&](const CategoricalDist &c) {
                              std::discrete_distribution<std::size_t> pick(c.probs().begin(), c.probs().end());
                              return c.atom(pick(rng));
                          },
                          [&](const MixtureDist &m) {
                              std::discrete_distribution<std::size_t> pick(m.weights.begin(), m.weights.end());
                              const std::size_t k = pick(rng);
                              if (m.sigmas[k] == 0.0) {
                                  return m.mus[k];
                              }
                              return std::normal_distribution<double>(m.mus[k], m.sigmas[k])(rng);
                          },
                      },
                      d);
}

double normal_pdf(double z, double mu, double sigma)
{
    const double u = (z - mu) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double density(const ReturnDistribution &d, double z)
{
    return std::visit(Overloaded{
                          [&](const GaussianDist &g) {
                              if (g.sigma <= 0.0) {
                                  throw std::domain_error("density: Gaussian with sigma = 0 has no density");
                              }
                              return normal_pdf(z, g.mu, g.sigma);
                          },
                          [&](const CategoricalDist &c) {
                              const double half = 0.5 * c.delta_z();
                              for (std::size_t i = 0; i < c.n_bins(); ++i) {
                                  if (std::abs(z - c.atom(i)) < half) {
                                      return c.probs()[i];
                                  }
                              }
                              return 0.0;
                          },
                          [&](const MixtureDist &m) {
                              double f = 0.0;
                              for (std::size_t i = 0; i < m.size(); ++i) {
                                  if (m.sigmas[i] <= 0.0) {
                                      throw std::domain_error("density: mixture component with sigma = 0");
                                  }
                                  f += m.weights[i] * normal_pdf(z, m.mus[i], m.sigmas[i]);
                              }
                              return f;
                          },
                      },
                      d);
}

nlohmann::json to_json(const ReturnDistribution &d)
{
    return std::visit(Overloaded{
                          [](const GaussianDist &g) {
                              return nlohmann::json{{"family", "gaussian"}, {"mu", g.mu}, {"sigma", g.sigma}};
                          },
                          [](const CategoricalDist &c) {
                              return nlohmann::json{{"family", "categorical"},
                                                    {"z_min", c.z_min()},
                                                    {"z_max", c.z_max()},
                                                    {"n_bins", c.n_bins()},
                                                    {"probs", std::vector<double>(c.probs().begin(), c.probs().end())}};
                          },
                          [](const MixtureDist &m) {
                              return nlohmann::json{
                                  {"family", "mixture"}, {"weights", m.weights}, {"mus", m.mus}, {"sigmas", m.sigmas}};
                          },
                      },
                      d);
}

ReturnDistribution distribution_from_json(const nlohmann::json &j)
{
    switch (parse_family(j.at("family").get<std::string>())) {
    case Family::gaussian:
        return GaussianDist{j.at("mu").get<double>(), j.at("sigma").get<double>()};
    case Family::categorical:
        return CategoricalDist{
            j.at("z_min").get<double>(), j.at("z_max").get<double>(), j.at("probs").get<std::vector<double>>()};
    case Family::mixture:
        return MixtureDist{j.at("weights").get<std::vector<double>>(),
                           j.at("mus").get<std::vector<double>>(),
                           j.at("sigmas").get<std::vector<double>>()};
    }
    throw std::invalid_argument("distribution_from_json: unreachable family");
}

}  // namespace distexp
