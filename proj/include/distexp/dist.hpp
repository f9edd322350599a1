#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace distexp {

using Rng = std::mt19937_64;

/// Normal distribution over the return. sigma is a standard deviation and may be
/// zero for point-mass targets.
struct GaussianDist {
    double mu = 0.0;
    double sigma = 1.0;

    GaussianDist() = default;
    GaussianDist(double mu, double sigma);
};

/// Categorical distribution on N equally spaced bin centres
/// z_i = z_min + (i + 0.5) * dz, dz = (z_max - z_min) / N.
class CategoricalDist {
public:
    CategoricalDist(double z_min, double z_max, std::vector<double> probs);

    /// Uniform probabilities over n_bins.
    static CategoricalDist uniform(double z_min, double z_max, std::size_t n_bins);

    double z_min() const { return z_min_; }
    double z_max() const { return z_max_; }
    std::size_t n_bins() const { return probs_.size(); }
    double delta_z() const { return (z_max_ - z_min_) / static_cast<double>(probs_.size()); }
    double atom(std::size_t i) const { return z_min_ + (static_cast<double>(i) + 0.5) * delta_z(); }
    std::span<const double> probs() const { return probs_; }

    bool same_support(const CategoricalDist &other) const;

private:
    double z_min_;
    double z_max_;
    std::vector<double> probs_;
};

struct MixtureDist {
    std::vector<double> weights;
    std::vector<double> mus;
    std::vector<double> sigmas;

    MixtureDist(std::vector<double> weights, std::vector<double> mus, std::vector<double> sigmas);

    std::size_t size() const { return weights.size(); }
};

using ReturnDistribution = std::variant<GaussianDist, CategoricalDist, MixtureDist>;

enum class Family { gaussian, categorical, mixture };

Family family_of(const ReturnDistribution &d);
std::string_view family_name(Family f);
Family parse_family(std::string_view name);

double mean(const ReturnDistribution &d);
double stddev(const ReturnDistribution &d);
double sample(const ReturnDistribution &d, Rng &rng);

/// Probability density at z. Categorical returns the mass of the bin containing z.
/// Requires sigma > 0 for Gaussian and every mixture component.
double density(const ReturnDistribution &d, double z);

/// Normal pdf with standard deviation sigma.
double normal_pdf(double z, double mu, double sigma);

nlohmann::json to_json(const ReturnDistribution &d);
ReturnDistribution distribution_from_json(const nlohmann::json &j);

}  // namespace distexp
