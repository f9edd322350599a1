#include "distexp/explore.hpp"

#include <stdexcept>
#include <string>

namespace distexp {

void PolicySpec::validate() const
{
    if (!(ucb_c_low <= ucb_c_high) || ucb_c_low < 0.0) {
        throw std::invalid_argument("policy: need 0 <= ucb_c_low <= ucb_c_high");
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("policy: epsilon must lie in [0, 1]");
    }
}

std::string_view policy_name(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::thompson:
        return "thompson";
    case PolicyKind::ucb:
        return "ucb";
    case PolicyKind::epsilon_greedy:
        return "epsilon_greedy";
    case PolicyKind::greedy:
        return "greedy";
    }
    return "unknown";
}

PolicyKind parse_policy(std::string_view name)
{
    for (PolicyKind k : {PolicyKind::thompson, PolicyKind::ucb, PolicyKind::epsilon_greedy, PolicyKind::greedy}) {
        if (name == policy_name(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

int argmax_random_tie(std::span<const double> scores, Rng &rng)
{
    if (scores.empty()) {
        throw std::invalid_argument("argmax over an empty action set");
    }
    double best = scores[0];
    int count = 0;
    int chosen = 0;
    // Reservoir sampling over the tie set keeps a single pass.
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > best) {
            best = scores[i];
            chosen = static_cast<int>(i);
            count = 1;
        } else if (scores[i] == best) {
            ++count;
            if (count == 1 || std::uniform_int_distribution<int>(0, count - 1)(rng) == 0) {
                chosen = static_cast<int>(i);
            }
        }
    }
    return chosen;
}

int thompson_select(std::span<const ReturnDistribution> dists, Rng &rng)
{
    std::vector<double> draws;
    draws.reserve(dists.size());
    for (const auto &d : dists) {
        draws.push_back(sample(d, rng));
    }
    return argmax_random_tie(draws, rng);
}

int ucb_select(std::span<const ReturnDistribution> dists, std::span<const double> c_per_action, Rng &rng)
{
    if (c_per_action.size() != dists.size()) {
        throw std::invalid_argument("ucb_select: one constant per action required");
    }
    std::vector<double> bounds;
    bounds.reserve(dists.size());
    for (std::size_t a = 0; a < dists.size(); ++a) {
        bounds.push_back(mean(dists[a]) + c_per_action[a] * stddev(dists[a]));
    }
    return argmax_random_tie(bounds, rng);
}

std::vector<double> draw_ucb_constants(int n_actions, double low, double high, Rng &rng)
{
    if (!(low <= high)) {
        throw std::invalid_argument("draw_ucb_constants: low must not exceed high");
    }
    std::vector<double> c(static_cast<std::size_t>(n_actions), low);
    if (low == high) {
        return c;
    }
    std::uniform_real_distribution<double> u(low, high);
    for (double &x : c) {
        x = u(rng);
    }
    return c;
}

int greedy_select(std::span<const ReturnDistribution> dists, Rng &rng)
{
    std::vector<double> means;
    means.reserve(dists.size());
    for (const auto &d : dists) {
        means.push_back(mean(d));
    }
    return argmax_random_tie(means, rng);
}

int epsilon_greedy_select(std::span<const ReturnDistribution> dists, double epsilon, Rng &rng)
{
    if (dists.empty()) {
        throw std::invalid_argument("epsilon_greedy_select: empty action set");
    }
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
        return std::uniform_int_distribution<int>(0, static_cast<int>(dists.size()) - 1)(rng);
    }
    return greedy_select(dists, rng);
}

int select_action(const PolicySpec &spec, std::span<const ReturnDistribution> dists, Rng &rng)
{
    switch (spec.kind) {
    case PolicyKind::thompson:
        return thompson_select(dists, rng);
    case PolicyKind::ucb: {
        const auto c = draw_ucb_constants(static_cast<int>(dists.size()), spec.ucb_c_low, spec.ucb_c_high, rng);
        return ucb_select(dists, c, rng);
    }
    case PolicyKind::epsilon_greedy:
        return epsilon_greedy_select(dists, spec.epsilon, rng);
    case PolicyKind::greedy:
        return greedy_select(dists, rng);
    }
    throw std::logic_error("select_action: unknown policy");
}

std::vector<double> selection_frequencies(const PolicySpec &spec,
                                          std::span<const ReturnDistribution> dists,
                                          int draws,
                                          Rng &rng)
{
    if (draws < 1) {
        throw std::invalid_argument("selection_frequencies: draws must be >= 1");
    }
    std::vector<double> freq(dists.size(), 0.0);
    for (int i = 0; i < draws; ++i) {
        freq[static_cast<std::size_t>(select_action(spec, dists, rng))] += 1.0;
    }
    for (double &f : freq) {
        f /= draws;
    }
    return freq;
}

}  // namespace distexp
