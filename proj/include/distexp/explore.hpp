#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "distexp/dist.hpp"

namespace distexp {

enum class PolicyKind { thompson, ucb, epsilon_greedy, greedy };

struct PolicySpec {
    PolicyKind kind = PolicyKind::ucb;
    double ucb_c_low = 1.7;
    double ucb_c_high = 2.3;
    double epsilon = 0.05;

    void validate() const;
    bool operator==(const PolicySpec &) const = default;
};

std::string_view policy_name(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);

/// Index of the largest score; ties are broken uniformly at random.
int argmax_random_tie(std::span<const double> scores, Rng &rng);

int thompson_select(std::span<const ReturnDistribution> dists, Rng &rng);
int ucb_select(std::span<const ReturnDistribution> dists, std::span<const double> c_per_action, Rng &rng);
std::vector<double> draw_ucb_constants(int n_actions, double low, double high, Rng &rng);
int epsilon_greedy_select(std::span<const ReturnDistribution> dists, double epsilon, Rng &rng);
int greedy_select(std::span<const ReturnDistribution> dists, Rng &rng);

/// Dispatches on spec.kind. UCB constants are redrawn on every call.
int select_action(const PolicySpec &spec, std::span<const ReturnDistribution> dists, Rng &rng);

/// Monte-Carlo estimate of the policy's action probabilities from `draws` selections.
std::vector<double> selection_frequencies(const PolicySpec &spec,
                                          std::span<const ReturnDistribution> dists,
                                          int draws,
                                          Rng &rng);

}  // namespace distexp
