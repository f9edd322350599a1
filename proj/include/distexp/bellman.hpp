#pragma once

#include <vector>

#include "distexp/dist.hpp"

namespace distexp {

using StateEncoding = std::vector<double>;

/// One replay record {s, a, r, s', a'}. terminal marks episode termination by the
/// environment; truncated episodes keep terminal = false and are bootstrapped.
struct Transition {
    StateEncoding s;
    int a = 0;
    double r = 0.0;
    StateEncoding s_next;
    int a_next = 0;
    bool terminal = false;
};

/// The propagated distribution q(Z|s,a) used as a regression target.
struct BellmanTarget {
    ReturnDistribution dist;
};

// Terminal transitions produce a point mass at r for every family.
GaussianDist propagate_gaussian(double r, double gamma, const GaussianDist &next, bool terminal);
CategoricalDist propagate_categorical(double r, double gamma, const CategoricalDist &next, bool terminal);
MixtureDist propagate_mixture(double r, double gamma, const MixtureDist &next, bool terminal);

/// Family-preserving one-step target from a transition and the bootstrap
/// prediction p(Z|s', a').
BellmanTarget make_target(const Transition &t, double gamma, const ReturnDistribution &bootstrap);

}  // namespace distexp
