#pragma once

#include "ucfh/cmdp.hpp"
#include "ucfh/confidence.hpp"
#include "ucfh/learner.hpp"

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace ucfh {

/// w(s,a): expected visits per episode, indexed s * A + a.
numvec compute_weights(const Cmdp& model, const Policy& policy);

/// Elements of the sequence 0, 1, 2, 4, 8, ...
using Level = std::uint64_t;

/// Smallest level >= x.
Level level_at_least(double x);
/// Largest level <= x.
Level level_at_most(double x);

struct CategoryReport {
    std::size_t num_states = 0, num_actions = 0;
    numvec weights;
    std::vector<Level> importance;
    std::vector<Level> knownness;
    std::vector<bool> active;
    std::map<std::pair<Level, Level>, std::size_t> category_sizes; ///< (kappa, iota) -> size
    bool condition_holds = true;
    Level importance_cap = 0;
    Level knownness_cap = 0;
};

/// Importance and knownness levels under the tracked caps (8H^2|S||A|/eps
/// and 4|S|^2|A|H^2/eps). Zero-weight pairs are inactive and get the
/// largest tracked knownness.
CategoryReport categorize(std::span<const double> weights, const CountTable& counts,
                          const Hyperparams& hp);

struct Verdict {
    double objective_gap = 0.0;
    numvec constraint_gaps;
    bool is_eps_optimal = false;
};

Verdict epsilon_optimality_verdict(const Cmdp& model, const Policy& policy, double epsilon,
                                   double v_star);

struct TheoreticalBounds {
    double e_max = 0.0;
    double n = 0.0; ///< |S||A| m
    double lemma3_bound = 0.0;
    double theorem1_episode_bound = 0.0;
};

/// Uses the unscaled m of `hp`.
TheoreticalBounds theoretical_bounds(const Hyperparams& hp);

} // namespace ucfh
