#include "ucfh/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace ucfh {

numvec compute_weights(const Cmdp& model, const Policy& policy) {
    const auto q = occupancy_from_policy(model, policy);
    numvec w(model.num_states * model.num_actions, 0.0);
    for (std::size_t h = 0; h < model.horizon; ++h) {
        for (std::size_t s = 0; s < model.num_states; ++s) {
            for (std::size_t a = 0; a < model.num_actions; ++a) {
                w[s * model.num_actions + a] += q(h, s, a);
            }
        }
    }
    return w;
}

Level level_at_least(double x) {
    if (x <= 0.0) return 0;
    Level z = 1;
    while (static_cast<double>(z) < x) z *= 2;
    return z;
}

Level level_at_most(double x) {
    if (x < 1.0) return 0;
    Level z = 1;
    while (static_cast<double>(z) * 2.0 <= x) z *= 2;
    return z;
}

CategoryReport categorize(std::span<const double> weights, const CountTable& counts,
                          const Hyperparams& hp) {
    const auto S = counts.num_states(), A = counts.num_actions();
    if (weights.size() != S * A) throw DimensionError("weights do not match the count table");
    const double Sd = static_cast<double>(hp.dims.num_states);
    const double Ad = static_cast<double>(hp.dims.num_actions);
    const double Hd = static_cast<double>(hp.dims.horizon);

    CategoryReport report;
    report.num_states = S;
    report.num_actions = A;
    report.weights.assign(weights.begin(), weights.end());
    report.importance_cap = level_at_most(8.0 * Hd * Hd * Sd * Ad / hp.epsilon);
    report.knownness_cap = level_at_most(4.0 * Sd * Sd * Ad * Hd * Hd / hp.epsilon);
    report.importance.assign(S * A, 0);
    report.knownness.assign(S * A, report.knownness_cap);
    report.active.assign(S * A, false);

    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const auto idx = s * A + a;
            const double w = weights[idx];
            if (w <= 0.0) continue;
            report.importance[idx] = std::min(level_at_least(w / hp.w_min), report.importance_cap);
            const double ratio = static_cast<double>(counts.n_sa(s, a)) / (hp.m * w);
            report.knownness[idx] = std::min(level_at_most(ratio), report.knownness_cap);
            report.active[idx] = report.importance[idx] > 0;
            if (report.active[idx]) {
                ++report.category_sizes[{report.knownness[idx], report.importance[idx]}];
            }
        }
    }
    for (const auto& [key, size] : report.category_sizes) {
        if (size > key.first) report.condition_holds = false;
    }
    return report;
}

Verdict epsilon_optimality_verdict(const Cmdp& model, const Policy& policy, double epsilon,
                                   double v_star) {
    Verdict verdict;
    verdict.objective_gap = policy_value(model, policy, model.objective_cost).initial_value - v_star;
    verdict.is_eps_optimal = verdict.objective_gap <= epsilon;
    for (const auto& c : model.constraints) {
        const double gap = policy_value(model, policy, c.cost).initial_value - c.threshold;
        verdict.constraint_gaps.push_back(gap);
        verdict.is_eps_optimal = verdict.is_eps_optimal && gap <= epsilon;
    }
    return verdict;
}

TheoreticalBounds theoretical_bounds(const Hyperparams& hp) {
    const double S = static_cast<double>(hp.dims.num_states);
    const double A = static_cast<double>(hp.dims.num_actions);
    const double H = static_cast<double>(hp.dims.horizon);
    TheoreticalBounds out;
    out.e_max = std::log2(H / hp.w_min) * std::log2(S * A);
    out.n = S * A * hp.m_unscaled;
    out.lemma3_bound = 6.0 * out.n * out.e_max;
    out.theorem1_episode_bound =
        6.0 * S * A * hp.m_unscaled * std::log2(H / hp.w_min) * std::log2(S * A);
    return out;
}

} // namespace ucfh
