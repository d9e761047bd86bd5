#include "ucfh/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ucfh {

bool CountTable::consistent() const {
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) {
            count_t n_total = 0, v_total = 0;
            for (std::size_t next = 0; next < num_states_; ++next) {
                n_total += n_sas(s, a, next);
                v_total += v_sas(s, a, next);
            }
            if (n_total != n_sa(s, a) || v_total != v_sa(s, a)) return false;
        }
    }
    return true;
}

double ConfidenceSet::lower(std::size_t s, std::size_t a, std::size_t next) const {
    return std::clamp(mean(s, a, next) - radius(s, a, next), 0.0, 1.0);
}

double ConfidenceSet::upper(std::size_t s, std::size_t a, std::size_t next) const {
    return std::clamp(mean(s, a, next) + radius(s, a, next), 0.0, 1.0);
}

ConfidenceSet ConfidenceSet::scaled(double factor) const {
    ConfidenceSet out = *this;
    for (double& b : out.beta) b *= factor;
    return out;
}

EmpiricalEstimate empirical_estimate(const CountTable& counts) {
    const auto S = counts.num_states(), A = counts.num_actions();
    EmpiricalEstimate out{numvec(S * A * S, 0.0), std::vector<bool>(S * A, false)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const auto n = counts.n_sa(s, a);
            out.visited[s * A + a] = n > 0;
            const double denom = static_cast<double>(std::max<CountTable::count_t>(1, n));
            for (std::size_t next = 0; next < S; ++next) {
                out.p_bar[(s * A + a) * S + next] =
                    static_cast<double>(counts.n_sas(s, a, next)) / denom;
            }
        }
    }
    return out;
}

double bernstein_radius(double p_bar, CountTable::count_t n, double delta_prime) {
    if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
        throw std::invalid_argument("delta_prime must lie in (0, 1)");
    }
    const double log_term = std::log(4.0 / delta_prime);
    const double n1 = static_cast<double>(std::max<CountTable::count_t>(1, n));
    const double n2 = static_cast<double>(std::max<CountTable::count_t>(1, n > 0 ? n - 1 : 0));
    const double variance = std::max(0.0, p_bar * (1.0 - p_bar));
    return std::sqrt(2.0 * variance * log_term / n1) + 7.0 * log_term / (3.0 * n2);
}

ConfidenceSet build_confidence_set(const CountTable& counts, double delta_prime) {
    const auto S = counts.num_states(), A = counts.num_actions();
    auto estimate = empirical_estimate(counts);
    ConfidenceSet out;
    out.num_states = S;
    out.num_actions = A;
    out.delta_prime = delta_prime;
    out.beta.assign(S * A * S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t next = 0; next < S; ++next) {
                const auto idx = (s * A + a) * S + next;
                out.beta[idx] = bernstein_radius(estimate.p_bar[idx], counts.n_sa(s, a), delta_prime);
            }
        }
    }
    out.p_bar = std::move(estimate.p_bar);
    out.visited = std::move(estimate.visited);
    return out;
}

ConfidenceSet exact_confidence_set(const Transition& kernel) {
    const auto S = kernel.num_states(), A = kernel.num_actions();
    ConfidenceSet out;
    out.num_states = S;
    out.num_actions = A;
    out.p_bar = kernel.data();
    out.beta.assign(S * A * S, 0.0);
    out.visited.assign(S * A, true);
    return out;
}

Membership contains_kernel(const ConfidenceSet& confidence, const Transition& kernel,
                           const KnownModel& structure) {
    const auto S = confidence.num_states, A = confidence.num_actions;
    if (kernel.num_states() != S || kernel.num_actions() != A ||
        structure.successors.size() != S * A) {
        throw DimensionError("kernel, confidence set and successor sets disagree in size");
    }
    Membership out;
    out.per_pair.assign(S * A, true);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            bool inside = true;
            for (std::size_t next : structure.successors_of(s, a)) {
                if (std::abs(kernel(s, a, next) - confidence.mean(s, a, next)) >
                    confidence.radius(s, a, next)) {
                    inside = false;
                    break;
                }
            }
            out.per_pair[s * A + a] = inside;
            out.all = out.all && inside;
        }
    }
    return out;
}

double interval_gap_bound(double p_tilde, CountTable::count_t n, double delta_prime) {
    if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
        throw std::invalid_argument("delta_prime must lie in (0, 1)");
    }
    const double ratio =
        std::log(4.0 / delta_prime) /
        static_cast<double>(std::max<CountTable::count_t>(1, n > 0 ? n - 1 : 0));
    return 2.0 * std::sqrt(2.0) * std::sqrt(std::max(0.0, p_tilde) * ratio) +
           5.0 * std::pow(ratio, 0.75) + 21.0 * ratio;
}

IntervalGapCheck interval_gap_check(double p_tilde, double p_true, double p_bar,
                                    CountTable::count_t n, double delta_prime) {
    const double radius = bernstein_radius(p_bar, n, delta_prime);
    auto inside = [&](double p) {
        return p >= 0.0 && p <= 1.0 && std::abs(p - p_bar) <= radius + 1e-12;
    };
    if (!inside(p_tilde) || !inside(p_true)) {
        throw std::invalid_argument("interval_gap_check: inputs outside the confidence interval");
    }
    IntervalGapCheck out;
    out.slack = interval_gap_bound(p_tilde, n, delta_prime) - std::abs(p_tilde - p_true);
    out.holds = out.slack >= 0.0;
    return out;
}

} // namespace ucfh
