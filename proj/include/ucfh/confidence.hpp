#pragma once

#include "ucfh/cmdp.hpp"

#include <cstdint>
#include <vector>

namespace ucfh {

/// Visitation counts: n (before the last update of a pair) and v (since it).
class CountTable {
public:
    using count_t = std::uint64_t;

    CountTable() = default;
    CountTable(std::size_t num_states, std::size_t num_actions)
        : num_states_(num_states), num_actions_(num_actions),
          n_sa_(num_states * num_actions, 0), n_sas_(num_states * num_actions * num_states, 0),
          v_sa_(num_states * num_actions, 0), v_sas_(num_states * num_actions * num_states, 0) {}

    count_t& n_sa(std::size_t s, std::size_t a) { return n_sa_[s * num_actions_ + a]; }
    count_t n_sa(std::size_t s, std::size_t a) const { return n_sa_[s * num_actions_ + a]; }
    count_t& n_sas(std::size_t s, std::size_t a, std::size_t next) {
        return n_sas_[(s * num_actions_ + a) * num_states_ + next];
    }
    count_t n_sas(std::size_t s, std::size_t a, std::size_t next) const {
        return n_sas_[(s * num_actions_ + a) * num_states_ + next];
    }
    count_t& v_sa(std::size_t s, std::size_t a) { return v_sa_[s * num_actions_ + a]; }
    count_t v_sa(std::size_t s, std::size_t a) const { return v_sa_[s * num_actions_ + a]; }
    count_t& v_sas(std::size_t s, std::size_t a, std::size_t next) {
        return v_sas_[(s * num_actions_ + a) * num_states_ + next];
    }
    count_t v_sas(std::size_t s, std::size_t a, std::size_t next) const {
        return v_sas_[(s * num_actions_ + a) * num_states_ + next];
    }

    /// Records one observed transition into the v counts.
    void observe(std::size_t s, std::size_t a, std::size_t next) {
        ++v_sa(s, a);
        ++v_sas(s, a, next);
    }

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }

    /// Checks that the per-successor counts add up to the pair counts.
    bool consistent() const;

    bool operator==(const CountTable&) const = default;

private:
    std::size_t num_states_ = 0, num_actions_ = 0;
    std::vector<count_t> n_sa_, n_sas_, v_sa_, v_sas_;
};

/// Empirical means p_bar and radii beta; B_p is the band |p - p_bar| <= beta
/// on Succ(s,a). Off-support entries are fixed at zero.
struct ConfidenceSet {
    std::size_t num_states = 0, num_actions = 0;
    numvec p_bar;              ///< (s,a,s') empirical means
    numvec beta;               ///< (s,a,s') radii
    std::vector<bool> visited; ///< per (s,a): n(s,a) > 0
    double delta_prime = 0.0;

    double mean(std::size_t s, std::size_t a, std::size_t next) const {
        return p_bar[(s * num_actions + a) * num_states + next];
    }
    double radius(std::size_t s, std::size_t a, std::size_t next) const {
        return beta[(s * num_actions + a) * num_states + next];
    }
    bool is_visited(std::size_t s, std::size_t a) const { return visited[s * num_actions + a]; }

    /// Band bounds clipped to [0, 1].
    double lower(std::size_t s, std::size_t a, std::size_t next) const;
    double upper(std::size_t s, std::size_t a, std::size_t next) const;

    /// Every radius multiplied by `factor`.
    ConfidenceSet scaled(double factor) const;
};

struct EmpiricalEstimate {
    numvec p_bar;
    std::vector<bool> visited;
};

/// p_bar(s'|s,a) = n(s,a,s') / max(1, n(s,a)); unvisited rows are zero.
EmpiricalEstimate empirical_estimate(const CountTable& counts);

/// Empirical-Bernstein radius; throws std::invalid_argument unless
/// 0 < delta_prime < 1.
double bernstein_radius(double p_bar, CountTable::count_t n, double delta_prime);

ConfidenceSet build_confidence_set(const CountTable& counts, double delta_prime);

/// Confidence set with no uncertainty around a known kernel.
ConfidenceSet exact_confidence_set(const Transition& kernel);

struct Membership {
    std::vector<bool> per_pair;
    bool all = true;
};

Membership contains_kernel(const ConfidenceSet& confidence, const Transition& kernel,
                           const KnownModel& structure);

/// Right-hand side of the interval-algebra bound on |p_tilde - p| for two
/// points inside the same Bernstein interval.
double interval_gap_bound(double p_tilde, CountTable::count_t n, double delta_prime);

struct IntervalGapCheck {
    bool holds = false;
    double slack = 0.0;
};

/// Throws std::invalid_argument if p_tilde or p_true lies outside the interval
/// around p_bar.
IntervalGapCheck interval_gap_check(double p_tilde, double p_true, double p_bar,
                                    CountTable::count_t n, double delta_prime);

} // namespace ucfh
