#pragma once

#include "ucfh/cmdp.hpp"
#include "ucfh/confidence.hpp"
#include "ucfh/environment.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ucfh {

struct Dimensions {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t horizon = 0;
};

struct Hyperparams {
    double epsilon = 0.0;
    double delta = 0.0;
    Dimensions dims;
    std::size_t max_successors = 0;
    double w_min = 0.0;
    double delta_prime = 0.0;
    double n_max_phases = 0.0; ///< unrounded
    double m_unscaled = 0.0;
    double m_scale = 1.0;
    double m = 0.0; ///< m_scale * m_unscaled; the value the learner uses

    std::size_t phase_cap() const;
    /// Visits past which a pair is never promoted again: |S| m H.
    double count_cap() const;
};

/// Requires epsilon, delta in (0, 1], H >= 2 and a strictly positive m
/// (H = 2 makes the log2 log2 H factor vanish). Throws std::invalid_argument.
Hyperparams compute_hyperparams(double epsilon, double delta, Dimensions dims,
                                std::size_t max_successors, double m_scale = 1.0);

struct PhaseRecord {
    std::size_t index = 0; ///< k, starting at 1
    Policy policy;
    double optimistic_value = 0.0;
    numvec true_constraint_values;
    double true_objective_value = 0.0;
    std::size_t first_episode = 0;
    std::size_t episodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> promoted; ///< (s, a) in index order
    CountTable counts; ///< after promotion
    int planning_attempts = 1;
};

struct EpisodeRecord {
    std::size_t phase = 0;
    std::size_t episode = 0;
    double objective_value = 0.0;
    numvec constraint_values;
    std::uint64_t cumulative_samples = 0;
};

enum class StopReason { budget, saturated, planner_failure };

const char* to_string(StopReason reason);

struct LearningTrace {
    std::uint64_t seed = 0;
    Hyperparams hyperparams;
    std::vector<PhaseRecord> phases;
    std::vector<EpisodeRecord> episodes;
    StopReason stop = StopReason::budget;
    bool failed() const { return stop == StopReason::planner_failure; }

    /// Policy of the last executed phase, if any.
    const Policy* final_policy() const;
};

struct LearnerOptions {
    /// Start from these counts instead of zeros.
    std::optional<CountTable> initial_counts;
    /// Zero every confidence radius (model treated as known from counts).
    bool zero_radius = false;
};

class PhaseBoundViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Adds v into n for (s,a) and its successors, then zeroes those v counts.
CountTable promote_counts(const CountTable& counts, std::size_t s, std::size_t a);

/// Plan-execute-promote loop. The environment is reseeded with `seed`.
/// Once every pair has n(s,a) >= |S| m H the last plan is recorded with zero
/// episodes and the run stops as saturated.
/// Throws PhaseBoundViolation if the phase count exceeds ceil(N_max).
LearningTrace run_uc_cfh(Environment& env, const Hyperparams& hp, std::size_t max_episodes,
                         std::uint64_t seed, const LearnerOptions& options = {});

} // namespace ucfh
