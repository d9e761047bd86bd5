#include "ucfh/learner.hpp"

#include "ucfh/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ucfh {

std::size_t Hyperparams::phase_cap() const {
    return static_cast<std::size_t>(std::ceil(n_max_phases));
}

double Hyperparams::count_cap() const {
    return static_cast<double>(dims.num_states) * m * static_cast<double>(dims.horizon);
}

Hyperparams compute_hyperparams(double epsilon, double delta, Dimensions dims,
                                std::size_t max_successors, double m_scale) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
    if (dims.num_states < 1 || dims.num_actions < 1) {
        throw std::invalid_argument("state and action counts must be positive");
    }
    if (dims.horizon < 2) {
        throw std::invalid_argument("horizon must be at least 2 (log2 log2 H is undefined below)");
    }
    if (max_successors < 1) throw std::invalid_argument("max_successors must be positive");
    if (!(m_scale > 0.0)) throw std::invalid_argument("m_scale must be positive");

    const double S = static_cast<double>(dims.num_states);
    const double A = static_cast<double>(dims.num_actions);
    const double H = static_cast<double>(dims.horizon);
    const double C = static_cast<double>(max_successors);

    Hyperparams hp;
    hp.epsilon = epsilon;
    hp.delta = delta;
    hp.dims = dims;
    hp.max_successors = max_successors;
    hp.m_scale = m_scale;
    hp.w_min = epsilon / (4.0 * H * S * A);
    hp.n_max_phases = S * A * std::log2(S * H / hp.w_min);
    hp.delta_prime = delta / (2.0 * hp.n_max_phases * C);
    const double loglog = std::log2(std::log2(H));
    const double log_size = std::log2(8.0 * H * H * S * S * A / epsilon);
    hp.m_unscaled = 2304.0 * C * C * H * H / (epsilon * epsilon) * loglog * loglog * log_size *
                    log_size * std::log(4.0 / hp.delta_prime);
    hp.m = m_scale * hp.m_unscaled;
    if (!(hp.m > 0.0)) {
        throw std::invalid_argument("m evaluates to zero for this horizon (log2 log2 H = 0 at H = 2)");
    }
    return hp;
}

const char* to_string(StopReason reason) {
    switch (reason) {
    case StopReason::budget: return "budget";
    case StopReason::saturated: return "saturated";
    case StopReason::planner_failure: return "planner_failure";
    }
    return "unknown";
}

const Policy* LearningTrace::final_policy() const {
    return phases.empty() ? nullptr : &phases.back().policy;
}

CountTable promote_counts(const CountTable& counts, std::size_t s, std::size_t a) {
    CountTable out = counts;
    out.n_sa(s, a) += out.v_sa(s, a);
    out.v_sa(s, a) = 0;
    for (std::size_t next = 0; next < out.num_states(); ++next) {
        out.n_sas(s, a, next) += out.v_sas(s, a, next);
        out.v_sas(s, a, next) = 0;
    }
    return out;
}

LearningTrace run_uc_cfh(Environment& env, const Hyperparams& hp, std::size_t max_episodes,
                         std::uint64_t seed, const LearnerOptions& options) {
    const KnownModel& known = env.known();
    const auto S = known.num_states, A = known.num_actions, H = known.horizon;
    if (hp.dims.num_states != S || hp.dims.num_actions != A || hp.dims.horizon != H) {
        throw DimensionError("hyperparameters were computed for different dimensions");
    }
    env.reseed(seed);

    LearningTrace trace;
    trace.seed = seed;
    trace.hyperparams = hp;

    CountTable counts = options.initial_counts ? *options.initial_counts : CountTable(S, A);
    if (counts.num_states() != S || counts.num_actions() != A) {
        throw DimensionError("initial counts do not match the model");
    }

    const double first_visit_threshold = hp.m * hp.w_min;
    const double count_cap = hp.count_cap();
    auto can_trigger = [&](std::size_t s, std::size_t a) {
        return static_cast<double>(counts.n_sa(s, a)) < count_cap;
    };
    auto triggers = [&](std::size_t s, std::size_t a) {
        const double v = static_cast<double>(counts.v_sa(s, a));
        const double n = static_cast<double>(counts.n_sa(s, a));
        return v >= std::max(first_visit_threshold, n) && can_trigger(s, a);
    };

    std::size_t episode = 0;
    std::uint64_t samples = 0;
    while (episode < max_episodes) {
        bool any_open = false;
        for (std::size_t s = 0; s < S && !any_open; ++s) {
            for (std::size_t a = 0; a < A && !any_open; ++a) any_open = can_trigger(s, a);
        }

        auto confidence = build_confidence_set(counts, hp.delta_prime);
        if (options.zero_radius) confidence = confidence.scaled(0.0);
        int attempts = 0;
        auto plan = constrained_extended_lp_with_fallback(confidence, known, 3, &attempts);
        if (!plan.feasible) {
            trace.stop = StopReason::planner_failure;
            break;
        }

        PhaseRecord phase;
        phase.index = trace.phases.size() + 1;
        if (phase.index > hp.phase_cap()) {
            throw PhaseBoundViolation("phase " + std::to_string(phase.index) +
                                      " exceeds ceil(N_max) = " + std::to_string(hp.phase_cap()));
        }
        phase.policy = std::move(plan.policy);
        phase.optimistic_value = plan.objective_value;
        phase.planning_attempts = attempts;
        phase.first_episode = episode;
        const Cmdp& truth = env.ground_truth();
        phase.true_objective_value =
            policy_value(truth, phase.policy, truth.objective_cost).initial_value;
        for (const auto& c : truth.constraints) {
            phase.true_constraint_values.push_back(policy_value(truth, phase.policy, c.cost).initial_value);
        }

        // No pair can ever trigger again: the plan is final, nothing left to run.
        if (!any_open) {
            phase.counts = counts;
            trace.phases.push_back(std::move(phase));
            trace.stop = StopReason::saturated;
            break;
        }

        bool triggered = false;
        while (!triggered && episode < max_episodes) {
            const auto trajectory = env.sample_episode(phase.policy);
            for (const auto& step : trajectory.steps) {
                counts.observe(step.state, step.action, step.next_state);
            }
            samples += trajectory.steps.size();
            trace.episodes.push_back({phase.index, episode, phase.true_objective_value,
                                      phase.true_constraint_values, samples});
            ++episode;
            ++phase.episodes;
            for (std::size_t s = 0; s < S && !triggered; ++s) {
                for (std::size_t a = 0; a < A && !triggered; ++a) triggered = triggers(s, a);
            }
        }

        if (triggered) {
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    if (!triggers(s, a)) continue;
                    counts = promote_counts(counts, s, a);
                    phase.promoted.emplace_back(s, a);
                }
            }
        }
        phase.counts = counts;
        trace.phases.push_back(std::move(phase));
    }
    return trace;
}

} // namespace ucfh
