#include "ucfh/planner.hpp"

#include <algorithm>

namespace ucfh {

namespace {

constexpr double kZeroMass = 1e-12;

std::size_t q_index(const KnownModel& m, std::size_t h, std::size_t s, std::size_t a) {
    return (h * m.num_states + s) * m.num_actions + a;
}

} // namespace

LpProblem build_known_lp(const Cmdp& model) {
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;
    LpProblem lp(H * S * A);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                lp.objective[q_index(model, h, s, a)] = model.objective_cost(h, s, a);
            }
        }
    }
    // initial distribution
    for (std::size_t s = 0; s < S; ++s) {
        SparseTerms terms;
        for (std::size_t a = 0; a < A; ++a) terms.emplace_back(q_index(model, 0, s, a), 1.0);
        lp.add_equality(terms, s == model.initial_state ? 1.0 : 0.0);
    }
    // flow conservation
    for (std::size_t h = 1; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            SparseTerms terms;
            for (std::size_t a = 0; a < A; ++a) terms.emplace_back(q_index(model, h, s, a), 1.0);
            for (std::size_t prev = 0; prev < S; ++prev) {
                for (std::size_t a = 0; a < A; ++a) {
                    const double p = model.transition(prev, a, s);
                    if (p != 0.0) terms.emplace_back(q_index(model, h - 1, prev, a), -p);
                }
            }
            lp.add_equality(terms, 0.0);
        }
    }
    for (const auto& constraint : model.constraints) {
        SparseTerms terms;
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    const double d = constraint.cost(h, s, a);
                    if (d != 0.0) terms.emplace_back(q_index(model, h, s, a), d);
                }
            }
        }
        lp.add_inequality(terms, constraint.threshold);
    }
    return lp;
}

PlanResult solve_cmdp_exact(const Cmdp& model) {
    const auto lp = build_known_lp(model);
    const auto solution = solve_lp(lp);
    PlanResult result;
    result.status = solution.status;
    if (!solution.optimal()) return result;

    OccupancyQ q(model.horizon, model.num_states, model.num_actions);
    std::copy(solution.x.begin(), solution.x.end(), q.values().begin());
    result.feasible = true;
    result.policy = policy_from_occupancy(q, kZeroMass);
    result.kernel = TimeVaryingKernel::broadcast(model.transition, model.horizon);
    result.objective_value = occupancy_cost(q, model.objective_cost);
    for (const auto& constraint : model.constraints) {
        result.constraint_values.push_back(occupancy_cost(q, constraint.cost));
    }
    return result;
}

ExtendedLayout::ExtendedLayout(const KnownModel& model)
    : num_actions_(model.num_actions), pair_offset_(model.num_states * model.num_actions, 0) {
    for (std::size_t sa = 0; sa < pair_offset_.size(); ++sa) {
        pair_offset_[sa] = step_stride_;
        step_stride_ += model.successors[sa].size();
    }
    num_vars_ = step_stride_ * model.horizon;
}

LpProblem build_extended_lp(const ConfidenceSet& confidence, const KnownModel& model) {
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;
    if (confidence.num_states != S || confidence.num_actions != A) {
        throw DimensionError("confidence set does not match the model");
    }
    const ExtendedLayout layout(model);
    LpProblem lp(layout.num_vars());

    // block of z_h(s,a,.) as sparse terms with a common coefficient
    auto block = [&](std::size_t h, std::size_t s, std::size_t a, double coeff, SparseTerms& out) {
        const auto base = layout.offset(h, s, a);
        for (std::size_t k = 0; k < model.successors_of(s, a).size(); ++k) {
            out.emplace_back(base + k, coeff);
        }
    };

    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                const auto base = layout.offset(h, s, a);
                for (std::size_t k = 0; k < model.successors_of(s, a).size(); ++k) {
                    lp.objective[base + k] = model.objective_cost(h, s, a);
                }
            }
        }
    }

    for (std::size_t s = 0; s < S; ++s) {
        SparseTerms terms;
        for (std::size_t a = 0; a < A; ++a) block(0, s, a, 1.0, terms);
        lp.add_equality(terms, s == model.initial_state ? 1.0 : 0.0);
    }
    for (std::size_t h = 1; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            SparseTerms terms;
            for (std::size_t a = 0; a < A; ++a) block(h, s, a, 1.0, terms);
            for (std::size_t prev = 0; prev < S; ++prev) {
                for (std::size_t a = 0; a < A; ++a) {
                    const auto& succ = model.successors_of(prev, a);
                    const auto it = std::lower_bound(succ.begin(), succ.end(), s);
                    if (it == succ.end() || *it != s) continue;
                    terms.emplace_back(
                        layout.offset(h - 1, prev, a) + static_cast<std::size_t>(it - succ.begin()),
                        -1.0);
                }
            }
            lp.add_equality(terms, 0.0);
        }
    }

    for (const auto& constraint : model.constraints) {
        SparseTerms terms;
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    const double d = constraint.cost(h, s, a);
                    if (d != 0.0) block(h, s, a, d, terms);
                }
            }
        }
        lp.add_inequality(terms, constraint.threshold);
    }

    // z - upper * sum_y z <= 0 and -z + lower * sum_y z <= 0
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                const auto& succ = model.successors_of(s, a);
                const auto base = layout.offset(h, s, a);
                for (std::size_t k = 0; k < succ.size(); ++k) {
                    const double upper = confidence.upper(s, a, succ[k]);
                    const double lower = confidence.lower(s, a, succ[k]);
                    if (upper < 1.0) {
                        SparseTerms terms;
                        block(h, s, a, -upper, terms);
                        terms.emplace_back(base + k, 1.0);
                        lp.add_inequality(terms, 0.0);
                    }
                    if (lower > 0.0) {
                        SparseTerms terms;
                        block(h, s, a, lower, terms);
                        terms.emplace_back(base + k, -1.0);
                        lp.add_inequality(terms, 0.0);
                    }
                }
            }
        }
    }
    return lp;
}

PlanResult constrained_extended_lp(const ConfidenceSet& confidence, const KnownModel& model) {
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;
    const auto lp = build_extended_lp(confidence, model);
    const auto solution = solve_lp(lp);
    PlanResult result;
    result.status = solution.status;
    if (!solution.optimal()) return result;

    const ExtendedLayout layout(model);
    result.feasible = true;
    result.policy = Policy(H, S, A);
    result.kernel = TimeVaryingKernel(H, S, A);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            numvec mass(A, 0.0);
            double total = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                const auto& succ = model.successors_of(s, a);
                const auto base = layout.offset(h, s, a);
                for (std::size_t k = 0; k < succ.size(); ++k) mass[a] += solution.x[base + k];
                total += mass[a];

                for (std::size_t k = 0; k < succ.size(); ++k) {
                    double p;
                    if (mass[a] > kZeroMass) {
                        p = solution.x[base + k] / mass[a];
                    } else if (confidence.is_visited(s, a)) {
                        p = confidence.mean(s, a, succ[k]);
                    } else {
                        p = 1.0 / static_cast<double>(succ.size());
                    }
                    result.kernel(h, s, a, succ[k]) = p;
                }
            }
            for (std::size_t a = 0; a < A; ++a) {
                result.policy(h, s, a) =
                    total > kZeroMass ? mass[a] / total : 1.0 / static_cast<double>(A);
            }
        }
    }

    result.objective_value = solution.objective_value;
    for (const auto& constraint : model.constraints) {
        double value = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    const auto base = layout.offset(h, s, a);
                    for (std::size_t k = 0; k < model.successors_of(s, a).size(); ++k) {
                        value += solution.x[base + k] * constraint.cost(h, s, a);
                    }
                }
            }
        }
        result.constraint_values.push_back(value);
    }
    return result;
}

PlanResult constrained_extended_lp_with_fallback(const ConfidenceSet& confidence,
                                                 const KnownModel& model, int retries,
                                                 int* attempts) {
    ConfidenceSet current = confidence;
    PlanResult result;
    int made = 0;
    for (int i = 0; i <= retries; ++i) {
        if (i > 0) current = current.scaled(2.0);
        result = constrained_extended_lp(current, model);
        ++made;
        if (result.feasible) break;
    }
    if (attempts) *attempts = made;
    return result;
}

} // namespace ucfh
