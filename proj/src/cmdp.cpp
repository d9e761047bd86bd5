#include "ucfh/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ucfh {

TimeVaryingKernel TimeVaryingKernel::broadcast(const Transition& p, std::size_t horizon) {
    TimeVaryingKernel out(horizon, p.num_states(), p.num_actions());
    const std::size_t block = p.data().size();
    for (std::size_t h = 0; h < horizon; ++h) {
        std::copy(p.data().begin(), p.data().end(), out.data_.begin() + h * block);
    }
    return out;
}

void Cmdp::refresh_support() {
    num_states = transition.num_states();
    num_actions = transition.num_actions();
    successors.assign(num_states * num_actions, {});
    max_successors = 0;
    for (std::size_t s = 0; s < num_states; ++s) {
        for (std::size_t a = 0; a < num_actions; ++a) {
            auto& succ = successors[s * num_actions + a];
            for (std::size_t next = 0; next < num_states; ++next) {
                if (transition(s, a, next) > 0.0) succ.push_back(next);
            }
            max_successors = std::max(max_successors, succ.size());
        }
    }
}

Cmdp make_cmdp(std::size_t initial_state, Transition transition, CostTable objective_cost,
               std::vector<Constraint> constraints) {
    Cmdp model;
    model.horizon = objective_cost.horizon();
    model.initial_state = initial_state;
    model.objective_cost = std::move(objective_cost);
    model.constraints = std::move(constraints);
    model.transition = std::move(transition);
    model.refresh_support();
    return model;
}

Policy Policy::uniform(std::size_t horizon, std::size_t num_states, std::size_t num_actions) {
    Policy pi(horizon, num_states, num_actions);
    std::fill(pi.data_.begin(), pi.data_.end(), 1.0 / static_cast<double>(num_actions));
    return pi;
}

Policy Policy::deterministic(std::size_t horizon, std::size_t num_states, std::size_t num_actions,
                             std::span<const std::size_t> actions) {
    if (actions.size() != horizon * num_states) {
        throw DimensionError("deterministic policy needs one action per (h, s)");
    }
    Policy pi(horizon, num_states, num_actions);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t s = 0; s < num_states; ++s) {
            const auto a = actions[h * num_states + s];
            if (a >= num_actions) throw DimensionError("action index out of range");
            pi(h, s, a) = 1.0;
        }
    }
    return pi;
}

namespace {

template <class... Args> std::string concat(const Args&... args) {
    std::ostringstream out;
    (out << ... << args);
    return out.str();
}

void check_cost_table(const CostTable& cost, const KnownModel& model, const std::string& name,
                      ValidationReport& report) {
    if (cost.horizon() != model.horizon || cost.num_states() != model.num_states ||
        cost.num_actions() != model.num_actions) {
        report.violations.push_back(concat(name, ": dimensions do not match the model"));
        return;
    }
    for (std::size_t h = 0; h < model.horizon; ++h) {
        for (std::size_t s = 0; s < model.num_states; ++s) {
            for (std::size_t a = 0; a < model.num_actions; ++a) {
                const double c = cost(h, s, a);
                if (!(c >= 0.0 && c <= 1.0)) {
                    report.violations.push_back(concat(name, ": cost bound [0,1] violated at (h=",
                                                       h, ",s=", s, ",a=", a, ") value ", c));
                }
            }
        }
    }
}

void check_dimensions(const KnownModel& model, const Policy& policy, const CostTable& cost) {
    if (policy.horizon() != model.horizon || policy.num_states() != model.num_states ||
        policy.num_actions() != model.num_actions) {
        throw DimensionError("policy dimensions do not match the model");
    }
    if (cost.horizon() != model.horizon || cost.num_states() != model.num_states ||
        cost.num_actions() != model.num_actions) {
        throw DimensionError("cost table dimensions do not match the model");
    }
}

void check_kernel(const KnownModel& model, KernelView kernel) {
    if (kernel.num_states() != model.num_states || kernel.num_actions() != model.num_actions) {
        throw DimensionError("kernel dimensions do not match the model");
    }
    if (!kernel.stationary() && kernel.horizon() != model.horizon) {
        throw DimensionError("time-varying kernel horizon does not match the model");
    }
}

} // namespace

ValidationReport validate_cmdp(const Cmdp& model, double tolerance) {
    ValidationReport report;
    auto& v = report.violations;
    if (model.num_states == 0) v.emplace_back("num_states must be positive");
    if (model.num_actions == 0) v.emplace_back("num_actions must be positive");
    if (model.horizon < 1) v.emplace_back("horizon must be at least 1");
    if (model.initial_state >= model.num_states) v.emplace_back("initial_state out of range");
    if (!v.empty()) return report;

    if (model.transition.num_states() != model.num_states ||
        model.transition.num_actions() != model.num_actions) {
        v.emplace_back("transition dimensions do not match the model");
        return report;
    }
    std::size_t max_support = 0;
    const bool have_support = model.successors.size() == model.num_states * model.num_actions;
    if (!have_support) v.emplace_back("successor sets missing or mis-sized");
    for (std::size_t s = 0; s < model.num_states; ++s) {
        for (std::size_t a = 0; a < model.num_actions; ++a) {
            double sum = 0.0;
            std::vector<std::size_t> support;
            for (std::size_t next = 0; next < model.num_states; ++next) {
                const double p = model.transition(s, a, next);
                if (!(p >= 0.0)) {
                    v.push_back(concat("transition negative at (s=", s, ",a=", a, ",s'=", next,
                                       ")"));
                }
                if (p > 0.0) support.push_back(next);
                sum += p;
            }
            if (std::abs(sum - 1.0) > tolerance) {
                v.push_back(concat("transition row (s=", s, ",a=", a, ") sums to ", sum));
            }
            if (have_support && model.successors_of(s, a) != support) {
                v.push_back(concat("successor set of (s=", s, ",a=", a,
                                   ") does not match the transition support"));
            }
            max_support = std::max(max_support, support.size());
        }
    }
    if (model.max_successors != max_support) {
        v.push_back(concat("max_successors is ", model.max_successors, " but the support size is ",
                           max_support));
    }
    check_cost_table(model.objective_cost, model, "objective_cost", report);
    for (std::size_t i = 0; i < model.constraints.size(); ++i) {
        check_cost_table(model.constraints[i].cost, model, concat("constraint ", i), report);
        if (!(model.constraints[i].threshold >= 0.0)) {
            v.push_back(concat("constraint ", i, ": threshold must be nonnegative"));
        }
    }
    return report;
}

ValidationReport validate_policy(const Policy& policy, double tolerance) {
    ValidationReport report;
    for (std::size_t h = 0; h < policy.horizon(); ++h) {
        for (std::size_t s = 0; s < policy.num_states(); ++s) {
            double sum = 0.0;
            for (std::size_t a = 0; a < policy.num_actions(); ++a) {
                if (!(policy(h, s, a) >= 0.0)) {
                    report.violations.push_back(
                        concat("policy negative at (h=", h, ",s=", s, ",a=", a, ")"));
                }
                sum += policy(h, s, a);
            }
            if (std::abs(sum - 1.0) > tolerance) {
                report.violations.push_back(
                    concat("policy row (h=", h, ",s=", s, ") sums to ", sum));
            }
        }
    }
    return report;
}

ValueTable policy_value(const KnownModel& model, const Policy& policy, const CostTable& cost,
                        KernelView kernel) {
    check_dimensions(model, policy, cost);
    check_kernel(model, kernel);
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;
    ValueTable out{H, S, numvec((H + 1) * S, 0.0), 0.0};
    for (std::size_t h = H; h-- > 0;) {
        const double* next_values = out.values.data() + (h + 1) * S;
        for (std::size_t s = 0; s < S; ++s) {
            double v = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                const double prob = policy(h, s, a);
                if (prob == 0.0) continue;
                double q = cost(h, s, a);
                for (std::size_t next = 0; next < S; ++next) {
                    q += kernel(h, s, a, next) * next_values[next];
                }
                v += prob * q;
            }
            out.values[h * S + s] = v;
        }
    }
    out.initial_value = out(0, model.initial_state);
    return out;
}

OccupancyQ occupancy_from_policy(const KnownModel& model, const Policy& policy,
                                 KernelView kernel) {
    check_dimensions(model, policy, model.objective_cost);
    check_kernel(model, kernel);
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;
    OccupancyQ q(H, S, A);
    numvec state_mass(S, 0.0);
    state_mass[model.initial_state] = 1.0;
    for (std::size_t h = 0; h < H; ++h) {
        numvec next_mass(S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (state_mass[s] == 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) {
                const double mass = state_mass[s] * policy(h, s, a);
                q(h, s, a) = mass;
                if (mass == 0.0) continue;
                for (std::size_t next = 0; next < S; ++next) {
                    next_mass[next] += kernel(h, s, a, next) * mass;
                }
            }
        }
        state_mass = std::move(next_mass);
    }
    return q;
}

Policy policy_from_occupancy(const OccupancyQ& q, double tolerance) {
    const auto H = q.horizon(), S = q.num_states(), A = q.num_actions();
    Policy pi(H, S, A);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            double total = 0.0;
            for (std::size_t a = 0; a < A; ++a) total += std::max(0.0, q(h, s, a));
            for (std::size_t a = 0; a < A; ++a) {
                pi(h, s, a) = total > tolerance ? std::max(0.0, q(h, s, a)) / total
                                                : 1.0 / static_cast<double>(A);
            }
        }
    }
    return pi;
}

double occupancy_cost(const OccupancyQ& q, const CostTable& cost) {
    if (q.values().size() != cost.values().size()) {
        throw DimensionError("occupancy and cost tables differ in size");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < q.values().size(); ++i) total += q.values()[i] * cost.values()[i];
    return total;
}

double ValueDifference::residual() const { return std::abs(lhs - rhs); }

ValueDifference value_difference_diagnostic(const KnownModel& model, const Policy& policy,
                                            KernelView kernel_a, KernelView kernel_b,
                                            const CostTable& cost) {
    const auto values_a = policy_value(model, policy, cost, kernel_a);
    const auto values_b = policy_value(model, policy, cost, kernel_b);
    const auto q = occupancy_from_policy(model, policy, kernel_a);
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;

    ValueDifference out;
    out.lhs = values_a.initial_value - values_b.initial_value;
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                if (q(h, s, a) == 0.0) continue;
                double gap = 0.0;
                for (std::size_t next = 0; next < S; ++next) {
                    gap += (kernel_a(h, s, a, next) - kernel_b(h, s, a, next)) *
                           values_b(h + 1, next);
                }
                out.rhs += q(h, s, a) * gap;
            }
        }
    }
    return out;
}

VarianceDiagnostic variance_bellman_diagnostic(const KnownModel& model, const Policy& policy,
                                               KernelView kernel, const CostTable& cost) {
    const auto values = policy_value(model, policy, cost, kernel);
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;

    VarianceDiagnostic out;
    out.horizon = H;
    out.num_states = S;
    out.local_variance.assign(H * S, 0.0);
    out.return_variance.assign((H + 1) * S, 0.0);

    // one-step state transition matrix under the policy at step h
    auto step_matrix = [&](std::size_t h) {
        numvec m(S * S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                const double prob = policy(h, s, a);
                if (prob == 0.0) continue;
                for (std::size_t next = 0; next < S; ++next) {
                    m[s * S + next] += prob * kernel(h, s, a, next);
                }
            }
        }
        return m;
    };

    for (std::size_t h = H; h-- > 0;) {
        for (std::size_t s = 0; s < S; ++s) {
            double mean = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                for (std::size_t next = 0; next < S; ++next) {
                    mean += policy(h, s, a) * kernel(h, s, a, next) * values(h + 1, next);
                }
            }
            double sigma2 = 0.0, carried = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                for (std::size_t next = 0; next < S; ++next) {
                    const double w = policy(h, s, a) * kernel(h, s, a, next);
                    const double dev = values(h + 1, next) - mean;
                    sigma2 += w * dev * dev;
                    carried += w * out.return_variance[(h + 1) * S + next];
                }
            }
            out.local_variance[h * S + s] = sigma2;
            out.return_variance[h * S + s] = carried + sigma2;
        }
    }

    // unrolled form: propagate the state distribution forward from each (h, s)
    std::vector<numvec> steps;
    steps.reserve(H);
    for (std::size_t h = 0; h < H; ++h) steps.push_back(step_matrix(h));
    double residual = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            numvec dist(S, 0.0);
            dist[s] = 1.0;
            double total = 0.0;
            for (std::size_t i = h; i < H; ++i) {
                numvec next(S, 0.0);
                for (std::size_t x = 0; x < S; ++x) {
                    total += dist[x] * out.local_variance[i * S + x];
                    if (dist[x] == 0.0) continue;
                    for (std::size_t y = 0; y < S; ++y) next[y] += dist[x] * steps[i][x * S + y];
                }
                dist = std::move(next);
            }
            residual = std::max(residual, std::abs(total - out.variance(h, s)));
        }
    }
    out.residual = residual;

    double c_max = 0.0;
    for (double c : cost.values()) c_max = std::max(c_max, c);
    out.variance_bound = static_cast<double>(H * H) * c_max * c_max;
    out.bound_holds = true;
    for (std::size_t s = 0; s < S; ++s) {
        const double v1 = out.variance(0, s);
        if (v1 < -1e-12 || v1 > out.variance_bound + 1e-12) out.bound_holds = false;
    }
    return out;
}

} // namespace ucfh
