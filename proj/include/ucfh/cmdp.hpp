#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucfh {

using numvec = std::vector<double>;

/// Dense table indexed (h, s, a). Used for objective and constraint costs.
class CostTable {
public:
    CostTable() = default;
    CostTable(std::size_t horizon, std::size_t num_states, std::size_t num_actions,
              double fill = 0.0)
        : horizon_(horizon), num_states_(num_states), num_actions_(num_actions),
          data_(horizon * num_states * num_actions, fill) {}

    double& operator()(std::size_t h, std::size_t s, std::size_t a) {
        return data_[(h * num_states_ + s) * num_actions_ + a];
    }
    double operator()(std::size_t h, std::size_t s, std::size_t a) const {
        return data_[(h * num_states_ + s) * num_actions_ + a];
    }

    std::size_t horizon() const { return horizon_; }
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

private:
    std::size_t horizon_ = 0, num_states_ = 0, num_actions_ = 0;
    numvec data_;
};

/// Stationary transition kernel p(s'|s,a).
class Transition {
public:
    Transition() = default;
    Transition(std::size_t num_states, std::size_t num_actions)
        : num_states_(num_states), num_actions_(num_actions),
          data_(num_states * num_actions * num_states, 0.0) {}

    double& operator()(std::size_t s, std::size_t a, std::size_t next) {
        return data_[(s * num_actions_ + a) * num_states_ + next];
    }
    double operator()(std::size_t s, std::size_t a, std::size_t next) const {
        return data_[(s * num_actions_ + a) * num_states_ + next];
    }
    std::span<const double> row(std::size_t s, std::size_t a) const {
        return std::span<const double>(data_).subspan((s * num_actions_ + a) * num_states_,
                                                      num_states_);
    }

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    const numvec& data() const { return data_; }

private:
    std::size_t num_states_ = 0, num_actions_ = 0;
    numvec data_;
};

/// Non-stationary kernel p_h(s'|s,a), as chosen by optimistic planning.
class TimeVaryingKernel {
public:
    TimeVaryingKernel() = default;
    TimeVaryingKernel(std::size_t horizon, std::size_t num_states, std::size_t num_actions)
        : horizon_(horizon), num_states_(num_states), num_actions_(num_actions),
          data_(horizon * num_states * num_actions * num_states, 0.0) {}

    /// Repeats a stationary kernel over every step.
    static TimeVaryingKernel broadcast(const Transition& p, std::size_t horizon);

    double& operator()(std::size_t h, std::size_t s, std::size_t a, std::size_t next) {
        return data_[((h * num_states_ + s) * num_actions_ + a) * num_states_ + next];
    }
    double operator()(std::size_t h, std::size_t s, std::size_t a, std::size_t next) const {
        return data_[((h * num_states_ + s) * num_actions_ + a) * num_states_ + next];
    }

    std::size_t horizon() const { return horizon_; }
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    const numvec& data() const { return data_; }

private:
    std::size_t horizon_ = 0, num_states_ = 0, num_actions_ = 0;
    numvec data_;
};

/// Read-only view over either kernel type. A stationary kernel is seen with a
/// zero step stride, so it is stored once and broadcast over h.
class KernelView {
public:
    KernelView(const Transition& p) // NOLINT(google-explicit-constructor)
        : data_(p.data().data()), step_stride_(0), num_states_(p.num_states()),
          num_actions_(p.num_actions()), horizon_(0) {}
    KernelView(const TimeVaryingKernel& p) // NOLINT(google-explicit-constructor)
        : data_(p.data().data()), step_stride_(p.num_states() * p.num_actions() * p.num_states()),
          num_states_(p.num_states()), num_actions_(p.num_actions()), horizon_(p.horizon()) {}

    double operator()(std::size_t h, std::size_t s, std::size_t a, std::size_t next) const {
        return data_[h * step_stride_ + (s * num_actions_ + a) * num_states_ + next];
    }
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    bool stationary() const { return step_stride_ == 0; }
    /// 0 for stationary kernels (valid at every step).
    std::size_t horizon() const { return horizon_; }

private:
    const double* data_;
    std::size_t step_stride_;
    std::size_t num_states_, num_actions_, horizon_;
};

struct Constraint {
    CostTable cost;
    double threshold = 0.0;
};

/// Everything about a CMDP that a learner is allowed to know: sizes, costs,
/// thresholds and the successor structure, but not the transition values.
struct KnownModel {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t horizon = 0;
    std::size_t initial_state = 0;
    CostTable objective_cost;
    std::vector<Constraint> constraints;
    /// successors[s * num_actions + a] lists Succ(s,a) in increasing order.
    std::vector<std::vector<std::size_t>> successors;
    std::size_t max_successors = 0;

    const std::vector<std::size_t>& successors_of(std::size_t s, std::size_t a) const {
        return successors[s * num_actions + a];
    }
    std::size_t num_constraints() const { return constraints.size(); }
};

/// Finite-horizon CMDP with a stationary transition kernel.
struct Cmdp : KnownModel {
    Transition transition;

    /// Recomputes successor sets and C from the support of the transition.
    void refresh_support();
};

/// Builds a Cmdp and derives its successor structure.
Cmdp make_cmdp(std::size_t initial_state, Transition transition, CostTable objective_cost,
               std::vector<Constraint> constraints = {});

/// Non-stationary randomized policy pi_h(a|s).
class Policy {
public:
    Policy() = default;
    Policy(std::size_t horizon, std::size_t num_states, std::size_t num_actions)
        : horizon_(horizon), num_states_(num_states), num_actions_(num_actions),
          data_(horizon * num_states * num_actions, 0.0) {}

    static Policy uniform(std::size_t horizon, std::size_t num_states, std::size_t num_actions);
    /// actions[h * num_states + s] is the action taken at (h, s).
    static Policy deterministic(std::size_t horizon, std::size_t num_states,
                                std::size_t num_actions, std::span<const std::size_t> actions);

    double& operator()(std::size_t h, std::size_t s, std::size_t a) {
        return data_[(h * num_states_ + s) * num_actions_ + a];
    }
    double operator()(std::size_t h, std::size_t s, std::size_t a) const {
        return data_[(h * num_states_ + s) * num_actions_ + a];
    }

    std::size_t horizon() const { return horizon_; }
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    const numvec& data() const { return data_; }

    bool operator==(const Policy&) const = default;

private:
    std::size_t horizon_ = 0, num_states_ = 0, num_actions_ = 0;
    numvec data_;
};

/// Occupancy measure q_h(s,a).
using OccupancyQ = CostTable;

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

ValidationReport validate_cmdp(const Cmdp& model, double tolerance = 1e-12);
ValidationReport validate_policy(const Policy& policy, double tolerance = 1e-12);

/// V_h(s) for h = 0..H (row H is identically zero).
struct ValueTable {
    std::size_t horizon = 0, num_states = 0;
    numvec values;
    double initial_value = 0.0;

    double operator()(std::size_t h, std::size_t s) const { return values[h * num_states + s]; }
};

/// Backward induction of a fixed policy against the given cost and kernel.
ValueTable policy_value(const KnownModel& model, const Policy& policy, const CostTable& cost,
                        KernelView kernel);
inline ValueTable policy_value(const Cmdp& model, const Policy& policy, const CostTable& cost) {
    return policy_value(model, policy, cost, model.transition);
}

OccupancyQ occupancy_from_policy(const KnownModel& model, const Policy& policy, KernelView kernel);
inline OccupancyQ occupancy_from_policy(const Cmdp& model, const Policy& policy) {
    return occupancy_from_policy(model, policy, model.transition);
}

/// Normalizes q_h(s,.) into pi_h(.|s); states with mass <= tolerance get the
/// uniform distribution.
Policy policy_from_occupancy(const OccupancyQ& q, double tolerance = 1e-12);

/// Sum over (h,s,a) of q * cost.
double occupancy_cost(const OccupancyQ& q, const CostTable& cost);

struct ValueDifference {
    double lhs = 0.0; ///< V(kernel_a) - V(kernel_b) at the initial state
    double rhs = 0.0; ///< occupancy-weighted kernel gap applied to V(kernel_b)
    double residual() const;
};

ValueDifference value_difference_diagnostic(const KnownModel& model, const Policy& policy,
                                            KernelView kernel_a, KernelView kernel_b,
                                            const CostTable& cost);

struct VarianceDiagnostic {
    std::size_t horizon = 0, num_states = 0;
    numvec return_variance; ///< (H+1) x S table from the Bellman recursion
    numvec local_variance;  ///< H x S table sigma^2_h(s)
    double residual = 0.0;  ///< max |recursion - unrolled expected sum|
    double variance_bound = 0.0; ///< H^2 * c_max^2
    bool bound_holds = false;

    double variance(std::size_t h, std::size_t s) const {
        return return_variance[h * num_states + s];
    }
    double sigma2(std::size_t h, std::size_t s) const { return local_variance[h * num_states + s]; }
};

VarianceDiagnostic variance_bellman_diagnostic(const KnownModel& model, const Policy& policy,
                                               KernelView kernel, const CostTable& cost);

} // namespace ucfh
