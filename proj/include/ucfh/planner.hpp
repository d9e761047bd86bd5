#pragma once

#include "ucfh/cmdp.hpp"
#include "ucfh/confidence.hpp"
#include "ucfh/lp.hpp"

#include <vector>

namespace ucfh {

/// Result of either planning LP. For the exact LP `kernel` is the true
/// kernel broadcast over the horizon; for the extended LP it is the
/// optimistic model recovered from z.
struct PlanResult {
    bool feasible = false;
    LpStatus status = LpStatus::infeasible;
    Policy policy;
    TimeVaryingKernel kernel;
    double objective_value = 0.0;
    numvec constraint_values;
};

/// Variables q_h(s,a) at index (h*S + s)*A + a. Equality rows: S initial
/// rows then S per step h >= 2. One inequality row per constraint.
LpProblem build_known_lp(const Cmdp& model);

PlanResult solve_cmdp_exact(const Cmdp& model);

/// Column layout of the extended LP: one variable per (h, s, a, s') with
/// s' in Succ(s,a).
class ExtendedLayout {
public:
    ExtendedLayout(const KnownModel& model);

    std::size_t num_vars() const { return num_vars_; }
    /// First variable of the block for (h, s, a); the block has |Succ(s,a)| entries.
    std::size_t offset(std::size_t h, std::size_t s, std::size_t a) const {
        return step_stride_ * h + pair_offset_[s * num_actions_ + a];
    }

private:
    std::size_t num_actions_;
    std::size_t step_stride_ = 0;
    std::vector<std::size_t> pair_offset_;
    std::size_t num_vars_ = 0;
};

/// Extended LP over z_h(s,a,s'). Band rows that are implied by
/// nonnegativity (clipped upper bound 1 or lower bound 0) are omitted.
LpProblem build_extended_lp(const ConfidenceSet& confidence, const KnownModel& model);

/// Solves the extended LP and recovers pi and p_tilde. Reads only the
/// KnownModel part of its argument.
PlanResult constrained_extended_lp(const ConfidenceSet& confidence, const KnownModel& model);

/// Retries with every radius doubled (up to `retries` times) while the
/// extended LP is infeasible. `attempts` reports how many solves were made.
PlanResult constrained_extended_lp_with_fallback(const ConfidenceSet& confidence,
                                                 const KnownModel& model, int retries = 3,
                                                 int* attempts = nullptr);

} // namespace ucfh
