#pragma once

#include "ucfh/cmdp.hpp"

#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ucfh {

/// Row-major dense matrix with a fixed column count.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t cols) : cols_(cols) {}
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_).subspan(r * cols_, cols_);
    }

    /// Appends a zero row and returns its index.
    std::size_t append_row() {
        data_.resize(data_.size() + cols_, 0.0);
        return rows_++;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    numvec data_;
};

using SparseTerms = std::vector<std::pair<std::size_t, double>>;

/// min c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
struct LpProblem {
    std::size_t num_vars = 0;
    numvec objective;
    DenseMatrix eq_matrix;
    numvec eq_rhs;
    DenseMatrix ineq_matrix;
    numvec ineq_rhs;

    LpProblem() = default;
    explicit LpProblem(std::size_t vars)
        : num_vars(vars), objective(vars, 0.0), eq_matrix(vars), ineq_matrix(vars) {}

    /// Repeated indices accumulate.
    void add_equality(const SparseTerms& terms, double rhs);
    void add_inequality(const SparseTerms& terms, double rhs);

    std::size_t num_eq() const { return eq_matrix.rows(); }
    std::size_t num_ineq() const { return ineq_matrix.rows(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    numvec x;                    ///< empty unless optimal
    double objective_value = 0.0; ///< meaningful only when optimal
    std::size_t iterations = 0;

    bool optimal() const { return status == LpStatus::optimal; }
};

class IterationLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimplexTolerances {
    double feasibility = 1e-7;
    double optimality = 1e-9;
    double pivot = 1e-9;
};

/// Two-phase primal simplex on a dense tableau with Bland's rule.
/// Throws DimensionError on malformed input and IterationLimitError when
/// 50 * (rows + cols) pivots are exceeded.
LpSolution solve_lp(const LpProblem& problem, const SimplexTolerances& tol = {});

/// Largest equality residual and inequality violation of x.
struct LpResiduals {
    double max_eq = 0.0;
    double max_ineq = 0.0;
    double min_x = 0.0;
};
LpResiduals lp_residuals(const LpProblem& problem, std::span<const double> x);

/// Text dump in "objective / eq / ineq" blocks, for debugging.
void write_lp(std::ostream& out, const LpProblem& problem);
LpProblem read_lp(std::istream& in);

} // namespace ucfh
