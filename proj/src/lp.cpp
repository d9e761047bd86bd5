#include "ucfh/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace ucfh {

namespace {

void add_terms(DenseMatrix& matrix, std::size_t row, const SparseTerms& terms) {
    for (const auto& [col, coeff] : terms) {
        if (col >= matrix.cols()) throw DimensionError("LP term references unknown variable");
        matrix(row, col) += coeff;
    }
}

/// Dense simplex tableau. Row `m` holds the reduced costs; the last column
/// holds the right-hand side (and minus the objective in the cost row).
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (n_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, n_); }
    double rhs(std::size_t r) const { return at(r, n_); }
    double& cost(std::size_t c) { return at(m_, c); }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }
    const std::vector<std::size_t>& basis() const { return basis_; }

    /// Sets the cost row to c - c_B B^{-1} A for the current basis.
    void price(std::span<const double> costs) {
        for (std::size_t c = 0; c <= n_; ++c) cost(c) = c < n_ ? costs[c] : 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
            const double cb = costs[basis_[r]];
            if (cb == 0.0) continue;
            for (std::size_t c = 0; c <= n_; ++c) cost(c) -= cb * at(r, c);
        }
    }

    void pivot(std::size_t pr, std::size_t pc) {
        const std::size_t width = n_ + 1;
        double* prow = &data_[pr * width];
        const double inv = 1.0 / prow[pc];
        for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            double* row = &data_[r * width];
            const double factor = row[pc];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < width; ++c) {
                if (prow[c] != 0.0) row[c] -= factor * prow[c];
            }
            row[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    /// Runs Bland's rule over columns [0, allowed). Returns false if unbounded.
    bool optimize(std::size_t allowed, const SimplexTolerances& tol, std::size_t& iterations,
                  std::size_t cap) {
        for (;;) {
            std::size_t enter = allowed;
            for (std::size_t c = 0; c < allowed; ++c) {
                if (at(m_, c) < -tol.optimality) {
                    enter = c;
                    break;
                }
            }
            if (enter == allowed) return true;

            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double a = at(r, enter);
                if (a <= tol.pivot) continue;
                const double ratio = std::max(0.0, rhs(r)) / a;
                if (leave == m_ || ratio < best - 1e-12) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + 1e-12 && basis_[r] < basis_[leave]) {
                    best = std::min(best, ratio);
                    leave = r;
                }
            }
            if (leave == m_) return false;
            if (++iterations > cap) {
                throw IterationLimitError("simplex iteration cap exceeded");
            }
            pivot(leave, enter);
        }
    }

    void drop_row(std::size_t r) {
        const std::size_t width = n_ + 1;
        data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * width),
                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --m_;
    }

    /// Copy keeping only the first `cols` columns (plus rhs).
    Tableau truncated(std::size_t cols) const {
        Tableau out(m_, cols);
        for (std::size_t r = 0; r <= m_; ++r) {
            for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = at(r, c);
            out.at(r, cols) = at(r, n_);
        }
        out.basis_ = basis_;
        return out;
    }

private:
    std::size_t m_, n_;
    numvec data_;
    std::vector<std::size_t> basis_;
};

} // namespace

void LpProblem::add_equality(const SparseTerms& terms, double rhs) {
    add_terms(eq_matrix, eq_matrix.append_row(), terms);
    eq_rhs.push_back(rhs);
}

void LpProblem::add_inequality(const SparseTerms& terms, double rhs) {
    add_terms(ineq_matrix, ineq_matrix.append_row(), terms);
    ineq_rhs.push_back(rhs);
}

const char* to_string(LpStatus status) {
    switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

LpSolution solve_lp(const LpProblem& problem, const SimplexTolerances& tol) {
    const std::size_t n = problem.num_vars;
    if (problem.objective.size() != n || problem.eq_matrix.cols() != n ||
        problem.ineq_matrix.cols() != n) {
        throw DimensionError("LP matrix column counts must equal num_vars");
    }
    if (problem.eq_rhs.size() != problem.num_eq() ||
        problem.ineq_rhs.size() != problem.num_ineq()) {
        throw DimensionError("LP rhs lengths must match row counts");
    }

    const std::size_t n_eq = problem.num_eq(), n_ineq = problem.num_ineq();
    const std::size_t m = n_eq + n_ineq;
    const std::size_t n_struct = n + n_ineq; // originals then slacks

    // rows needing an artificial: all equalities, inequalities with b < 0
    std::vector<std::size_t> artificial_rows;
    for (std::size_t r = 0; r < n_eq; ++r) artificial_rows.push_back(r);
    for (std::size_t r = 0; r < n_ineq; ++r) {
        if (problem.ineq_rhs[r] < 0.0) artificial_rows.push_back(n_eq + r);
    }
    const std::size_t n_total = n_struct + artificial_rows.size();

    Tableau tab(m, n_total);
    for (std::size_t r = 0; r < n_eq; ++r) {
        const double sign = problem.eq_rhs[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = sign * problem.eq_matrix(r, c);
        tab.rhs(r) = sign * problem.eq_rhs[r];
    }
    for (std::size_t r = 0; r < n_ineq; ++r) {
        const std::size_t row = n_eq + r;
        const double sign = problem.ineq_rhs[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n; ++c) tab.at(row, c) = sign * problem.ineq_matrix(r, c);
        tab.at(row, n + r) = sign;
        tab.rhs(row) = sign * problem.ineq_rhs[r];
        tab.basis()[row] = n + r;
    }
    for (std::size_t k = 0; k < artificial_rows.size(); ++k) {
        tab.at(artificial_rows[k], n_struct + k) = 1.0;
        tab.basis()[artificial_rows[k]] = n_struct + k;
    }

    const std::size_t cap = 50 * (m + n_total);
    LpSolution solution;

    if (!artificial_rows.empty()) {
        numvec phase1(n_total, 0.0);
        std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(n_struct), phase1.end(), 1.0);
        tab.price(phase1);
        tab.optimize(n_total, tol, solution.iterations, cap);
        double infeasibility = 0.0;
        for (std::size_t r = 0; r < tab.rows(); ++r) {
            if (tab.basis()[r] >= n_struct) infeasibility += std::max(0.0, tab.rhs(r));
        }
        if (infeasibility > tol.feasibility) {
            solution.status = LpStatus::infeasible;
            return solution;
        }
        // drive zero-level artificials out of the basis; drop redundant rows
        for (std::size_t r = tab.rows(); r-- > 0;) {
            if (tab.basis()[r] < n_struct) continue;
            std::size_t col = n_struct;
            for (std::size_t c = 0; c < n_struct; ++c) {
                if (std::abs(tab.at(r, c)) > tol.pivot) {
                    col = c;
                    break;
                }
            }
            if (col < n_struct) {
                tab.pivot(r, col);
            } else {
                tab.drop_row(r);
            }
        }
        tab = tab.truncated(n_struct);
    }

    numvec phase2(n_struct, 0.0);
    std::copy(problem.objective.begin(), problem.objective.end(), phase2.begin());
    tab.price(phase2);
    if (!tab.optimize(n_struct, tol, solution.iterations, cap)) {
        solution.status = LpStatus::unbounded;
        return solution;
    }

    solution.status = LpStatus::optimal;
    solution.x.assign(n, 0.0);
    for (std::size_t r = 0; r < tab.rows(); ++r) {
        const std::size_t b = tab.basis()[r];
        if (b < n) solution.x[b] = std::max(0.0, tab.rhs(r));
    }
    solution.objective_value = 0.0;
    for (std::size_t c = 0; c < n; ++c) solution.objective_value += problem.objective[c] * solution.x[c];
    return solution;
}

LpResiduals lp_residuals(const LpProblem& problem, std::span<const double> x) {
    LpResiduals out;
    for (std::size_t r = 0; r < problem.num_eq(); ++r) {
        double lhs = 0.0;
        for (std::size_t c = 0; c < problem.num_vars; ++c) lhs += problem.eq_matrix(r, c) * x[c];
        out.max_eq = std::max(out.max_eq, std::abs(lhs - problem.eq_rhs[r]));
    }
    for (std::size_t r = 0; r < problem.num_ineq(); ++r) {
        double lhs = 0.0;
        for (std::size_t c = 0; c < problem.num_vars; ++c) lhs += problem.ineq_matrix(r, c) * x[c];
        out.max_ineq = std::max(out.max_ineq, lhs - problem.ineq_rhs[r]);
    }
    for (double v : x) out.min_x = std::min(out.min_x, v);
    return out;
}

namespace {

void write_number(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

void write_block(std::ostream& out, const char* name, const DenseMatrix& matrix,
                 const numvec& rhs, const char* relation) {
    out << name << ' ' << matrix.rows() << '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (double v : matrix.row(r)) {
            write_number(out, v);
            out << ' ';
        }
        out << relation << ' ';
        write_number(out, rhs[r]);
        out << '\n';
    }
}

void expect_token(std::istream& in, const std::string& expected) {
    std::string token;
    if (!(in >> token) || token != expected) {
        throw std::runtime_error("LP dump: expected '" + expected + "', got '" + token + "'");
    }
}

void read_block(std::istream& in, const char* name, const char* relation, LpProblem& lp,
                bool equality) {
    expect_token(in, name);
    std::size_t rows = 0;
    in >> rows;
    for (std::size_t r = 0; r < rows; ++r) {
        SparseTerms terms;
        for (std::size_t c = 0; c < lp.num_vars; ++c) {
            double v = 0.0;
            in >> v;
            if (v != 0.0) terms.emplace_back(c, v);
        }
        expect_token(in, relation);
        double rhs = 0.0;
        in >> rhs;
        if (!in) throw std::runtime_error("LP dump: truncated row");
        equality ? lp.add_equality(terms, rhs) : lp.add_inequality(terms, rhs);
    }
}

} // namespace

void write_lp(std::ostream& out, const LpProblem& problem) {
    out << "vars " << problem.num_vars << '\n' << "objective\n";
    for (std::size_t c = 0; c < problem.num_vars; ++c) {
        if (c) out << ' ';
        write_number(out, problem.objective[c]);
    }
    out << '\n';
    write_block(out, "eq", problem.eq_matrix, problem.eq_rhs, "=");
    write_block(out, "ineq", problem.ineq_matrix, problem.ineq_rhs, "<=");
}

LpProblem read_lp(std::istream& in) {
    expect_token(in, "vars");
    std::size_t vars = 0;
    in >> vars;
    LpProblem lp(vars);
    expect_token(in, "objective");
    for (auto& c : lp.objective) in >> c;
    read_block(in, "eq", "=", lp, true);
    read_block(in, "ineq", "<=", lp, false);
    return lp;
}

} // namespace ucfh
