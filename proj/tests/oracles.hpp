#pragma once

// Reference computations used only by the tests. None of these call into the
// library's evaluation or planning code; they take raw tables and recompute
// things the slow, obvious way.

#include "ucfh/cmdp.hpp"
#include "ucfh/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using ucfh::numvec;

// Small self-contained instance generator (independent of envgen) --------

struct Instance {
    std::size_t S = 0, A = 0, H = 0, s0 = 0;
    numvec p;                      ///< (s,a,s')
    numvec c;                      ///< (h,s,a)
    std::vector<numvec> d;         ///< per constraint (h,s,a)
    numvec l;

    double P(std::size_t s, std::size_t a, std::size_t n) const { return p[(s * A + a) * S + n]; }
    double C(std::size_t h, std::size_t s, std::size_t a) const { return c[(h * S + s) * A + a]; }
    double D(std::size_t i, std::size_t h, std::size_t s, std::size_t a) const {
        return d[i][(h * S + s) * A + a];
    }
};

inline numvec random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    numvec v(n);
    double total = 0.0;
    for (auto& x : v) total += (x = e(rng));
    for (auto& x : v) x /= total;
    return v;
}

inline Instance random_instance(std::mt19937_64& rng, std::size_t S, std::size_t A, std::size_t H,
                                std::size_t I = 0, bool sparse = false) {
    Instance in;
    in.S = S, in.A = A, in.H = H;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    in.s0 = std::uniform_int_distribution<std::size_t>(0, S - 1)(rng);
    in.p.assign(S * A * S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            auto row = random_simplex(rng, S);
            if (sparse && S > 1) {
                // knock out a random entry and renormalize
                const auto k = std::uniform_int_distribution<std::size_t>(0, S - 1)(rng);
                row[k] = 0.0;
                const double t = std::accumulate(row.begin(), row.end(), 0.0);
                for (auto& x : row) x /= t;
            }
            std::copy(row.begin(), row.end(), in.p.begin() + (s * A + a) * S);
        }
    }
    in.c.resize(H * S * A);
    for (auto& x : in.c) x = u(rng);
    for (std::size_t i = 0; i < I; ++i) {
        numvec di(H * S * A);
        for (auto& x : di) x = u(rng);
        in.d.push_back(std::move(di));
        in.l.push_back(static_cast<double>(H)); // caller tightens
    }
    return in;
}

inline ucfh::Cmdp to_cmdp(const Instance& in) {
    ucfh::Transition p(in.S, in.A);
    for (std::size_t s = 0; s < in.S; ++s)
        for (std::size_t a = 0; a < in.A; ++a)
            for (std::size_t n = 0; n < in.S; ++n) p(s, a, n) = in.P(s, a, n);
    ucfh::CostTable c(in.H, in.S, in.A);
    for (std::size_t h = 0; h < in.H; ++h)
        for (std::size_t s = 0; s < in.S; ++s)
            for (std::size_t a = 0; a < in.A; ++a) c(h, s, a) = in.C(h, s, a);
    std::vector<ucfh::Constraint> cons;
    for (std::size_t i = 0; i < in.d.size(); ++i) {
        ucfh::CostTable d(in.H, in.S, in.A);
        for (std::size_t h = 0; h < in.H; ++h)
            for (std::size_t s = 0; s < in.S; ++s)
                for (std::size_t a = 0; a < in.A; ++a) d(h, s, a) = in.D(i, h, s, a);
        cons.push_back({d, in.l[i]});
    }
    return ucfh::make_cmdp(in.s0, p, c, cons);
}

/// Random stochastic policy as a raw (h,s,a) table.
inline numvec random_policy(std::mt19937_64& rng, std::size_t H, std::size_t S, std::size_t A) {
    numvec pi;
    for (std::size_t k = 0; k < H * S; ++k) {
        const auto row = random_simplex(rng, A);
        pi.insert(pi.end(), row.begin(), row.end());
    }
    return pi;
}

inline ucfh::Policy to_policy(const numvec& pi, std::size_t H, std::size_t S, std::size_t A) {
    ucfh::Policy out(H, S, A);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) out(h, s, a) = pi[(h * S + s) * A + a];
    return out;
}

// Dynamic programming -----------------------------------------------------

/// kernel(h, s, a, s') accessor; lets the oracle take stationary or
/// time-varying kernels without the library's KernelView.
using KernelFn = std::function<double(std::size_t, std::size_t, std::size_t, std::size_t)>;

inline KernelFn stationary(const Instance& in) {
    return [&in](std::size_t, std::size_t s, std::size_t a, std::size_t n) { return in.P(s, a, n); };
}

/// V_h(s) of a fixed policy; returns (H+1) x S.
inline std::vector<numvec> evaluate(const Instance& in, const numvec& pi, const numvec& cost,
                                    const KernelFn& k) {
    std::vector<numvec> V(in.H + 1, numvec(in.S, 0.0));
    for (std::size_t hh = in.H; hh-- > 0;) {
        for (std::size_t s = 0; s < in.S; ++s) {
            double v = 0.0;
            for (std::size_t a = 0; a < in.A; ++a) {
                double next = 0.0;
                for (std::size_t n = 0; n < in.S; ++n) next += k(hh, s, a, n) * V[hh + 1][n];
                v += pi[(hh * in.S + s) * in.A + a] * (cost[(hh * in.S + s) * in.A + a] + next);
            }
            V[hh][s] = v;
        }
    }
    return V;
}

/// Bellman-optimal (minimum) value of the unconstrained problem at s0.
inline double optimal_value(const Instance& in) {
    numvec V(in.S, 0.0);
    for (std::size_t hh = in.H; hh-- > 0;) {
        numvec next(in.S);
        for (std::size_t s = 0; s < in.S; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < in.A; ++a) {
                double q = in.C(hh, s, a);
                for (std::size_t n = 0; n < in.S; ++n) q += in.P(s, a, n) * V[n];
                best = std::min(best, q);
            }
            next[s] = best;
        }
        V = next;
    }
    return V[in.s0];
}

/// Optimistic value: min over policies and over per-(h,s,a) kernels in the
/// boxes [lo, hi] intersected with the simplex (restricted to `support`).
/// The inner problem is a fractional knapsack solved by filling the
/// cheapest successors first.
inline double optimistic_value(const Instance& in, const numvec& lo, const numvec& hi,
                               const std::vector<std::vector<std::size_t>>& support) {
    numvec V(in.S, 0.0);
    for (std::size_t hh = in.H; hh-- > 0;) {
        numvec next(in.S);
        for (std::size_t s = 0; s < in.S; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < in.A; ++a) {
                auto succ = support[s * in.A + a];
                std::sort(succ.begin(), succ.end(), [&](auto x, auto y) { return V[x] < V[y]; });
                const std::size_t base = (s * in.A + a) * in.S;
                double mass = 0.0, val = 0.0;
                for (auto n : succ) mass += lo[base + n], val += lo[base + n] * V[n];
                double left = 1.0 - mass;
                if (left < -1e-12) continue; // empty box
                for (auto n : succ) {
                    const double add = std::min(left, hi[base + n] - lo[base + n]);
                    val += add * V[n];
                    left -= add;
                }
                if (left > 1e-12) continue; // box cannot reach total mass 1
                best = std::min(best, in.C(hh, s, a) + val);
            }
            next[s] = best;
        }
        V = next;
    }
    return V[in.s0];
}

/// q_h(s,a) by explicit forward propagation, H x S x A.
inline numvec occupancy(const Instance& in, const numvec& pi, const KernelFn& k) {
    numvec q(in.H * in.S * in.A, 0.0);
    numvec mu(in.S, 0.0);
    mu[in.s0] = 1.0;
    for (std::size_t hh = 0; hh < in.H; ++hh) {
        numvec nxt(in.S, 0.0);
        for (std::size_t s = 0; s < in.S; ++s) {
            for (std::size_t a = 0; a < in.A; ++a) {
                const double m = mu[s] * pi[(hh * in.S + s) * in.A + a];
                q[(hh * in.S + s) * in.A + a] = m;
                for (std::size_t n = 0; n < in.S; ++n) nxt[n] += m * k(hh, s, a, n);
            }
        }
        mu = nxt;
    }
    return q;
}

/// Variance of the total cost by exhaustive trajectory enumeration
/// (first and second moments accumulated over every path).
inline double return_variance(const Instance& in, const numvec& pi, const numvec& cost,
                              const KernelFn& k) {
    double m1 = 0.0, m2 = 0.0;
    std::function<void(std::size_t, std::size_t, double, double)> walk =
        [&](std::size_t hh, std::size_t s, double prob, double acc) {
            if (prob == 0.0) return;
            if (hh == in.H) {
                m1 += prob * acc;
                m2 += prob * acc * acc;
                return;
            }
            for (std::size_t a = 0; a < in.A; ++a) {
                const double pa = pi[(hh * in.S + s) * in.A + a];
                if (pa == 0.0) continue;
                for (std::size_t n = 0; n < in.S; ++n) {
                    walk(hh + 1, n, prob * pa * k(hh, s, a, n),
                         acc + cost[(hh * in.S + s) * in.A + a]);
                }
            }
        };
    walk(0, in.s0, 1.0, 0.0);
    return m2 - m1 * m1;
}

// Brute-force LP by vertex enumeration -------------------------------------

/// Solves A x = b by Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<numvec> gauss_solve(std::vector<numvec> M, numvec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        if (std::abs(M[piv][col]) < 1e-10) return std::nullopt;
        std::swap(M[piv], M[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = M[r][col] / M[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) M[r][k] -= f * M[col][k];
            b[r] -= f * b[col];
        }
    }
    numvec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / M[i][i];
    return x;
}

inline std::size_t matrix_rank(std::vector<numvec> M) {
    if (M.empty()) return 0;
    const std::size_t cols = M[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < M.size(); ++col) {
        std::size_t piv = rank;
        for (std::size_t r = rank; r < M.size(); ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        if (std::abs(M[piv][col]) < 1e-10) continue;
        std::swap(M[piv], M[rank]);
        for (std::size_t r = rank + 1; r < M.size(); ++r) {
            const double f = M[r][col] / M[rank][col];
            for (std::size_t k = col; k < cols; ++k) M[r][k] -= f * M[rank][k];
        }
        ++rank;
    }
    return rank;
}

struct VertexResult {
    bool feasible = false;
    double objective = 0.0;
};

/// min c.x over {Ax = b, Gx <= h, x >= 0}, assuming the optimum is attained
/// (bounded problems). Slacks are added for G, dependent equality rows are
/// dropped, then every basis of the right size is tried.
inline VertexResult vertex_enumeration(const ucfh::LpProblem& lp) {
    const std::size_t n = lp.num_vars, me = lp.num_eq(), mi = lp.num_ineq();
    const std::size_t N = n + mi;
    std::vector<numvec> rows;
    numvec rhs;
    for (std::size_t r = 0; r < me; ++r) {
        numvec row(N, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[j] = lp.eq_matrix(r, j);
        // keep only independent rows
        auto trial = rows;
        trial.push_back(row);
        if (matrix_rank(trial) == rows.size() + 1) {
            rows.push_back(row);
            rhs.push_back(lp.eq_rhs[r]);
        }
    }
    for (std::size_t r = 0; r < mi; ++r) {
        numvec row(N, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[j] = lp.ineq_matrix(r, j);
        row[n + r] = 1.0;
        rows.push_back(row);
        rhs.push_back(lp.ineq_rhs[r]);
    }
    const std::size_t m = rows.size();
    numvec cost(N, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];

    VertexResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> basis(m);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t depth) {
        if (depth == m) {
            std::vector<numvec> B(m, numvec(m));
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t k = 0; k < m; ++k) B[r][k] = rows[r][basis[k]];
            const auto xb = gauss_solve(B, rhs);
            if (!xb) return;
            double obj = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                if ((*xb)[k] < -1e-9) return;
                obj += cost[basis[k]] * (*xb)[k];
            }
            if (obj < best.objective) {
                best.objective = obj;
                best.feasible = true;
            }
            return;
        }
        for (std::size_t j = start; j + (m - depth) <= N; ++j) {
            basis[depth] = j;
            choose(j + 1, depth + 1);
        }
    };
    if (m == 0) {
        best.feasible = true;
        best.objective = 0.0;
    } else {
        choose(0, 0);
    }
    return best;
}

} // namespace oracle
