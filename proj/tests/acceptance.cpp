// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. argv[1] is a scratch directory for CLI runs.

#include "oracles.hpp"

#include "ucfh/confidence.hpp"
#include "ucfh/diagnostics.hpp"
#include "ucfh/environment.hpp"
#include "ucfh/learner.hpp"
#include "ucfh/planner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

using namespace ucfh;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

/// Constrained random instance with threshold midway between the smallest
/// achievable constraint value and its value at the unconstrained optimum.
Cmdp constrained_instance(std::mt19937_64& rng, std::size_t S, std::size_t A, std::size_t H) {
    auto in = oracle::random_instance(rng, S, A, H, 1, true);
    auto m = oracle::to_cmdp(in);
    const auto free = solve_cmdp_exact(m);
    Cmdp d_only = m;
    d_only.objective_cost = m.constraints[0].cost;
    d_only.constraints.clear();
    const auto low = solve_cmdp_exact(d_only);
    m.constraints[0].threshold = 0.5 * (low.objective_value + free.constraint_values[0]);
    return m;
}

numvec random_kernel_rows(std::mt19937_64& rng, std::size_t rows, std::size_t S) {
    numvec out;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = oracle::random_simplex(rng, S);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

std::string run_cli(const std::string& args, int* status) {
    const std::string cmd = std::string(UCFH_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("cannot start " + cmd);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int rc = pclose(pipe);
    if (status) *status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Value printed after `key ` on its own line.
double parse_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
    }
    throw std::runtime_error("missing '" + key + "' in CLI output");
}

/// Independent hand evaluation of 6|S||A| m log2(H/w_min) log2(|S||A|).
double hand_theorem1(double S, double A, double H, double C, double eps, double delta) {
    const double w_min = eps / (4.0 * H * S * A);
    const double n_max = S * A * std::log2(S * H / w_min);
    const double dp = delta / (2.0 * n_max * C);
    const double ll = std::log2(std::log2(H));
    const double lg = std::log2(8.0 * H * H * S * S * A / eps);
    const double m = 2304.0 * C * C * H * H / (eps * eps) * ll * ll * lg * lg * std::log(4.0 / dp);
    return 6.0 * S * A * m * std::log2(H / w_min) * std::log2(S * A);
}

int phase_bound_violations = 0;
int learning_runs = 0;

LearningTrace checked_run(Environment& env, const Hyperparams& hp, std::size_t episodes,
                          std::uint64_t seed) {
    ++learning_runs;
    try {
        auto trace = run_uc_cfh(env, hp, episodes, seed);
        if (trace.phases.size() > hp.phase_cap()) ++phase_bound_violations;
        return trace;
    } catch (const PhaseBoundViolation&) {
        ++phase_bound_violations;
        throw;
    }
}

} // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ucfh_acceptance";
    fs::create_directories(work);

    report(1, "LP vs Bellman on 50 unconstrained instances", [] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(101);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const std::size_t S = 1 + rng() % 4, A = 1 + rng() % 3, H = 1 + rng() % 4;
            const auto in = oracle::random_instance(rng, S, A, H, 0, i % 2 == 1);
            const auto plan = solve_cmdp_exact(oracle::to_cmdp(in));
            if (!plan.feasible) return Outcome{false, "exact LP reported infeasible"};
            worst = std::max(worst, std::abs(plan.objective_value - oracle::optimal_value(in)));
        }
        const double secs = seconds_since(t0);
        return Outcome{worst <= 1e-6 && secs < 10.0,
                       fmt("max |LP - Bellman| = %.3g (tol 1e-6)", worst) + fmt(", %.2fs < 10s", secs)};
    });

    report(2, "occupancy identity on 100 (model, policy) pairs", [] {
        std::mt19937_64 rng(102);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const std::size_t S = 1 + rng() % 5, A = 1 + rng() % 3, H = 1 + rng() % 6;
            const auto in = oracle::random_instance(rng, S, A, H, 0, i % 2 == 0);
            const auto raw = oracle::random_policy(rng, H, S, A);
            const auto m = oracle::to_cmdp(in);
            const auto q = occupancy_from_policy(m, oracle::to_policy(raw, H, S, A));
            const double v = oracle::evaluate(in, raw, in.c, oracle::stationary(in))[0][in.s0];
            worst = std::max(worst, std::abs(occupancy_cost(q, m.objective_cost) - v));
        }
        return Outcome{worst <= 1e-9, fmt("max |sum q c - V_1| = %.3g (tol 1e-9)", worst)};
    });

    report(3, "randomized optimum on the two-action bandit", [] {
        Transition p(1, 2);
        p(0, 0, 0) = p(0, 1, 0) = 1.0;
        CostTable c(1, 1, 2), d(1, 1, 2);
        c(0, 0, 1) = 1.0;
        d(0, 0, 0) = 1.0;
        const auto plan = solve_cmdp_exact(make_cmdp(0, p, c, {{d, 0.5}}));
        const double p0 = plan.policy(0, 0, 0), p1 = plan.policy(0, 0, 1);
        const bool randomized = p0 > 1e-9 && p1 > 1e-9;
        const bool ok = plan.feasible && std::abs(plan.objective_value - 0.5) <= 1e-9 && randomized;
        return Outcome{ok, fmt("objective %.12g", plan.objective_value) +
                               fmt(", pi = (%.6g, ", p0) + fmt("%.6g)", p1)};
    });

    report(4, "extended LP with zero radius matches exact LP on 25 instances", [] {
        std::mt19937_64 rng(104);
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const std::size_t S = 2 + rng() % 3, A = 1 + rng() % 3, H = 1 + rng() % 4;
            const auto m = constrained_instance(rng, S, A, H);
            const auto exact = solve_cmdp_exact(m);
            const auto ext = constrained_extended_lp(exact_confidence_set(m.transition), m);
            if (!exact.feasible || !ext.feasible) return Outcome{false, "infeasible solve"};
            worst = std::max(worst, std::abs(ext.objective_value - exact.objective_value));
        }
        return Outcome{worst <= 1e-6, fmt("max |extended - exact| = %.3g (tol 1e-6)", worst)};
    });

    report(5, "optimism on 100 instances with covering confidence sets", [] {
        std::mt19937_64 rng(105);
        double worst = -std::numeric_limits<double>::infinity();
        int used = 0, draws = 0;
        auto engine = make_stream(105, 0);
        while (used < 100) {
            ++draws;
            const std::size_t S = 2 + rng() % 3, A = 1 + rng() % 2, H = 2 + rng() % 3;
            const auto m = constrained_instance(rng, S, A, H);
            // counts from real samples, then the Bernstein set at a moderate delta
            CountTable counts(S, A);
            const std::size_t n = 20 + rng() % 300;
            for (std::size_t s = 0; s < S; ++s)
                for (std::size_t a = 0; a < A; ++a)
                    for (std::size_t k = 0; k < n; ++k) {
                        const auto next = sample_index(m.transition.row(s, a), uniform01(engine));
                        ++counts.n_sa(s, a);
                        ++counts.n_sas(s, a, next);
                    }
            const auto cs = build_confidence_set(counts, 0.2);
            if (!contains_kernel(cs, m.transition, m).all) continue;
            ++used;
            const auto exact = solve_cmdp_exact(m);
            const auto opt = constrained_extended_lp(cs, m);
            if (!opt.feasible) return Outcome{false, "extended LP infeasible with truth inside"};
            worst = std::max(worst, opt.objective_value - exact.objective_value);
        }
        return Outcome{worst <= 1e-6,
                       fmt("max (optimistic - V*) = %.3g (tol 1e-6)", worst) +
                           fmt(", %g draws for 100 covering sets", draws)};
    });

    report(6, "Bernstein coverage at n = 50, delta' = 0.05, 2000 trials", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto m = generate_random_cmdp(4, 2, 1, 3, 0, 106).model;
        const double dp = 0.05;
        const int trials = 2000;
        const std::size_t pairs = 8;
        std::vector<int> misses(pairs, 0);
        auto engine = make_stream(106, 1);
        for (int t = 0; t < trials; ++t) {
            CountTable counts(4, 2);
            for (std::size_t s = 0; s < 4; ++s)
                for (std::size_t a = 0; a < 2; ++a)
                    for (int i = 0; i < 50; ++i) {
                        const auto next = sample_index(m.transition.row(s, a), uniform01(engine));
                        ++counts.n_sa(s, a);
                        ++counts.n_sas(s, a, next);
                    }
            const auto member = contains_kernel(build_confidence_set(counts, dp), m.transition, m);
            for (std::size_t k = 0; k < pairs; ++k) misses[k] += member.per_pair[k] ? 0 : 1;
        }
        const double bound = dp * static_cast<double>(m.max_successors);
        const double limit = bound + 3.0 * std::sqrt(bound * (1.0 - bound) / trials);
        double worst = 0.0;
        for (int x : misses) worst = std::max(worst, static_cast<double>(x) / trials);
        const double secs = seconds_since(t0);
        return Outcome{worst <= limit && secs < 30.0,
                       fmt("max failure rate %.4f", worst) + fmt(" <= %.4f", limit) +
                           fmt(", %.2fs < 30s", secs)};
    });

    report(7, "value-difference identity on 100 draws", [] {
        std::mt19937_64 rng(107);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const std::size_t S = 2 + rng() % 4, A = 1 + rng() % 3, H = 1 + rng() % 5;
            const auto in = oracle::random_instance(rng, S, A, H);
            const auto m = oracle::to_cmdp(in);
            const auto pi = oracle::to_policy(oracle::random_policy(rng, H, S, A), H, S, A);
            TimeVaryingKernel kb(H, S, A);
            const auto rows = random_kernel_rows(rng, H * S * A, S);
            for (std::size_t h = 0; h < H; ++h)
                for (std::size_t s = 0; s < S; ++s)
                    for (std::size_t a = 0; a < A; ++a)
                        for (std::size_t n = 0; n < S; ++n)
                            kb(h, s, a, n) = rows[((h * S + s) * A + a) * S + n];
            const auto d = value_difference_diagnostic(m, pi, m.transition, kb, m.objective_cost);
            worst = std::max(worst, d.residual());
        }
        return Outcome{worst <= 1e-9, fmt("max residual %.3g (tol 1e-9)", worst)};
    });

    report(8, "interval gap inequality on 10^4 draws", [] {
        std::mt19937_64 rng(108);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int violations = 0;
        double min_slack = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 10000; ++i) {
            const double p_bar = u(rng);
            const double dp = 1e-6 + (1.0 - 2e-6) * u(rng);
            const auto n = static_cast<CountTable::count_t>(std::pow(10.0, 5.0 * u(rng)));
            const double r = bernstein_radius(p_bar, n, dp);
            const double lo = std::max(0.0, p_bar - r), hi = std::min(1.0, p_bar + r);
            const double p = lo + (hi - lo) * u(rng);
            const double pt = i % 2 ? lo + (hi - lo) * u(rng) : (u(rng) < 0.5 ? lo : hi);
            const auto check = interval_gap_check(pt, p, p_bar, n, dp);
            violations += check.holds ? 0 : 1;
            min_slack = std::min(min_slack, check.slack);
        }
        return Outcome{violations == 0, fmt("%g violations", violations) + fmt(", min slack %.3g", min_slack)};
    });

    report(9, "variance recursion on 100 draws", [] {
        std::mt19937_64 rng(109);
        double worst = 0.0;
        bool range_ok = true;
        for (int i = 0; i < 100; ++i) {
            const std::size_t S = 2 + rng() % 4, A = 1 + rng() % 3, H = 1 + rng() % 6;
            const auto in = oracle::random_instance(rng, S, A, H);
            const auto m = oracle::to_cmdp(in);
            const auto pi = oracle::to_policy(oracle::random_policy(rng, H, S, A), H, S, A);
            const auto d = variance_bellman_diagnostic(m, pi, m.transition, m.objective_cost);
            worst = std::max(worst, d.residual);
            for (std::size_t s = 0; s < S; ++s) {
                const double v = d.variance(0, s);
                range_ok = range_ok && v >= 0.0 && v <= static_cast<double>(H * H);
            }
        }
        return Outcome{worst <= 1e-9 && range_ok,
                       fmt("max residual %.3g (tol 1e-9)", worst) +
                           (range_ok ? ", 0 <= V_1 <= H^2 everywhere" : ", V_1 out of [0, H^2]")};
    });

    // Criterion 11's learning runs come first so that criterion 10 covers them.
    Outcome learning;
    const auto t11 = std::chrono::steady_clock::now();
    try {
        const auto gen = make_chain_cmdp(4, 5);
        const auto hp = compute_hyperparams(0.1, 0.1, {4, 2, 5}, gen.model.max_successors, 1e-6);
        const double v_star = solve_cmdp_exact(gen.model).objective_value;
        int good = 0;
        std::string gaps;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Environment env(gen.model, seed);
            const auto trace = checked_run(env, hp, 20000, seed);
            const Policy* pi = trace.final_policy();
            if (!pi) continue;
            const auto v = epsilon_optimality_verdict(gen.model, *pi, 0.1, v_star);
            good += v.is_eps_optimal ? 1 : 0;
        }
        const double secs = seconds_since(t11);

        bool bounds_ok = true;
        double worst_rel = 0.0;
        struct Set { int S, A, H, C; double eps, delta; };
        for (const Set& p : {Set{4, 2, 5, 2, 0.4, 0.1}, Set{6, 3, 8, 3, 0.2, 0.05}}) {
            int rc = 0;
            char args[256];
            std::snprintf(args, sizeof args,
                          "bounds --states %d --actions %d --horizon %d --succ %d --epsilon %g --delta %g",
                          p.S, p.A, p.H, p.C, p.eps, p.delta);
            const auto out = run_cli(args, &rc);
            const double printed = parse_value(out, "theorem1_episode_bound");
            const double hand = hand_theorem1(p.S, p.A, p.H, p.C, p.eps, p.delta);
            const double rel = std::abs(printed - hand) / hand;
            worst_rel = std::max(worst_rel, rel);
            bounds_ok = bounds_ok && rc == 0 && rel <= 1e-12;
        }
        learning.pass = good >= 9 && secs < 300.0 && bounds_ok;
        learning.detail = fmt("%g/10 seeds eps-optimal (need 9)", good) + fmt(", %.1fs < 300s", secs) +
                          fmt("; bounds rel. error %.2g (tol 1e-12)", worst_rel);
    } catch (const std::exception& e) {
        learning = {false, std::string("exception: ") + e.what()};
    }

    report(10, "phase count never exceeds ceil(N_max)", [] {
        // extra runs on random instances in addition to the chain runs above
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto gen = generate_random_cmdp(4, 2, 5, 2, 1, 1000 + seed);
            const auto hp = compute_hyperparams(0.2, 0.1, {4, 2, 5}, 2, 1e-6);
            Environment env(gen.model, seed);
            try {
                checked_run(env, hp, 5000, seed);
            } catch (const PhaseBoundViolation&) {
            }
        }
        return Outcome{phase_bound_violations == 0 && learning_runs > 0,
                       fmt("%g violations", phase_bound_violations) + fmt(" over %g learning runs", learning_runs)};
    });

    report(11, "desk-scale learning on the chain and the episode bound", [&] { return learning; });

    report(12, "learn with a fixed seed writes byte-identical CSV", [&] {
        const auto inst = (work / "chain.json").string();
        int rc = 0;
        run_cli("gen --chain 4 --horizon 5 --out " + inst, &rc);
        if (rc != 0) return Outcome{false, "gen failed"};
        std::string csv[2];
        for (int k = 0; k < 2; ++k) {
            const auto dir = work / ("run" + std::to_string(k));
            fs::remove_all(dir);
            run_cli("learn --instance " + inst + " --m-scale 1e-6 --max-episodes 5000 --seed 11 --out-dir " +
                        dir.string(),
                    &rc);
            if (rc != 0) return Outcome{false, "learn failed"};
            csv[k] = read_file(dir / "trace.csv");
        }
        const bool same = !csv[0].empty() && csv[0] == csv[1];
        return Outcome{same, fmt("%g bytes", static_cast<double>(csv[0].size())) +
                                 (same ? ", identical" : ", differ")};
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
