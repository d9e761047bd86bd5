// ucfh: generate CMDP instances, solve them exactly, run the learner and
// print diagnostics.
//
// Exit codes: 0 ok, 2 usage, 3 infeasible, 4 numerical failure.

#include "ucfh/cmdp.hpp"
#include "ucfh/confidence.hpp"
#include "ucfh/diagnostics.hpp"
#include "ucfh/environment.hpp"
#include "ucfh/io.hpp"
#include "ucfh/learner.hpp"
#include "ucfh/lp.hpp"
#include "ucfh/planner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ucfh;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_infeasible = 3;
constexpr int exit_numerical = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path default_output_dir() {
    if (const char* dir = std::getenv("UCFH_OUTPUT_DIR"); dir && *dir) return dir;
    return ".";
}

/// Relative paths are resolved against the default output directory.
fs::path output_path(const std::string& given, const char* fallback_name) {
    fs::path p = given.empty() ? fs::path(fallback_name) : fs::path(given);
    if (p.is_relative() && std::getenv("UCFH_OUTPUT_DIR")) p = default_output_dir() / p;
    return p;
}

void write_file(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << contents;
}

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

Cmdp load_instance(const std::string& path) {
    Cmdp model;
    try {
        model = cmdp_from_json(read_json(path));
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
    const auto report = validate_cmdp(model, 1e-9);
    if (!report.ok()) throw UsageError(path + ": " + report.violations.front());
    return model;
}

std::string num(double v) { return format_double(v); }

PlanResult solve_or_throw(const Cmdp& model) {
    PlanResult plan;
    try {
        plan = solve_cmdp_exact(model);
    } catch (const IterationLimitError& e) {
        throw NumericalError(e.what());
    }
    if (!plan.feasible) {
        throw InfeasibleError(std::string("instance is infeasible (LP status ") +
                              to_string(plan.status) + ")");
    }
    return plan;
}

void print_instance_summary(const Cmdp& model) {
    std::printf("states %zu actions %zu horizon %zu initial_state %zu C %zu constraints %zu\n",
                model.num_states, model.num_actions, model.horizon, model.initial_state,
                model.max_successors, model.num_constraints());
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
        std::printf("threshold_%zu %s\n", i, num(model.constraints[i].threshold).c_str());
    }
}

// gen -----------------------------------------------------------------------

struct GenConfig {
    std::size_t states = 4, actions = 2, horizon = 5, succ = 2, constraints = 1;
    std::uint64_t seed = 0;
    std::size_t chain = 0;
    double threshold = -1.0;
    std::string out;
};

int cmd_gen(const GenConfig& cfg) {
    GeneratedCmdp gen;
    try {
        if (cfg.chain > 0) {
            std::optional<double> threshold;
            if (cfg.threshold >= 0.0) threshold = cfg.threshold;
            gen = make_chain_cmdp(cfg.chain, cfg.horizon, threshold);
        } else {
            gen = generate_random_cmdp(cfg.states, cfg.actions, cfg.horizon, cfg.succ,
                                       cfg.constraints, cfg.seed);
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto report = validate_cmdp(gen.model);
    if (!report.ok()) throw NumericalError("generated instance invalid: " + report.violations.front());
    const auto path = output_path(cfg.out, "instance.json");
    write_file(path, cmdp_to_json(gen.model, gen.info).dump(2) + "\n");
    print_instance_summary(gen.model);
    std::printf("wrote %s\n", path.string().c_str());
    return exit_ok;
}

// solve ---------------------------------------------------------------------

struct SolveConfig {
    std::string instance;
    std::string out;
};

int cmd_solve(const SolveConfig& cfg) {
    const auto model = load_instance(cfg.instance);
    const auto plan = solve_or_throw(model);
    std::printf("V* %s\n", num(plan.objective_value).c_str());
    for (std::size_t i = 0; i < plan.constraint_values.size(); ++i) {
        std::printf("constraint_%zu %s (threshold %s)\n", i, num(plan.constraint_values[i]).c_str(),
                    num(model.constraints[i].threshold).c_str());
    }
    if (!cfg.out.empty()) {
        const auto path = output_path(cfg.out, "policy.json");
        write_file(path, policy_to_json(plan.policy).dump(2) + "\n");
        std::printf("wrote %s\n", path.string().c_str());
    }
    return exit_ok;
}

// learn ---------------------------------------------------------------------

struct LearnConfig {
    std::string instance;
    double epsilon = 0.1, delta = 0.1, m_scale = 1e-6;
    std::size_t max_episodes = 20000;
    std::uint64_t seed = 0;
    std::size_t replicates = 1;
    std::string out_dir;
};

struct ReplicateResult {
    std::uint64_t seed = 0;
    LearningTrace trace;
    std::optional<Verdict> verdict;
    std::string error; ///< phase-bound violation, if any
};

ReplicateResult run_replicate(const Cmdp& model, const Hyperparams& hp, const LearnConfig& cfg,
                              double v_star, std::uint64_t seed) {
    ReplicateResult result;
    result.seed = seed;
    Environment env(model, seed);
    try {
        result.trace = run_uc_cfh(env, hp, cfg.max_episodes, seed);
    } catch (const PhaseBoundViolation& e) {
        result.error = e.what();
        return result;
    }
    if (const Policy* pi = result.trace.final_policy()) {
        result.verdict = epsilon_optimality_verdict(model, *pi, cfg.epsilon, v_star);
    }
    return result;
}

int cmd_learn(const LearnConfig& cfg) {
    const auto model = load_instance(cfg.instance);
    if (cfg.replicates < 1) throw UsageError("--replicates must be at least 1");
    Hyperparams hp;
    try {
        hp = compute_hyperparams(cfg.epsilon, cfg.delta,
                                 {model.num_states, model.num_actions, model.horizon},
                                 model.max_successors, cfg.m_scale);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto plan = solve_or_throw(model);

    std::vector<ReplicateResult> results;
    if (cfg.replicates == 1) {
        results.push_back(run_replicate(model, hp, cfg, plan.objective_value, cfg.seed));
    } else {
        // Independent seeds on independent environments; collected in seed order.
        std::vector<std::future<ReplicateResult>> jobs;
        for (std::size_t r = 0; r < cfg.replicates; ++r) {
            jobs.push_back(std::async(std::launch::async, run_replicate, std::cref(model),
                                      std::cref(hp), std::cref(cfg), plan.objective_value,
                                      cfg.seed + r));
        }
        for (auto& job : jobs) results.push_back(job.get());
    }

    const fs::path dir = cfg.out_dir.empty() ? default_output_dir() : fs::path(cfg.out_dir);
    const auto I = model.num_constraints();
    std::ostringstream summary;
    summary << "seed,episodes,phases,stop_reason,objective_gap";
    for (std::size_t i = 0; i < I; ++i) summary << ",constraint_gap_" << i;
    summary << ",eps_optimal\n";

    bool any_failure = false;
    for (const auto& r : results) {
        const std::string suffix = cfg.replicates == 1 ? "" : "_seed" + std::to_string(r.seed);
        if (!r.error.empty()) {
            std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(r.seed),
                         r.error.c_str());
            any_failure = true;
            continue;
        }
        std::ostringstream csv;
        write_trace_csv(csv, r.trace, I);
        write_file(dir / ("trace" + suffix + ".csv"), csv.str());
        write_file(dir / ("phases" + suffix + ".json"), trace_phases_json(r.trace).dump(2) + "\n");

        summary << r.seed << ',' << r.trace.episodes.size() << ',' << r.trace.phases.size() << ','
                << to_string(r.trace.stop) << ',';
        if (r.verdict) {
            summary << num(r.verdict->objective_gap);
            for (double g : r.verdict->constraint_gaps) summary << ',' << num(g);
            summary << ',' << (r.verdict->is_eps_optimal ? 1 : 0) << '\n';
        } else {
            summary << "nan";
            for (std::size_t i = 0; i < I; ++i) summary << ",nan";
            summary << ",0\n";
        }

        std::printf("seed %llu: episodes %zu phases %zu (cap %zu) stop %s%s\n",
                    static_cast<unsigned long long>(r.seed), r.trace.episodes.size(),
                    r.trace.phases.size(), hp.phase_cap(), to_string(r.trace.stop),
                    r.trace.failed() ? " FAILED" : "");
        if (r.verdict) {
            std::printf("  objective_gap %s", num(r.verdict->objective_gap).c_str());
            for (std::size_t i = 0; i < I; ++i) {
                std::printf(" constraint_gap_%zu %s", i, num(r.verdict->constraint_gaps[i]).c_str());
            }
            std::printf(" eps_optimal %s\n", r.verdict->is_eps_optimal ? "yes" : "no");
        }
        any_failure = any_failure || r.trace.failed();
    }
    write_file(dir / "summary.csv", summary.str());
    std::printf("V* %s m %s output %s\n", num(plan.objective_value).c_str(), num(hp.m).c_str(),
                dir.string().c_str());
    return any_failure ? exit_numerical : exit_ok;
}

// bounds --------------------------------------------------------------------

struct BoundsConfig {
    std::size_t states = 4, actions = 2, horizon = 5, succ = 2;
    double epsilon = 0.1, delta = 0.1;
};

int cmd_bounds(const BoundsConfig& cfg) {
    Hyperparams hp;
    try {
        hp = compute_hyperparams(cfg.epsilon, cfg.delta, {cfg.states, cfg.actions, cfg.horizon},
                                 cfg.succ);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto b = theoretical_bounds(hp);
    std::printf("w_min %s\n", num(hp.w_min).c_str());
    std::printf("delta_prime %s\n", num(hp.delta_prime).c_str());
    std::printf("N_max %s\n", num(hp.n_max_phases).c_str());
    std::printf("m %s\n", num(hp.m_unscaled).c_str());
    std::printf("E_max %s\n", num(b.e_max).c_str());
    std::printf("N %s\n", num(b.n).c_str());
    std::printf("lemma3_bound %s\n", num(b.lemma3_bound).c_str());
    std::printf("theorem1_episode_bound %s\n", num(b.theorem1_episode_bound).c_str());
    return exit_ok;
}

// diagnose ------------------------------------------------------------------

struct DiagnoseConfig {
    std::string instance, policy, counts;
    double epsilon = 0.1, delta = 0.1, m_scale = 1.0;
    std::string out_dir;
};

int cmd_diagnose(const DiagnoseConfig& cfg) {
    const auto model = load_instance(cfg.instance);
    const auto plan = solve_or_throw(model);
    Policy pi = plan.policy;
    if (!cfg.policy.empty()) {
        try {
            pi = policy_from_json(read_json(cfg.policy));
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw UsageError(cfg.policy + ": " + e.what());
        }
        if (pi.horizon() != model.horizon || pi.num_states() != model.num_states ||
            pi.num_actions() != model.num_actions) {
            throw UsageError("policy dimensions do not match the instance");
        }
        const auto report = validate_policy(pi, 1e-9);
        if (!report.ok()) throw UsageError(cfg.policy + ": " + report.violations.front());
    }
    CountTable counts(model.num_states, model.num_actions);
    if (!cfg.counts.empty()) {
        try {
            counts = counts_from_json(read_json(cfg.counts));
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw UsageError(cfg.counts + ": " + e.what());
        }
        if (counts.num_states() != model.num_states || counts.num_actions() != model.num_actions) {
            throw UsageError("count dimensions do not match the instance");
        }
    }
    Hyperparams hp;
    try {
        hp = compute_hyperparams(cfg.epsilon, cfg.delta,
                                 {model.num_states, model.num_actions, model.horizon},
                                 model.max_successors, cfg.m_scale);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    const auto verdict = epsilon_optimality_verdict(model, pi, cfg.epsilon, plan.objective_value);
    std::printf("V* %s\n", num(plan.objective_value).c_str());
    std::printf("objective_gap %s\n", num(verdict.objective_gap).c_str());
    for (std::size_t i = 0; i < verdict.constraint_gaps.size(); ++i) {
        std::printf("constraint_gap_%zu %s\n", i, num(verdict.constraint_gaps[i]).c_str());
    }
    std::printf("eps_optimal %s\n", verdict.is_eps_optimal ? "yes" : "no");

    // Value difference between the true kernel and the empirical one (uniform
    // over the known support where a pair has not been observed).
    const auto estimate = empirical_estimate(counts);
    Transition empirical(model.num_states, model.num_actions);
    for (std::size_t s = 0; s < model.num_states; ++s) {
        for (std::size_t a = 0; a < model.num_actions; ++a) {
            const auto& succ = model.successors_of(s, a);
            const bool visited = estimate.visited[s * model.num_actions + a];
            for (std::size_t next : succ) {
                empirical(s, a, next) =
                    visited ? estimate.p_bar[(s * model.num_actions + a) * model.num_states + next]
                            : 1.0 / static_cast<double>(succ.size());
            }
        }
    }
    const auto diff = value_difference_diagnostic(model, pi, model.transition, empirical,
                                                  model.objective_cost);
    std::printf("value_difference lhs %s rhs %s residual %s\n", num(diff.lhs).c_str(),
                num(diff.rhs).c_str(), num(diff.residual()).c_str());
    const auto var = variance_bellman_diagnostic(model, pi, model.transition, model.objective_cost);
    std::printf("return_variance %s residual %s bound %s holds %s\n",
                num(var.variance(0, model.initial_state)).c_str(), num(var.residual).c_str(),
                num(var.variance_bound).c_str(), var.bound_holds ? "yes" : "no");

    const auto weights = compute_weights(model, pi);
    const auto report = categorize(weights, counts, hp);
    std::printf("condition_holds %s\n", report.condition_holds ? "yes" : "no");
    const fs::path dir = cfg.out_dir.empty() ? default_output_dir() : fs::path(cfg.out_dir);
    std::ostringstream csv;
    write_category_csv(csv, report);
    write_file(dir / "categories.csv", csv.str());
    std::printf("%s", csv.str().c_str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained episodic MDP toolkit: gen | solve | learn | bounds | diagnose"};
    app.require_subcommand(1);

    GenConfig gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate an instance JSON");
    gen_cmd->add_option("--states", gen.states)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--actions", gen.actions)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--horizon", gen.horizon)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--succ", gen.succ, "Successors per state-action pair")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--constraints", gen.constraints);
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--chain", gen.chain, "Build the chain instance of this length instead");
    gen_cmd->add_option("--threshold", gen.threshold, "Chain constraint threshold");
    gen_cmd->add_option("--out", gen.out, "Output path (default instance.json)");

    SolveConfig solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve an instance exactly");
    solve_cmd->add_option("--instance", solve.instance)->required();
    solve_cmd->add_option("--out", solve.out, "Write the optimal policy JSON here");

    LearnConfig learn;
    auto* learn_cmd = app.add_subcommand("learn", "Run the learner and write traces");
    learn_cmd->add_option("--instance", learn.instance)->required();
    learn_cmd->add_option("--epsilon", learn.epsilon);
    learn_cmd->add_option("--delta", learn.delta);
    learn_cmd->add_option("--m-scale", learn.m_scale);
    learn_cmd->add_option("--max-episodes", learn.max_episodes);
    learn_cmd->add_option("--seed", learn.seed);
    learn_cmd->add_option("--replicates", learn.replicates, "Consecutive seeds run concurrently");
    learn_cmd->add_option("--out-dir", learn.out_dir);

    BoundsConfig bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "Print hyperparameters and episode bounds");
    bounds_cmd->add_option("--states", bounds.states)->check(CLI::PositiveNumber);
    bounds_cmd->add_option("--actions", bounds.actions)->check(CLI::PositiveNumber);
    bounds_cmd->add_option("--horizon", bounds.horizon);
    bounds_cmd->add_option("--succ", bounds.succ)->check(CLI::PositiveNumber);
    bounds_cmd->add_option("--epsilon", bounds.epsilon);
    bounds_cmd->add_option("--delta", bounds.delta);

    DiagnoseConfig diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "Verdict, value and category diagnostics");
    diag_cmd->add_option("--instance", diag.instance)->required();
    diag_cmd->add_option("--policy", diag.policy, "Policy JSON (default: exact optimum)");
    diag_cmd->add_option("--counts", diag.counts, "Count table JSON (default: zeros)");
    diag_cmd->add_option("--epsilon", diag.epsilon);
    diag_cmd->add_option("--delta", diag.delta);
    diag_cmd->add_option("--m-scale", diag.m_scale);
    diag_cmd->add_option("--out-dir", diag.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen);
        if (*solve_cmd) return cmd_solve(solve);
        if (*learn_cmd) return cmd_learn(learn);
        if (*bounds_cmd) return cmd_bounds(bounds);
        if (*diag_cmd) return cmd_diagnose(diag);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_infeasible;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numerical;
    } catch (const IterationLimitError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numerical;
    }
    return exit_usage;
}
