#pragma once

#include "ucfh/cmdp.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ucfh {

/// Engine for episode `stream` of a run seeded with `seed`:
/// mt19937_64 initialised from seed_seq{seed_lo, seed_hi, stream_lo, stream_hi}.
/// Both std::mt19937_64 and std::seed_seq are fully specified by the
/// standard, so streams are identical across platforms.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

/// Inverse-CDF draw over `probs` in index order.
std::size_t sample_index(std::span<const double> probs, double u);

struct Step {
    std::size_t state = 0;
    std::size_t action = 0;
    std::size_t next_state = 0;
    double objective_cost = 0.0;
};

struct Trajectory {
    std::vector<Step> steps;
    numvec constraint_costs; ///< H x I, row-major by step
};

/// Ground-truth CMDP plus the seeded generator state of one run.
/// The learner sees only `known()`.
class Environment {
public:
    Environment(Cmdp model, std::uint64_t seed);

    const KnownModel& known() const { return model_; }
    const Cmdp& ground_truth() const { return model_; }

    /// Restarts the episode streams from `seed`.
    void reseed(std::uint64_t seed);
    std::uint64_t seed() const { return seed_; }
    std::uint64_t episodes_sampled() const { return episode_; }

    /// Samples an episode on the next stream.
    Trajectory sample_episode(const Policy& policy);

private:
    Cmdp model_;
    std::uint64_t seed_;
    std::uint64_t episode_ = 0;
};

/// Sampled episode using an explicit engine (no stream bookkeeping).
Trajectory sample_episode(const Cmdp& model, const Policy& policy, std::mt19937_64& rng);

/// Where an instance came from, recorded in its JSON form.
struct GeneratorInfo {
    std::string kind;
    std::vector<std::pair<std::string, double>> params;
    std::uint64_t seed = 0;
};

struct GeneratedCmdp {
    Cmdp model;
    GeneratorInfo info;
};

/// Random instance where every (s,a) has exactly `num_successors` successors
/// (action 0 always reaches s+1 mod S), Dirichlet(1) rows and uniform costs.
/// Thresholds sit halfway between a constraint-minimising reference policy
/// and the unconstrained optimum, so the instance is feasible.
GeneratedCmdp generate_random_cmdp(std::size_t num_states, std::size_t num_actions,
                                   std::size_t horizon, std::size_t num_successors,
                                   std::size_t num_constraints, std::uint64_t seed);

/// River-swim style chain: action 0 (safe) drifts right slowly, action 1
/// (risky) drifts right fast with lower objective cost but unit constraint
/// cost. Without an explicit threshold the midpoint between the all-safe
/// constraint value (0) and that of the unconstrained optimum is used.
GeneratedCmdp make_chain_cmdp(std::size_t length, std::size_t horizon,
                              std::optional<double> threshold = std::nullopt);

} // namespace ucfh
