#include "ucfh/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ucfh {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> probs, double u) {
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cumulative += probs[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    return last_positive; // rounding left u above the final partial sum
}

Trajectory sample_episode(const Cmdp& model, const Policy& policy, std::mt19937_64& rng) {
    const auto H = model.horizon, A = model.num_actions, I = model.num_constraints();
    Trajectory out;
    out.steps.reserve(H);
    out.constraint_costs.reserve(H * I);
    numvec action_probs(A);
    std::size_t state = model.initial_state;
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t a = 0; a < A; ++a) action_probs[a] = policy(h, state, a);
        const auto action = sample_index(action_probs, uniform01(rng));
        const auto next = sample_index(model.transition.row(state, action), uniform01(rng));
        out.steps.push_back({state, action, next, model.objective_cost(h, state, action)});
        for (const auto& c : model.constraints) out.constraint_costs.push_back(c.cost(h, state, action));
        state = next;
    }
    return out;
}

Environment::Environment(Cmdp model, std::uint64_t seed) : model_(std::move(model)), seed_(seed) {}

void Environment::reseed(std::uint64_t seed) {
    seed_ = seed;
    episode_ = 0;
}

Trajectory Environment::sample_episode(const Policy& policy) {
    auto rng = make_stream(seed_, episode_++);
    return ucfh::sample_episode(model_, policy, rng);
}

namespace {

/// Unconstrained minimiser of `cost` by backward induction (lowest action on ties).
Policy greedy_policy(const Cmdp& model, const CostTable& cost) {
    const auto H = model.horizon, S = model.num_states, A = model.num_actions;
    Policy pi(H, S, A);
    numvec next_values(S, 0.0), values(S, 0.0);
    for (std::size_t h = H; h-- > 0;) {
        for (std::size_t s = 0; s < S; ++s) {
            double best = 0.0;
            std::size_t best_a = 0;
            for (std::size_t a = 0; a < A; ++a) {
                double q = cost(h, s, a);
                for (std::size_t next = 0; next < S; ++next) {
                    q += model.transition(s, a, next) * next_values[next];
                }
                if (a == 0 || q < best - 1e-15) {
                    best = q;
                    best_a = a;
                }
            }
            values[s] = best;
            pi(h, s, best_a) = 1.0;
        }
        std::swap(values, next_values);
    }
    return pi;
}

std::size_t uniform_below(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

double positive_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

GeneratedCmdp generate_random_cmdp(std::size_t num_states, std::size_t num_actions,
                                   std::size_t horizon, std::size_t num_successors,
                                   std::size_t num_constraints, std::uint64_t seed) {
    if (num_states < 1 || num_actions < 1 || horizon < 1) {
        throw std::invalid_argument("states, actions and horizon must be positive");
    }
    if (num_successors < 1 || num_successors > num_states) {
        throw std::invalid_argument("successor count must lie in [1, num_states]");
    }
    const auto S = num_states, A = num_actions, H = horizon;
    auto rng = make_stream(seed, 0x67656e65726174ULL); // "generat"

    Transition p(S, A);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            std::vector<std::size_t> pool(S);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            std::vector<std::size_t> chosen;
            if (a == 0) {
                const auto forced = (s + 1) % S;
                chosen.push_back(forced);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(forced));
            }
            while (chosen.size() < num_successors) {
                const auto k = uniform_below(rng, pool.size());
                chosen.push_back(pool[k]);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
            }
            std::sort(chosen.begin(), chosen.end());
            numvec weights(chosen.size());
            double total = 0.0;
            for (auto& w : weights) {
                w = -std::log(positive_uniform(rng));
                total += w;
            }
            for (std::size_t k = 0; k < chosen.size(); ++k) p(s, a, chosen[k]) = weights[k] / total;
        }
    }

    auto random_costs = [&] {
        CostTable c(H, S, A);
        for (auto& v : c.values()) v = uniform01(rng);
        return c;
    };
    CostTable objective = random_costs();
    std::vector<Constraint> constraints;
    for (std::size_t i = 0; i < num_constraints; ++i) constraints.push_back({random_costs(), 0.0});

    Cmdp model = make_cmdp(0, std::move(p), std::move(objective), std::move(constraints));
    if (num_constraints > 0) {
        constexpr double kappa = 0.5;
        CostTable summed(H, S, A);
        for (const auto& c : model.constraints) {
            for (std::size_t k = 0; k < summed.values().size(); ++k) {
                summed.values()[k] += c.cost.values()[k];
            }
        }
        const Policy reference = num_constraints == 1 ? greedy_policy(model, model.constraints[0].cost)
                                                      : greedy_policy(model, summed);
        const Policy unconstrained = greedy_policy(model, model.objective_cost);
        for (auto& c : model.constraints) {
            const double low = policy_value(model, reference, c.cost).initial_value;
            const double high = policy_value(model, unconstrained, c.cost).initial_value;
            c.threshold = kappa * low + (1.0 - kappa) * high;
        }
    }

    GeneratorInfo info{"random",
                       {{"states", double(S)},
                        {"actions", double(A)},
                        {"horizon", double(H)},
                        {"successors", double(num_successors)},
                        {"constraints", double(num_constraints)}},
                       seed};
    return {std::move(model), std::move(info)};
}

GeneratedCmdp make_chain_cmdp(std::size_t length, std::size_t horizon,
                              std::optional<double> threshold) {
    if (length < 2) throw std::invalid_argument("chain length must be at least 2");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    constexpr std::size_t safe = 0, risky = 1;
    const auto S = length, H = horizon, goal = length - 1;

    Transition p(S, 2);
    for (std::size_t s = 0; s < goal; ++s) {
        p(s, safe, s) = 0.7;
        p(s, safe, s + 1) = 0.3;
        p(s, risky, s) = 0.1;
        p(s, risky, s + 1) = 0.9;
    }
    p(goal, safe, goal) = 1.0;
    p(goal, risky, goal) = 1.0;

    CostTable objective(H, S, 2), risk(H, S, 2);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            const double distance = static_cast<double>(goal - s) / static_cast<double>(goal);
            objective(h, s, safe) = distance;
            objective(h, s, risky) = 0.8 * distance;
            risk(h, s, risky) = 1.0;
        }
    }

    Cmdp model = make_cmdp(0, std::move(p), std::move(objective), {{std::move(risk), 0.0}});
    if (threshold) {
        model.constraints[0].threshold = *threshold;
    } else {
        const Policy fastest = greedy_policy(model, model.objective_cost);
        model.constraints[0].threshold =
            0.5 * policy_value(model, fastest, model.constraints[0].cost).initial_value;
    }

    GeneratorInfo info{"chain",
                       {{"length", double(length)},
                        {"horizon", double(horizon)},
                        {"threshold", model.constraints[0].threshold}},
                       0};
    return {std::move(model), std::move(info)};
}

} // namespace ucfh
