#pragma once

#include "ucfh/cmdp.hpp"
#include "ucfh/diagnostics.hpp"
#include "ucfh/environment.hpp"
#include "ucfh/learner.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace ucfh {

using json = nlohmann::ordered_json;

/// Instance document. Keys are written in a fixed order:
/// num_states, num_actions, horizon, initial_state, transition[s][a][s'],
/// objective_cost[h][s][a], constraints[{cost, threshold}], generator.
json cmdp_to_json(const Cmdp& model, const std::optional<GeneratorInfo>& info = std::nullopt);
/// Successor sets are rebuilt from the transition support.
Cmdp cmdp_from_json(const json& doc);

json policy_to_json(const Policy& policy);
Policy policy_from_json(const json& doc);

json counts_to_json(const CountTable& counts);
CountTable counts_from_json(const json& doc);

json hyperparams_to_json(const Hyperparams& hp);

/// Per-episode CSV: phase,episode,objective_value,constraint_<i>...,cumulative_samples
void write_trace_csv(std::ostream& out, const LearningTrace& trace, std::size_t num_constraints);
/// Phase metadata sidecar.
json trace_phases_json(const LearningTrace& trace);

/// One row per (s,a): state,action,weight,importance,knownness,active
void write_category_csv(std::ostream& out, const CategoryReport& report);

/// Shortest round-trip decimal form, used for every floating value in CSV.
std::string format_double(double v);

} // namespace ucfh
