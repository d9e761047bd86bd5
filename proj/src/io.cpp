#include "ucfh/io.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>

namespace ucfh {

std::string format_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

namespace {

json cost_to_json(const CostTable& cost) {
    json out = json::array();
    for (std::size_t h = 0; h < cost.horizon(); ++h) {
        json step = json::array();
        for (std::size_t s = 0; s < cost.num_states(); ++s) {
            json row = json::array();
            for (std::size_t a = 0; a < cost.num_actions(); ++a) row.push_back(cost(h, s, a));
            step.push_back(std::move(row));
        }
        out.push_back(std::move(step));
    }
    return out;
}

CostTable cost_from_json(const json& doc, std::size_t H, std::size_t S, std::size_t A) {
    if (!doc.is_array() || doc.size() != H) throw std::runtime_error("cost table: expected H rows");
    CostTable cost(H, S, A);
    for (std::size_t h = 0; h < H; ++h) {
        if (doc[h].size() != S) throw std::runtime_error("cost table: expected S rows per step");
        for (std::size_t s = 0; s < S; ++s) {
            if (doc[h][s].size() != A) throw std::runtime_error("cost table: expected A entries");
            for (std::size_t a = 0; a < A; ++a) cost(h, s, a) = doc[h][s][a].get<double>();
        }
    }
    return cost;
}

} // namespace

json cmdp_to_json(const Cmdp& model, const std::optional<GeneratorInfo>& info) {
    const auto S = model.num_states, A = model.num_actions;
    json doc;
    doc["num_states"] = S;
    doc["num_actions"] = A;
    doc["horizon"] = model.horizon;
    doc["initial_state"] = model.initial_state;
    json transition = json::array();
    for (std::size_t s = 0; s < S; ++s) {
        json per_state = json::array();
        for (std::size_t a = 0; a < A; ++a) {
            json row = json::array();
            for (std::size_t next = 0; next < S; ++next) row.push_back(model.transition(s, a, next));
            per_state.push_back(std::move(row));
        }
        transition.push_back(std::move(per_state));
    }
    doc["transition"] = std::move(transition);
    doc["objective_cost"] = cost_to_json(model.objective_cost);
    json constraints = json::array();
    for (const auto& c : model.constraints) {
        json entry;
        entry["cost"] = cost_to_json(c.cost);
        entry["threshold"] = c.threshold;
        constraints.push_back(std::move(entry));
    }
    doc["constraints"] = std::move(constraints);
    if (info) {
        json gen;
        gen["kind"] = info->kind;
        json params;
        for (const auto& [key, value] : info->params) params[key] = value;
        gen["params"] = std::move(params);
        gen["seed"] = info->seed;
        doc["generator"] = std::move(gen);
    }
    return doc;
}

Cmdp cmdp_from_json(const json& doc) {
    const auto S = doc.at("num_states").get<std::size_t>();
    const auto A = doc.at("num_actions").get<std::size_t>();
    const auto H = doc.at("horizon").get<std::size_t>();
    const auto& t = doc.at("transition");
    if (t.size() != S) throw std::runtime_error("transition: expected S entries");
    Transition p(S, A);
    for (std::size_t s = 0; s < S; ++s) {
        if (t[s].size() != A) throw std::runtime_error("transition: expected A rows per state");
        for (std::size_t a = 0; a < A; ++a) {
            if (t[s][a].size() != S) throw std::runtime_error("transition: expected S entries per row");
            for (std::size_t next = 0; next < S; ++next) p(s, a, next) = t[s][a][next].get<double>();
        }
    }
    std::vector<Constraint> constraints;
    if (doc.contains("constraints")) {
        for (const auto& entry : doc["constraints"]) {
            constraints.push_back({cost_from_json(entry.at("cost"), H, S, A),
                                   entry.at("threshold").get<double>()});
        }
    }
    return make_cmdp(doc.at("initial_state").get<std::size_t>(), std::move(p),
                     cost_from_json(doc.at("objective_cost"), H, S, A), std::move(constraints));
}

json policy_to_json(const Policy& policy) {
    json doc;
    doc["horizon"] = policy.horizon();
    doc["num_states"] = policy.num_states();
    doc["num_actions"] = policy.num_actions();
    json probs = json::array();
    for (std::size_t h = 0; h < policy.horizon(); ++h) {
        json step = json::array();
        for (std::size_t s = 0; s < policy.num_states(); ++s) {
            json row = json::array();
            for (std::size_t a = 0; a < policy.num_actions(); ++a) row.push_back(policy(h, s, a));
            step.push_back(std::move(row));
        }
        probs.push_back(std::move(step));
    }
    doc["probs"] = std::move(probs);
    return doc;
}

Policy policy_from_json(const json& doc) {
    const auto H = doc.at("horizon").get<std::size_t>();
    const auto S = doc.at("num_states").get<std::size_t>();
    const auto A = doc.at("num_actions").get<std::size_t>();
    Policy pi(H, S, A);
    const auto table = cost_from_json(doc.at("probs"), H, S, A);
    for (std::size_t h = 0; h < H; ++h)
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) pi(h, s, a) = table(h, s, a);
    return pi;
}

json counts_to_json(const CountTable& counts) {
    const auto S = counts.num_states(), A = counts.num_actions();
    json doc;
    doc["num_states"] = S;
    doc["num_actions"] = A;
    json n_sa = json::array(), v_sa = json::array(), n_sas = json::array(), v_sas = json::array();
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            n_sa.push_back(counts.n_sa(s, a));
            v_sa.push_back(counts.v_sa(s, a));
            for (std::size_t next = 0; next < S; ++next) {
                if (counts.n_sas(s, a, next)) n_sas.push_back({s, a, next, counts.n_sas(s, a, next)});
                if (counts.v_sas(s, a, next)) v_sas.push_back({s, a, next, counts.v_sas(s, a, next)});
            }
        }
    }
    doc["n_sa"] = std::move(n_sa);
    doc["v_sa"] = std::move(v_sa);
    doc["n_sas"] = std::move(n_sas);
    doc["v_sas"] = std::move(v_sas);
    return doc;
}

CountTable counts_from_json(const json& doc) {
    const auto S = doc.at("num_states").get<std::size_t>();
    const auto A = doc.at("num_actions").get<std::size_t>();
    CountTable counts(S, A);
    const auto& n_sa = doc.at("n_sa");
    const auto& v_sa = doc.at("v_sa");
    if (n_sa.size() != S * A || v_sa.size() != S * A) throw std::runtime_error("counts: bad size");
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            counts.n_sa(s, a) = n_sa[s * A + a].get<CountTable::count_t>();
            counts.v_sa(s, a) = v_sa[s * A + a].get<CountTable::count_t>();
        }
    }
    for (const auto& e : doc.at("n_sas")) {
        counts.n_sas(e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<std::size_t>()) =
            e[3].get<CountTable::count_t>();
    }
    for (const auto& e : doc.at("v_sas")) {
        counts.v_sas(e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<std::size_t>()) =
            e[3].get<CountTable::count_t>();
    }
    if (!counts.consistent()) throw std::runtime_error("counts: per-successor totals disagree");
    return counts;
}

json hyperparams_to_json(const Hyperparams& hp) {
    json doc;
    doc["epsilon"] = hp.epsilon;
    doc["delta"] = hp.delta;
    doc["num_states"] = hp.dims.num_states;
    doc["num_actions"] = hp.dims.num_actions;
    doc["horizon"] = hp.dims.horizon;
    doc["max_successors"] = hp.max_successors;
    doc["w_min"] = hp.w_min;
    doc["delta_prime"] = hp.delta_prime;
    doc["n_max"] = hp.n_max_phases;
    doc["phase_cap"] = hp.phase_cap();
    doc["m_unscaled"] = hp.m_unscaled;
    doc["m_scale"] = hp.m_scale;
    doc["m"] = hp.m;
    return doc;
}

void write_trace_csv(std::ostream& out, const LearningTrace& trace, std::size_t num_constraints) {
    out << "phase,episode,objective_value";
    for (std::size_t i = 0; i < num_constraints; ++i) out << ",constraint_" << i;
    out << ",cumulative_samples\n";
    for (const auto& e : trace.episodes) {
        out << e.phase << ',' << e.episode << ',' << format_double(e.objective_value);
        for (double v : e.constraint_values) out << ',' << format_double(v);
        out << ',' << e.cumulative_samples << '\n';
    }
}

json trace_phases_json(const LearningTrace& trace) {
    json doc;
    doc["seed"] = trace.seed;
    doc["stop_reason"] = to_string(trace.stop);
    doc["failed"] = trace.failed();
    doc["hyperparams"] = hyperparams_to_json(trace.hyperparams);
    json phases = json::array();
    for (const auto& p : trace.phases) {
        json entry;
        entry["phase"] = p.index;
        entry["first_episode"] = p.first_episode;
        entry["episodes"] = p.episodes;
        entry["optimistic_value"] = p.optimistic_value;
        entry["true_objective_value"] = p.true_objective_value;
        entry["true_constraint_values"] = p.true_constraint_values;
        entry["planning_attempts"] = p.planning_attempts;
        json promoted = json::array();
        for (const auto& [s, a] : p.promoted) promoted.push_back({s, a});
        entry["promoted"] = std::move(promoted);
        entry["counts"] = counts_to_json(p.counts);
        entry["policy"] = policy_to_json(p.policy);
        phases.push_back(std::move(entry));
    }
    doc["phases"] = std::move(phases);
    return doc;
}

void write_category_csv(std::ostream& out, const CategoryReport& report) {
    out << "state,action,weight,importance,knownness,active\n";
    for (std::size_t s = 0; s < report.num_states; ++s) {
        for (std::size_t a = 0; a < report.num_actions; ++a) {
            const auto idx = s * report.num_actions + a;
            out << s << ',' << a << ',' << format_double(report.weights[idx]) << ','
                << report.importance[idx] << ',' << report.knownness[idx] << ','
                << (report.active[idx] ? 1 : 0) << '\n';
        }
    }
}

} // namespace ucfh
