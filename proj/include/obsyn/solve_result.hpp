#pragma once

#include <optional>
#include <string>

#include "obsyn/model.hpp"
#include "obsyn/model_io.hpp"

namespace obsyn {

enum class Verdict { Sat, Unsat, Unknown };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Sat: return "sat";
        case Verdict::Unsat: return "unsat";
        case Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

/// A synthesized observation function together with a positional
/// strategy over its labels. Deterministic strategies are stored as
/// Dirac rows.
struct Witness {
    ObservationFunction obs;
    RandStrategy strategy;
};

/// Outcome of a solve call from either backend. `value` is exact: on
/// sat it is the verified value of the witness, on an exhausted
/// enumeration it is the best value seen. `verified` is true only when
/// the exact engine confirmed the threshold comparison.
struct SolveResult {
    Verdict verdict = Verdict::Unknown;
    std::optional<Value> value;
    std::optional<Witness> witness;
    bool verified = false;
    double solver_seconds = 0.0;
    std::string diagnostics;
};

inline Json witness_to_json(const Mdp& m, const Witness& w) {
    Json obs;
    obs["labels"] = w.obs.labels;
    Json map = Json::object();
    for (int s = 0; s < m.num_states(); ++s) {
        map[m.states[s]] = w.obs.map[s] == ObservationFunction::kGoalMark
                               ? "goal"
                               : w.obs.labels[w.obs.map[s]];
    }
    obs["map"] = std::move(map);
    Json strat = Json::object();
    const auto det = w.strategy.as_det();
    for (int o = 0; o < w.obs.num_labels(); ++o) {
        if (det) {
            strat[w.obs.labels[o]] = m.actions[det->choice[o]];
        } else {
            Json row = Json::object();
            for (const auto& [a, p] : w.strategy.rows[o]) row[m.actions[a]] = p.str();
            strat[w.obs.labels[o]] = std::move(row);
        }
    }
    Json j;
    j["observation"] = std::move(obs);
    j["strategy"] = std::move(strat);
    return j;
}

inline Witness witness_from_json(const Mdp& m, const Json& j) {
    Witness w;
    const Json& obs = j.at("observation");
    for (const auto& l : obs.at("labels")) w.obs.labels.push_back(l.get<std::string>());
    w.obs.map.assign(m.num_states(), ObservationFunction::kGoalMark);
    for (const auto& [state, label] : obs.at("map").items()) {
        const int s = m.state_index(state);
        if (s < 0) throw ParseError("witness: unknown state '" + state + "'");
        const std::string l = label.get<std::string>();
        if (l == "goal") continue;
        const int o = w.obs.label_index(l);
        if (o < 0) throw ParseError("witness: unknown observation label '" + l + "'");
        w.obs.map[s] = o;
    }
    w.strategy.rows.resize(w.obs.num_labels());
    for (const auto& [label, row] : j.at("strategy").items()) {
        const int o = w.obs.label_index(label);
        if (o < 0) throw ParseError("witness: unknown strategy label '" + label + "'");
        if (row.is_string()) {
            const int a = m.action_index(row.get<std::string>());
            if (a < 0) throw ParseError("witness: unknown action '" + row.get<std::string>() + "'");
            w.strategy.rows[o] = {{a, Rational(1)}};
        } else {
            for (const auto& [act, p] : row.items()) {
                const int a = m.action_index(act);
                if (a < 0) throw ParseError("witness: unknown action '" + act + "'");
                w.strategy.rows[o].emplace_back(a, Rational::parse(p.get<std::string>()));
            }
        }
    }
    return w;
}

inline Json result_to_json(const Mdp& m, const SolveResult& r) {
    Json j;
    j["verdict"] = verdict_name(r.verdict);
    j["value"] = r.value ? Json(r.value->str()) : Json(nullptr);
    if (r.witness) {
        Json w = witness_to_json(m, *r.witness);
        j["observation"] = w["observation"];
        j["strategy"] = w["strategy"];
    } else {
        j["observation"] = nullptr;
        j["strategy"] = nullptr;
    }
    j["verified"] = r.verified;
    j["solver_seconds"] = r.solver_seconds;
    if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
    return j;
}

}  // namespace obsyn
