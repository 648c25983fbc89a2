#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "obsyn/model.hpp"

namespace obsyn {

using Json = nlohmann::ordered_json;

namespace detail {

inline Rational parse_rational_field(const Json& j, const std::string& locus) {
    if (!j.is_string())
        throw ParseError(locus + ": probabilities and rewards must be rational strings");
    try {
        return Rational::parse(j.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError(locus + ": " + e.what());
    }
}

}  // namespace detail

/// Parses the textual model format into a validated MDP. Probabilities
/// are read as exact rationals; any invariant violation is an error.
inline Mdp load_model(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    for (const char* key : {"states", "actions", "initial", "goal", "rewards", "transitions"})
        if (!j.contains(key)) throw ParseError(std::string("model file: missing field '") + key + "'");

    Mdp m;
    for (const auto& s : j["states"]) {
        if (!s.is_string()) throw ParseError("states: entries must be strings");
        if (m.state_index(s.get<std::string>()) >= 0)
            throw ParseError("states: duplicate state '" + s.get<std::string>() + "'");
        m.states.push_back(s.get<std::string>());
    }
    for (const auto& a : j["actions"]) {
        if (!a.is_string()) throw ParseError("actions: entries must be strings");
        if (m.action_index(a.get<std::string>()) >= 0)
            throw ParseError("actions: duplicate action '" + a.get<std::string>() + "'");
        m.actions.push_back(a.get<std::string>());
    }

    const auto state_of = [&](const Json& v, const std::string& locus) {
        if (!v.is_string()) throw ParseError(locus + ": expected a state name");
        const int s = m.state_index(v.get<std::string>());
        if (s < 0) throw ParseError(locus + ": unknown state '" + v.get<std::string>() + "'");
        return s;
    };

    for (const auto& v : j["initial"]) m.initial.push_back(state_of(v, "initial"));
    for (const auto& v : j["goal"]) m.goal.push_back(state_of(v, "goal"));
    std::sort(m.initial.begin(), m.initial.end());
    m.initial.erase(std::unique(m.initial.begin(), m.initial.end()), m.initial.end());
    std::sort(m.goal.begin(), m.goal.end());
    m.goal.erase(std::unique(m.goal.begin(), m.goal.end()), m.goal.end());
    m.finalize_goal_mask();

    m.rewards.assign(m.num_states(), Rational());
    std::vector<bool> seen_reward(m.num_states(), false);
    for (const auto& [key, val] : j["rewards"].items()) {
        const int s = m.state_index(key);
        if (s < 0) throw ParseError("rewards: unknown state '" + key + "'");
        m.rewards[s] = detail::parse_rational_field(val, "rewards." + key);
        seen_reward[s] = true;
    }
    for (int s = 0; s < m.num_states(); ++s)
        if (!seen_reward[s]) throw ParseError("rewards: missing entry for '" + m.states[s] + "'");

    m.trans.assign(m.num_states(), std::vector<Distribution>(m.num_actions()));
    for (const auto& t : j["transitions"]) {
        const int s = state_of(t.at("from"), "transitions.from");
        if (!t.at("action").is_string())
            throw ParseError("transitions.action: expected an action name");
        const int a = m.action_index(t.at("action").get<std::string>());
        if (a < 0)
            throw ParseError("transitions.action: unknown action '" +
                             t.at("action").get<std::string>() + "'");
        if (!m.trans[s][a].empty())
            throw ParseError("transitions: duplicate row for (" + m.states[s] + ", " +
                             m.actions[a] + ")");
        Distribution row;
        for (const auto& [key, val] : t.at("to").items()) {
            const int target = m.state_index(key);
            if (target < 0)
                throw ParseError("transitions.to: unknown state '" + key + "'");
            row.add(target, detail::parse_rational_field(
                                val, "transitions(" + m.states[s] + "," + m.actions[a] + ").to." + key));
        }
        row.normalize();
        m.trans[s][a] = std::move(row);
    }

    const auto violations = validate_mdp(m);
    if (!violations.empty()) {
        std::string msg = "invalid model:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ModelError(msg);
    }
    return m;
}

/// Canonical serialization: states and actions in declared order,
/// rationals as "num/den" strings, byte-stable across runs.
inline std::string store_model(const Mdp& m) {
    Json j;
    j["states"] = m.states;
    j["actions"] = m.actions;
    Json init = Json::array(), goal = Json::array();
    for (int s : m.initial) init.push_back(m.states[s]);
    for (int s : m.goal) goal.push_back(m.states[s]);
    j["initial"] = std::move(init);
    j["goal"] = std::move(goal);
    Json rew = Json::object();
    for (int s = 0; s < m.num_states(); ++s) rew[m.states[s]] = m.rewards[s].str();
    j["rewards"] = std::move(rew);
    Json trans = Json::array();
    for (int s = 0; s < m.num_states(); ++s) {
        for (int a = 0; a < m.num_actions(); ++a) {
            Json row;
            row["from"] = m.states[s];
            row["action"] = m.actions[a];
            Json to = Json::object();
            for (const auto& [t, p] : m.trans[s][a].entries) to[m.states[t]] = p.str();
            row["to"] = std::move(to);
            trans.push_back(std::move(row));
        }
    }
    j["transitions"] = std::move(trans);
    return j.dump(2) + "\n";
}

inline Mdp load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
}

}  // namespace obsyn
