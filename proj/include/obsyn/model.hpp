#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obsyn/rational.hpp"

namespace obsyn {

/// Error raised for semantically invalid models, strategies or
/// observation functions.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sparse probability distribution over state indices. Entries are kept
/// sorted by target index; a valid distribution sums to exactly 1.
struct Distribution {
    std::vector<std::pair<int, Rational>> entries;

    bool empty() const { return entries.empty(); }

    Rational sum() const {
        Rational s;
        for (const auto& [t, p] : entries) s += p;
        return s;
    }

    bool is_dirac() const { return entries.size() == 1 && entries[0].second.is_one(); }

    void add(int target, Rational p) {
        entries.emplace_back(target, std::move(p));
    }

    /// Sorts by target and merges duplicate entries.
    void normalize() {
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<int, Rational>> merged;
        for (auto& e : entries) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(std::move(e));
        }
        entries = std::move(merged);
    }

    friend bool operator==(const Distribution& a, const Distribution& b) {
        return a.entries == b.entries;
    }
};

/// Markov decision process with exact-rational transition probabilities,
/// a uniformly distributed initial set, goal states, and nonnegative
/// per-state rewards. States and actions are referred to by their index
/// in declaration order; names live in `states` / `actions`.
struct Mdp {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<int> initial;  // sorted state indices
    std::vector<int> goal;     // sorted state indices
    std::vector<bool> is_goal;
    std::vector<Rational> rewards;
    // trans[s][a]; an empty distribution marks a missing (state, action) row.
    std::vector<std::vector<Distribution>> trans;

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }

    int state_index(const std::string& name) const {
        for (int i = 0; i < num_states(); ++i)
            if (states[i] == name) return i;
        return -1;
    }
    int action_index(const std::string& name) const {
        for (int i = 0; i < num_actions(); ++i)
            if (actions[i] == name) return i;
        return -1;
    }

    std::vector<int> non_goal_states() const {
        std::vector<int> r;
        for (int s = 0; s < num_states(); ++s)
            if (!is_goal[s]) r.push_back(s);
        return r;
    }

    void finalize_goal_mask() {
        is_goal.assign(states.size(), false);
        for (int g : goal) is_goal[g] = true;
    }
};

/// Markov chain: an MDP without action choices.
struct Dtmc {
    std::vector<std::string> states;
    std::vector<int> initial;
    std::vector<int> goal;
    std::vector<bool> is_goal;
    std::vector<Rational> rewards;
    std::vector<Distribution> trans;

    int num_states() const { return static_cast<int>(states.size()); }
};

/// Observation function: maps every non-goal state to an observation
/// label and every goal state to the reserved goal mark.
struct ObservationFunction {
    static constexpr int kGoalMark = -1;

    std::vector<std::string> labels;  // declared order; goal mark excluded
    std::vector<int> map;             // state index -> label index, or kGoalMark

    int num_labels() const { return static_cast<int>(labels.size()); }

    int label_index(const std::string& name) const {
        for (int i = 0; i < num_labels(); ++i)
            if (labels[i] == name) return i;
        return -1;
    }
};

/// Deterministic positional strategy: one action per domain element
/// (state index or observation-label index, depending on use).
struct DetStrategy {
    std::vector<int> choice;
};

/// Randomized positional strategy: a distribution over actions per
/// domain element. Rows sum to exactly 1.
struct RandStrategy {
    std::vector<std::vector<std::pair<int, Rational>>> rows;

    static RandStrategy from_det(const DetStrategy& d) {
        RandStrategy r;
        r.rows.reserve(d.choice.size());
        for (int a : d.choice) r.rows.push_back({{a, Rational(1)}});
        return r;
    }

    /// If every row is Dirac, recovers the deterministic strategy.
    std::optional<DetStrategy> as_det() const {
        DetStrategy d;
        for (const auto& row : rows) {
            int act = -1;
            for (const auto& [a, p] : row) {
                if (p.is_zero()) continue;
                if (act >= 0 || !p.is_one()) return std::nullopt;
                act = a;
            }
            if (act < 0) return std::nullopt;
            d.choice.push_back(act);
        }
        return d;
    }
};

/// MDP paired with an observation function.
struct Pomdp {
    Mdp mdp;
    ObservationFunction obs;
};

/// Checks all MDP invariants and reports every violation, not just the
/// first: well-formed distributions per (state, action), nonempty goal,
/// nonnegative rewards, missing transition rows.
inline std::vector<std::string> validate_mdp(const Mdp& m) {
    std::vector<std::string> out;
    if (m.goal.empty()) out.push_back("empty goal set");
    if (m.actions.empty()) out.push_back("empty action set");
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.rewards[s].sign() < 0)
            out.push_back("negative reward at state " + m.states[s]);
        for (int a = 0; a < m.num_actions(); ++a) {
            const Distribution& d = m.trans[s][a];
            if (d.empty()) {
                out.push_back("missing transition row for (" + m.states[s] + ", " +
                              m.actions[a] + ")");
                continue;
            }
            for (const auto& [t, p] : d.entries)
                if (p.sign() < 0)
                    out.push_back("negative probability in row (" + m.states[s] + ", " +
                                  m.actions[a] + ")");
            if (!d.sum().is_one())
                out.push_back("row (" + m.states[s] + ", " + m.actions[a] +
                              ") sums to " + d.sum().str() + ", not 1");
        }
    }
    return out;
}

inline std::vector<std::string> validate_dtmc(const Dtmc& d) {
    std::vector<std::string> out;
    if (d.goal.empty()) out.push_back("empty goal set");
    for (int s = 0; s < d.num_states(); ++s) {
        if (d.rewards[s].sign() < 0)
            out.push_back("negative reward at state " + d.states[s]);
        const Distribution& row = d.trans[s];
        if (row.empty()) {
            out.push_back("missing transition row for " + d.states[s]);
            continue;
        }
        for (const auto& [t, p] : row.entries)
            if (p.sign() < 0) out.push_back("negative probability in row " + d.states[s]);
        if (!row.sum().is_one())
            out.push_back("row " + d.states[s] + " sums to " + row.sum().str() + ", not 1");
    }
    return out;
}

/// Induced Markov chain of an MDP under a randomized positional
/// strategy over states: P(s,s') = sum_a P(s,a)(s') * sigma(s)(a),
/// computed exactly.
inline Dtmc induced_dtmc(const Mdp& m, const RandStrategy& sigma) {
    if (static_cast<int>(sigma.rows.size()) != m.num_states())
        throw ModelError("strategy does not cover all states");
    Dtmc d;
    d.states = m.states;
    d.initial = m.initial;
    d.goal = m.goal;
    d.is_goal = m.is_goal;
    d.rewards = m.rewards;
    d.trans.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        Rational total;
        Distribution row;
        for (const auto& [a, w] : sigma.rows[s]) {
            if (a < 0 || a >= m.num_actions())
                throw ModelError("strategy for " + m.states[s] + " names an unknown action");
            if (w.sign() < 0)
                throw ModelError("strategy row for " + m.states[s] + " has a negative weight");
            total += w;
            if (w.is_zero()) continue;
            for (const auto& [t, p] : m.trans[s][a].entries) row.add(t, w * p);
        }
        if (!total.is_one())
            throw ModelError("strategy row for " + m.states[s] + " is not a distribution");
        row.normalize();
        d.trans[s] = std::move(row);
    }
    return d;
}

inline Dtmc induced_dtmc(const Mdp& m, const DetStrategy& sigma) {
    return induced_dtmc(m, RandStrategy::from_det(sigma));
}

/// Pairs an MDP with an observation function. The goal mark must sit
/// exactly on the goal states.
inline Pomdp apply_observation(const Mdp& m, const ObservationFunction& obs) {
    if (static_cast<int>(obs.map.size()) != m.num_states())
        throw ModelError("observation function does not cover all states");
    for (int s = 0; s < m.num_states(); ++s) {
        const bool marked = obs.map[s] == ObservationFunction::kGoalMark;
        if (marked && !m.is_goal[s])
            throw ModelError("goal mark assigned to non-goal state " + m.states[s]);
        if (!marked && m.is_goal[s])
            throw ModelError("observation label assigned to goal state " + m.states[s]);
        if (!marked && (obs.map[s] < 0 || obs.map[s] >= obs.num_labels()))
            throw ModelError("observation of " + m.states[s] + " is out of range");
    }
    return Pomdp{m, obs};
}

/// Fully observable observation function: one label per non-goal state.
inline ObservationFunction identity_observation(const Mdp& m) {
    ObservationFunction obs;
    obs.map.assign(m.num_states(), ObservationFunction::kGoalMark);
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        obs.map[s] = obs.num_labels();
        obs.labels.push_back(m.states[s]);
    }
    return obs;
}

/// Restriction of an MDP to a nonempty subset of its actions.
inline Mdp restrict_actions(const Mdp& m, const std::vector<int>& subset) {
    if (subset.empty()) throw ModelError("restrict_actions: empty action set");
    Mdp r;
    r.states = m.states;
    r.initial = m.initial;
    r.goal = m.goal;
    r.is_goal = m.is_goal;
    r.rewards = m.rewards;
    for (int a : subset) {
        if (a < 0 || a >= m.num_actions())
            throw ModelError("restrict_actions: unknown action index");
        r.actions.push_back(m.actions[a]);
    }
    r.trans.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s)
        for (int a : subset) r.trans[s].push_back(m.trans[s][a]);
    return r;
}

/// Induced chain of M[obs] under a strategy over observation labels.
/// The strategy row of a non-goal state is the row of its label; goal
/// states become absorbing (paths stop at goals, so this is
/// value-preserving and matches the tpMC constructions).
inline Dtmc induced_obs_chain(const Mdp& m, const ObservationFunction& obs,
                              const RandStrategy& sigma) {
    if (static_cast<int>(obs.map.size()) != m.num_states())
        throw ModelError("observation function does not cover all states");
    if (static_cast<int>(sigma.rows.size()) != obs.num_labels())
        throw ModelError("strategy does not cover all observation labels");
    RandStrategy lifted;
    lifted.rows.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        lifted.rows[s] = sigma.rows[obs.map[s]];
    }
    Dtmc d;
    d.states = m.states;
    d.initial = m.initial;
    d.goal = m.goal;
    d.is_goal = m.is_goal;
    d.rewards = m.rewards;
    d.trans.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) {
            d.trans[s].add(s, Rational(1));
            continue;
        }
        Rational total;
        Distribution row;
        for (const auto& [a, w] : lifted.rows[s]) {
            if (a < 0 || a >= m.num_actions())
                throw ModelError("strategy names an unknown action");
            if (w.sign() < 0) throw ModelError("strategy has a negative weight");
            total += w;
            if (w.is_zero()) continue;
            for (const auto& [t, p] : m.trans[s][a].entries) row.add(t, w * p);
        }
        if (!total.is_one())
            throw ModelError("strategy row for label '" + obs.labels[obs.map[s]] +
                             "' is not a distribution");
        row.normalize();
        d.trans[s] = std::move(row);
    }
    return d;
}

inline Dtmc induced_obs_chain(const Mdp& m, const ObservationFunction& obs,
                              const DetStrategy& sigma) {
    return induced_obs_chain(m, obs, RandStrategy::from_det(sigma));
}

}  // namespace obsyn
