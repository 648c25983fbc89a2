#pragma once

#include <sstream>

#include "obsyn/model.hpp"
#include "obsyn/poly.hpp"

namespace obsyn {

/// Variable kinds of a typed parametric Markov chain. Sum-typed
/// variables belong to exactly one group whose values must total the
/// group constant (or stay below it for budget groups).
enum class VarKind { Real, Bool, RealSum, BoolSum };

struct TpmcVar {
    std::string name;
    VarKind kind = VarKind::Real;
    int group = -1;  // index into Tpmc::groups for sum kinds
};

struct VarGroup {
    std::string name;
    bool boolean = false;
    Rational constant;
    bool exact = true;  // false: sum <= constant (sensor budgets)
    std::vector<int> members;
};

/// Typed parametric Markov chain: transition entries are polynomials
/// over typed variables; goal rows are the constant-1 self-loop.
struct Tpmc {
    std::vector<std::string> states;
    std::vector<int> initial;
    std::vector<int> goal;
    std::vector<bool> is_goal;
    std::vector<Rational> rewards;
    std::vector<TpmcVar> vars;
    std::vector<VarGroup> groups;
    std::vector<std::vector<std::pair<int, Poly>>> rows;  // sparse (target, poly)

    int num_states() const { return static_cast<int>(states.size()); }
    int num_vars() const { return static_cast<int>(vars.size()); }

    std::vector<std::string> var_names() const {
        std::vector<std::string> n;
        n.reserve(vars.size());
        for (const auto& v : vars) n.push_back(v.name);
        return n;
    }
};

/// A full assignment of rationals to the tpMC variables.
struct Instantiation {
    std::vector<Rational> values;
    std::vector<bool> defined;

    void resize(int n) {
        values.assign(n, Rational(0));
        defined.assign(n, false);
    }
    void set(int var, Rational v) {
        values[var] = std::move(v);
        defined[var] = true;
    }
};

enum class TpmcKind { Observation, Location, GeneralLocation };

/// A constructed tpMC together with the bookkeeping needed to convert
/// between instantiations and (observation function, strategy) pairs.
struct BuiltTpmc {
    Tpmc tpmc;
    TpmcKind kind = TpmcKind::Observation;
    int budget = 0;
    std::vector<std::string> labels;       // observation labels, canonical order
    std::vector<std::vector<int>> y_of;    // per state: y variable ids (see builders)
    std::vector<std::vector<int>> x_of;    // per label: x variable id per action
    std::vector<std::string> actions;      // action names of the source MDP
    // General-location bookkeeping.
    std::vector<std::string> sensors;              // sensor ids, sorted
    std::vector<int> y_of_sensor;                  // per sensor: y variable id
    std::vector<std::vector<int>> loc;             // per state: sensor ordinals, sorted
    std::vector<std::vector<int>> subset_label;    // per state: mask over loc -> label
};

namespace detail {

inline int add_var(Tpmc& t, std::string name, VarKind kind, int group) {
    t.vars.push_back(TpmcVar{std::move(name), kind, group});
    if (group >= 0) t.groups[group].members.push_back(t.num_vars() - 1);
    return t.num_vars() - 1;
}

inline int add_group(Tpmc& t, std::string name, bool boolean, Rational constant, bool exact) {
    t.groups.push_back(VarGroup{std::move(name), boolean, std::move(constant), exact, {}});
    return static_cast<int>(t.groups.size()) - 1;
}

inline void copy_skeleton(const Mdp& m, Tpmc& t) {
    t.states = m.states;
    t.initial = m.initial;
    t.goal = m.goal;
    t.is_goal = m.is_goal;
    t.rewards = m.rewards;
    t.rows.resize(m.num_states());
    for (int g : m.goal) t.rows[g].push_back({g, Poly::constant(Rational(1))});
}

inline void set_row(Tpmc& t, int s, std::vector<Poly>& dense) {
    for (int target = 0; target < t.num_states(); ++target) {
        if (dense[target].is_zero()) continue;
        t.rows[s].push_back({target, std::move(dense[target])});
        dense[target] = Poly();
    }
}

}  // namespace detail

/// Observation tpMC: a Boolean one-hot group y_{s,o} per non-goal state
/// chooses its observation among {1..B}; a simplex group x_{o,a} per
/// observation chooses the strategy. Entries are
/// sum_a sum_o y_{s,o} * x_{o,a} * P(s,a)(s').
inline BuiltTpmc build_observation_tpmc(const Mdp& m, int budget) {
    if (budget < 1) throw ModelError("observation tpMC: budget must be >= 1");
    BuiltTpmc b;
    b.kind = TpmcKind::Observation;
    b.budget = budget;
    b.actions = m.actions;
    Tpmc& t = b.tpmc;
    detail::copy_skeleton(m, t);

    for (int o = 0; o < budget; ++o) b.labels.push_back("o" + std::to_string(o + 1));

    b.y_of.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        const int g = detail::add_group(t, "y[" + m.states[s] + "]", true, Rational(1), true);
        for (int o = 0; o < budget; ++o)
            b.y_of[s].push_back(
                detail::add_var(t, "y_" + m.states[s] + "_" + b.labels[o], VarKind::BoolSum, g));
    }
    b.x_of.resize(budget);
    for (int o = 0; o < budget; ++o) {
        const int g = detail::add_group(t, "x[" + b.labels[o] + "]", false, Rational(1), true);
        for (int a = 0; a < m.num_actions(); ++a)
            b.x_of[o].push_back(
                detail::add_var(t, "x_" + b.labels[o] + "_" + m.actions[a], VarKind::RealSum, g));
    }

    std::vector<Poly> dense(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        for (int a = 0; a < m.num_actions(); ++a) {
            for (int o = 0; o < budget; ++o) {
                const Poly yx = Poly::var(b.y_of[s][o]) * Poly::var(b.x_of[o][a]);
                for (const auto& [target, p] : m.trans[s][a].entries)
                    dense[target] += yx * p;
            }
        }
        detail::set_row(t, s, dense);
    }
    return b;
}

/// Location tpMC: one Boolean y_s per non-goal state switches its
/// sensor; strategies come from per-location simplex groups x_{@s,a}
/// plus a blind group x_{bot,a}. The sensor group sums to at most the
/// budget (exactly, when `exact_budget` is set).
inline BuiltTpmc build_location_tpmc(const Mdp& m, int budget, bool exact_budget = false) {
    if (budget < 1) throw ModelError("location tpMC: budget must be >= 1");
    BuiltTpmc b;
    b.kind = TpmcKind::Location;
    b.budget = budget;
    b.actions = m.actions;
    Tpmc& t = b.tpmc;
    detail::copy_skeleton(m, t);

    const int sensor_group =
        detail::add_group(t, "sensors", true, Rational(budget), exact_budget);
    b.y_of.resize(m.num_states());
    std::vector<int> label_of_state(m.num_states(), -1);
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        b.y_of[s].push_back(
            detail::add_var(t, "y_" + m.states[s], VarKind::BoolSum, sensor_group));
        label_of_state[s] = static_cast<int>(b.labels.size());
        b.labels.push_back("@" + m.states[s]);
    }
    const int blind = static_cast<int>(b.labels.size());
    b.labels.push_back("bot");

    b.x_of.resize(b.labels.size());
    for (size_t o = 0; o < b.labels.size(); ++o) {
        const int g = detail::add_group(t, "x[" + b.labels[o] + "]", false, Rational(1), true);
        for (int a = 0; a < m.num_actions(); ++a)
            b.x_of[o].push_back(
                detail::add_var(t, "x_" + b.labels[o] + "_" + m.actions[a], VarKind::RealSum, g));
    }

    std::vector<Poly> dense(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        const Poly y = Poly::var(b.y_of[s][0]);
        const Poly not_y = Poly::constant(Rational(1)) - y;
        for (int a = 0; a < m.num_actions(); ++a) {
            const Poly mix =
                y * Poly::var(b.x_of[label_of_state[s]][a]) + not_y * Poly::var(b.x_of[blind][a]);
            for (const auto& [target, p] : m.trans[s][a].entries) dense[target] += mix * p;
        }
        detail::set_row(t, s, dense);
    }
    return b;
}

/// General location tpMC: several sensors may sit on one state; the
/// observation of a state is the subset of its sensors that are on.
/// Subset observations are labeled by canonical sorted sensor tuples.
/// States carrying more than `subset_cap` sensors are rejected.
inline BuiltTpmc build_general_location_tpmc(const Mdp& m,
                                             const std::vector<std::vector<std::string>>& loc,
                                             int budget, int subset_cap = 10,
                                             bool exact_budget = false) {
    if (budget < 1) throw ModelError("general location tpMC: budget must be >= 1");
    if (static_cast<int>(loc.size()) != m.num_states())
        throw ModelError("general location tpMC: loc must cover all states");
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s] && !loc[s].empty())
            throw ModelError("general location tpMC: sensors on goal state " + m.states[s]);
        if (static_cast<int>(loc[s].size()) > subset_cap)
            throw ModelError("general location tpMC: state " + m.states[s] + " has " +
                             std::to_string(loc[s].size()) + " sensors, cap is " +
                             std::to_string(subset_cap));
    }

    BuiltTpmc b;
    b.kind = TpmcKind::GeneralLocation;
    b.budget = budget;
    b.actions = m.actions;
    Tpmc& t = b.tpmc;
    detail::copy_skeleton(m, t);

    for (const auto& per_state : loc)
        for (const auto& d : per_state)
            if (std::find(b.sensors.begin(), b.sensors.end(), d) == b.sensors.end())
                b.sensors.push_back(d);
    std::sort(b.sensors.begin(), b.sensors.end());

    const int sensor_group =
        detail::add_group(t, "sensors", true, Rational(budget), exact_budget);
    for (const auto& d : b.sensors)
        b.y_of_sensor.push_back(detail::add_var(t, "y_" + d, VarKind::BoolSum, sensor_group));

    const auto sensor_ordinal = [&](const std::string& d) {
        return static_cast<int>(std::find(b.sensors.begin(), b.sensors.end(), d) -
                                b.sensors.begin());
    };
    b.loc.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        for (const auto& d : loc[s]) b.loc[s].push_back(sensor_ordinal(d));
        std::sort(b.loc[s].begin(), b.loc[s].end());
    }

    const auto subset_name = [&](const std::vector<int>& members) {
        std::string name = "{";
        for (size_t i = 0; i < members.size(); ++i) {
            if (i) name += ",";
            name += b.sensors[members[i]];
        }
        return name + "}";
    };

    // Collect occurring subset observations: states in order, masks in
    // increasing order.
    b.subset_label.resize(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        const int k = static_cast<int>(b.loc[s].size());
        b.subset_label[s].resize(1 << k);
        for (int mask = 0; mask < (1 << k); ++mask) {
            std::vector<int> members;
            for (int i = 0; i < k; ++i)
                if (mask & (1 << i)) members.push_back(b.loc[s][i]);
            const std::string name = subset_name(members);
            int idx = -1;
            for (size_t o = 0; o < b.labels.size(); ++o)
                if (b.labels[o] == name) idx = static_cast<int>(o);
            if (idx < 0) {
                idx = static_cast<int>(b.labels.size());
                b.labels.push_back(name);
            }
            b.subset_label[s][mask] = idx;
        }
    }

    b.x_of.resize(b.labels.size());
    for (size_t o = 0; o < b.labels.size(); ++o) {
        const int g = detail::add_group(t, "x[" + b.labels[o] + "]", false, Rational(1), true);
        for (int a = 0; a < m.num_actions(); ++a)
            b.x_of[o].push_back(
                detail::add_var(t, "x_" + b.labels[o] + "_" + m.actions[a], VarKind::RealSum, g));
    }

    std::vector<Poly> dense(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        const int k = static_cast<int>(b.loc[s].size());
        for (int mask = 0; mask < (1 << k); ++mask) {
            Poly onoff = Poly::constant(Rational(1));
            for (int i = 0; i < k; ++i) {
                const Poly y = Poly::var(b.y_of_sensor[b.loc[s][i]]);
                onoff = (mask & (1 << i)) ? onoff * y
                                          : onoff * (Poly::constant(Rational(1)) - y);
            }
            const int label = b.subset_label[s][mask];
            for (int a = 0; a < m.num_actions(); ++a) {
                const Poly mix = onoff * Poly::var(b.x_of[label][a]);
                for (const auto& [target, p] : m.trans[s][a].entries) dense[target] += mix * p;
            }
        }
        detail::set_row(t, s, dense);
    }
    return b;
}

/// Checks an instantiation against the variable types: Booleans are
/// 0/1, sum groups hit (or stay below) their constants, simplex members
/// lie in [0,1], and every row evaluates to exactly 1. All violations
/// are reported.
inline std::vector<std::string> check_instantiation(const Tpmc& t, const Instantiation& iota) {
    std::vector<std::string> out;
    if (static_cast<int>(iota.values.size()) != t.num_vars()) {
        out.push_back("instantiation does not match the variable table");
        return out;
    }
    for (int v = 0; v < t.num_vars(); ++v)
        if (!iota.defined[v]) out.push_back("variable " + t.vars[v].name + " is unassigned");
    if (!out.empty()) return out;

    for (int v = 0; v < t.num_vars(); ++v) {
        const auto& var = t.vars[v];
        const Rational& x = iota.values[v];
        if ((var.kind == VarKind::Bool || var.kind == VarKind::BoolSum) &&
            !(x.is_zero() || x.is_one()))
            out.push_back("Boolean variable " + var.name + " = " + x.str());
    }
    for (const auto& g : t.groups) {
        Rational sum;
        for (int v : g.members) sum += iota.values[v];
        if (g.exact ? !(sum == g.constant) : sum > g.constant)
            out.push_back("group " + g.name + " sums to " + sum.str() +
                          (g.exact ? ", expected " : ", budget ") + g.constant.str());
        if (!g.boolean && g.constant.is_one() && g.exact) {
            for (int v : g.members) {
                const Rational& x = iota.values[v];
                if (x.sign() < 0 || x > Rational(1))
                    out.push_back("simplex variable " + t.vars[v].name + " = " + x.str() +
                                  " is outside [0,1]");
            }
        }
    }
    for (int s = 0; s < t.num_states(); ++s) {
        Rational sum;
        for (const auto& [target, poly] : t.rows[s]) sum += poly.eval(iota.values);
        if (!sum.is_one())
            out.push_back("row " + t.states[s] + " evaluates to " + sum.str() + ", not 1");
    }
    return out;
}

/// Evaluates every transition polynomial exactly and returns the
/// induced Markov chain; the instantiation must be well-defined.
inline Dtmc instantiate(const Tpmc& t, const Instantiation& iota) {
    const auto violations = check_instantiation(t, iota);
    if (!violations.empty()) {
        std::string msg = "instantiation is not well-defined:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ModelError(msg);
    }
    Dtmc d;
    d.states = t.states;
    d.initial = t.initial;
    d.goal = t.goal;
    d.is_goal = t.is_goal;
    d.rewards = t.rewards;
    d.trans.resize(t.num_states());
    for (int s = 0; s < t.num_states(); ++s) {
        for (const auto& [target, poly] : t.rows[s]) {
            Rational p = poly.eval(iota.values);
            if (p.sign() < 0)
                throw ModelError("instantiation yields negative probability " + p.str() +
                                 " at row " + t.states[s]);
            if (p.is_zero()) continue;
            d.trans[s].add(target, std::move(p));
        }
        d.trans[s].normalize();
    }
    return d;
}

/// Builds the instantiation that realizes a given observation function
/// and strategy (the Lemma 2 / Lemma 3 witness direction). Unused
/// observation slots get a Dirac filler on the first action.
inline Instantiation encode_witness(const BuiltTpmc& b, const Mdp& m,
                                    const ObservationFunction& obs, const RandStrategy& sigma) {
    if (static_cast<int>(obs.map.size()) != m.num_states())
        throw ModelError("encode_witness: observation function does not cover all states");
    if (static_cast<int>(sigma.rows.size()) != obs.num_labels())
        throw ModelError("encode_witness: strategy does not cover all labels");
    Instantiation iota;
    iota.resize(b.tpmc.num_vars());

    const auto fill_x = [&](int tpmc_label, const std::vector<std::pair<int, Rational>>* row) {
        if (row) {
            for (int a = 0; a < static_cast<int>(b.actions.size()); ++a)
                iota.set(b.x_of[tpmc_label][a], Rational(0));
            for (const auto& [a, p] : *row) iota.values[b.x_of[tpmc_label][a]] = p;
        } else {
            for (int a = 0; a < static_cast<int>(b.actions.size()); ++a)
                iota.set(b.x_of[tpmc_label][a], Rational(a == 0 ? 1 : 0));
        }
    };

    if (b.kind == TpmcKind::Observation) {
        if (obs.num_labels() > b.budget)
            throw ModelError("encode_witness: observation uses " +
                             std::to_string(obs.num_labels()) + " labels, budget is " +
                             std::to_string(b.budget));
        for (int s = 0; s < m.num_states(); ++s) {
            if (m.is_goal[s]) continue;
            for (int o = 0; o < b.budget; ++o)
                iota.set(b.y_of[s][o], Rational(obs.map[s] == o ? 1 : 0));
        }
        for (int o = 0; o < b.budget; ++o)
            fill_x(o, o < obs.num_labels() ? &sigma.rows[o] : nullptr);
        return iota;
    }

    if (b.kind == TpmcKind::Location) {
        // Labels must be "@state" on the state itself, or "bot".
        int blind_label = -1;
        for (int o = 0; o < obs.num_labels(); ++o)
            if (obs.labels[o] == "bot") blind_label = o;
        std::vector<const std::vector<std::pair<int, Rational>>*> row_of(b.labels.size(),
                                                                         nullptr);
        for (int s = 0; s < m.num_states(); ++s) {
            if (m.is_goal[s]) continue;
            const int o = obs.map[s];
            const std::string& label = obs.labels[o];
            const bool on = label != "bot";
            if (on && label != "@" + m.states[s])
                throw ModelError("encode_witness: label " + label +
                                 " is not the location sensor of " + m.states[s]);
            iota.set(b.y_of[s][0], Rational(on ? 1 : 0));
            if (on) {
                const int tpmc_label =
                    static_cast<int>(std::find(b.labels.begin(), b.labels.end(), label) -
                                     b.labels.begin());
                row_of[tpmc_label] = &sigma.rows[o];
            }
        }
        if (blind_label >= 0) row_of[b.labels.size() - 1] = &sigma.rows[blind_label];
        for (size_t o = 0; o < b.labels.size(); ++o)
            fill_x(static_cast<int>(o), row_of[o]);
        return iota;
    }

    // General location: the observation must be realizable by a global
    // on/off switch per sensor, i.e. obs(s) = loc(s) restricted to the
    // union of all observed subsets.
    std::vector<char> on(b.sensors.size(), 0);
    const auto label_members = [&](const std::string& label) {
        std::vector<int> members;
        std::string inner = label.substr(1, label.size() - 2);
        size_t pos = 0;
        while (pos < inner.size()) {
            size_t comma = inner.find(',', pos);
            if (comma == std::string::npos) comma = inner.size();
            const std::string d = inner.substr(pos, comma - pos);
            const auto it = std::find(b.sensors.begin(), b.sensors.end(), d);
            if (it == b.sensors.end())
                throw ModelError("encode_witness: unknown sensor " + d);
            members.push_back(static_cast<int>(it - b.sensors.begin()));
            pos = comma + 1;
        }
        return members;
    };
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        for (int d : label_members(obs.labels[obs.map[s]])) on[d] = 1;
    }
    for (size_t d = 0; d < b.sensors.size(); ++d)
        iota.set(b.y_of_sensor[d], Rational(on[d] ? 1 : 0));
    std::vector<const std::vector<std::pair<int, Rational>>*> row_of(b.labels.size(), nullptr);
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s]) continue;
        int mask = 0;
        for (size_t i = 0; i < b.loc[s].size(); ++i)
            if (on[b.loc[s][i]]) mask |= 1 << i;
        const int expected = b.subset_label[s][mask];
        if (b.labels[expected] != obs.labels[obs.map[s]])
            throw ModelError("encode_witness: observation of " + m.states[s] +
                             " is not realizable by switching sensors");
        row_of[expected] = &sigma.rows[obs.map[s]];
    }
    for (size_t o = 0; o < b.labels.size(); ++o) fill_x(static_cast<int>(o), row_of[o]);
    return iota;
}

/// Reads the observation function and strategy back off a well-defined
/// instantiation (the converse witness direction). Only occurring
/// labels appear in the result.
inline std::pair<ObservationFunction, RandStrategy> decode_witness(const BuiltTpmc& b,
                                                                   const Instantiation& iota) {
    const Tpmc& t = b.tpmc;
    const int n = t.num_states();
    const int na = static_cast<int>(b.actions.size());
    for (int v = 0; v < t.num_vars(); ++v) {
        const auto& var = t.vars[v];
        if ((var.kind == VarKind::Bool || var.kind == VarKind::BoolSum) &&
            !(iota.values[v].is_zero() || iota.values[v].is_one()))
            throw ModelError("decode_witness: Boolean variable " + var.name + " = " +
                             iota.values[v].str());
    }

    // Observation of every non-goal state, as a tpMC label index.
    std::vector<int> state_label(n, -1);
    if (b.kind == TpmcKind::Observation) {
        for (int s = 0; s < n; ++s) {
            if (t.is_goal[s]) continue;
            for (int o = 0; o < b.budget; ++o)
                if (iota.values[b.y_of[s][o]].is_one()) {
                    if (state_label[s] >= 0)
                        throw ModelError("decode_witness: several observations for " +
                                         t.states[s]);
                    state_label[s] = o;
                }
            if (state_label[s] < 0)
                throw ModelError("decode_witness: no observation for " + t.states[s]);
        }
    } else if (b.kind == TpmcKind::Location) {
        const int blind = static_cast<int>(b.labels.size()) - 1;
        int next = 0;
        for (int s = 0; s < n; ++s) {
            if (t.is_goal[s]) continue;
            state_label[s] = iota.values[b.y_of[s][0]].is_one() ? next : blind;
            ++next;
        }
    } else {
        for (int s = 0; s < n; ++s) {
            if (t.is_goal[s]) continue;
            int mask = 0;
            for (size_t i = 0; i < b.loc[s].size(); ++i)
                if (iota.values[b.y_of_sensor[b.loc[s][i]]].is_one()) mask |= 1 << i;
            state_label[s] = b.subset_label[s][mask];
        }
    }

    // Keep only occurring labels, in tpMC label order.
    std::vector<int> new_index(b.labels.size(), -1);
    ObservationFunction obs;
    obs.map.assign(n, ObservationFunction::kGoalMark);
    for (size_t o = 0; o < b.labels.size(); ++o) {
        bool used = false;
        for (int s = 0; s < n; ++s)
            if (state_label[s] == static_cast<int>(o)) used = true;
        if (!used) continue;
        new_index[o] = obs.num_labels();
        obs.labels.push_back(b.labels[o]);
    }
    for (int s = 0; s < n; ++s)
        if (state_label[s] >= 0) obs.map[s] = new_index[state_label[s]];

    RandStrategy sigma;
    sigma.rows.resize(obs.num_labels());
    for (size_t o = 0; o < b.labels.size(); ++o) {
        if (new_index[o] < 0) continue;
        auto& row = sigma.rows[new_index[o]];
        for (int a = 0; a < na; ++a) {
            const Rational& p = iota.values[b.x_of[o][a]];
            if (p.sign() < 0)
                throw ModelError("decode_witness: negative strategy weight for label " +
                                 b.labels[o]);
            if (!p.is_zero()) row.emplace_back(a, p);
        }
    }
    return {std::move(obs), std::move(sigma)};
}

/// Row-sum polynomial of a state after substituting the exact group-sum
/// identities (each group's last member becomes C minus the rest).
/// Stochastic rows reduce to the constant 1.
inline Poly reduced_row_sum(const Tpmc& t, int state) {
    Poly sum;
    for (const auto& [target, poly] : t.rows[state]) sum += poly;
    for (const auto& g : t.groups) {
        if (!g.exact || g.members.empty()) continue;
        Poly rest = Poly::constant(g.constant);
        for (size_t i = 0; i + 1 < g.members.size(); ++i)
            rest -= Poly::var(g.members[i]);
        sum = sum.substitute(g.members.back(), rest);
    }
    return sum;
}

/// Textual dump of a tpMC: variables with their types and groups, then
/// one line per transition-row entry. Stable ordering; used by golden
/// tests against the published constructions.
inline std::string dump_tpmc(const Tpmc& t) {
    std::ostringstream out;
    const auto names = t.var_names();
    out << "vars:\n";
    for (const auto& v : t.vars) {
        out << "  " << v.name << " : ";
        switch (v.kind) {
            case VarKind::Real: out << "R"; break;
            case VarKind::Bool: out << "B"; break;
            case VarKind::RealSum:
            case VarKind::BoolSum: {
                const auto& g = t.groups[v.group];
                out << (v.kind == VarKind::BoolSum ? "B" : "R") << "[" << g.name
                    << (g.exact ? " = " : " <= ") << g.constant.str() << "]";
                break;
            }
        }
        out << "\n";
    }
    out << "rows:\n";
    for (int s = 0; s < t.num_states(); ++s)
        for (const auto& [target, poly] : t.rows[s])
            out << "  " << t.states[s] << " -> " << t.states[target] << " : "
                << poly.str(names) << "\n";
    return out.str();
}

}  // namespace obsyn
