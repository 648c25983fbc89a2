#pragma once

#include "obsyn/model.hpp"

namespace obsyn {

enum class ReductionVariant { General, Positional };

/// Policy-existence reduction: turns a POMDP threshold query into an
/// observability query on a larger MDP. Adds one tagged initial state
/// per observation, a sink state whose reward forces wrongly tagged
/// strategies to infinity, and a relay state that pays the threshold
/// before entering the goal. Actions are tagged per observation. The
/// positional variant routes every tagged state straight to the relay.
inline Mdp build_policy_reduction(const Pomdp& p, const Rational& tau,
                                  ReductionVariant variant) {
    const Mdp& m = p.mdp;
    const ObservationFunction& obs = p.obs;
    if (m.goal.empty()) throw ModelError("policy reduction: goal set must be nonempty");
    std::vector<char> used(obs.num_labels(), 0);
    for (int s = 0; s < m.num_states(); ++s)
        if (obs.map[s] != ObservationFunction::kGoalMark) used[obs.map[s]] = 1;
    for (int o = 0; o < obs.num_labels(); ++o)
        if (!used[o])
            throw ModelError("policy reduction: observation " + obs.labels[o] +
                             " labels no state");

    const int n = m.num_states();
    const int no = obs.num_labels();
    const int na = m.num_actions();
    Mdp r;
    r.states = m.states;
    for (int o = 0; o < no; ++o) r.states.push_back("s[" + obs.labels[o] + "]");
    r.states.push_back("s[inf]");
    r.states.push_back("s[tau]");
    const int first_tagged = n;
    const int sink = n + no;
    const int relay = n + no + 1;
    for (const auto& name : m.states)
        if (name == "s[inf]" || name == "s[tau]")
            throw ModelError("policy reduction: state name collision with " + name);

    for (int o = 0; o < no; ++o)
        for (int a = 0; a < na; ++a)
            r.actions.push_back(m.actions[a] + "@" + obs.labels[o]);
    const auto tagged_action = [&](int a, int o) { return o * na + a; };

    r.initial = m.initial;
    for (int o = 0; o < no; ++o) r.initial.push_back(first_tagged + o);
    r.goal = m.goal;
    r.finalize_goal_mask();

    r.rewards = m.rewards;
    for (int o = 0; o < no; ++o) r.rewards.push_back(Rational(0));
    r.rewards.push_back(Rational(1));  // sink
    r.rewards.push_back(tau);          // relay

    const auto dirac = [](int s) {
        Distribution d;
        d.add(s, Rational(1));
        return d;
    };

    r.trans.assign(r.num_states(), std::vector<Distribution>(r.num_actions()));
    for (int s = 0; s < n; ++s) {
        for (int o = 0; o < no; ++o) {
            for (int a = 0; a < na; ++a) {
                const bool behaves_like_original =
                    m.is_goal[s] || obs.map[s] == o;
                r.trans[s][tagged_action(a, o)] =
                    behaves_like_original ? m.trans[s][a] : dirac(sink);
            }
        }
    }
    for (int o = 0; o < no; ++o) {
        const int s = first_tagged + o;
        Distribution correctly_tagged;
        if (variant == ReductionVariant::General) {
            // Uniform over the tagged states and the relay.
            const Rational w(1, static_cast<long>(no) + 1);
            for (int o2 = 0; o2 < no; ++o2) correctly_tagged.add(first_tagged + o2, w);
            correctly_tagged.add(relay, w);
            correctly_tagged.normalize();
        } else {
            correctly_tagged = dirac(relay);
        }
        for (int o2 = 0; o2 < no; ++o2)
            for (int a = 0; a < na; ++a)
                r.trans[s][tagged_action(a, o2)] =
                    (o2 == o) ? correctly_tagged : dirac(sink);
    }
    Distribution relay_row;
    if (variant == ReductionVariant::General) {
        const Rational w(1, static_cast<long>(m.goal.size()));
        for (int g : m.goal) relay_row.add(g, w);
        relay_row.normalize();
    } else {
        relay_row = dirac(m.goal.front());
    }
    for (int a = 0; a < r.num_actions(); ++a) {
        r.trans[relay][a] = relay_row;
        r.trans[sink][a] = dirac(sink);
    }
    return r;
}

}  // namespace obsyn
