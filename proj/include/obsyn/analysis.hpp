#pragma once

#include <vector>

#include "obsyn/model.hpp"

namespace obsyn {

/// Per-state expected rewards (r_g = 0 on goals, infinity where the
/// goal is missed with positive probability) plus the uniform average
/// over the initial states.
struct DtmcValues {
    Value average;
    std::vector<Value> per_state;
};

namespace detail {

/// Row-pointer view of a Markov chain; lets the enumeration backends
/// evaluate induced chains without materializing a Dtmc.
struct ChainView {
    int n = 0;
    const Distribution* const* rows = nullptr;
    const Rational* rewards = nullptr;
    const std::vector<int>* initial = nullptr;
    const std::vector<bool>* is_goal = nullptr;
};

/// Reusable scratch space for exact chain solving. One instance per
/// worker thread; solving mutates only this object.
class ChainSolver {
  public:
    Value average;
    std::vector<Value> per_state;

    /// Marks the states from which the goal is reached with probability
    /// one (treating goal states as absorbing).
    const std::vector<char>& almost_sure_mask(const ChainView& c) {
        reach_goal_.assign(c.n, 0);
        for (int s = 0; s < c.n; ++s)
            if ((*c.is_goal)[s]) reach_goal_[s] = 1;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int s = 0; s < c.n; ++s) {
                if (reach_goal_[s] || (*c.is_goal)[s]) continue;
                for (const auto& [t, p] : c.rows[s]->entries) {
                    if (reach_goal_[t]) {
                        reach_goal_[s] = 1;
                        changed = true;
                        break;
                    }
                }
            }
        }
        // A state qualifies iff it cannot reach a state with
        // Pr(goal) = 0; propagate "doomed" backwards.
        doomed_.assign(c.n, 0);
        for (int s = 0; s < c.n; ++s)
            if (!reach_goal_[s]) doomed_[s] = 1;
        changed = true;
        while (changed) {
            changed = false;
            for (int s = 0; s < c.n; ++s) {
                if (doomed_[s] || (*c.is_goal)[s]) continue;
                for (const auto& [t, p] : c.rows[s]->entries) {
                    if (doomed_[t]) {
                        doomed_[s] = 1;
                        changed = true;
                        break;
                    }
                }
            }
        }
        qualify_.assign(c.n, 0);
        for (int s = 0; s < c.n; ++s) qualify_[s] = doomed_[s] ? 0 : 1;
        return qualify_;
    }

    /// Exact expected rewards. If `need_per_state` is false and some
    /// initial state misses the goal, stops early with average = inf.
    void solve(const ChainView& c, bool need_per_state) {
        if (all_rows_dirac(c) && !need_per_state) {
            solve_dirac(c);
            return;
        }
        almost_sure_mask(c);
        per_state.assign(c.n, Value());
        bool initial_ok = true;
        for (int s : *c.initial)
            if (!qualify_[s]) initial_ok = false;
        if (!initial_ok && !need_per_state) {
            average = Value::infinity();
            return;
        }
        for (int s = 0; s < c.n; ++s)
            if (!qualify_[s]) per_state[s] = Value::infinity();
        solve_linear_system(c);
        finish_average(c, initial_ok);
    }

  private:
    std::vector<char> reach_goal_, doomed_, qualify_;
    std::vector<int> tj_index_, tj_low_, tj_stack_, tj_frame_, tj_onstack_, scc_;
    std::vector<int> walk_;
    std::vector<char> color_;

    static bool all_rows_dirac(const ChainView& c) {
        for (int s = 0; s < c.n; ++s)
            if (!(*c.is_goal)[s] && !c.rows[s]->is_dirac()) return false;
        return true;
    }

    // Functional chains: follow successors, detect non-goal cycles.
    void solve_dirac(const ChainView& c) {
        color_.assign(c.n, 0);
        per_state.assign(c.n, Value());
        for (int s = 0; s < c.n; ++s)
            if ((*c.is_goal)[s]) color_[s] = 2;
        for (int s0 : *c.initial) {
            if (color_[s0] == 2) continue;
            walk_.clear();
            int s = s0;
            Value base;
            while (true) {
                if (color_[s] == 2) {
                    base = per_state[s];
                    break;
                }
                if (color_[s] == 1) {
                    base = Value::infinity();
                    break;
                }
                color_[s] = 1;
                walk_.push_back(s);
                s = c.rows[s]->entries[0].first;
            }
            for (auto it = walk_.rbegin(); it != walk_.rend(); ++it) {
                const int u = *it;
                per_state[u] = base.is_infinite() ? Value::infinity()
                                                  : Value(c.rewards[u] + base.finite());
                base = per_state[u];
                color_[u] = 2;
            }
            if (per_state[s0].is_infinite()) {
                average = Value::infinity();
                return;
            }
        }
        finish_average(c, true);
    }

    void finish_average(const ChainView& c, bool initial_ok) {
        if (!initial_ok || c.initial->empty()) {
            average = Value::infinity();
            return;
        }
        Rational sum;
        for (int s : *c.initial) {
            if (per_state[s].is_infinite()) {
                average = Value::infinity();
                return;
            }
            sum += per_state[s].finite();
        }
        average = Value(sum / Rational(static_cast<long>(c.initial->size())));
    }

    // Tarjan over the qualifying non-goal states. SCCs are emitted
    // dependencies-first, so each can be solved as soon as it appears.
    void solve_linear_system(const ChainView& c) {
        tj_index_.assign(c.n, -1);
        tj_low_.assign(c.n, 0);
        tj_onstack_.assign(c.n, 0);
        tj_stack_.clear();
        int counter = 0;
        for (int root = 0; root < c.n; ++root) {
            if (tj_index_[root] >= 0 || !qualify_[root] || (*c.is_goal)[root]) continue;
            // Iterative Tarjan: frames of (state, next edge position).
            struct Frame {
                int s;
                size_t edge;
            };
            std::vector<Frame> frames{{root, 0}};
            tj_index_[root] = tj_low_[root] = counter++;
            tj_stack_.push_back(root);
            tj_onstack_[root] = 1;
            while (!frames.empty()) {
                Frame& f = frames.back();
                const auto& entries = c.rows[f.s]->entries;
                bool descended = false;
                while (f.edge < entries.size()) {
                    const int t = entries[f.edge].first;
                    ++f.edge;
                    if ((*c.is_goal)[t] || !qualify_[t]) continue;
                    if (tj_index_[t] < 0) {
                        tj_index_[t] = tj_low_[t] = counter++;
                        tj_stack_.push_back(t);
                        tj_onstack_[t] = 1;
                        frames.push_back({t, 0});
                        descended = true;
                        break;
                    }
                    if (tj_onstack_[t] && tj_index_[t] < tj_low_[f.s])
                        tj_low_[f.s] = tj_index_[t];
                }
                if (descended) continue;
                const int s = f.s;
                frames.pop_back();
                if (!frames.empty() && tj_low_[s] < tj_low_[frames.back().s])
                    tj_low_[frames.back().s] = tj_low_[s];
                if (tj_low_[s] == tj_index_[s]) {
                    scc_.clear();
                    while (true) {
                        const int u = tj_stack_.back();
                        tj_stack_.pop_back();
                        tj_onstack_[u] = 0;
                        scc_.push_back(u);
                        if (u == s) break;
                    }
                    solve_scc(c, scc_);
                }
            }
        }
    }

    void solve_scc(const ChainView& c, const std::vector<int>& members) {
        if (members.size() == 1) {
            const int s = members[0];
            Rational rhs = c.rewards[s];
            Rational self;
            for (const auto& [t, p] : c.rows[s]->entries) {
                if (t == s) {
                    self = p;
                    continue;
                }
                if ((*c.is_goal)[t]) continue;
                rhs += p * per_state[t].finite();
            }
            per_state[s] = Value(rhs / (Rational(1) - self));
            return;
        }
        // Dense block: (I - P_C) r_C = rew_C + P(C, downstream) r_down,
        // cleared to integers and eliminated fraction-free.
        const int m = static_cast<int>(members.size());
        std::vector<int> pos(c.n, -1);
        for (int i = 0; i < m; ++i) pos[members[i]] = i;
        std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1));
        for (int i = 0; i < m; ++i) {
            const int s = members[i];
            a[i][i] = Rational(1);
            a[i][m] = c.rewards[s];
            for (const auto& [t, p] : c.rows[s]->entries) {
                if ((*c.is_goal)[t]) continue;
                if (pos[t] >= 0)
                    a[i][pos[t]] -= p;
                else
                    a[i][m] += p * per_state[t].finite();
            }
        }
        std::vector<std::vector<mpz_class>> z(m, std::vector<mpz_class>(m + 1));
        for (int i = 0; i < m; ++i) {
            mpz_class lcm = 1;
            for (int j = 0; j <= m; ++j) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), a[i][j].den().get_mpz_t());
            for (int j = 0; j <= m; ++j) z[i][j] = a[i][j].num() * (lcm / a[i][j].den());
        }
        mpz_class prev = 1;
        for (int k = 0; k < m; ++k) {
            int pivot = -1;
            for (int r = k; r < m; ++r)
                if (z[r][k] != 0) {
                    pivot = r;
                    break;
                }
            if (pivot < 0) throw std::logic_error("singular reward system");
            if (pivot != k) std::swap(z[pivot], z[k]);
            for (int i = k + 1; i < m; ++i) {
                for (int j = k + 1; j <= m; ++j) {
                    mpz_class t = z[k][k] * z[i][j] - z[i][k] * z[k][j];
                    mpz_divexact(z[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                }
                z[i][k] = 0;
            }
            prev = z[k][k];
        }
        std::vector<Rational> x(m);
        for (int i = m - 1; i >= 0; --i) {
            Rational rhs(mpq_class(z[i][m]));
            for (int j = i + 1; j < m; ++j) rhs -= Rational(mpq_class(z[i][j])) * x[j];
            x[i] = rhs / Rational(mpq_class(z[i][i]));
        }
        for (int i = 0; i < m; ++i) per_state[members[i]] = Value(x[i]);
    }
};

inline ChainView view_of(const Dtmc& d, std::vector<const Distribution*>& row_ptrs) {
    row_ptrs.clear();
    row_ptrs.reserve(d.num_states());
    for (int s = 0; s < d.num_states(); ++s) row_ptrs.push_back(&d.trans[s]);
    ChainView v;
    v.n = d.num_states();
    v.rows = row_ptrs.data();
    v.rewards = d.rewards.data();
    v.initial = &d.initial;
    v.is_goal = &d.is_goal;
    return v;
}

}  // namespace detail

/// States from which the goal set is reached with probability one,
/// computed graph-theoretically (no state that can reach a non-goal
/// bottom SCC qualifies). Goal states are treated as absorbing.
inline std::vector<int> almost_sure_reach(const Dtmc& d) {
    std::vector<const Distribution*> rows;
    detail::ChainSolver solver;
    const auto& mask = solver.almost_sure_mask(detail::view_of(d, rows));
    std::vector<int> out;
    for (int s = 0; s < d.num_states(); ++s)
        if (mask[s]) out.push_back(s);
    return out;
}

/// Exact expected reward of a Markov chain: infinity when the goal is
/// missed with positive probability from the uniform initial mixture,
/// otherwise the solution of the Bellman linear system averaged over
/// the initial states.
inline DtmcValues dtmc_expected_reward(const Dtmc& d) {
    if (d.initial.empty()) throw ModelError("expected reward needs a nonempty initial set");
    std::vector<const Distribution*> rows;
    detail::ChainSolver solver;
    solver.solve(detail::view_of(d, rows), /*need_per_state=*/true);
    return DtmcValues{solver.average, std::move(solver.per_state)};
}

/// Result of exact MDP optimization: the minimal expected reward over
/// positional strategies, a witnessing optimal positional deterministic
/// strategy, and its per-state values.
struct MdpOptimum {
    Value value;
    DetStrategy strategy;
    std::vector<Value> per_state;
};

/// Minimal expected reward of an MDP over positional strategies, by
/// policy iteration with exact linear solves. The initial policy is
/// proper on the almost-sure winning region (backward BFS from the
/// goal); improvement is greedy with strict improvements only and ties
/// broken by action declaration order.
inline MdpOptimum mdp_min_expected_reward(const Mdp& m) {
    const int n = m.num_states();
    const int na = m.num_actions();

    // Almost-sure winning region: shrink until every kept state has an
    // action whose support stays in the region and reaches the goal.
    std::vector<char> win(n, 1);
    std::vector<char> keep(n, 0);
    while (true) {
        const auto allowed = [&](int s, int a) {
            for (const auto& [t, p] : m.trans[s][a].entries)
                if (!win[t]) return false;
            return true;
        };
        for (int s = 0; s < n; ++s) keep[s] = m.is_goal[s] ? 1 : 0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int s = 0; s < n; ++s) {
                if (keep[s] || !win[s]) continue;
                for (int a = 0; a < na && !keep[s]; ++a) {
                    if (!allowed(s, a)) continue;
                    for (const auto& [t, p] : m.trans[s][a].entries) {
                        if (keep[t]) {
                            keep[s] = 1;
                            changed = true;
                            break;
                        }
                    }
                }
            }
        }
        bool shrunk = false;
        for (int s = 0; s < n; ++s) {
            if (win[s] && !keep[s] && !m.is_goal[s]) {
                win[s] = 0;
                shrunk = true;
            }
        }
        if (!shrunk) break;
    }

    // BFS distances to the goal inside the winning region.
    constexpr int kUnreached = -1;
    std::vector<int> dist(n, kUnreached);
    std::vector<int> queue;
    for (int g : m.goal) {
        dist[g] = 0;
        queue.push_back(g);
    }
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        const int t = queue[qi];
        for (int s = 0; s < n; ++s) {
            if (dist[s] != kUnreached || !win[s] || m.is_goal[s]) continue;
            for (int a = 0; a < na; ++a) {
                bool inside = true, hits = false;
                for (const auto& [u, p] : m.trans[s][a].entries) {
                    if (!win[u]) inside = false;
                    if (u == t) hits = true;
                }
                if (inside && hits) {
                    dist[s] = dist[t] + 1;
                    queue.push_back(s);
                    break;
                }
            }
        }
    }

    DetStrategy sigma;
    sigma.choice.assign(n, 0);
    for (int s = 0; s < n; ++s) {
        if (m.is_goal[s] || !win[s]) continue;
        for (int a = 0; a < na; ++a) {
            bool inside = true, decreases = false;
            for (const auto& [t, p] : m.trans[s][a].entries) {
                if (!win[t]) inside = false;
                if (dist[t] == dist[s] - 1) decreases = true;
            }
            if (inside && decreases) {
                sigma.choice[s] = a;
                break;
            }
        }
    }

    detail::ChainSolver solver;
    std::vector<const Distribution*> rows(n);
    while (true) {
        for (int s = 0; s < n; ++s) rows[s] = &m.trans[s][sigma.choice[s]];
        detail::ChainView view;
        view.n = n;
        view.rows = rows.data();
        view.rewards = m.rewards.data();
        view.initial = &m.initial;
        view.is_goal = &m.is_goal;
        solver.solve(view, /*need_per_state=*/true);

        bool improved = false;
        for (int s = 0; s < n; ++s) {
            if (m.is_goal[s] || !win[s]) continue;
            Value best = solver.per_state[s];
            int best_a = sigma.choice[s];
            for (int a = 0; a < na; ++a) {
                Value q(m.rewards[s]);
                for (const auto& [t, p] : m.trans[s][a].entries) {
                    if (m.is_goal[t]) continue;
                    if (solver.per_state[t].is_infinite()) {
                        q = Value::infinity();
                        break;
                    }
                    q += Value(p * solver.per_state[t].finite());
                }
                if (q < best) {
                    best = q;
                    best_a = a;
                }
            }
            if (best_a != sigma.choice[s]) {
                sigma.choice[s] = best_a;
                improved = true;
            }
        }
        if (!improved)
            return MdpOptimum{solver.average, std::move(sigma), std::move(solver.per_state)};
    }
}

/// Expected reward of M[obs] under a positional strategy over the
/// observation labels, computed exactly on the induced chain.
inline Value evaluate_obs_strategy(const Mdp& m, const ObservationFunction& obs,
                                   const RandStrategy& sigma) {
    const Dtmc chain = induced_obs_chain(m, obs, sigma);
    std::vector<const Distribution*> rows;
    detail::ChainSolver solver;
    solver.solve(detail::view_of(chain, rows), /*need_per_state=*/false);
    return solver.average;
}

inline Value evaluate_obs_strategy(const Mdp& m, const ObservationFunction& obs,
                                   const DetStrategy& sigma) {
    return evaluate_obs_strategy(m, obs, RandStrategy::from_det(sigma));
}

}  // namespace obsyn
