#pragma once

#include <atomic>
#include <climits>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>

#include "obsyn/analysis.hpp"
#include "obsyn/solve_result.hpp"

namespace obsyn {

/// Streams every partition of {0..n-1} into at most `max_blocks`
/// nonempty blocks exactly once, as restricted-growth strings in
/// lexicographic order. The first occurrence of each block index is
/// increasing, so each observation-renaming class has one
/// representative.
class PartitionStream {
  public:
    PartitionStream(int n, int max_blocks)
        : n_(n), max_blocks_(max_blocks), rgs_(n, 0), prefix_max_(n, 0) {
        if (n < 1) throw ModelError("partition stream needs at least one element");
        if (max_blocks < 1) throw ModelError("partition stream needs max_blocks >= 1");
    }

    const std::vector<int>& current() const { return rgs_; }
    int block_count() const { return prefix_max_[n_ - 1] + 1; }
    bool exhausted() const { return done_; }

    bool advance() {
        for (int i = n_ - 1; i >= 1; --i) {
            const int cap = std::min(prefix_max_[i - 1] + 1, max_blocks_ - 1);
            if (rgs_[i] < cap) {
                ++rgs_[i];
                for (int j = i + 1; j < n_; ++j) rgs_[j] = 0;
                for (int j = i; j < n_; ++j)
                    prefix_max_[j] = std::max(prefix_max_[j - 1], rgs_[j]);
                return true;
            }
        }
        done_ = true;
        return false;
    }

    /// Number of partitions into at most max_blocks blocks (a Stirling
    /// number sum), saturating at ULLONG_MAX.
    static unsigned long long count(int n, int max_blocks) {
        // stirling[k] = S(row, k), built row by row.
        std::vector<unsigned long long> s(static_cast<size_t>(max_blocks) + 1, 0);
        s[0] = 1;  // S(0,0)
        bool saturated = false;
        for (int row = 1; row <= n; ++row) {
            for (int k = std::min(row, max_blocks); k >= 1; --k) {
                const unsigned long long below = s[k - 1];
                const unsigned long long same = s[k];
                if (same > (ULLONG_MAX - below) / static_cast<unsigned long long>(k))
                    saturated = true;
                s[k] = saturated ? ULLONG_MAX : same * static_cast<unsigned long long>(k) + below;
            }
            s[0] = 0;
        }
        unsigned long long total = 0;
        for (int k = 1; k <= max_blocks; ++k) {
            if (total > ULLONG_MAX - s[k]) return ULLONG_MAX;
            total += s[k];
        }
        return total;
    }

  private:
    int n_, max_blocks_;
    bool done_ = false;
    std::vector<int> rgs_, prefix_max_;
};

struct EnumOptions {
    int jobs = 1;
    /// When set, never early-exit on sat; the exact best value over the
    /// whole space is reported (used by optimum bracketing and probes).
    bool exhaustive = false;
    /// Progress reporting to this stream as NDJSON, if non-null.
    std::ostream* progress = nullptr;
};

namespace detail {

inline bool meets_threshold(const Value& v, const Value& tau, bool strict) {
    if (v.is_infinite()) return false;
    return strict ? v < tau : v <= tau;
}

/// Candidate position in the fixed enumeration order.
struct CandidateIndex {
    long long outer = LLONG_MAX;  // partition / subset ordinal
    long long inner = LLONG_MAX;  // strategy ordinal within the outer candidate

    friend bool operator<(const CandidateIndex& a, const CandidateIndex& b) {
        return a.outer != b.outer ? a.outer < b.outer : a.inner < b.inner;
    }
};

struct EnumCandidate {
    CandidateIndex index;
    Value value = Value::infinity();
    std::vector<int> labeling;  // rgs over domain states, or sensor subset
    std::vector<int> actions;   // action per label
    bool valid = false;

    void offer_best(const CandidateIndex& idx, const Value& v, const std::vector<int>& lab,
                    const std::vector<int>& act) {
        if (!valid || v < value || (v == value && idx < index)) {
            index = idx;
            value = v;
            labeling = lab;
            actions = act;
            valid = true;
        }
    }

    void offer_first(const CandidateIndex& idx, const Value& v, const std::vector<int>& lab,
                     const std::vector<int>& act) {
        if (!valid || idx < index) {
            index = idx;
            value = v;
            labeling = lab;
            actions = act;
            valid = true;
        }
    }
};

struct ProgressSink {
    std::ostream* out = nullptr;
    unsigned long long total = 0;
    std::mutex mu;
    std::atomic<unsigned long long> explored{0};

    void bump(unsigned long long delta, const Value* best) {
        const auto seen = explored.fetch_add(delta, std::memory_order_relaxed) + delta;
        if (!out) return;
        std::lock_guard<std::mutex> lock(mu);
        (*out) << "{\"explored\":" << seen << ",\"total\":" << total << ",\"best\":\""
               << (best ? best->str() : "inf") << "\"}\n";
    }
};

}  // namespace detail

/// Exhaustive PDOOP: for each canonical partition of the non-goal
/// states into at most B observation classes and each deterministic
/// strategy over the classes, evaluates the induced chain exactly.
/// Early-exits on the first satisfying candidate in enumeration order;
/// the reported witness is deterministic regardless of worker count.
inline SolveResult solve_pdoop_enum(const Mdp& m, int budget, const Value& tau, bool strict,
                                    const EnumOptions& opts = {}) {
    if (budget < 1) throw ModelError("pdoop: budget must be >= 1");
    const std::vector<int> domain = m.non_goal_states();
    if (domain.empty()) throw ModelError("pdoop: model has no non-goal states");
    const int n = static_cast<int>(domain.size());
    const int na = m.num_actions();
    const int blocks_cap = std::min(budget, n);

    detail::ProgressSink progress;
    progress.out = opts.progress;
    progress.total = PartitionStream::count(n, blocks_cap);

    struct Chunk {
        long long first_index;
        std::vector<std::pair<std::vector<int>, int>> partitions;  // (rgs, block count)
    };
    PartitionStream stream(n, blocks_cap);
    std::mutex stream_mu;
    bool stream_done = false;
    long long next_index = 0;
    const int chunk_size = 1024;
    const auto pull_chunk = [&](Chunk& chunk) {
        std::lock_guard<std::mutex> lock(stream_mu);
        chunk.partitions.clear();
        if (stream_done) return false;
        chunk.first_index = next_index;
        for (int i = 0; i < chunk_size; ++i) {
            chunk.partitions.emplace_back(stream.current(), stream.block_count());
            ++next_index;
            if (!stream.advance()) {
                stream_done = true;
                break;
            }
        }
        return !chunk.partitions.empty();
    };

    std::atomic<long long> sat_outer{LLONG_MAX};
    const int jobs = std::max(1, opts.jobs);
    std::vector<detail::EnumCandidate> best(jobs), first_sat(jobs);

    const auto worker = [&](int wid) {
        detail::ChainSolver solver;
        std::vector<const Distribution*> rows(m.num_states());
        std::vector<int> block_action;
        std::vector<int> state_action(m.num_states(), 0);
        detail::ChainView view;
        view.n = m.num_states();
        view.rows = rows.data();
        view.rewards = m.rewards.data();
        view.initial = &m.initial;
        view.is_goal = &m.is_goal;
        Chunk chunk;
        unsigned long long local_explored = 0;
        while (pull_chunk(chunk)) {
            for (size_t pi = 0; pi < chunk.partitions.size(); ++pi) {
                const long long outer = chunk.first_index + static_cast<long long>(pi);
                if (!opts.exhaustive && outer > sat_outer.load(std::memory_order_relaxed))
                    continue;
                const auto& [rgs, b] = chunk.partitions[pi];
                long long strategy_count = 1;
                for (int i = 0; i < b; ++i) strategy_count *= na;
                block_action.assign(b, 0);
                for (long long sidx = 0; sidx < strategy_count; ++sidx) {
                    for (int i = 0; i < n; ++i)
                        state_action[domain[i]] = block_action[rgs[i]];
                    for (int s = 0; s < m.num_states(); ++s)
                        rows[s] = &m.trans[s][state_action[s]];
                    solver.solve(view, /*need_per_state=*/false);
                    ++local_explored;
                    const detail::CandidateIndex idx{outer, sidx};
                    best[wid].offer_best(idx, solver.average, rgs, block_action);
                    if (detail::meets_threshold(solver.average, tau, strict)) {
                        first_sat[wid].offer_first(idx, solver.average, rgs, block_action);
                        if (!opts.exhaustive) {
                            long long cur = sat_outer.load(std::memory_order_relaxed);
                            while (outer < cur &&
                                   !sat_outer.compare_exchange_weak(cur, outer)) {
                            }
                            break;
                        }
                    }
                    // Next strategy: increment the base-na counter, last
                    // block fastest.
                    for (int i = b - 1; i >= 0; --i) {
                        if (++block_action[i] < na) break;
                        block_action[i] = 0;
                    }
                }
                if (local_explored >= 65536) {
                    progress.bump(local_explored, best[wid].valid ? &best[wid].value : nullptr);
                    local_explored = 0;
                }
            }
        }
        if (local_explored) progress.bump(local_explored, nullptr);
    };

    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
        for (auto& t : pool) t.join();
    }

    detail::EnumCandidate sat, seen;
    for (int w = 0; w < jobs; ++w) {
        if (first_sat[w].valid)
            sat.offer_first(first_sat[w].index, first_sat[w].value, first_sat[w].labeling,
                            first_sat[w].actions);
        if (best[w].valid)
            seen.offer_best(best[w].index, best[w].value, best[w].labeling, best[w].actions);
    }

    const auto build_witness = [&](const detail::EnumCandidate& c) {
        Witness w;
        const int b = static_cast<int>(c.actions.size());
        for (int i = 0; i < b; ++i) w.obs.labels.push_back("o" + std::to_string(i + 1));
        w.obs.map.assign(m.num_states(), ObservationFunction::kGoalMark);
        for (int i = 0; i < n; ++i) w.obs.map[domain[i]] = c.labeling[i];
        DetStrategy det;
        det.choice = c.actions;
        w.strategy = RandStrategy::from_det(det);
        return w;
    };

    SolveResult r;
    if (sat.valid) {
        r.verdict = Verdict::Sat;
        r.value = sat.value;
        r.witness = build_witness(sat);
        r.verified = true;
    } else {
        r.verdict = Verdict::Unsat;
        if (seen.valid) {
            r.value = seen.value;
            if (seen.value.is_finite()) r.witness = build_witness(seen);
        }
        r.verified = true;
    }
    return r;
}

/// Exhaustive PDPEP: evaluates all |Act|^|O| deterministic positional
/// observation-based strategies of a POMDP exactly.
inline SolveResult solve_pdpep_enum(const Pomdp& p, const Value& tau, bool strict,
                                    const EnumOptions& opts = {}) {
    const int no = p.obs.num_labels();
    const int na = p.mdp.num_actions();
    detail::EnumCandidate sat, seen;
    std::vector<int> choice(no, 0);
    long long total = 1;
    for (int i = 0; i < no; ++i) total *= na;
    for (long long sidx = 0; sidx < total; ++sidx) {
        DetStrategy det;
        det.choice = choice;
        const Value v = evaluate_obs_strategy(p.mdp, p.obs, det);
        const detail::CandidateIndex idx{0, sidx};
        seen.offer_best(idx, v, {}, choice);
        if (detail::meets_threshold(v, tau, strict)) {
            sat.offer_first(idx, v, {}, choice);
            if (!opts.exhaustive) break;
        }
        for (int i = no - 1; i >= 0; --i) {
            if (++choice[i] < na) break;
            choice[i] = 0;
        }
    }
    const auto witness_of = [&](const detail::EnumCandidate& c) {
        DetStrategy det;
        det.choice = c.actions;
        return Witness{p.obs, RandStrategy::from_det(det)};
    };
    SolveResult r;
    r.verified = true;
    if (sat.valid) {
        r.verdict = Verdict::Sat;
        r.value = sat.value;
        r.witness = witness_of(sat);
    } else {
        r.verdict = Verdict::Unsat;
        if (seen.valid) {
            r.value = seen.value;
            if (seen.value.is_finite()) r.witness = witness_of(seen);
        }
    }
    return r;
}

namespace detail {

/// Location-POMDP observation function for a sensor subset: "@s" on
/// sensor states, "bot" on unobserved non-goal states, goal mark on
/// goals. Only occurring labels are used.
inline ObservationFunction sensor_observation(const Mdp& m, const std::vector<int>& sensors) {
    ObservationFunction obs;
    obs.map.assign(m.num_states(), ObservationFunction::kGoalMark);
    std::vector<char> on(m.num_states(), 0);
    for (int s : sensors) on[s] = 1;
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.is_goal[s] || !on[s]) continue;
        obs.map[s] = obs.num_labels();
        obs.labels.push_back("@" + m.states[s]);
    }
    bool any_blind = false;
    for (int s = 0; s < m.num_states(); ++s)
        if (!m.is_goal[s] && !on[s]) any_blind = true;
    if (any_blind) {
        const int blind = obs.num_labels();
        obs.labels.push_back("bot");
        for (int s = 0; s < m.num_states(); ++s)
            if (!m.is_goal[s] && !on[s]) obs.map[s] = blind;
    }
    return obs;
}

}  // namespace detail

/// Exhaustive SSP: enumerates sensor subsets D of the non-goal states
/// with |D| <= B by increasing size (lexicographic within a size), and
/// for each the deterministic strategies over {@s | s in D} plus the
/// blind observation. When `fixed_sensors` is given, only that subset
/// is probed and the best value over its strategies is reported.
inline SolveResult solve_ssp_enum(const Mdp& m, int budget, const Value& tau, bool strict,
                                  const EnumOptions& opts = {},
                                  const std::optional<std::vector<int>>& fixed_sensors = std::nullopt) {
    if (budget < 1 && !fixed_sensors) throw ModelError("ssp: budget must be >= 1");
    const std::vector<int> domain = m.non_goal_states();
    const int n = static_cast<int>(domain.size());
    const int na = m.num_actions();

    std::vector<std::vector<int>> subsets;
    if (fixed_sensors) {
        auto d = *fixed_sensors;
        std::sort(d.begin(), d.end());
        for (int s : d)
            if (s < 0 || s >= m.num_states() || m.is_goal[s])
                throw ModelError("ssp: sensors must sit on non-goal states");
        subsets.push_back(std::move(d));
    } else {
        const int cap = std::min(budget, n);
        for (int size = 0; size <= cap; ++size) {
            std::vector<int> pick(size);
            // Lexicographic combinations of `size` positions out of n.
            std::function<void(int, int)> rec = [&](int start, int depth) {
                if (depth == size) {
                    std::vector<int> subset;
                    for (int i : pick) subset.push_back(domain[i]);
                    subsets.push_back(std::move(subset));
                    return;
                }
                for (int i = start; i <= n - (size - depth); ++i) {
                    pick[depth] = i;
                    rec(i + 1, depth + 1);
                }
            };
            rec(0, 0);
        }
    }

    detail::EnumCandidate sat, seen;
    detail::ChainSolver solver;
    std::vector<const Distribution*> rows(m.num_states());
    detail::ChainView view;
    view.n = m.num_states();
    view.rows = rows.data();
    view.rewards = m.rewards.data();
    view.initial = &m.initial;
    view.is_goal = &m.is_goal;

    for (long long outer = 0; outer < static_cast<long long>(subsets.size()); ++outer) {
        const auto& sensors = subsets[outer];
        const ObservationFunction obs = detail::sensor_observation(m, sensors);
        const int no = obs.num_labels();
        // A goal-only model can have zero labels; nothing to choose then.
        std::vector<int> choice(std::max(no, 1), 0);
        long long total = 1;
        for (int i = 0; i < no; ++i) total *= na;
        std::vector<int> state_action(m.num_states(), 0);
        for (long long sidx = 0; sidx < total; ++sidx) {
            for (int s = 0; s < m.num_states(); ++s)
                if (!m.is_goal[s]) state_action[s] = choice[obs.map[s]];
            for (int s = 0; s < m.num_states(); ++s)
                rows[s] = &m.trans[s][state_action[s]];
            solver.solve(view, /*need_per_state=*/false);
            const detail::CandidateIndex idx{outer, sidx};
            seen.offer_best(idx, solver.average, sensors, std::vector<int>(choice.begin(), choice.begin() + no));
            if (detail::meets_threshold(solver.average, tau, strict)) {
                sat.offer_first(idx, solver.average, sensors,
                                std::vector<int>(choice.begin(), choice.begin() + no));
                if (!opts.exhaustive) break;
            }
            for (int i = no - 1; i >= 0; --i) {
                if (++choice[i] < na) break;
                choice[i] = 0;
            }
        }
        if (sat.valid && !opts.exhaustive) break;
    }

    const auto witness_of = [&](const detail::EnumCandidate& c) {
        const ObservationFunction obs = detail::sensor_observation(m, c.labeling);
        DetStrategy det;
        det.choice = c.actions;
        return Witness{obs, RandStrategy::from_det(det)};
    };
    SolveResult r;
    r.verified = true;
    if (sat.valid) {
        r.verdict = Verdict::Sat;
        r.value = sat.value;
        r.witness = witness_of(sat);
    } else {
        r.verdict = Verdict::Unsat;
        if (seen.valid) {
            r.value = seen.value;
            if (seen.value.is_finite()) r.witness = witness_of(seen);
        }
    }
    return r;
}

/// Minimal-budget result: the smallest number of observations that
/// still allows the MDP optimum, with a witnessing observation function
/// (one label per used action) and strategy.
struct MpbpResult {
    int budget = 0;
    ObservationFunction obs;
    DetStrategy sigma;  // over observation labels
    Value optimum;
};

/// Finds an optimal positional deterministic strategy over a minimal
/// set of actions by scanning action subsets in increasing size
/// (lexicographic within a size), then reads the observation function
/// off the strategy: states sharing an action share a label.
inline MpbpResult solve_mpbp(const Mdp& m) {
    const MdpOptimum full = mdp_min_expected_reward(m);
    if (full.value.is_infinite())
        throw ModelError("mpbp: the MDP optimum is infinite");
    const int na = m.num_actions();

    std::vector<std::vector<int>> subsets;
    for (int size = 1; size <= na; ++size) {
        std::vector<int> pick;
        std::function<void(int)> rec = [&](int start) {
            if (static_cast<int>(pick.size()) == size) {
                subsets.push_back(pick);
                return;
            }
            for (int a = start; a < na; ++a) {
                pick.push_back(a);
                rec(a + 1);
                pick.pop_back();
            }
        };
        rec(0);
    }

    for (const auto& subset : subsets) {
        const Mdp restricted = restrict_actions(m, subset);
        const MdpOptimum opt = mdp_min_expected_reward(restricted);
        if (!(opt.value == full.value)) continue;

        // Map restricted action indices back to the original ones.
        std::vector<int> used;  // original action ids in declared order
        std::vector<int> label_of_action(na, -1);
        MpbpResult r;
        r.budget = 0;
        r.optimum = full.value;
        r.obs.map.assign(m.num_states(), ObservationFunction::kGoalMark);
        for (int s = 0; s < m.num_states(); ++s) {
            if (m.is_goal[s]) continue;
            const int a = subset[opt.strategy.choice[s]];
            if (label_of_action[a] < 0) {
                label_of_action[a] = r.obs.num_labels();
                r.obs.labels.push_back(m.actions[a]);
                r.sigma.choice.push_back(a);
                ++r.budget;
            }
            r.obs.map[s] = label_of_action[a];
        }
        return r;
    }
    throw std::logic_error("mpbp: full action set must achieve the optimum");
}

}  // namespace obsyn
