#pragma once

#include <string>
#include <vector>

#include "obsyn/model.hpp"

namespace obsyn {

enum class Family { Line, LineSink, Grid, Maze };

inline Family family_from_string(const std::string& s) {
    if (s == "line") return Family::Line;
    if (s == "line-sink") return Family::LineSink;
    if (s == "grid") return Family::Grid;
    if (s == "maze") return Family::Maze;
    throw ModelError("unknown benchmark family: " + s);
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

// Interior step: move with probability p, stay on failure. On p = 1 the
// failure entry is dropped so rows stay Dirac.
inline Distribution move_or_stay(int from, int to, const Rational& p) {
    Distribution d;
    if (!p.is_zero()) d.add(to, p);
    const Rational stay = Rational(1) - p;
    if (!stay.is_zero()) d.add(from, stay);
    d.normalize();
    return d;
}

inline Distribution dirac(int s) {
    Distribution d;
    d.add(s, Rational(1));
    return d;
}

inline Distribution move_or_sink(int to, int sink, const Rational& p) {
    Distribution d;
    if (!p.is_zero()) d.add(to, p);
    const Rational fail = Rational(1) - p;
    if (!fail.is_zero()) d.add(sink, fail);
    d.normalize();
    return d;
}

}  // namespace detail

/// Line walk with k states, goal in the middle. Interior moves succeed
/// with probability p and otherwise stay put; the away-from-line action
/// at either end is a probability-1 self-loop. Rewards are 1 off the
/// goal; all non-goal states are initial.
inline Mdp generate_line(int k, const Rational& p) {
    detail::require(k >= 3 && k % 2 == 1, "line: size must be odd and >= 3");
    detail::require(p.sign() > 0 && p <= Rational(1), "line: p must satisfy 0 < p <= 1");
    Mdp m;
    for (int i = 0; i < k; ++i) m.states.push_back("s" + std::to_string(i));
    m.actions = {"l", "r"};
    const int mid = (k - 1) / 2;
    m.goal = {mid};
    m.finalize_goal_mask();
    for (int i = 0; i < k; ++i) {
        m.rewards.push_back(Rational(i == mid ? 0 : 1));
        if (i != mid) m.initial.push_back(i);
    }
    m.trans.assign(k, std::vector<Distribution>(2));
    for (int i = 0; i < k; ++i) {
        if (i == mid) {
            m.trans[i][0] = detail::dirac(i);
            m.trans[i][1] = detail::dirac(i);
            continue;
        }
        m.trans[i][0] = (i == 0) ? detail::dirac(0) : detail::move_or_stay(i, i - 1, p);
        m.trans[i][1] = (i == k - 1) ? detail::dirac(k - 1) : detail::move_or_stay(i, i + 1, p);
    }
    return m;
}

/// Line variant where the failure mass 1-p of interior moves goes to a
/// fresh absorbing sink state "sx" with reward 1. The boundary
/// probability-1 self-loop actions are unchanged.
inline Mdp generate_line_sink(int k, const Rational& p) {
    detail::require(k >= 3 && k % 2 == 1, "line-sink: size must be odd and >= 3");
    detail::require(p.sign() > 0 && p <= Rational(1), "line-sink: p must satisfy 0 < p <= 1");
    Mdp m;
    for (int i = 0; i < k; ++i) m.states.push_back("s" + std::to_string(i));
    m.states.push_back("sx");
    const int sink = k;
    m.actions = {"l", "r"};
    const int mid = (k - 1) / 2;
    m.goal = {mid};
    m.finalize_goal_mask();
    for (int i = 0; i <= k; ++i) {
        m.rewards.push_back(Rational(i == mid ? 0 : 1));
        if (i != mid) m.initial.push_back(i);
    }
    m.trans.assign(k + 1, std::vector<Distribution>(2));
    for (int i = 0; i < k; ++i) {
        if (i == mid) {
            m.trans[i][0] = detail::dirac(i);
            m.trans[i][1] = detail::dirac(i);
            continue;
        }
        m.trans[i][0] = (i == 0) ? detail::dirac(0) : detail::move_or_sink(i - 1, sink, p);
        m.trans[i][1] = (i == k - 1) ? detail::dirac(k - 1) : detail::move_or_sink(i + 1, sink, p);
    }
    m.trans[sink][0] = detail::dirac(sink);
    m.trans[sink][1] = detail::dirac(sink);
    return m;
}

/// k x k grid, row-major states s0..s(k^2-1), goal in the bottom-right
/// corner. Moves are deterministic; off-grid moves are self-loops.
inline Mdp generate_grid(int k) {
    detail::require(k >= 2, "grid: size must be >= 2");
    Mdp m;
    const int n = k * k;
    for (int i = 0; i < n; ++i) m.states.push_back("s" + std::to_string(i));
    m.actions = {"up", "down", "left", "right"};
    m.goal = {n - 1};
    m.finalize_goal_mask();
    for (int i = 0; i < n; ++i) {
        m.rewards.push_back(Rational(i == n - 1 ? 0 : 1));
        if (i != n - 1) m.initial.push_back(i);
    }
    m.trans.assign(n, std::vector<Distribution>(4));
    for (int i = 0; i < n; ++i) {
        const int row = i / k, col = i % k;
        m.trans[i][0] = detail::dirac(row > 0 ? i - k : i);
        m.trans[i][1] = detail::dirac(row < k - 1 ? i + k : i);
        m.trans[i][2] = detail::dirac(col > 0 ? i - 1 : i);
        m.trans[i][3] = detail::dirac(col < k - 1 ? i + 1 : i);
    }
    return m;
}

/// Maze with c columns and 3 + (c-5)/2 total rows: a full top row plus
/// three vertical corridors below columns 0, (c-1)/2 and c-1. The goal
/// sits at the bottom of the middle corridor. States are numbered along
/// the top row first, then corridor cells row by row. State count is
/// 3*(rows-1) + c.
inline Mdp generate_maze(int c) {
    detail::require(c >= 5 && c % 2 == 1, "maze: size must be odd and >= 5");
    const int rows = 3 + (c - 5) / 2;
    const int depth = rows - 1;  // corridor cells below the top row
    const int n = c + 3 * depth;
    const int cols[3] = {0, (c - 1) / 2, c - 1};

    // Index helpers: top-row cell j is state j; corridor cell at depth
    // d >= 1 under corridor i (0 = left, 1 = middle, 2 = right) is
    // c + 3*(d-1) + i.
    const auto corridor_state = [&](int i, int d) { return c + 3 * (d - 1) + i; };
    const int goal = corridor_state(1, depth);

    Mdp m;
    for (int i = 0; i < n; ++i) m.states.push_back("s" + std::to_string(i));
    m.actions = {"up", "down", "left", "right"};
    m.goal = {goal};
    m.finalize_goal_mask();
    for (int i = 0; i < n; ++i) {
        m.rewards.push_back(Rational(i == goal ? 0 : 1));
        if (i != goal) m.initial.push_back(i);
    }
    m.trans.assign(n, std::vector<Distribution>(4));

    const auto corridor_of_column = [&](int j) {
        for (int i = 0; i < 3; ++i)
            if (cols[i] == j) return i;
        return -1;
    };

    for (int j = 0; j < c; ++j) {
        const int i = corridor_of_column(j);
        m.trans[j][0] = detail::dirac(j);
        m.trans[j][1] = detail::dirac(i >= 0 ? corridor_state(i, 1) : j);
        m.trans[j][2] = detail::dirac(j > 0 ? j - 1 : j);
        m.trans[j][3] = detail::dirac(j < c - 1 ? j + 1 : j);
    }
    for (int i = 0; i < 3; ++i) {
        for (int d = 1; d <= depth; ++d) {
            const int s = corridor_state(i, d);
            m.trans[s][0] = detail::dirac(d == 1 ? cols[i] : corridor_state(i, d - 1));
            m.trans[s][1] = detail::dirac(d < depth ? corridor_state(i, d + 1) : s);
            m.trans[s][2] = detail::dirac(s);
            m.trans[s][3] = detail::dirac(s);
        }
    }
    return m;
}

/// Deterministic benchmark generator; identical inputs produce
/// byte-identical models. p is ignored for grid and maze.
inline Mdp generate_benchmark(Family family, int size, const Rational& p = Rational(1)) {
    switch (family) {
        case Family::Line: return generate_line(size, p);
        case Family::LineSink: return generate_line_sink(size, p);
        case Family::Grid: return generate_grid(size);
        case Family::Maze: return generate_maze(size);
    }
    throw ModelError("unknown benchmark family");
}

}  // namespace obsyn
