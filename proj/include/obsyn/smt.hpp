#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <sstream>

#include "obsyn/analysis.hpp"
#include "obsyn/solve_result.hpp"
#include "obsyn/tpmc.hpp"

namespace obsyn {

/// Raised when the solver reports sat but the exact engine refutes the
/// threshold; such results must never be reported as sat.
struct VerificationMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An SMT-LIB2 feasibility script plus the name maps needed to read a
/// model back. `prelude` holds declarations and assertions; `footer`
/// holds check-sat and get-value.
struct SmtScript {
    std::string logic = "QF_NRA";
    std::string prelude;
    std::string footer;
    std::vector<std::string> var_symbol;    // per tpMC variable
    std::vector<std::string> value_symbol;  // per state: the r_s symbol

    std::string text() const { return prelude + footer; }
};

namespace detail {

inline std::string smt_symbol(const std::string& name, std::vector<std::string>& used) {
    static const std::string extra = "~!@$%^&*_-+=<>.?/";
    std::string s;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || extra.find(c) != std::string::npos;
        s += ok ? c : '.';
    }
    if (s.empty() || (s[0] >= '0' && s[0] <= '9')) s = "v." + s;
    std::string candidate = s;
    int suffix = 2;
    while (std::find(used.begin(), used.end(), candidate) != used.end())
        candidate = s + "." + std::to_string(suffix++);
    used.push_back(candidate);
    return candidate;
}

inline std::string smt_rational(const Rational& q) {
    const bool negative = q.sign() < 0;
    const Rational mag = negative ? -q : q;
    std::string s = mag.is_integer()
                        ? mag.num().get_str()
                        : "(/ " + mag.num().get_str() + " " + mag.den().get_str() + ")";
    return negative ? "(- " + s + ")" : s;
}

inline std::string smt_poly(const Poly& p, const std::vector<std::string>& symbols) {
    if (p.is_zero()) return "0";
    std::vector<std::string> terms;
    for (const auto& [mono, coeff] : p.terms()) {
        std::vector<std::string> factors;
        if (!(coeff.is_one() && !mono.empty())) factors.push_back(smt_rational(coeff));
        for (int v : mono) factors.push_back(symbols[v]);
        if (factors.size() == 1) {
            terms.push_back(factors[0]);
        } else {
            std::string t = "(*";
            for (const auto& f : factors) t += " " + f;
            terms.push_back(t + ")");
        }
    }
    if (terms.size() == 1) return terms[0];
    std::string out = "(+";
    for (const auto& t : terms) out += " " + t;
    return out + ")";
}

}  // namespace detail

/// Encodes tpMC feasibility under a reward threshold as an SMT-LIB2
/// script over nonlinear real arithmetic: typed variable constraints,
/// the parametric Bellman equalities, and the threshold on the uniform
/// initial average. `deterministic` restricts strategy variables to
/// {0,1}. Requires strictly positive rewards on all non-goal states
/// (the equalities are only then equivalent to almost-sure reaching).
inline SmtScript encode(const BuiltTpmc& b, const Rational& tau, bool strict,
                        bool deterministic) {
    const Tpmc& t = b.tpmc;
    if (t.initial.empty()) throw ModelError("encode: empty initial set");
    for (int s = 0; s < t.num_states(); ++s)
        if (!t.is_goal[s] && !(t.rewards[s].sign() > 0))
            throw ModelError(
                "encode: non-goal state " + t.states[s] + " has reward " +
                t.rewards[s].str() +
                "; the Bellman encoding is only sound for strictly positive rewards");

    SmtScript script;
    std::vector<std::string> used;
    for (const auto& v : t.vars)
        script.var_symbol.push_back(detail::smt_symbol(v.name, used));
    for (const auto& s : t.states)
        script.value_symbol.push_back(detail::smt_symbol("r_" + s, used));

    std::ostringstream out;
    out << "(set-logic " << script.logic << ")\n";
    for (const auto& sym : script.var_symbol) out << "(declare-const " << sym << " Real)\n";
    for (const auto& sym : script.value_symbol) out << "(declare-const " << sym << " Real)\n";

    // (i) Boolean variables as 0/1 disjunctions, keeping the script
    // purely polynomial.
    for (int v = 0; v < t.num_vars(); ++v) {
        const auto kind = t.vars[v].kind;
        if (kind == VarKind::Bool || kind == VarKind::BoolSum)
            out << "(assert (or (= " << script.var_symbol[v] << " 0) (= "
                << script.var_symbol[v] << " 1)))\n";
    }
    // (ii) Group sums: simplexes are exact, sensor budgets may be <=.
    for (const auto& g : t.groups) {
        if (g.members.empty()) continue;
        std::string sum;
        if (g.members.size() == 1) {
            sum = script.var_symbol[g.members[0]];
        } else {
            sum = "(+";
            for (int v : g.members) sum += " " + script.var_symbol[v];
            sum += ")";
        }
        out << "(assert (" << (g.exact ? "=" : "<=") << " " << sum << " "
            << detail::smt_rational(g.constant) << "))\n";
    }
    // (iii) Strategy variables lie in [0,1]; (deterministic) in {0,1}.
    for (int v = 0; v < t.num_vars(); ++v) {
        if (t.vars[v].kind != VarKind::RealSum && t.vars[v].kind != VarKind::Real) continue;
        const auto& sym = script.var_symbol[v];
        out << "(assert (and (<= 0 " << sym << ") (<= " << sym << " 1)))\n";
        if (deterministic)
            out << "(assert (or (= " << sym << " 0) (= " << sym << " 1)))\n";
    }
    // (iv) Parametric Bellman equalities; (v) nonnegative values.
    for (int s = 0; s < t.num_states(); ++s) {
        if (t.is_goal[s]) {
            out << "(assert (= " << script.value_symbol[s] << " 0))\n";
            continue;
        }
        std::string rhs = "(+ " + detail::smt_rational(t.rewards[s]);
        for (const auto& [target, poly] : t.rows[s])
            rhs += " (* " + detail::smt_poly(poly, script.var_symbol) + " " +
                   script.value_symbol[target] + ")";
        rhs += ")";
        out << "(assert (= " << script.value_symbol[s] << " " << rhs << "))\n";
        out << "(assert (>= " << script.value_symbol[s] << " 0))\n";
    }
    // (vi) Threshold on the uniform initial average.
    std::string avg = "(+";
    for (int s : t.initial) avg += " " + script.value_symbol[s];
    avg += ")";
    out << "(assert (" << (strict ? ">" : ">=") << " " << detail::smt_rational(tau)
        << " (* (/ 1 " << t.initial.size() << ") " << avg << ")))\n";
    script.prelude = out.str();

    std::ostringstream foot;
    foot << "(check-sat)\n(get-value (";
    bool first = true;
    for (const auto& sym : script.var_symbol) {
        foot << (first ? "" : " ") << sym;
        first = false;
    }
    for (const auto& sym : script.value_symbol) foot << " " << sym;
    foot << "))\n";
    script.footer = foot.str();
    return script;
}

/// Outcome of one external solver invocation.
struct SolverRun {
    Verdict status = Verdict::Unknown;
    std::string output;
    double seconds = 0.0;
    bool timed_out = false;
    std::string error;
};

/// Runs an SMT-LIB2 solver process on a script. The command template is
/// split on whitespace; a "{file}" placeholder is replaced by a
/// temporary script path, otherwise the script is fed on stdin. The
/// process is killed once the timeout expires.
inline SolverRun run_solver(const SmtScript& script, const std::string& solver_cmd,
                            double timeout_seconds) {
    SolverRun run;
    if (solver_cmd.empty()) {
        run.error = "no solver command configured";
        return run;
    }
    std::vector<std::string> argv_strings;
    {
        std::istringstream in(solver_cmd);
        std::string tok;
        while (in >> tok) argv_strings.push_back(tok);
    }
    if (argv_strings.empty()) {
        run.error = "empty solver command";
        return run;
    }

    char tmp_path[] = "/tmp/obsyn-XXXXXX.smt2";
    bool uses_file = false;
    for (auto& tok : argv_strings) {
        const auto pos = tok.find("{file}");
        if (pos == std::string::npos) continue;
        if (!uses_file) {
            const int fd = mkstemps(tmp_path, 5);
            if (fd < 0) {
                run.error = "cannot create temporary script file";
                return run;
            }
            const std::string text = script.text();
            if (write(fd, text.data(), text.size()) < 0) {
                close(fd);
                run.error = "cannot write temporary script file";
                return run;
            }
            close(fd);
            uses_file = true;
        }
        tok.replace(pos, 6, tmp_path);
    }

    int out_pipe[2], in_pipe[2] = {-1, -1};
    if (pipe(out_pipe) != 0) {
        run.error = "pipe failed";
        return run;
    }
    if (!uses_file && pipe(in_pipe) != 0) {
        run.error = "pipe failed";
        close(out_pipe[0]);
        close(out_pipe[1]);
        return run;
    }

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = fork();
    if (pid < 0) {
        run.error = "fork failed";
        return run;
    }
    if (pid == 0) {
        setpgid(0, 0);  // own process group, so a timeout kill reaps helpers too
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(out_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        if (!uses_file) {
            dup2(in_pipe[0], STDIN_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
        }
        std::vector<char*> argv;
        for (auto& s : argv_strings) argv.push_back(s.data());
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        const char* msg = "exec failed\n";
        (void)!write(STDOUT_FILENO, msg, strlen(msg));
        _exit(127);
    }
    close(out_pipe[1]);
    if (!uses_file) {
        close(in_pipe[0]);
        const std::string text = script.text();
        (void)!write(in_pipe[1], text.data(), text.size());
        close(in_pipe[1]);
    }

    std::string output;
    char buf[4096];
    bool deadline_hit = false;
    while (true) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > timeout_seconds) {
            deadline_hit = true;
            break;
        }
        struct pollfd pfd {out_pipe[0], POLLIN, 0};
        const int pr = poll(&pfd, 1, 100);
        if (pr < 0) break;
        if (pr == 0) continue;
        const ssize_t got = read(out_pipe[0], buf, sizeof buf);
        if (got < 0) break;
        if (got == 0) break;  // child closed stdout
        output.append(buf, static_cast<size_t>(got));
    }
    if (deadline_hit) {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
    }
    close(out_pipe[0]);
    int wstatus = 0;
    waitpid(pid, &wstatus, 0);
    if (uses_file) unlink(tmp_path);

    run.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.output = std::move(output);
    run.timed_out = deadline_hit;
    if (deadline_hit) {
        run.status = Verdict::Unknown;
        run.error = "timeout";
        return run;
    }

    // First status token wins; later (error ...) lines from get-value on
    // unsat are ignored.
    std::istringstream lines(run.output);
    std::string line;
    bool classified = false;
    while (std::getline(lines, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line == "sat") {
            run.status = Verdict::Sat;
            classified = true;
            break;
        }
        if (line == "unsat") {
            run.status = Verdict::Unsat;
            classified = true;
            break;
        }
        if (line == "unknown") {
            run.status = Verdict::Unknown;
            classified = true;
            break;
        }
    }
    if (!classified) run.error = "malformed solver output (no status token)";
    return run;
}

namespace detail {

// Minimal s-expression reader for solver models.
struct Sexp {
    std::string atom;
    std::vector<Sexp> items;
    bool is_atom = false;
};

inline bool parse_sexps(const std::string& text, size_t& pos, std::vector<Sexp>& out) {
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            ++pos;
            continue;
        }
        if (c == ')') return true;
        if (c == '(') {
            ++pos;
            Sexp list;
            if (!parse_sexps(text, pos, list.items)) return false;
            if (pos >= text.size() || text[pos] != ')') return false;
            ++pos;
            out.push_back(std::move(list));
            continue;
        }
        Sexp atom;
        atom.is_atom = true;
        while (pos < text.size() && !strchr(" \t\r\n()", text[pos])) atom.atom += text[pos++];
        out.push_back(std::move(atom));
    }
    return true;
}

inline std::optional<Rational> rational_of_sexp(const Sexp& e) {
    if (e.is_atom) {
        const std::string& a = e.atom;
        const auto dot = a.find('.');
        try {
            if (dot == std::string::npos) return Rational::parse(a);
            // Finite decimals convert exactly: "0.25" = 25/100.
            std::string digits = a.substr(0, dot) + a.substr(dot + 1);
            const size_t frac_len = a.size() - dot - 1;
            std::string den = "1";
            den.append(frac_len, '0');
            return Rational::parse(digits) / Rational::parse(den);
        } catch (const ParseError&) {
            return std::nullopt;
        }
    }
    if (e.items.empty() || !e.items[0].is_atom) return std::nullopt;
    const std::string& op = e.items[0].atom;
    if (op == "-" && e.items.size() == 2) {
        const auto v = rational_of_sexp(e.items[1]);
        if (!v) return std::nullopt;
        return -*v;
    }
    if (op == "/" && e.items.size() == 3) {
        const auto a = rational_of_sexp(e.items[1]);
        const auto b = rational_of_sexp(e.items[2]);
        if (!a || !b || b->is_zero()) return std::nullopt;
        return *a / *b;
    }
    return std::nullopt;  // root-obj and friends: not a rational
}

}  // namespace detail

/// A parsed solver model: rational values per tpMC variable and per
/// state value symbol. Irrational (algebraic) forms leave entries empty
/// and mark the model unverifiable.
struct ParsedAssignment {
    std::vector<std::optional<Rational>> var_values;
    std::vector<std::optional<Rational>> state_values;
    bool complete = false;
    std::string why_incomplete;
};

/// Extracts the get-value assignment from raw solver output, mapping
/// symbols back through the script's name tables. Rational literals in
/// all common spellings are converted exactly; algebraic values yield
/// an incomplete (sat-unverifiable) assignment.
inline ParsedAssignment parse_assignment(const std::string& raw, const SmtScript& script) {
    ParsedAssignment out;
    out.var_values.resize(script.var_symbol.size());
    out.state_values.resize(script.value_symbol.size());

    // Skip the status line; parse the rest as s-expressions.
    std::string body = raw;
    const auto sat_pos = body.find("sat");
    if (sat_pos != std::string::npos) body = body.substr(sat_pos + 3);
    size_t pos = 0;
    std::vector<detail::Sexp> top;
    if (!detail::parse_sexps(body, pos, top)) {
        out.why_incomplete = "unparseable solver model";
        return out;
    }

    const auto assign = [&](const std::string& sym, const detail::Sexp& value) {
        const auto v = detail::rational_of_sexp(value);
        for (size_t i = 0; i < script.var_symbol.size(); ++i) {
            if (script.var_symbol[i] == sym) {
                if (v)
                    out.var_values[i] = *v;
                else
                    out.why_incomplete = "non-rational value for " + sym;
                return;
            }
        }
        for (size_t i = 0; i < script.value_symbol.size(); ++i) {
            if (script.value_symbol[i] == sym) {
                if (v)
                    out.state_values[i] = *v;
                else
                    out.why_incomplete = "non-rational value for " + sym;
                return;
            }
        }
    };
    const std::function<void(const detail::Sexp&)> walk = [&](const detail::Sexp& e) {
        if (e.is_atom) return;
        if (e.items.size() == 2 && e.items[0].is_atom && !e.items[0].atom.empty() &&
            e.items[0].atom[0] != '(') {
            assign(e.items[0].atom, e.items[1]);
            return;
        }
        for (const auto& item : e.items) walk(item);
    };
    for (const auto& e : top) walk(e);

    out.complete = true;
    for (const auto& v : out.var_values)
        if (!v) out.complete = false;
    if (!out.complete && out.why_incomplete.empty())
        out.why_incomplete = "model misses some variables";
    return out;
}

enum class ProblemKind { Pop, Pdoop, Ssp, SspGeneral };

inline ProblemKind problem_from_string(const std::string& s) {
    if (s == "pop") return ProblemKind::Pop;
    if (s == "pdoop") return ProblemKind::Pdoop;
    if (s == "ssp") return ProblemKind::Ssp;
    if (s == "ssp-general") return ProblemKind::SspGeneral;
    throw ModelError("unknown problem kind: " + s);
}

struct SmtOptions {
    std::string solver_cmd;
    double timeout_seconds = 900;
    bool exact_budget = false;
    // Restrict strategy variables to {0,1} also outside pdoop (the
    // deterministic-strategy tables for pop/ssp).
    bool deterministic_strategies = false;
};

/// Builds the tpMC matching the problem kind.
inline BuiltTpmc build_problem_tpmc(ProblemKind kind, const Mdp& m, int budget,
                                    const std::vector<std::vector<std::string>>* loc = nullptr,
                                    bool exact_budget = false) {
    switch (kind) {
        case ProblemKind::Pop:
        case ProblemKind::Pdoop:
            return build_observation_tpmc(m, budget);
        case ProblemKind::Ssp:
            return build_location_tpmc(m, budget, exact_budget);
        case ProblemKind::SspGeneral:
            if (!loc) throw ModelError("ssp-general needs a sensor location map");
            return build_general_location_tpmc(m, *loc, budget, 10, exact_budget);
    }
    throw ModelError("unknown problem kind");
}

/// Feasibility via the SMT backend: builds the tpMC, encodes, runs the
/// solver, decodes the witness and re-verifies it with the exact
/// engine. A sat whose exact value violates the threshold raises
/// VerificationMismatch rather than being reported. Algebraic models
/// are refined toward a deterministic witness once; if that fails the
/// result is sat-unverifiable (witness omitted, verified = false).
inline SolveResult solve_via_smt(ProblemKind kind, const Mdp& m, int budget,
                                 const Rational& tau, bool strict, const SmtOptions& opts,
                                 const std::vector<std::vector<std::string>>* loc = nullptr) {
    const bool deterministic = kind == ProblemKind::Pdoop || opts.deterministic_strategies;
    const BuiltTpmc built = build_problem_tpmc(kind, m, budget, loc, opts.exact_budget);
    const SmtScript script = encode(built, tau, strict, deterministic);

    SolveResult result;
    SolverRun run = run_solver(script, opts.solver_cmd, opts.timeout_seconds);
    result.solver_seconds = run.seconds;
    if (run.status == Verdict::Unknown) {
        result.verdict = Verdict::Unknown;
        result.diagnostics = run.error.empty() ? "solver returned unknown" : run.error;
        return result;
    }
    if (run.status == Verdict::Unsat) {
        result.verdict = Verdict::Unsat;
        result.diagnostics = "solver-reported unsat";
        return result;
    }

    ParsedAssignment parsed = parse_assignment(run.output, script);
    std::string refine_note;
    if (!parsed.complete) {
        // Algebraic witness: pin the Boolean skeleton that did parse and
        // ask for a deterministic strategy on top of it.
        SmtScript refined = encode(built, tau, strict, /*deterministic=*/true);
        std::ostringstream pins;
        for (int v = 0; v < built.tpmc.num_vars(); ++v) {
            const auto k = built.tpmc.vars[v].kind;
            if (k != VarKind::Bool && k != VarKind::BoolSum) continue;
            if (!parsed.var_values[v]) continue;
            pins << "(assert (= " << refined.var_symbol[v] << " "
                 << detail::smt_rational(*parsed.var_values[v]) << "))\n";
        }
        refined.prelude += pins.str();
        const SolverRun second = run_solver(refined, opts.solver_cmd, opts.timeout_seconds);
        result.solver_seconds += second.seconds;
        if (second.status == Verdict::Sat) {
            ParsedAssignment reparsed = parse_assignment(second.output, refined);
            if (reparsed.complete) {
                parsed = std::move(reparsed);
                refine_note = "; witness refined to a deterministic strategy";
            }
        }
        if (!parsed.complete) {
            result.verdict = Verdict::Sat;
            result.verified = false;
            result.diagnostics = "sat-unverifiable: " + parsed.why_incomplete;
            return result;
        }
    }

    Instantiation iota;
    iota.resize(built.tpmc.num_vars());
    for (int v = 0; v < built.tpmc.num_vars(); ++v) iota.set(v, *parsed.var_values[v]);
    const auto violations = check_instantiation(built.tpmc, iota);
    if (!violations.empty())
        throw VerificationMismatch("solver model is not a well-defined instantiation: " +
                                   violations.front());
    auto [obs, sigma] = decode_witness(built, iota);
    const Value exact = evaluate_obs_strategy(m, obs, sigma);
    const bool ok = exact.is_finite() && (strict ? exact < Value(tau) : exact <= Value(tau));
    if (!ok)
        throw VerificationMismatch("solver reported sat but the exact value " + exact.str() +
                                   " violates the threshold " + tau.str());
    result.verdict = Verdict::Sat;
    result.value = exact;
    result.witness = Witness{std::move(obs), std::move(sigma)};
    result.verified = true;
    result.diagnostics = "witness re-verified exactly" + refine_note;
    return result;
}

/// Solver command resolution: the explicit option wins, then the
/// OBSYN_SOLVER_CMD environment variable, then the bundled Node-based
/// Z3 shim if its dependencies are installed.
inline std::string default_solver_cmd() {
    if (const char* env = std::getenv("OBSYN_SOLVER_CMD"); env && *env) return env;
#ifdef OBSYN_SOURCE_DIR
    const std::string root = OBSYN_SOURCE_DIR;
    const std::string shim = root + "/tools/solver/z3smt.cjs";
    const std::string dep = root + "/tools/solver/node_modules/z3-solver";
    if (access(shim.c_str(), R_OK) == 0 && access(dep.c_str(), F_OK) == 0)
        return "node " + shim + " {file}";
#endif
    return "";
}

}  // namespace obsyn
