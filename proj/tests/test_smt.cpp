#include <catch_amalgamated.hpp>

#include <sys/stat.h>

#include <cstdio>
#include <fstream>

#include "obsyn/benchmarks.hpp"
#include "obsyn/smt.hpp"

using namespace obsyn;

namespace {

std::string write_fake_solver(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/obsyn_test_" + name + ".sh";
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
    out.close();
    chmod(path.c_str(), 0755);
    return path;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + 1))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("encode produces the published constraint system") {
    const Mdp line = generate_line(5, Rational(1));
    const BuiltTpmc b = build_observation_tpmc(line, 2);
    const SmtScript script = encode(b, Rational(7, 2), false, false);
    const std::string text = script.text();

    SECTION("declarations: 8 y, 4 x, 5 r variables, each exactly once") {
        CHECK(script.var_symbol.size() == 12);
        CHECK(script.value_symbol.size() == 5);
        CHECK(count_occurrences(text, "(declare-const ") == 17);
        for (const auto& sym : script.var_symbol)
            CHECK(count_occurrences(text, "(declare-const " + sym + " Real)") == 1);
    }
    SECTION("Bellman equalities of the running example at p = 1") {
        // r_0 counts one step and mixes self-loop (left) with moving
        // right; r_2 is pinned to zero.
        CHECK(text.find("(assert (= r_s0 (+ 1 (* (+ (* y_s0_o1 x_o1_l) (* y_s0_o2 x_o2_l)) "
                        "r_s0) (* (+ (* y_s0_o1 x_o1_r) (* y_s0_o2 x_o2_r)) r_s1))))") !=
              std::string::npos);
        CHECK(text.find("(assert (= r_s2 0))") != std::string::npos);
        CHECK(text.find("(assert (= r_s1 (+ 1 (* (+ (* y_s1_o1 x_o1_l) (* y_s1_o2 x_o2_l)) "
                        "r_s0) (* (+ (* y_s1_o1 x_o1_r) (* y_s1_o2 x_o2_r)) r_s2))))") !=
              std::string::npos);
    }
    SECTION("typed constraints and the threshold average") {
        CHECK(text.find("(assert (or (= y_s0_o1 0) (= y_s0_o1 1)))") != std::string::npos);
        CHECK(text.find("(assert (= (+ y_s0_o1 y_s0_o2) 1))") != std::string::npos);
        CHECK(text.find("(assert (= (+ x_o1_l x_o1_r) 1))") != std::string::npos);
        CHECK(text.find("(assert (and (<= 0 x_o1_l) (<= x_o1_l 1)))") != std::string::npos);
        CHECK(text.find("(assert (>= (/ 7 2) (* (/ 1 4) (+ r_s0 r_s1 r_s3 r_s4))))") !=
              std::string::npos);
        CHECK(text.find("(check-sat)") != std::string::npos);
        CHECK(text.find("(get-value (") != std::string::npos);
    }
    SECTION("strict mode and deterministic mode toggle assertions") {
        const std::string strict = encode(b, Rational(3, 2), true, false).text();
        CHECK(strict.find("(assert (> (/ 3 2) ") != std::string::npos);
        const std::string det = encode(b, Rational(3, 2), false, true).text();
        CHECK(det.find("(assert (or (= x_o1_l 0) (= x_o1_l 1)))") != std::string::npos);
        CHECK(text.find("(assert (or (= x_o1_l 0)") == std::string::npos);
    }
    SECTION("encode output is byte-stable") {
        CHECK(encode(build_observation_tpmc(line, 2), Rational(7, 2), false, false).text() ==
              text);
    }
    SECTION("sensor budget groups encode as <=") {
        const std::string loc =
            encode(build_location_tpmc(line, 2), Rational(3, 2), false, false).text();
        CHECK(loc.find("(assert (<= (+ y_s0 y_s1 y_s3 y_s4) 2))") != std::string::npos);
        const std::string exact =
            encode(build_location_tpmc(line, 2, true), Rational(3, 2), false, false).text();
        CHECK(exact.find("(assert (= (+ y_s0 y_s1 y_s3 y_s4) 2))") != std::string::npos);
    }
    SECTION("zero rewards on non-goal states are rejected") {
        Mdp bad = line;
        bad.rewards[0] = Rational(0);
        CHECK_THROWS_WITH(encode(build_observation_tpmc(bad, 2), Rational(1), false, false),
                          Catch::Matchers::ContainsSubstring("strictly positive"));
    }
}

TEST_CASE("parse_assignment converts solver literals exactly") {
    const Mdp line = generate_line(5, Rational(1));
    const BuiltTpmc b = build_observation_tpmc(line, 1);
    const SmtScript script = encode(b, Rational(10), false, false);

    const auto var_index = [&](const std::string& sym) {
        for (size_t i = 0; i < script.var_symbol.size(); ++i)
            if (script.var_symbol[i] == sym) return static_cast<int>(i);
        return -1;
    };

    SECTION("rational literal spellings") {
        const std::string raw =
            "sat\n((y_s0_o1 1) (y_s1_o1 (/ 1 2)) (y_s3_o1 (- (/ 3 4))) (y_s4_o1 0.25) "
            "(x_o1_l (/ 1.0 3.0)) (x_o1_r (- 2)) (r_s0 5))";
        const auto parsed = parse_assignment(raw, script);
        CHECK(*parsed.var_values[var_index("y_s0_o1")] == Rational(1));
        CHECK(*parsed.var_values[var_index("y_s1_o1")] == Rational(1, 2));
        CHECK(*parsed.var_values[var_index("y_s3_o1")] == Rational(-3, 4));
        CHECK(*parsed.var_values[var_index("y_s4_o1")] == Rational(1, 4));
        CHECK(*parsed.var_values[var_index("x_o1_l")] == Rational(1, 3));
        CHECK(*parsed.var_values[var_index("x_o1_r")] == Rational(-2));
        CHECK(*parsed.state_values[0] == Rational(5));
        CHECK(parsed.complete);
    }
    SECTION("algebraic root expressions mark the model unverifiable") {
        const std::string raw =
            "sat\n((y_s0_o1 1) (y_s1_o1 1) (y_s3_o1 1) (y_s4_o1 1) "
            "(x_o1_l (root-obj (+ (^ x 2) (- 2)) 2)) (x_o1_r 0))";
        const auto parsed = parse_assignment(raw, script);
        CHECK(!parsed.complete);
        CHECK(parsed.why_incomplete.find("x_o1_l") != std::string::npos);
        CHECK(*parsed.var_values[var_index("y_s0_o1")] == Rational(1));
    }
}

TEST_CASE("run_solver drives external processes") {
    const Mdp line = generate_line(5, Rational(1));
    const SmtScript script = encode(build_observation_tpmc(line, 2), Rational(2), false, false);

    SECTION("sat output is classified and returned raw") {
        const auto path = write_fake_solver("sat", "echo sat\necho '((x 1))'\n");
        const auto run = run_solver(script, path + " {file}", 10);
        CHECK(run.status == Verdict::Sat);
        CHECK(run.output.find("((x 1))") != std::string::npos);
    }
    SECTION("unsat skips model parsing; trailing errors are ignored") {
        const auto path =
            write_fake_solver("unsat", "echo unsat\necho '(error \"model is not available\")'\n");
        const auto run = run_solver(script, path + " {file}", 10);
        CHECK(run.status == Verdict::Unsat);
    }
    SECTION("timeouts kill the process and classify unknown") {
        const auto path = write_fake_solver("slow", "sleep 30\necho sat\n");
        const auto run = run_solver(script, path + " {file}", 1);
        CHECK(run.status == Verdict::Unknown);
        CHECK(run.timed_out);
        CHECK(run.error == "timeout");
        CHECK(run.seconds < 5.0);
    }
    SECTION("stdin feeding when the template has no {file}") {
        const auto path = write_fake_solver(
            "stdin", "grep -q 'check-sat' && echo unsat || echo unknown\n");
        const auto run = run_solver(script, path, 10);
        CHECK(run.status == Verdict::Unsat);
    }
    SECTION("launch failures and garbage output are reported") {
        const auto run = run_solver(script, "/nonexistent/solver {file}", 5);
        CHECK(run.status == Verdict::Unknown);
        CHECK(!run.error.empty());
        const auto path = write_fake_solver("garbled", "echo hello world\n");
        const auto run2 = run_solver(script, path + " {file}", 5);
        CHECK(run2.status == Verdict::Unknown);
        CHECK(run2.error.find("malformed") != std::string::npos);
    }
}

TEST_CASE("solve_via_smt verifies witnesses against the exact engine") {
    const std::string solver = default_solver_cmd();
    if (solver.empty()) {
        WARN("no SMT solver configured; skipping solver-backed tests");
        return;
    }
    SmtOptions opts;
    opts.solver_cmd = solver;
    opts.timeout_seconds = 120;
    const Mdp line = generate_line(5, Rational(1));

    SECTION("pop at the optimum is sat with an exactly verified witness") {
        const auto r = solve_via_smt(ProblemKind::Pop, line, 2, Rational(3, 2), false, opts);
        REQUIRE(r.verdict == Verdict::Sat);
        CHECK(r.verified);
        REQUIRE(r.value.has_value());
        CHECK(*r.value <= Value(Rational(3, 2)));
        REQUIRE(r.witness.has_value());
        CHECK(evaluate_obs_strategy(line, r.witness->obs, r.witness->strategy) == *r.value);
    }
    SECTION("pop strictly below the optimum is unsat") {
        const auto r = solve_via_smt(ProblemKind::Pop, line, 2, Rational(3, 2), true, opts);
        CHECK(r.verdict == Verdict::Unsat);
    }
    SECTION("pdoop witnesses decode to deterministic strategies") {
        const auto r = solve_via_smt(ProblemKind::Pdoop, line, 2, Rational(3, 2), false, opts);
        REQUIRE(r.verdict == Verdict::Sat);
        REQUIRE(r.witness.has_value());
        CHECK(r.witness->strategy.as_det().has_value());
    }
    SECTION("ssp at the line optimum is sat") {
        const auto r = solve_via_smt(ProblemKind::Ssp, line, 2, Rational(3, 2), false, opts);
        REQUIRE(r.verdict == Verdict::Sat);
        CHECK(r.verified);
    }
}
