// Command-line front end: benchmark generation, observability solving
// with either backend, witness verification, optimum bracketing, and
// reproduction of the published result tables.

#include <CLI11.hpp>
#include <iostream>

#include "obsyn/bench.hpp"
#include "obsyn/benchmarks.hpp"
#include "obsyn/enumerate.hpp"
#include "obsyn/model_io.hpp"
#include "obsyn/smt.hpp"

using namespace obsyn;

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 3;
constexpr int kExitMismatch = 4;

int exit_code_of(const SolveResult& r) {
    switch (r.verdict) {
        case Verdict::Sat: return r.verified ? kExitSat : kExitUnknown;
        case Verdict::Unsat: return kExitUnsat;
        case Verdict::Unknown: return kExitUnknown;
    }
    return kExitUnknown;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct SolveArgs {
    std::string problem, model_path, threshold, backend = "enum";
    std::string solver_cmd, emit_smt, out_path, locations_path, sensors, progress;
    int budget = 1;
    int jobs = 1;
    double timeout = 900;
    bool strict = false;
    bool exact_budget = false;
};

int run_solve(const SolveArgs& args) {
    const Mdp m = load_model_file(args.model_path);
    const Rational tau = Rational::parse(args.threshold);
    if (tau.sign() < 0) throw ParseError("threshold must be nonnegative");
    const ProblemKind kind = problem_from_string(args.problem);

    std::optional<std::vector<std::vector<std::string>>> locations;
    if (!args.locations_path.empty()) {
        std::ifstream in(args.locations_path);
        if (!in) throw ParseError("cannot open locations file: " + args.locations_path);
        Json j = Json::parse(in);
        locations.emplace(m.num_states());
        for (const auto& [state, sensors] : j.items()) {
            const int s = m.state_index(state);
            if (s < 0) throw ParseError("locations: unknown state '" + state + "'");
            for (const auto& d : sensors) (*locations)[s].push_back(d.get<std::string>());
        }
    }

    SolveResult result;
    if (args.backend == "smt") {
        SmtOptions opts;
        opts.solver_cmd = args.solver_cmd.empty() ? default_solver_cmd() : args.solver_cmd;
        opts.timeout_seconds = args.timeout;
        opts.exact_budget = args.exact_budget;
        if (!args.emit_smt.empty()) {
            const BuiltTpmc built = build_problem_tpmc(
                kind, m, args.budget, locations ? &*locations : nullptr, opts.exact_budget);
            const SmtScript script =
                encode(built, tau, args.strict, kind == ProblemKind::Pdoop);
            write_file(args.emit_smt, script.text());
            std::cout << "wrote " << args.emit_smt << "\n";
            return kExitSat;
        }
        if (opts.solver_cmd.empty())
            throw ParseError(
                "no SMT solver configured; pass --solver-cmd or set OBSYN_SOLVER_CMD");
        result = solve_via_smt(kind, m, args.budget, tau, args.strict, opts,
                               locations ? &*locations : nullptr);
    } else if (args.backend == "enum") {
        EnumOptions opts;
        opts.jobs = args.jobs;
        if (args.progress == "ndjson") opts.progress = &std::cerr;
        if (kind == ProblemKind::Pop)
            throw ParseError(
                "the enumerative backend covers deterministic strategies only; "
                "solve pop with --backend smt");
        if (kind == ProblemKind::SspGeneral)
            throw ParseError("ssp-general is solved by the smt backend");
        if (kind == ProblemKind::Pdoop) {
            result = solve_pdoop_enum(m, args.budget, Value(tau), args.strict, opts);
        } else if (!args.sensors.empty()) {
            std::vector<int> fixed;
            for (const auto& name : split_csv(args.sensors)) {
                const int s = m.state_index(name);
                if (s < 0) throw ParseError("--sensors: unknown state '" + name + "'");
                fixed.push_back(s);
            }
            opts.exhaustive = true;  // probe mode reports the best value
            result = solve_ssp_enum(m, args.budget, Value(tau), args.strict, opts, fixed);
        } else {
            result = solve_ssp_enum(m, args.budget, Value(tau), args.strict, opts);
        }
    } else {
        throw ParseError("unknown backend: " + args.backend);
    }

    const Json j = result_to_json(m, result);
    std::cout << j.dump(2) << "\n";
    if (!args.out_path.empty()) write_file(args.out_path, j.dump(2) + "\n");
    return exit_code_of(result);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact optimal-observability toolkit for MDPs"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a benchmark model");
    std::string gen_family, gen_p = "1", gen_out;
    int gen_size = 0;
    gen->add_option("--family", gen_family, "line|line-sink|grid|maze")->required();
    gen->add_option("--size", gen_size, "family size parameter")->required();
    gen->add_option("--p", gen_p, "move success probability (line families)");
    gen->add_option("--out", gen_out, "output model path")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "Decide an observability instance");
    SolveArgs sa;
    solve->add_option("--problem", sa.problem, "pop|pdoop|ssp|ssp-general")->required();
    solve->add_option("--model", sa.model_path, "model file")->required();
    solve->add_option("--budget", sa.budget, "observation/sensor budget")->required();
    solve->add_option("--threshold", sa.threshold, "rational threshold, e.g. 9/4")->required();
    solve->add_flag("--strict", sa.strict, "require value strictly below the threshold");
    solve->add_option("--backend", sa.backend, "smt|enum")->required();
    solve->add_option("--solver-cmd", sa.solver_cmd,
                      "SMT solver command template with {file} placeholder");
    solve->add_option("--timeout", sa.timeout, "solver timeout in seconds");
    solve->add_option("--emit-smt", sa.emit_smt, "write the SMT-LIB2 script and exit");
    solve->add_option("--out", sa.out_path, "write the result JSON here");
    solve->add_option("--jobs", sa.jobs, "enumeration worker threads");
    solve->add_option("--sensors", sa.sensors, "fixed sensor states for an ssp probe");
    solve->add_option("--locations", sa.locations_path, "sensor location map (ssp-general)");
    solve->add_option("--progress", sa.progress, "progress reporting: ndjson");
    solve->add_flag("--exact-budget", sa.exact_budget,
                    "encode the sensor budget as an exact sum");

    // min-budget
    auto* minb = app.add_subcommand("min-budget", "Minimal observation budget (MPBP)");
    std::string minb_model, minb_out;
    minb->add_option("--model", minb_model, "model file")->required();
    minb->add_option("--out", minb_out, "write the witness JSON here");

    // mdp-opt
    auto* mdpopt = app.add_subcommand("mdp-opt", "Exact MDP optimum");
    std::string mdpopt_model;
    mdpopt->add_option("--model", mdpopt_model, "model file")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "Re-evaluate a witness exactly");
    std::string verify_model, verify_witness;
    verify->add_option("--model", verify_model, "model file")->required();
    verify->add_option("--witness", verify_witness, "witness/result JSON")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Reproduce the published result tables");
    std::string bench_suite, bench_out, bench_solver;
    int bench_jobs = 1;
    double bench_timeout = 900;
    bench->add_option("--suite", bench_suite, "paper")->required();
    bench->add_option("--out", bench_out, "CSV output path")->required();
    bench->add_option("--jobs", bench_jobs, "concurrent rows");
    bench->add_option("--solver-cmd", bench_solver, "SMT solver command template");
    bench->add_option("--timeout", bench_timeout, "per-row solver timeout in seconds");

    // bracket
    auto* bracket = app.add_subcommand("bracket", "Bracket the optimal threshold");
    SolveArgs ba;
    std::string bracket_precision = "1/100";
    bracket->add_option("--problem", ba.problem, "pdoop|ssp|pop")->required();
    bracket->add_option("--model", ba.model_path, "model file")->required();
    bracket->add_option("--budget", ba.budget, "budget")->required();
    bracket->add_option("--backend", ba.backend, "smt|enum")->required();
    bracket->add_option("--precision", bracket_precision, "interval width (smt backend)");
    bracket->add_option("--solver-cmd", ba.solver_cmd, "SMT solver command template");
    bracket->add_option("--timeout", ba.timeout, "solver timeout in seconds");
    bracket->add_option("--jobs", ba.jobs, "enumeration worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const Mdp m =
                generate_benchmark(family_from_string(gen_family), gen_size, Rational::parse(gen_p));
            write_file(gen_out, store_model(m));
            std::cout << "wrote " << gen_out << " (" << m.num_states() << " states)\n";
            return 0;
        }
        if (solve->parsed()) return run_solve(sa);
        if (minb->parsed()) {
            const Mdp m = load_model_file(minb_model);
            const MpbpResult r = solve_mpbp(m);
            std::cout << "budget " << r.budget << " (optimum " << r.optimum.str() << ")\n";
            if (!minb_out.empty()) {
                Json j = witness_to_json(m, Witness{r.obs, RandStrategy::from_det(r.sigma)});
                j["value"] = r.optimum.str();
                write_file(minb_out, j.dump(2) + "\n");
            }
            return 0;
        }
        if (mdpopt->parsed()) {
            const Mdp m = load_model_file(mdpopt_model);
            std::cout << mdp_min_expected_reward(m).value.str() << "\n";
            return 0;
        }
        if (verify->parsed()) {
            const Mdp m = load_model_file(verify_model);
            std::ifstream in(verify_witness);
            if (!in) throw ParseError("cannot open witness file: " + verify_witness);
            const Json j = Json::parse(in);
            const Witness w = witness_from_json(m, j);
            const Value v = evaluate_obs_strategy(m, w.obs, w.strategy);
            std::cout << v.str() << "\n";
            if (j.contains("value") && !j["value"].is_null()) {
                const Value recorded = Value::parse(j["value"].get<std::string>());
                if (!(recorded == v)) {
                    std::cerr << "witness value " << recorded.str()
                              << " does not match the exact evaluation " << v.str() << "\n";
                    return kExitMismatch;
                }
            }
            return 0;
        }
        if (bench->parsed()) {
            if (bench_suite != "paper") throw ParseError("unknown suite: " + bench_suite);
            SmtOptions opts;
            opts.solver_cmd = bench_solver.empty() ? default_solver_cmd() : bench_solver;
            opts.timeout_seconds = bench_timeout;
            const auto records = reproduce_tables(opts, bench_jobs);
            write_file(bench_out, records_to_csv(records));
            int mismatches = 0;
            for (const auto& r : records)
                if (!r.match) ++mismatches;
            std::cout << records.size() << " rows, " << mismatches << " mismatches -> "
                      << bench_out << "\n";
            return mismatches == 0 ? 0 : kExitUnknown;
        }
        if (bracket->parsed()) {
            const Mdp m = load_model_file(ba.model_path);
            SmtOptions opts;
            opts.solver_cmd = ba.solver_cmd.empty() ? default_solver_cmd() : ba.solver_cmd;
            opts.timeout_seconds = ba.timeout;
            const Bracket r =
                bracket_optimum(problem_from_string(ba.problem), m, ba.budget, ba.backend,
                                Rational::parse(bracket_precision), opts, ba.jobs);
            if (r.exact)
                std::cout << "optimum " << r.hi.str() << "\n";
            else
                std::cout << "optimum in (" << r.lo.str() << ", " << r.hi.str() << "]"
                          << (r.note.empty() ? "" : " — " + r.note) << "\n";
            return 0;
        }
    } catch (const VerificationMismatch& e) {
        std::cerr << "verification mismatch: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
