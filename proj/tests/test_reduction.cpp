#include <catch_amalgamated.hpp>

#include "obsyn/analysis.hpp"
#include "obsyn/benchmarks.hpp"
#include "obsyn/enumerate.hpp"
#include "obsyn/reduction.hpp"

using namespace obsyn;

namespace {

// Small POMDP fixtures over the L(5) line: the published two-color
// pattern (deterministically infeasible) and the side split (solvable).
Pomdp colored_line(const Rational& p) {
    const Mdp line = generate_line(5, p);
    ObservationFunction obs;
    obs.labels = {"o1", "o2"};
    obs.map = {0, 1, ObservationFunction::kGoalMark, 1, 0};
    return apply_observation(line, obs);
}

Pomdp side_colored_line(const Rational& p) {
    const Mdp line = generate_line(5, p);
    ObservationFunction obs;
    obs.labels = {"o1", "o2"};
    obs.map = {0, 0, ObservationFunction::kGoalMark, 1, 1};
    return apply_observation(line, obs);
}

}  // namespace

TEST_CASE("policy reduction has the published shape") {
    const Pomdp p = colored_line(Rational(1));
    const Mdp r = build_policy_reduction(p, Rational(4), ReductionVariant::General);

    CHECK(r.num_states() == 5 + 2 + 2);
    CHECK(r.num_actions() == 2 * 2);
    const int tagged_o1 = r.state_index("s[o1]");
    const int sink = r.state_index("s[inf]");
    const int relay = r.state_index("s[tau]");
    REQUIRE(tagged_o1 >= 0);
    REQUIRE(sink >= 0);
    REQUIRE(relay >= 0);
    CHECK(r.rewards[relay] == Rational(4));
    CHECK(r.rewards[sink] == Rational(1));
    CHECK(r.rewards[tagged_o1].is_zero());
    // Tagged states are initial, sink and relay are not.
    CHECK(std::find(r.initial.begin(), r.initial.end(), tagged_o1) != r.initial.end());
    CHECK(std::find(r.initial.begin(), r.initial.end(), sink) == r.initial.end());
    CHECK(validate_mdp(r).empty());

    // Wrong tags lead to the sink: from s0 (observation o1) an
    // o2-tagged action moves to s[inf].
    const int wrong = r.action_index("l@o2");
    REQUIRE(wrong >= 0);
    CHECK(r.trans[0][wrong].is_dirac());
    CHECK(r.trans[0][wrong].entries[0].first == sink);
    // Correct tags behave like the original.
    const int right = r.action_index("r@o1");
    CHECK(r.trans[0][right] == p.mdp.trans[0][1]);
    // Tagged states mix uniformly over S_O and the relay.
    const auto& row = r.trans[tagged_o1][right].entries;
    REQUIRE(row.size() == 3);
    for (const auto& [t, prob] : row) CHECK(prob == Rational(1, 3));

    SECTION("positional variant routes tagged states straight to the relay") {
        const Mdp rp = build_policy_reduction(p, Rational(4), ReductionVariant::Positional);
        const int t1 = rp.state_index("s[o1]");
        const int rel = rp.state_index("s[tau]");
        CHECK(rp.trans[t1][right].is_dirac());
        CHECK(rp.trans[t1][right].entries[0].first == rel);
        CHECK(rp.trans[rel][0].is_dirac());
        CHECK(rp.trans[rel][0].entries[0].first == 2);  // first goal state
    }
}

TEST_CASE("policy reduction preconditions") {
    const Mdp line = generate_line(5, Rational(1));
    ObservationFunction unused_label;
    unused_label.labels = {"o1", "o2", "o3"};
    unused_label.map = {0, 1, ObservationFunction::kGoalMark, 1, 0};
    const Pomdp p{line, unused_label};
    CHECK_THROWS_AS(build_policy_reduction(p, Rational(1), ReductionVariant::Positional),
                    ModelError);
}

TEST_CASE("reduction equivalence on hand-picked POMDPs") {
    // PDPEP on the POMDP must match PDOOP on the reduced MDP with
    // budget |O|, at the optimum and strictly below it.
    const Pomdp cases[] = {colored_line(Rational(1)), colored_line(Rational(1, 2)),
                           side_colored_line(Rational(1)),
                           side_colored_line(Rational(1, 2))};
    for (const Pomdp& p : cases) {
        EnumOptions exhaustive;
        exhaustive.exhaustive = true;
        const auto base = solve_pdpep_enum(p, Value::infinity(), false, exhaustive);
        REQUIRE(base.value.has_value());
        std::vector<std::pair<Value, bool>> probes;  // (threshold, expected sat)
        if (base.value->is_finite()) {
            probes.push_back({*base.value, true});
            const Rational below = base.value->finite() - Rational(1, 2);
            if (below.sign() >= 0) probes.push_back({Value(below), false});
        } else {
            probes.push_back({Value(Rational(3)), false});
            probes.push_back({Value(Rational(50)), false});
        }
        for (const auto& [tau, expect_sat] : probes) {
            const auto direct = solve_pdpep_enum(p, tau, false);
            CHECK((direct.verdict == Verdict::Sat) == expect_sat);
            const Mdp reduced =
                build_policy_reduction(p, tau.finite(), ReductionVariant::Positional);
            const auto via = solve_pdoop_enum(reduced, p.obs.num_labels(), tau, false);
            CHECK((via.verdict == Verdict::Sat) == expect_sat);
        }
    }
}
