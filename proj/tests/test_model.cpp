#include <catch_amalgamated.hpp>

#include "obsyn/benchmarks.hpp"
#include "obsyn/model.hpp"
#include "obsyn/model_io.hpp"

using namespace obsyn;

namespace {

ObservationFunction two_sided_coloring(const Mdp& line) {
    // Fig. 2 colors: distance-1 and distance-2 states share labels.
    ObservationFunction obs;
    obs.labels = {"o1", "o2"};
    obs.map.assign(line.num_states(), ObservationFunction::kGoalMark);
    obs.map[0] = 0;
    obs.map[4] = 0;
    obs.map[1] = 1;
    obs.map[3] = 1;
    return obs;
}

}  // namespace

TEST_CASE("model files round-trip through the canonical form") {
    const Mdp line = generate_line(5, Rational(1));
    const std::string text = store_model(line);
    const Mdp back = load_model(text);
    CHECK(back.states == line.states);
    CHECK(back.actions == line.actions);
    CHECK(back.initial == line.initial);
    CHECK(back.goal == line.goal);
    CHECK(store_model(back) == text);

    // Non-canonical input normalizes: "2/4" prints as "1/2".
    const Mdp half = generate_line(5, Rational(1, 2));
    std::string t2 = store_model(half);
    CHECK(t2.find("\"1/2\"") != std::string::npos);
    CHECK(t2.find("0.5") == std::string::npos);
    const std::string swapped = [&] {
        std::string s = t2;
        const auto pos = s.find("\"1/2\"");
        s.replace(pos, 5, "\"2/4\"");
        return s;
    }();
    CHECK(store_model(load_model(swapped)) == t2);
}

TEST_CASE("loading the serialized L(5,1) file recovers the structure") {
    const Mdp m = load_model(store_model(generate_line(5, Rational(1))));
    CHECK(m.num_states() == 5);
    CHECK(m.goal == std::vector<int>{2});
    CHECK(m.initial == std::vector<int>{0, 1, 3, 4});
    CHECK(m.rewards[2].is_zero());
    CHECK(m.rewards[0].is_one());
}

TEST_CASE("load_model rejects malformed and invalid inputs") {
    const Mdp line = generate_line(5, Rational(1, 2));
    std::string good = store_model(line);

    SECTION("row sum violation") {
        std::string bad = good;
        const auto pos = bad.find("\"1/2\"");
        bad.replace(pos, 5, "\"2/5\"");
        CHECK_THROWS_WITH(load_model(bad), Catch::Matchers::ContainsSubstring("sums to"));
    }
    SECTION("unknown state reference") {
        std::string bad = good;
        const auto pos = bad.find("\"s1\": \"1/2\"");
        if (pos != std::string::npos) bad.replace(pos, 12, "\"s9\": \"1/2\"");
        CHECK_THROWS_AS(load_model(bad), ParseError);
    }
    SECTION("not json") { CHECK_THROWS_AS(load_model("{nope"), ParseError); }
    SECTION("decimal probability") {
        std::string bad = good;
        const auto pos = bad.find("\"1/2\"");
        bad.replace(pos, 5, "0.5");
        CHECK_THROWS_AS(load_model(bad), ParseError);
    }
}

TEST_CASE("validate_mdp reports every violation") {
    Mdp m = generate_grid(3);
    CHECK(validate_mdp(m).empty());

    m.goal.clear();
    m.finalize_goal_mask();
    m.rewards[1] = Rational(-1);
    m.trans[0][0].entries[0].second = Rational(9, 10);
    const auto violations = validate_mdp(m);
    REQUIRE(violations.size() == 3);
    CHECK(violations[0] == "empty goal set");
    CHECK(violations[1].find("sums to 9/10") != std::string::npos);
    CHECK(violations[2] == "negative reward at state s1");
}

TEST_CASE("induced chain follows the strategy mix exactly") {
    const Mdp line = generate_line(5, Rational(1, 2));

    SECTION("Ex. 2 deterministic strategy sends s1 and s3 to the goal") {
        const Mdp sure = generate_line(5, Rational(1));
        DetStrategy sigma;
        sigma.choice = {1, 1, 0, 0, 0};  // r, r, l, l, l
        const Dtmc d = induced_dtmc(sure, sigma);
        REQUIRE(d.trans[1].entries.size() == 1);
        CHECK(d.trans[1].entries[0].first == 2);
        CHECK(d.trans[1].entries[0].second.is_one());
        REQUIRE(d.trans[3].entries.size() == 1);
        CHECK(d.trans[3].entries[0].first == 2);
    }

    SECTION("uniform strategy on L(5,1/2): row of s1 is {s0:1/4, s1:1/2, s2:1/4}") {
        RandStrategy uniform;
        uniform.rows.assign(5, {{0, Rational(1, 2)}, {1, Rational(1, 2)}});
        const Dtmc d = induced_dtmc(line, uniform);
        REQUIRE(d.trans[1].entries.size() == 3);
        CHECK(d.trans[1].entries[0] == std::pair<int, Rational>{0, Rational(1, 4)});
        CHECK(d.trans[1].entries[1] == std::pair<int, Rational>{1, Rational(1, 2)});
        CHECK(d.trans[1].entries[2] == std::pair<int, Rational>{2, Rational(1, 4)});
        for (int s = 0; s < 5; ++s) CHECK(d.trans[s].sum().is_one());
    }

    SECTION("single-action model: induced chain erases the action") {
        const Mdp only_left = restrict_actions(line, {0});
        RandStrategy sigma;
        sigma.rows.assign(5, {{0, Rational(1)}});
        const Dtmc d = induced_dtmc(only_left, sigma);
        for (int s = 0; s < 5; ++s) CHECK(d.trans[s] == only_left.trans[s][0]);
    }

    SECTION("strategy errors") {
        RandStrategy missing;
        missing.rows.assign(4, {{0, Rational(1)}});
        CHECK_THROWS_AS(induced_dtmc(line, missing), ModelError);
        RandStrategy short_row;
        short_row.rows.assign(5, {{0, Rational(1, 2)}});
        CHECK_THROWS_AS(induced_dtmc(line, short_row), ModelError);
    }
}

TEST_CASE("apply_observation enforces the goal-mark side condition") {
    const Mdp line = generate_line(5, Rational(1));

    SECTION("Fig. 2 coloring is a valid POMDP") {
        const Pomdp p = apply_observation(line, two_sided_coloring(line));
        CHECK(p.obs.num_labels() == 2);
    }
    SECTION("labeling the goal state is rejected") {
        ObservationFunction obs = two_sided_coloring(line);
        obs.map[2] = 0;
        CHECK_THROWS_AS(apply_observation(line, obs), ModelError);
    }
    SECTION("marking a non-goal state is rejected") {
        ObservationFunction obs = two_sided_coloring(line);
        obs.map[1] = ObservationFunction::kGoalMark;
        CHECK_THROWS_AS(apply_observation(line, obs), ModelError);
    }
    SECTION("identity observation distinguishes all states") {
        const ObservationFunction obs = identity_observation(line);
        CHECK(obs.num_labels() == 4);
        CHECK_NOTHROW(apply_observation(line, obs));
    }
}

TEST_CASE("restrict_actions keeps only the chosen actions") {
    const Mdp line = generate_line(5, Rational(1));

    SECTION("restricted to r, the goal is unreachable from s3") {
        const Mdp r_only = restrict_actions(line, {1});
        // From s3 the single action moves right, away from the goal.
        bool reaches_goal = false;
        std::vector<char> seen(5, 0);
        std::vector<int> stack{3};
        while (!stack.empty()) {
            const int s = stack.back();
            stack.pop_back();
            if (seen[s]) continue;
            seen[s] = 1;
            if (s == 2) reaches_goal = true;
            for (const auto& [t, p] : r_only.trans[s][0].entries) stack.push_back(t);
        }
        CHECK(!reaches_goal);
    }
    SECTION("restricting to the full set is the identity") {
        const Mdp same = restrict_actions(line, {0, 1});
        CHECK(store_model(same) == store_model(line));
    }
    SECTION("grid restricted to {down, right} still reaches the goal everywhere") {
        const Mdp grid = generate_grid(3);
        const Mdp dr = restrict_actions(grid, {1, 3});
        for (int start = 0; start < 9; ++start) {
            bool reaches = false;
            std::vector<char> seen(9, 0);
            std::vector<int> stack{start};
            while (!stack.empty()) {
                const int s = stack.back();
                stack.pop_back();
                if (seen[s]) continue;
                seen[s] = 1;
                if (s == 8) reaches = true;
                for (int a = 0; a < dr.num_actions(); ++a)
                    for (const auto& [t, p] : dr.trans[s][a].entries) stack.push_back(t);
            }
            CHECK(reaches);
        }
    }
    SECTION("empty subset is rejected") {
        CHECK_THROWS_AS(restrict_actions(line, {}), ModelError);
    }
}
