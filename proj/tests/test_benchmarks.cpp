#include <catch_amalgamated.hpp>

#include "obsyn/benchmarks.hpp"
#include "obsyn/model_io.hpp"

using namespace obsyn;

TEST_CASE("line generator matches the five-state pattern") {
    const Mdp m = generate_line(5, Rational(1, 2));
    CHECK(m.num_states() == 5);
    CHECK(m.goal == std::vector<int>{2});
    CHECK(m.initial == std::vector<int>{0, 1, 3, 4});
    CHECK(validate_mdp(m).empty());

    // Boundary actions away from the line are probability-1 self-loops.
    CHECK(m.trans[0][0].is_dirac());
    CHECK(m.trans[0][0].entries[0].first == 0);
    CHECK(m.trans[4][1].is_dirac());
    CHECK(m.trans[4][1].entries[0].first == 4);
    // Interior move: succeed with p, stay otherwise.
    REQUIRE(m.trans[1][1].entries.size() == 2);
    CHECK(m.trans[1][1].entries[0] == std::pair<int, Rational>{1, Rational(1, 2)});
    CHECK(m.trans[1][1].entries[1] == std::pair<int, Rational>{2, Rational(1, 2)});
    // Goal self-loops under both actions.
    CHECK(m.trans[2][0].is_dirac());
    CHECK(m.trans[2][1].entries[0].first == 2);
}

TEST_CASE("line-sink sends the failure mass to an absorbing sink") {
    const Mdp m = generate_line_sink(7, Rational(1, 2));
    CHECK(m.num_states() == 8);
    CHECK(m.states[7] == "sx");
    CHECK(m.rewards[7].is_one());
    CHECK(validate_mdp(m).empty());
    REQUIRE(m.trans[1][1].entries.size() == 2);
    CHECK(m.trans[1][1].entries[0] == std::pair<int, Rational>{2, Rational(1, 2)});
    CHECK(m.trans[1][1].entries[1] == std::pair<int, Rational>{7, Rational(1, 2)});
    CHECK(m.trans[7][0].is_dirac());
    CHECK(m.trans[7][0].entries[0].first == 7);
    // Boundary self-loops stay intact, no sink mass there.
    CHECK(m.trans[0][0].is_dirac());
    CHECK(m.trans[6][1].is_dirac());
}

TEST_CASE("grid generator: 3x3 has nine states with goal s8") {
    const Mdp m = generate_grid(3);
    CHECK(m.num_states() == 9);
    CHECK(m.goal == std::vector<int>{8});
    CHECK(validate_mdp(m).empty());
    CHECK(m.actions == std::vector<std::string>{"up", "down", "left", "right"});
    // s4 moves in all four directions.
    CHECK(m.trans[4][0].entries[0].first == 1);
    CHECK(m.trans[4][1].entries[0].first == 7);
    CHECK(m.trans[4][2].entries[0].first == 3);
    CHECK(m.trans[4][3].entries[0].first == 5);
    // Off-grid moves self-loop.
    CHECK(m.trans[0][0].entries[0].first == 0);
    CHECK(m.trans[0][2].entries[0].first == 0);
}

TEST_CASE("maze generator matches the published shapes") {
    SECTION("maze(5): eleven states, goal s9 at the bottom of the middle corridor") {
        const Mdp m = generate_maze(5);
        CHECK(m.num_states() == 11);
        CHECK(m.goal == std::vector<int>{9});
        CHECK(m.initial.size() == 10);
        CHECK(validate_mdp(m).empty());
        // Corridors hang below columns 0, 2 and 4.
        CHECK(m.trans[0][1].entries[0].first == 5);
        CHECK(m.trans[2][1].entries[0].first == 6);
        CHECK(m.trans[4][1].entries[0].first == 7);
        // Top-row movement and off-maze self-loops.
        CHECK(m.trans[1][3].entries[0].first == 2);
        CHECK(m.trans[1][1].entries[0].first == 1);
        CHECK(m.trans[0][2].entries[0].first == 0);
        // Corridor cells move vertically only.
        CHECK(m.trans[6][0].entries[0].first == 2);
        CHECK(m.trans[6][1].entries[0].first == 9);
        CHECK(m.trans[6][2].entries[0].first == 6);
        CHECK(m.trans[8][0].entries[0].first == 5);
        CHECK(m.trans[8][1].entries[0].first == 8);
    }
    SECTION("maze(7) has sixteen states, fifteen of them initial") {
        const Mdp m = generate_maze(7);
        CHECK(m.num_states() == 16);
        CHECK(m.initial.size() == 15);
        CHECK(validate_mdp(m).empty());
    }
    SECTION("state counts follow 3*(rows-1) + columns") {
        CHECK(generate_maze(9).num_states() == 21);
        CHECK(generate_maze(15).num_states() == 36);
        CHECK(generate_maze(39).num_states() == 96);
    }
}

TEST_CASE("generators are deterministic and validate") {
    CHECK(store_model(generate_line(9, Rational(2, 3))) ==
          store_model(generate_line(9, Rational(2, 3))));
    CHECK(store_model(generate_maze(7)) == store_model(generate_maze(7)));
    CHECK(store_model(generate_grid(4)) == store_model(generate_grid(4)));
    for (int k : {3, 5, 9}) CHECK(validate_mdp(generate_line(k, Rational(1, 3))).empty());
    CHECK(validate_mdp(generate_grid(6)).empty());
    CHECK(validate_mdp(generate_maze(9)).empty());
    CHECK(validate_mdp(generate_line_sink(9, Rational(3, 4))).empty());
    // State-count identities.
    CHECK(generate_line(9, Rational(1)).num_states() == 9);
    CHECK(generate_line_sink(9, Rational(1)).num_states() == 10);
    CHECK(generate_grid(5).num_states() == 25);
}

TEST_CASE("generator preconditions") {
    CHECK_THROWS_AS(generate_line(4, Rational(1)), ModelError);
    CHECK_THROWS_AS(generate_line(1, Rational(1)), ModelError);
    CHECK_THROWS_AS(generate_line(5, Rational(0)), ModelError);
    CHECK_THROWS_AS(generate_line(5, Rational(3, 2)), ModelError);
    CHECK_THROWS_AS(generate_grid(1), ModelError);
    CHECK_THROWS_AS(generate_maze(4), ModelError);
    CHECK_THROWS_AS(generate_maze(3), ModelError);
    CHECK_THROWS_AS(family_from_string("circle"), ModelError);
}
