#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cvarlab/domains.hpp"
#include "cvarlab/ssp.hpp"

using namespace cvarlab;

TEST_CASE("gridworld sizes match the board") {
    GridworldSpec small;
    CHECK(make_gridworld(small).state_count() == 25);
    GridworldSpec large;
    large.rows = 14;
    large.cols = 16;
    CHECK(make_gridworld(large).state_count() == 224);
}

TEST_CASE("gridworld slip model splits the residual equally") {
    GridworldSpec spec;
    spec.obstacles = {{3, 3}}; // fixed layout, keep (2,2) interior and free
    auto model = make_gridworld(spec);
    StateId cell = gridworld_cell(spec, 2, 2);
    auto next = model.successors(cell, 0); // N
    REQUIRE(next.size() == 4);
    double up = 0.0, others = 0.0;
    for (const auto& t : next) {
        if (t.next == gridworld_cell(spec, 1, 2)) up = t.prob;
        else others += t.prob;
    }
    CHECK(up == doctest::Approx(0.95));
    CHECK(others == doctest::Approx(0.05));
    for (const auto& t : next)
        if (t.next != gridworld_cell(spec, 1, 2)) CHECK(t.prob == doctest::Approx(1.0 / 60.0));
}

TEST_CASE("gridworld obstacles end the run at the penalty cost") {
    GridworldSpec spec;
    spec.obstacles = {{2, 2}};
    auto model = make_gridworld(spec);
    StateId trap = gridworld_cell(spec, 2, 2);
    for (ActionId a = 0; a < 4; ++a) {
        CHECK(model.cost(trap, a) == doctest::Approx(100.0));
        auto next = model.successors(trap, a);
        REQUIRE(next.size() == 1);
        CHECK(next[0].next == gridworld_goal(spec));
        CHECK(next[0].prob == doctest::Approx(1.0));
    }
}

TEST_CASE("generated gridworlds validate and the toward-goal policy is proper") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        GridworldSpec spec;
        spec.rows = 8;
        spec.cols = 9;
        spec.seed = seed;
        auto model = make_gridworld(spec);
        CHECK(validate_ssp(model).empty());
        CHECK(is_proper(model, toward_goal_policy(spec)));
    }
}

TEST_CASE("gridworld obstacle layout is deterministic per seed") {
    GridworldSpec spec;
    spec.seed = 42;
    auto a = gridworld_obstacles(spec);
    auto b = gridworld_obstacles(spec);
    CHECK(a == b);
    spec.seed = 43;
    CHECK(a != gridworld_obstacles(spec));
}

TEST_CASE("river sizes and landmark cells") {
    RiverSpec spec; // 10x3
    auto model = make_river(spec);
    CHECK(model.state_count() == 30);
    CHECK(river_start(spec) == river_cell(spec, 8, 0));
    CHECK(river_goal(spec) == river_cell(spec, 8, 2));
    CHECK(model.is_goal(river_goal(spec)));
    CHECK(validate_ssp(model).empty());

    RiverSpec mid{16, 6};
    CHECK(make_river(mid).state_count() == 96);
    RiverSpec big{30, 10};
    CHECK(make_river(big).state_count() == 300);
}

TEST_CASE("river cells compose the move and drop outcomes") {
    RiverSpec spec{10, 5}; // wider so (4,2) has river neighbors on both sides
    auto model = make_river(spec);
    StateId cell = river_cell(spec, 4, 2);
    auto next = model.successors(cell, 2); // E
    // all four composed outcomes land on distinct cells here
    REQUIRE(next.size() == 4);
    std::vector<double> probs;
    for (const auto& t : next) probs.push_back(t.prob);
    std::sort(probs.begin(), probs.end());
    CHECK(probs[0] == doctest::Approx(0.04)); // stay, drop
    CHECK(probs[1] == doctest::Approx(0.16));
    CHECK(probs[2] == doctest::Approx(0.16));
    CHECK(probs[3] == doctest::Approx(0.64)); // east, no drop

    double east_nodrop = 0.0, stay_drop = 0.0;
    for (const auto& t : next) {
        if (t.next == river_cell(spec, 4, 3)) east_nodrop = t.prob;
        if (t.next == river_cell(spec, 5, 2)) stay_drop = t.prob;
    }
    CHECK(east_nodrop == doctest::Approx(0.64));
    CHECK(stay_drop == doctest::Approx(0.04));
}

TEST_CASE("waterfall teleports to the start deterministically") {
    RiverSpec spec;
    auto model = make_river(spec);
    StateId falls = river_cell(spec, spec.rows - 1, 1);
    for (ActionId a = 0; a < 4; ++a) {
        auto next = model.successors(falls, a);
        REQUIRE(next.size() == 1);
        CHECK(next[0].next == river_start(spec));
        CHECK(model.cost(falls, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("domain specs are validated") {
    GridworldSpec bad;
    bad.obstacles = {{0, bad.cols - 1}}; // the start cell
    CHECK_THROWS_AS(make_gridworld(bad), InvalidSpec);
    RiverSpec narrow;
    narrow.cols = 2;
    CHECK_THROWS_AS(make_river(narrow), InvalidSpec);
}
