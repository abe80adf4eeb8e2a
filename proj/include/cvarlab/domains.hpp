#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cvarlab/ssp.hpp"

namespace cvarlab {

/// Grid navigation with trap cells: moves succeed with success_prob and slip
/// to each other direction with the residual probability split equally;
/// off-grid outcomes keep the agent in place. Obstacle cells end the run with
/// a transition to the goal at obstacle_penalty. Actions are N,S,E,W = 0..3.
struct GridworldSpec {
    int rows = 5;
    int cols = 5;
    std::vector<std::pair<int, int>> obstacles; // (row, col); empty -> seeded random layout
    double success_prob = 0.95;
    double obstacle_penalty = 100.0;
    double step_cost = 1.0;
    uint64_t seed = 0;
    int obstacle_count = -1; // used when obstacles is empty; -1 -> ~15% of cells
    std::optional<std::pair<int, int>> start; // default: top-right corner
    std::optional<std::pair<int, int>> goal;  // default: top-left corner
    double gamma = 1.0;
};

SspMdp make_gridworld(const GridworldSpec& spec);
StateId gridworld_cell(const GridworldSpec& spec, int row, int col);
StateId gridworld_start(const GridworldSpec& spec);
StateId gridworld_goal(const GridworldSpec& spec);
/// Resolved obstacle layout (explicit list, or the seeded random one).
std::vector<std::pair<int, int>> gridworld_obstacles(const GridworldSpec& spec);
/// Moves toward the goal row first, then the goal column. Proper from every
/// cell because obstacle cells also lead to the goal.
StationaryPolicy toward_goal_policy(const GridworldSpec& spec);

/// River crossing: the side columns are banks and the top row a bridge (all
/// deterministic, cost 1); the bottom row is a waterfall teleporting to the
/// start. River cells compose the action move (move_prob, else stay) with a
/// one-row drop (fall_prob, else stay). Actions are N,S,E,W = 0..3.
struct RiverSpec {
    int rows = 10;
    int cols = 3;
    double move_prob = 0.8;
    double fall_prob = 0.2;
    double cost_north = 2.0;
    double cost_east_west = 1.0;
    double cost_south = 0.5;
    double cost_deterministic = 1.0;
    double gamma = 1.0;
};

SspMdp make_river(const RiverSpec& spec);
StateId river_cell(const RiverSpec& spec, int row, int col);
StateId river_start(const RiverSpec& spec); // left bank, first row above the waterfall
StateId river_goal(const RiverSpec& spec);  // right bank, mirrored row

} // namespace cvarlab
