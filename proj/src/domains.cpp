#include "cvarlab/domains.hpp"

#include <algorithm>
#include <cmath>

#include "cvarlab/rng.hpp"

namespace cvarlab {

namespace {

enum Direction { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };

constexpr int kRowDelta[4] = {-1, 1, 0, 0};
constexpr int kColDelta[4] = {0, 0, 1, -1};

int clamp_move(int rows, int cols, int r, int c, int dir, int* out_r, int* out_c) {
    int nr = r + kRowDelta[dir];
    int nc = c + kColDelta[dir];
    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) {
        nr = r;
        nc = c;
    }
    *out_r = nr;
    *out_c = nc;
    return nr * cols + nc;
}

void check_cell(const GridworldSpec& spec, std::pair<int, int> cell, const char* what) {
    if (cell.first < 0 || cell.first >= spec.rows || cell.second < 0 || cell.second >= spec.cols)
        throw InvalidSpec(std::string("gridworld: ") + what + " cell out of range");
}

std::pair<int, int> start_cell(const GridworldSpec& spec) {
    return spec.start.value_or(std::pair<int, int>{0, spec.cols - 1});
}

std::pair<int, int> goal_cell(const GridworldSpec& spec) {
    return spec.goal.value_or(std::pair<int, int>{0, 0});
}

} // namespace

StateId gridworld_cell(const GridworldSpec& spec, int row, int col) { return row * spec.cols + col; }
StateId gridworld_start(const GridworldSpec& spec) {
    auto [r, c] = start_cell(spec);
    return gridworld_cell(spec, r, c);
}
StateId gridworld_goal(const GridworldSpec& spec) {
    auto [r, c] = goal_cell(spec);
    return gridworld_cell(spec, r, c);
}

std::vector<std::pair<int, int>> gridworld_obstacles(const GridworldSpec& spec) {
    if (!spec.obstacles.empty()) return spec.obstacles;
    int want = spec.obstacle_count >= 0
                   ? spec.obstacle_count
                   : static_cast<int>(std::lround(0.15 * spec.rows * spec.cols));
    const auto s = start_cell(spec);
    const auto g = goal_cell(spec);
    want = std::min(want, spec.rows * spec.cols - 2);
    std::vector<std::pair<int, int>> out;
    CounterRng rng(spec.seed, 0x6f62737461636c65ull);
    while (static_cast<int>(out.size()) < want) {
        int r = static_cast<int>(rng.next_below(static_cast<uint32_t>(spec.rows)));
        int c = static_cast<int>(rng.next_below(static_cast<uint32_t>(spec.cols)));
        std::pair<int, int> cell{r, c};
        if (cell == s || cell == g) continue;
        if (std::find(out.begin(), out.end(), cell) != out.end()) continue;
        out.push_back(cell);
    }
    return out;
}

SspMdp make_gridworld(const GridworldSpec& spec) {
    if (spec.rows < 1 || spec.cols < 2) throw InvalidSpec("gridworld: need at least a 1x2 grid");
    if (!(spec.success_prob > 0.0 && spec.success_prob <= 1.0))
        throw InvalidSpec("gridworld: success probability outside (0,1]");
    const auto s = start_cell(spec);
    const auto g = goal_cell(spec);
    check_cell(spec, s, "start");
    check_cell(spec, g, "goal");
    if (s == g) throw InvalidSpec("gridworld: start equals goal");

    auto obstacles = gridworld_obstacles(spec);
    for (const auto& cell : obstacles) {
        check_cell(spec, cell, "obstacle");
        if (cell == s || cell == g) throw InvalidSpec("gridworld: start/goal cell is an obstacle");
    }
    std::vector<bool> blocked(static_cast<size_t>(spec.rows * spec.cols), false);
    for (const auto& [r, c] : obstacles) blocked[static_cast<size_t>(r * spec.cols + c)] = true;

    SspMdp mdp(spec.rows * spec.cols, 4, spec.gamma);
    const StateId goal_id = gridworld_goal(spec);
    mdp.set_goal(goal_id);

    const double slip = (1.0 - spec.success_prob) / 3.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const StateId id = gridworld_cell(spec, r, c);
            for (int a = 0; a < 4; ++a) {
                if (id == goal_id) {
                    mdp.set_action(id, a, 0.0, {{id, 1.0}});
                } else if (blocked[static_cast<size_t>(id)]) {
                    mdp.set_action(id, a, spec.obstacle_penalty, {{goal_id, 1.0}});
                } else {
                    // intended direction plus equal slip to the other three,
                    // off-grid outcomes folded back onto the cell
                    std::vector<Transition> next;
                    for (int dir = 0; dir < 4; ++dir) {
                        int rr, cc;
                        StateId target = clamp_move(spec.rows, spec.cols, r, c, dir, &rr, &cc);
                        double p = dir == a ? spec.success_prob : slip;
                        bool merged = false;
                        for (auto& t : next) {
                            if (t.next == target) {
                                t.prob += p;
                                merged = true;
                                break;
                            }
                        }
                        if (!merged) next.push_back({target, p});
                    }
                    mdp.set_action(id, a, spec.step_cost, std::move(next));
                }
            }
        }
    }
    return mdp;
}

StationaryPolicy toward_goal_policy(const GridworldSpec& spec) {
    const auto [gr, gc] = goal_cell(spec);
    StationaryPolicy pi;
    pi.action.resize(static_cast<size_t>(spec.rows * spec.cols), kNorth);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            ActionId a;
            if (r > gr) a = kNorth;
            else if (r < gr) a = kSouth;
            else if (c > gc) a = kWest;
            else a = kEast;
            pi.action[static_cast<size_t>(gridworld_cell(spec, r, c))] = a;
        }
    }
    return pi;
}

namespace {

void check_river(const RiverSpec& spec) {
    if (spec.cols < 3) throw InvalidSpec("river: need at least 3 columns (two banks and the river)");
    if (spec.rows < 2) throw InvalidSpec("river: need at least 2 rows");
    if (!(spec.move_prob > 0.0 && spec.move_prob <= 1.0) || !(spec.fall_prob >= 0.0 && spec.fall_prob < 1.0))
        throw InvalidSpec("river: probabilities out of range");
}

} // namespace

StateId river_cell(const RiverSpec& spec, int row, int col) { return row * spec.cols + col; }
StateId river_start(const RiverSpec& spec) { return river_cell(spec, spec.rows - 2, 0); }
StateId river_goal(const RiverSpec& spec) { return river_cell(spec, spec.rows - 2, spec.cols - 1); }

SspMdp make_river(const RiverSpec& spec) {
    check_river(spec);

    SspMdp mdp(spec.rows * spec.cols, 4, spec.gamma);
    const StateId goal_id = river_goal(spec);
    const StateId start_id = river_start(spec);
    mdp.set_goal(goal_id);

    const double probabilistic_cost[4] = {spec.cost_north, spec.cost_south, spec.cost_east_west,
                                          spec.cost_east_west};

    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const StateId id = river_cell(spec, r, c);
            const bool bank = c == 0 || c == spec.cols - 1;
            const bool bridge = r == 0;
            const bool waterfall = r == spec.rows - 1;
            for (int a = 0; a < 4; ++a) {
                if (id == goal_id) {
                    mdp.set_action(id, a, 0.0, {{id, 1.0}});
                } else if (waterfall) {
                    mdp.set_action(id, a, spec.cost_deterministic, {{start_id, 1.0}});
                } else if (bank || bridge) {
                    int rr, cc;
                    StateId target = clamp_move(spec.rows, spec.cols, r, c, a, &rr, &cc);
                    mdp.set_action(id, a, spec.cost_deterministic, {{target, 1.0}});
                } else {
                    // composed river dynamics: action move then one-row drop
                    std::vector<Transition> next;
                    auto add = [&](StateId target, double p) {
                        for (auto& t : next) {
                            if (t.next == target) {
                                t.prob += p;
                                return;
                            }
                        }
                        next.push_back({target, p});
                    };
                    for (int moved = 0; moved < 2; ++moved) {
                        int mr = r, mc = c;
                        if (moved == 1) clamp_move(spec.rows, spec.cols, r, c, a, &mr, &mc);
                        double p1 = moved == 1 ? spec.move_prob : 1.0 - spec.move_prob;
                        for (int dropped = 0; dropped < 2; ++dropped) {
                            int dr = mr, dc = mc;
                            if (dropped == 1) clamp_move(spec.rows, spec.cols, mr, mc, kSouth, &dr, &dc);
                            double p2 = dropped == 1 ? spec.fall_prob : 1.0 - spec.fall_prob;
                            if (p1 * p2 > 0.0) add(river_cell(spec, dr, dc), p1 * p2);
                        }
                    }
                    mdp.set_action(id, a, probabilistic_cost[a], std::move(next));
                }
            }
        }
    }
    return mdp;
}

} // namespace cvarlab
