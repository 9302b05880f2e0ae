#include "ppond/generators.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ppond {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string cell(int x, int y) {
    return "c" + std::to_string(x) + "-" + std::to_string(y);
}

}  // namespace

GeneratedProblem generate_localize(int n, bool stochastic) {
    if (n < 3) throw std::invalid_argument("localize: n must be at least 3");
    const int g = n + 3;  // the n-cell core plus the sensing rim
    const int gx = (g + 1) / 2, gy = (g + 1) / 2;

    struct Dir {
        const char* name;
        int dx, dy;
        bool lossy;  // stochastic variant: some moves may slip
    };
    const Dir dirs[4] = {{"north", 0, 1, true}, {"south", 0, -1, false},
                         {"east", 1, 0, true}, {"west", -1, 0, false}};

    // Moving requires a known-clear wall indicator; moves, bumps and senses
    // keep the four indicators consistent with the cell the agent is in.
    auto bits_for = [&](int x, int y) {
        std::string out;
        for (const Dir& dir : dirs) {
            int tx = x + dir.dx, ty = y + dir.dy;
            bool wall = tx < 1 || tx > g || ty < 1 || ty > g;
            out += wall ? std::string(" (wall-ahead-") + dir.name + ")"
                        : std::string(" (not (wall-ahead-") + dir.name + "))";
        }
        return out;
    };

    std::ostringstream d;
    d << "(define (domain localize)\n";
    d << "  (:types cell)\n";
    d << "  (:predicates (at ?c - cell) (done) (wall-ahead-north) (wall-ahead-south)"
         " (wall-ahead-east) (wall-ahead-west))\n";
    for (const Dir& dir : dirs) {
        d << "  (:action move-" << dir.name << "\n";
        d << "    :parameters ()\n";
        d << "    :precondition (not (wall-ahead-" << dir.name << "))\n";
        d << "    :effect (and";
        for (int x = 1; x <= g; ++x) {
            for (int y = 1; y <= g; ++y) {
                int tx = x + dir.dx, ty = y + dir.dy;
                std::string body;
                if (tx < 1 || tx > g || ty < 1 || ty > g) {
                    // Bump against a stale indicator: stay and resense.
                    body = "(and" + bits_for(x, y) + ")";
                } else {
                    body = "(and (at " + cell(tx, ty) + ") (not (at " + cell(x, y) + "))" +
                           bits_for(tx, ty) + ")";
                    if (stochastic && dir.lossy)
                        body = "(probabilistic 0.8 " + body + " 0.2 (and" + bits_for(x, y) +
                               "))";
                }
                d << "\n      (when (at " << cell(x, y) << ") " << body << ")";
            }
        }
        d << "))\n";
    }
    for (const Dir& dir : dirs) {
        d << "  (:action sense-wall-" << dir.name << "\n";
        d << "    :parameters ()\n";
        d << "    :effect (and";
        for (int x = 1; x <= g; ++x)
            for (int y = 1; y <= g; ++y)
                d << "\n      (when (at " << cell(x, y) << ") (and" << bits_for(x, y) << "))";
        d << ")\n    :observe (wall-ahead-" << dir.name << "))\n";
    }
    d << "  (:action declare-goal\n";
    d << "    :parameters ()\n";
    d << "    :precondition (at " << cell(gx, gy) << ")\n";
    d << "    :effect (done))\n";
    d << ")\n";

    std::ostringstream p;
    std::string name = "localize-" + std::to_string(n) + (stochastic ? "-stoch" : "");
    p << "(define (problem " << name << ")\n";
    p << "  (:domain localize)\n";
    p << "  (:objects";
    for (int x = 1; x <= g; ++x)
        for (int y = 1; y <= g; ++y) p << ' ' << cell(x, y);
    p << " - cell)\n";
    p << "  (:init-belief (oneof-weighted";
    double w = 1.0 / (g * g);
    for (int x = 1; x <= g; ++x)
        for (int y = 1; y <= g; ++y)
            p << "\n    " << fmt(w) << " ((at " << cell(x, y) << ")" << bits_for(x, y) << ")";
    p << "))\n";
    p << "  (:goal (done))\n";
    p << ")\n";
    return {d.str(), p.str(), name};
}

GeneratedProblem generate_wumpus(int n, bool uniform) {
    if (n < 3) throw std::invalid_argument("wumpus: n must be at least 3");

    using Cell = std::pair<int, int>;
    std::vector<std::pair<Cell, Cell>> wumpus_pairs, pit_pairs;
    for (int k = 2; k <= n - 1; ++k)
        wumpus_pairs.push_back({{k, k + 1}, {k + 1, k}});
    // Pits hug the first row and column, away from the cells that
    // disambiguate the wumpus pairs.
    for (int k = 1; k <= n - 2; ++k)
        pit_pairs.push_back({{1, k + 2}, {k + 2, 1}});

    const int ddx[4] = {1, -1, 0, 0}, ddy[4] = {0, 0, 1, -1};
    auto neighbors = [&](const Cell& c) {
        std::vector<Cell> out;
        for (int k = 0; k < 4; ++k) {
            int tx = c.first + ddx[k], ty = c.second + ddy[k];
            if (tx >= 1 && tx <= n && ty >= 1 && ty <= n) out.push_back({tx, ty});
        }
        return out;
    };
    // Cells whose smell/draft value depends on the hidden assignment.
    auto relevant_cells = [&](const std::vector<std::pair<Cell, Cell>>& pairs) {
        std::vector<Cell> out;
        for (int x = 1; x <= n; ++x)
            for (int y = 1; y <= n; ++y) {
                bool near = false;
                for (const auto& [a, b] : pairs)
                    for (const Cell& cand : {a, b})
                        for (const Cell& nb : neighbors(cand))
                            if (nb == Cell{x, y}) near = true;
                if (near) out.push_back({x, y});
            }
        return out;
    };
    std::vector<Cell> stench_cells = relevant_cells(wumpus_pairs);
    std::vector<Cell> breeze_cells = relevant_cells(pit_pairs);

    std::ostringstream d;
    d << "(define (domain wumpus)\n";
    d << "  (:types cell)\n";
    d << "  (:predicates (at ?c - cell) (adj ?a ?b - cell) (wumpus ?c - cell)"
         " (pit ?c - cell) (stench ?c - cell) (breeze ?c - cell) (gold))\n";
    d << "  (:action move\n";
    d << "    :parameters (?from ?to - cell)\n";
    d << "    :precondition (and (at ?from) (adj ?from ?to) (not (wumpus ?to)) (not (pit ?to)))\n";
    d << "    :effect (and (at ?to) (not (at ?from))))\n";
    // Smell and draft are fixed properties of each world; sensing them is a
    // pure observation. Sensors at cells that can never smell anything still
    // ground (to no-ops), keeping the action set uniform across instances.
    for (int x = 1; x <= n; ++x)
        for (int y = 1; y <= n; ++y) {
            d << "  (:action sense-stench-" << x << "-" << y << "\n";
            d << "    :parameters ()\n";
            d << "    :precondition (at " << cell(x, y) << ")\n";
            d << "    :observe (stench " << cell(x, y) << "))\n";
        }
    for (int x = 1; x <= n; ++x)
        for (int y = 1; y <= n; ++y) {
            d << "  (:action sense-breeze-" << x << "-" << y << "\n";
            d << "    :parameters ()\n";
            d << "    :precondition (at " << cell(x, y) << ")\n";
            d << "    :observe (breeze " << cell(x, y) << "))\n";
        }
    d << "  (:action grab\n";
    d << "    :parameters ()\n";
    d << "    :precondition (at " << cell(n, n) << ")\n";
    d << "    :effect (gold))\n";
    d << ")\n";

    std::ostringstream p;
    std::string name = "wumpus-" + std::to_string(n) + (uniform ? "" : "-skew");
    p << "(define (problem " << name << ")\n";
    p << "  (:domain wumpus)\n";
    p << "  (:objects";
    for (int x = 1; x <= n; ++x)
        for (int y = 1; y <= n; ++y) p << ' ' << cell(x, y);
    p << " - cell)\n";
    p << "  (:init\n    (at " << cell(1, 1) << ")\n";
    for (int x = 1; x <= n; ++x)
        for (int y = 1; y <= n; ++y)
            for (const Cell& nb : neighbors({x, y}))
                p << "    (adj " << cell(x, y) << " " << cell(nb.first, nb.second) << ")\n";
    p << "  )\n";

    // One joint formula per hazard kind: each fragment fixes the hazard
    // placement of every pair together with the induced smell/draft facts, so
    // no two formulas touch the same fact.
    double w = uniform ? 0.5 : 0.7;
    auto emit_joint = [&](const char* what, const char* field,
                          const std::vector<std::pair<Cell, Cell>>& pairs,
                          const std::vector<Cell>& relevant) {
        if (pairs.empty()) return;
        p << "  (:init-belief (oneof-weighted";
        int combos = 1 << pairs.size();
        for (int mask = 0; mask < combos; ++mask) {
            double weight = 1.0;
            std::vector<Cell> placed;
            std::vector<Cell> empty;
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                bool first = ((mask >> k) & 1) == 0;
                weight *= first ? w : 1.0 - w;
                placed.push_back(first ? pairs[k].first : pairs[k].second);
                empty.push_back(first ? pairs[k].second : pairs[k].first);
            }
            p << "\n    " << fmt(weight) << " (";
            for (const Cell& c : placed) p << "(" << what << " " << cell(c.first, c.second) << ") ";
            for (const Cell& c : empty)
                p << "(not (" << what << " " << cell(c.first, c.second) << ")) ";
            for (const Cell& r : relevant) {
                bool smells = false;
                for (const Cell& c : placed)
                    for (const Cell& nb : neighbors(c))
                        if (nb == r) smells = true;
                if (smells)
                    p << "(" << field << " " << cell(r.first, r.second) << ") ";
                else
                    p << "(not (" << field << " " << cell(r.first, r.second) << ")) ";
            }
            p << ")";
        }
        p << "))\n";
    };
    emit_joint("wumpus", "stench", wumpus_pairs, stench_cells);
    emit_joint("pit", "breeze", pit_pairs, breeze_cells);
    p << "  (:goal (gold))\n";
    p << ")\n";
    return {d.str(), p.str(), name};
}

GeneratedProblem generate_maze(int n, int bottlenecks, int detour) {
    if (n < 5) throw std::invalid_argument("maze: n must be at least 5");
    if (bottlenecks < 1) throw std::invalid_argument("maze: bottlenecks must be at least 1");
    if (detour == 0) detour = 1;
    if (detour < 1 || detour > 3)
        throw std::invalid_argument("maze: detour must be in [1, 3]");

    // The n x n floor unrolled into a single winding corridor of n*n cells.
    // Each bottleneck replaces one corridor cell with a pair of parallel
    // doors, one easy and one hard; a sensing stub hangs off the cell before
    // the doors. The corridor is unique, so the only route choices are which
    // door to take and whether to detour for the sensor.
    const int length = n * n;
    std::vector<int> at;  // corridor index of each bottleneck
    for (int k = 1; k <= bottlenecks; ++k)
        at.push_back(3 + (length - 5) * k / (bottlenecks + 1));
    for (std::size_t k = 1; k < at.size(); ++k)
        if (at[k] - at[k - 1] < 3)
            throw std::invalid_argument("maze: n too small for " +
                                        std::to_string(bottlenecks) + " bottlenecks");
    auto is_door_slot = [&](int j) {
        for (int a : at)
            if (a == j) return true;
        return false;
    };
    auto m = [](int j) { return "m" + std::to_string(j); };
    auto door = [](const char* s, int k) { return std::string(s) + std::to_string(k); };
    auto stub = [](int k, int i) { return "o" + std::to_string(k) + "-" + std::to_string(i); };

    std::vector<std::string> places;
    for (int j = 1; j <= length; ++j)
        if (!is_door_slot(j)) places.push_back(m(j));
    for (int k = 1; k <= bottlenecks; ++k) {
        places.push_back(door("t", k));
        places.push_back(door("b", k));
        for (int i = 1; i <= detour; ++i) places.push_back(stub(k, i));
    }

    std::vector<std::pair<std::string, std::string>> edges;    // bidirectional walks
    std::vector<std::pair<std::string, std::string>> one_way;  // door exits
    for (int j = 1; j < length; ++j)
        if (!is_door_slot(j) && !is_door_slot(j + 1)) edges.emplace_back(m(j), m(j + 1));
    for (int k = 1; k <= bottlenecks; ++k) {
        int c = at[k - 1];
        one_way.emplace_back(door("t", k), m(c + 1));
        one_way.emplace_back(door("b", k), m(c + 1));
        std::string prev = m(c - 1);
        for (int i = 1; i <= detour; ++i) {
            edges.emplace_back(prev, stub(k, i));
            prev = stub(k, i);
        }
    }

    std::ostringstream d;
    d << "(define (domain maze)\n";
    d << "  (:types place)\n";
    d << "  (:predicates (at ?p - place) (adj ?a ?b - place) (easy ?p - place))\n";
    d << "  (:action walk\n";
    d << "    :parameters (?a ?b - place)\n";
    d << "    :precondition (and (at ?a) (adj ?a ?b))\n";
    d << "    :effect (and (at ?b) (not (at ?a))))\n";
    for (int k = 1; k <= bottlenecks; ++k) {
        int c = at[k - 1];
        for (const char* s : {"t", "b"}) {
            std::string target = door(s, k), from = m(c - 1);
            d << "  (:action cross-careful-" << target << "\n";
            d << "    :parameters ()\n";
            d << "    :precondition (and (at " << from << ") (easy " << target << "))\n";
            d << "    :effect (and (at " << target << ") (not (at " << from << "))))\n";
            // A failed squeeze drops the agent back one cell.
            std::string back = m(c - 2);
            d << "  (:action cross-risky-" << target << "\n";
            d << "    :parameters ()\n";
            d << "    :precondition (at " << from << ")\n";
            d << "    :effect (probabilistic 0.1 (and (at " << target << ") (not (at " << from
              << "))) 0.9 (and (at " << back << ") (not (at " << from << "))))\n";
            d << "    :observe (at " << target << "))\n";
        }
        d << "  (:action sense-" << k << "\n";
        d << "    :parameters ()\n";
        d << "    :precondition (at " << stub(k, detour) << ")\n";
        d << "    :observe (easy t" << k << "))\n";
    }
    d << ")\n";

    std::ostringstream p;
    std::string name = "maze-" + std::to_string(n) + "-" + std::to_string(bottlenecks);
    p << "(define (problem " << name << ")\n";
    p << "  (:domain maze)\n";
    p << "  (:objects";
    for (const std::string& pl : places) p << ' ' << pl;
    p << " - place)\n";
    p << "  (:init\n    (at m1)\n";
    for (const auto& [a, b] : edges) {
        p << "    (adj " << a << " " << b << ")\n";
        p << "    (adj " << b << " " << a << ")\n";
    }
    for (const auto& [a, b] : one_way) p << "    (adj " << a << " " << b << ")\n";
    p << "  )\n";
    for (int k = 1; k <= bottlenecks; ++k)
        p << "  (:init-belief (oneof-weighted 0.5 ((easy t" << k << ") (not (easy b" << k
          << "))) 0.5 ((not (easy t" << k << ")) (easy b" << k << "))))\n";
    p << "  (:goal (at m" << length << "))\n";
    p << ")\n";
    return {d.str(), p.str(), name};
}

}  // namespace ppond
