#pragma once
#include <string>

namespace ppond {

struct GeneratedProblem {
    std::string domain_text;
    std::string problem_text;
    std::string name;  // instance stem, e.g. "localize-5"
};

// Grid localization: position unknown (uniform over all cells), bump-safe
// moves in four directions, wall sensing through a shared indicator fact and
// a direct goal-cell sense. The stochastic variant makes north/east moves
// succeed with probability 0.8 so path success probabilities differ.
GeneratedProblem generate_localize(int n, bool stochastic);

// Diagonal gauntlet: wumpus pairs flank the diagonal, pit pairs sit two off,
// stench/breeze sensing per cell, moves require knowing the target cell is
// clear. `uniform` picks 0.5/0.5 hazard priors, otherwise 0.7/0.3.
GeneratedProblem generate_wumpus(int n, bool uniform);

// Corridor with hidden easy/hard bottleneck pairs: crossing a known-easy cell
// always works, otherwise success probability drops to 0.1. A detour cell per
// bottleneck reveals which side is easy.
GeneratedProblem generate_maze(int n, int bottlenecks, int detour = 0);

}  // namespace ppond
