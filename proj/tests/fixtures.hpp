#pragma once
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ppond/parser.hpp"

#ifndef PPOND_TEST_DATA_DIR
#define PPOND_TEST_DATA_DIR "tests/data"
#endif

namespace fixtures {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) {
    return std::string(PPOND_TEST_DATA_DIR) + "/" + name;
}

inline ppond::Problem load(const std::string& stem) {
    return ppond::parse_problem(read_file(data_path(stem + ".ppond")),
                                read_file(data_path(stem + ".ppondp")),
                                stem + ".ppond", stem + ".ppondp");
}

inline ppond::Problem minefield() { return load("minefield"); }
inline ppond::Problem lockbox() { return load("lockbox"); }

// Single action, single goal fact; the smallest legal model.
inline ppond::Problem minimal() {
    return ppond::parse_problem(
        "(define (domain mini) (:types t) (:predicates (g))"
        " (:action finish :parameters () :effect (g)))",
        "(define (problem mini-1) (:domain mini) (:objects x - t) (:goal (g)))");
}

// A 0.5-success action that only ever grows the belief support mix; the
// reachable belief space is infinite.
inline ppond::Problem unbounded_chain() {
    return ppond::parse_problem(
        "(define (domain chain) (:types t) (:predicates (g) (step))"
        " (:action try :parameters () :effect (probabilistic 0.5 (and (g)) 0.5 (and (step)))))",
        "(define (problem chain-1) (:domain chain) (:objects x - t) (:goal (g)))");
}

}  // namespace fixtures
