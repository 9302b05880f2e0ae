"""Smoke tests for the python bindings."""

import os
import pathlib

import pytest

import ppond


def data_dir() -> pathlib.Path:
    env = os.environ.get("PPOND_TEST_DATA_DIR")
    if env:
        return pathlib.Path(env)
    return pathlib.Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="module")
def minefield():
    d = (data_dir() / "minefield.ppond").read_text()
    p = (data_dir() / "minefield.ppondp").read_text()
    return ppond.parse(d, p)


def test_parse_counts(minefield):
    assert minefield.fact_count == 12
    assert minefield.action_count == 6
    assert minefield.initial_state_count == 2


def test_serialize_round_trip(minefield):
    domain, problem = ppond.serialize(minefield)
    again = ppond.parse(domain, problem)
    assert ppond.structurally_equal(minefield, again)


def test_parse_error_has_location():
    with pytest.raises(RuntimeError, match="domain:"):
        ppond.parse("(define (domain d) (:types", "(define (problem p))")


def test_oracle_and_solve_agree(minefield):
    oracle = ppond.oracle(minefield)
    assert oracle["beliefs"] == 15
    assert oracle["v_star"] == pytest.approx(3.5, abs=1e-9)

    result = ppond.solve(minefield, heuristic="hff-b", seed=1, eval_interval=10)
    assert result["converged"]
    assert result["failures"] == 0
    assert result["mean_cost"] == pytest.approx(3.5, rel=0.02)
    assert result["value_at_b0"] == pytest.approx(3.5, abs=1e-9)


def test_heuristic_values(minefield):
    assert ppond.heuristic_value(minefield, "hmax-b") == 2.0
    assert ppond.heuristic_value(minefield, "hff-b") == 2.0
    assert ppond.heuristic_value(minefield, "hmax-s") == pytest.approx(2.5)
    assert ppond.heuristic_value(minefield, "qmdp", seed=3) == pytest.approx(2.5)


def test_generators_parse_and_solve():
    domain, problem, name = ppond.generate_wumpus(3)
    assert name == "wumpus-3"
    p = ppond.parse(domain, problem)
    assert p.action_count == 43
    result = ppond.solve(p, heuristic="hff-b", seed=2, eval_interval=10)
    assert result["converged"]
    assert result["mean_cost"] == pytest.approx(9.0, rel=0.02)

    for gen in (ppond.generate_localize(3), ppond.generate_maze(5, 1)):
        parsed = ppond.parse(gen[0], gen[1])
        assert parsed.fact_count > 0
