"""Acceptance run: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the lines appear in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

import sys
import time

import pytest

from ballspace import fixtures as fx
from ballspace.search import SearchSpec, counterexample_search, mutant_suites, run_exhaustive, serialize_instance

SEED = 7
LINES = []


def record(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    LINES.append(line)
    print(line)
    return ok


def random_criterion(name, suite, trials, limit=None):
    start = time.perf_counter()
    v = counterexample_search(SearchSpec(suite, trials=trials, seed=SEED))
    took = time.perf_counter() - start
    ok = not v.found and v.checked == trials and (limit is None or took < limit)
    detail = f"{v.checked}/{trials} checked, {took:.1f}s"
    if v.found:
        detail += f", counterexample at trial {v.trial}: {v.outcome.tag}\n{serialize_instance(v.counterexample)}"
    assert record(name, ok, detail), detail


def exhaustive_criterion(name, suite, max_points, limit=None):
    start = time.perf_counter()
    v = run_exhaustive(suite, max_points)
    took = time.perf_counter() - start
    ok = not v.found and v.checked > 0 and (limit is None or took < limit)
    detail = f"{v.checked} instances, {took:.1f}s"
    if v.found:
        detail += f", counterexample {v.outcome.tag}\n{serialize_instance(v.counterexample)}"
    assert record(name, ok, detail), detail


def fixture_criterion(name, fixture, **params):
    results = fx.run_fixture(fixture, **params)
    bad = [r.id for r in results if not r.passed]
    assert record(name, not bad, f"{len(results) - len(bad)}/{len(results)} claims" + (f", failing {bad}" if bad else "")), bad


def test_ot_ball_nesting_1000():
    random_criterion("OT balls: self-membership, nesting, contained-ball lemma (1000 trials, < 60 s)",
                     "ot-ball-nesting", 1000, limit=60)


def test_ck_conversion_1000():
    random_criterion("Caristi-Kirk to Oettli-Thera conversion keeps every ball (1000 trials)", "ck-conversion", 1000)


def test_singleton_descent_500():
    random_criterion("singleton-ball descent reaches {a} inside the start ball in <= |X| moves (500 trials)",
                     "singleton-descent", 500)


def test_caristi_500():
    random_criterion("Caristi engine returns a verified fixed point for argmin maps (500 trials)",
                     "caristi-fixed-point", 500)


def test_petal_identity_500():
    random_criterion("petal inside M equals the Caristi-Kirk ball (500 trials)", "petal-identity", 500)


def test_nest_potential_500():
    random_criterion("descent nests: potential identity and the three equivalent conditions (500 trials)",
                     "nest-potential", 500)


def test_topology_exhaustive():
    exhaustive_criterion("unique topological limit = b-limit, all T0 topologies on <= 4 points (< 5 min)",
                         "topology-equivalence", 4, limit=300)


def test_limit_laws_exhaustive():
    exhaustive_criterion("limit operator laws on covering separating families, <= 3 points", "limit-laws", 3)


def test_filled_equivalence_exhaustive():
    exhaustive_criterion("filled family b-limit = distance limit, <= 4 points", "filled-equivalence", 4)


def test_one_over_nm_fixture():
    fixture_criterion("one-over-|n-m| fixture, N = 50", "example_one_over_nm", N=50)


def test_piotrus_fixture():
    fixture_criterion("interval family versus closed-set family fixture", "example_piotrus")


def test_saturn_fixture():
    fixture_criterion("class-doubled line fixture on the default mixed grid", "example_saturn")


def test_count_condition_200():
    random_criterion("iterate-avoidance condition defeats the strict hypothesis (200 trials)", "count-condition", 200)


def test_mutation_sensitivity():
    mutants = mutant_suites()
    killed = []
    for m in mutants:
        v = counterexample_search(SearchSpec(m.id, trials=10_000, seed=SEED))
        if v.found and v.confirmed:
            killed.append(f"{m.id}@{v.trial}")
    ok = len(mutants) >= 3 and len(killed) == len(mutants)
    assert record(f"every mutant killed within 10000 trials ({len(mutants)} registered)", ok, ", ".join(killed)), killed


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
