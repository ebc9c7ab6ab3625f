import pytest

from ballspace import search
from ballspace.errors import DomainError
from ballspace.search import SUITES, SearchSpec, counterexample_search, serialize_instance, shrink


def test_registry_has_mutants_and_suites():
    assert len(search.mutant_suites()) >= 3
    for m in search.mutant_suites():
        assert m.mutant_of in SUITES and m.confirm is not None


def test_unknown_suite():
    with pytest.raises(DomainError):
        counterexample_search(SearchSpec("no-such-suite"))


def test_exhaustive_needs_support():
    with pytest.raises(DomainError):
        counterexample_search(SearchSpec("ot-ball-nesting", exhaustive=True))


def test_seed_env(monkeypatch):
    monkeypatch.setenv("BALLSPACE_SEED", "0x10")
    assert search.default_seed() == 16
    monkeypatch.delenv("BALLSPACE_SEED")
    assert search.default_seed() == search.DEFAULT_SEED
    monkeypatch.setenv("BALLSPACE_SEED", "abc")
    with pytest.raises(DomainError):
        search.default_seed()


def test_trial_streams_are_reproducible():
    suite = SUITES["ot-ball-nesting"]
    bounds = search.SizeBounds(1, 8)
    a = [serialize_instance(suite.generate(search.trial_rng(7, t), bounds)) for t in range(20)]
    b = [serialize_instance(suite.generate(search.trial_rng(7, t), bounds)) for t in range(20)]
    assert a == b
    c = [serialize_instance(suite.generate(search.trial_rng(8, t), bounds)) for t in range(20)]
    assert a != c


def test_size_bounds_respected():
    suite = SUITES["ot-ball-nesting"]
    for t in range(50):
        inst = suite.generate(search.trial_rng(3, t), search.SizeBounds(2, 4))
        assert 2 <= inst.size <= 4


@pytest.mark.parametrize("mutant", [m.id for m in search.mutant_suites()])
def test_mutants_found_shrunk_and_confirmed(mutant):
    v = counterexample_search(SearchSpec(mutant, trials=10_000, seed=7))
    assert v.found and v.confirmed
    # shrinking is sound: the shrunk instance fails the same way
    assert v.outcome is not None and not v.outcome.ok
    again = SUITES[mutant].check(v.counterexample)
    assert not again.ok and again.tag == v.outcome.tag
    assert v.counterexample.size <= v.original.size
    v2 = counterexample_search(SearchSpec(mutant, trials=10_000, seed=7))
    assert serialize_instance(v2.counterexample) == serialize_instance(v.counterexample)


def test_shrinker_reduces_points():
    suite = SUITES["mutant-strict-ball"]
    inst = suite.generate(search.trial_rng(1, 0), search.SizeBounds(6, 6))
    out = suite.check(inst)
    assert not out.ok
    small = shrink(suite, inst, out.tag)
    assert small.size == 1


def test_restrict_drops_unclosed_maps():
    suite = SUITES["count-condition"]
    inst = suite.generate(search.trial_rng(2, 0), search.SizeBounds(3, 5))
    f = inst.parts["map"]
    n = inst.size
    keep = [i for i in range(n) if i != f(0)] if f(0) != 0 else list(range(1, n))
    r = search.restrict(inst, keep)
    if r is not None:
        g = r.parts["map"]
        assert all(0 <= g(i) < r.size for i in range(r.size))


@pytest.mark.parametrize("suite", [s for s in SUITES if not SUITES[s].mutant_of])
def test_genuine_suites_small_run(suite):
    v = counterexample_search(SearchSpec(suite, trials=60, seed=11))
    assert not v.found, serialize_instance(v.counterexample)
    assert v.checked > 0


def test_serialized_instance_parses_back():
    from ballspace import io

    inst = SUITES["ot-ball-nesting"].generate(search.trial_rng(5, 3), search.SizeBounds(3, 5))
    text = serialize_instance(inst)
    space_text, _, rest = text.partition("bifn ")
    space = io.parse_text(space_text, "space")
    bif = io.parse_text("bifn " + rest, "bifn", space=space)
    want = inst.parts["phi"]
    assert bif.table == want.table and bif.K == want.K
