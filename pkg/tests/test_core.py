import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from dpspec import (
    INF,
    BudgetMap,
    DataUniverse,
    EnumerationTooLargeError,
    ExactReal,
    Flavor,
    InputPremetric,
    ModeMismatchError,
    Multiverse,
    OutputDivergence,
    input_distance,
    make_domain,
    spec_from_document,
    spec_to_document,
    validate_spec,
)


def test_fixed_size_enumeration():
    d = make_domain([0, 1], 2)
    assert d.datasets == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert make_domain(["a"], 3).datasets == (("a", "a", "a"),)


def test_up_to_size_enumeration():
    d = make_domain([0, 1], 2, "up-to-size")
    assert d.datasets == ((), (0,), (1,), (0, 0), (0, 1), (1, 1))
    assert len(d) == sum(math.comb(2 + k - 1, k) for k in range(3))


def test_enumeration_cap():
    with pytest.raises(EnumerationTooLargeError, match="1000"):
        make_domain(range(10), 4, cap=1000)


def test_distances():
    d = make_domain([0, 1], 2)
    h = InputPremetric.hamming()
    assert input_distance(h, d, d.id_of((0, 1)), d.id_of((0, 0))) == 1
    assert input_distance(h, d, 1, 1) == 0
    u = make_domain([0, 1], 2, "up-to-size")
    assert input_distance(InputPremetric.symmetric_difference(), u, u.id_of((0, 1)), u.id_of((0,))) == 1
    with pytest.raises(ModeMismatchError):
        input_distance(h, u, 0, 1)


def test_explicit_matrix_allows_inf():
    d = make_domain([0, 1], 1)
    m = InputPremetric.explicit([[0, "inf"], ["1/2", 0]])
    assert input_distance(m, d, 0, 1) == INF
    assert input_distance(m, d, 1, 0) == ExactReal(0.5)


def _flavor(domain, multiverse=None, premetric=None):
    return Flavor(
        domain, multiverse or Multiverse.full(domain), premetric or InputPremetric.hamming(), OutputDivergence.max()
    )


def test_validate_well_formed():
    d = make_domain([0, 1], 1)
    assert validate_spec(_flavor(d).with_budget(1)).ok


def test_validate_reports_defects():
    d = make_domain([0, 1], 1)
    mv = Multiverse((DataUniverse("D0", (0,)), DataUniverse("D1", (0, 1))))
    report = validate_spec(_flavor(d, mv).with_budget(BudgetMap({"D0": 1})))
    assert not report.ok
    assert any("D1" in v for v in report.violations)

    bad = _flavor(d, premetric=InputPremetric.explicit([[1, 1], [1, 0]])).with_budget(1)
    assert any("premetric diagonal nonzero" in v for v in validate_spec(bad).violations)

    u = make_domain([0, 1], 1, "up-to-size")
    assert not validate_spec(_flavor(u).with_budget(1)).ok


def test_document_roundtrip():
    d = make_domain([0, 1], 2)
    spec = _flavor(d).with_budget("ln(3)")
    again = spec_from_document(spec_to_document(spec))
    assert again.fingerprint() == spec.fingerprint()
    assert again.budget["full"] == spec.budget["full"]


def test_fingerprint_tracks_flavor():
    d = make_domain([0, 1], 2)
    assert _flavor(d).fingerprint() == _flavor(make_domain([0, 1], 2)).fingerprint()
    other = Flavor(d, Multiverse.full(d), InputPremetric.hamming(), OutputDivergence.tv())
    assert other.fingerprint() != _flavor(d).fingerprint()


domains = st.builds(
    lambda k, n, mode: (list(range(k)), n, mode),
    st.integers(1, 4),
    st.integers(1, 3),
    st.sampled_from(["fixed-size", "up-to-size"]),
).filter(lambda t: (len(t[0]) ** t[1] if t[2] == "fixed-size" else math.comb(len(t[0]) + t[1], t[1])) <= 100)


@settings(max_examples=60, deadline=None)
@given(domains)
def test_enumeration_matches_itertools_and_is_deterministic(args):
    alphabet, n, mode = args
    d = make_domain(alphabet, n, mode)
    expected = oracles.fixed_size_datasets(alphabet, n) if mode == "fixed-size" else oracles.up_to_size_datasets(alphabet, n)
    assert list(d.datasets) == expected
    assert make_domain(alphabet, n, mode).datasets == d.datasets
    assert all(d.id_of(ds) == i for i, ds in enumerate(d.datasets))


@settings(max_examples=40, deadline=None)
@given(domains)
def test_builtin_premetrics_symmetric(args):
    alphabet, n, mode = args
    d = make_domain(alphabet, n, mode)
    kinds = [InputPremetric.symmetric_difference()] + ([InputPremetric.hamming()] if mode == "fixed-size" else [])
    for pm in kinds:
        ref = oracles.hamming if pm.kind.value == "bounded-hamming" else oracles.symdiff
        for x in d.ids:
            for y in d.ids:
                dxy = input_distance(pm, d, x, y)
                assert dxy == input_distance(pm, d, y, x)
                assert dxy == ref(d[x], d[y])


def test_hamming_triangle_inequality_exhaustive():
    for alphabet, n in (([0, 1], 4), ([0, 1, 2], 3), ([0, 1, 2, 3, 4], 2)):
        d = make_domain(alphabet, n)
        assert len(d) <= 30
        h = InputPremetric.hamming()
        dist = [[input_distance(h, d, x, y) for y in d.ids] for x in d.ids]
        for x in d.ids:
            for y in d.ids:
                for z in d.ids:
                    assert dist[x][z] <= dist[x][y] + dist[y][z]
