"""Sampler correctness: row validity, cycle-type guarantees, stream discipline.

Distributional checks compare empirical frequencies against the exact law
at small n with wide (4 sigma) tolerances so they stay deterministic in
practice while still catching a wrong sampler.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permprod.perms import Permutation, compose, cycle_counts, cycle_type
from permprod.samplers import (
    RngStream,
    SamplerSpec,
    ewens_rows,
    matching_heavy_rows,
    perm_from_row,
    product_rows,
    row_from_perm,
    small_cycle_counts,
    sqrt_fixed_rows,
    total_cycle_counts,
    uniform_rows,
)
from permprod.oracle import ExactDistribution


def rows_are_permutations(rows: np.ndarray, n: int) -> bool:
    target = np.arange(n)
    return bool(np.all(np.sort(rows, axis=1) == target))


def test_stream_reproducible_and_distinct():
    a = RngStream(123, 7).generator.integers(0, 1 << 30, size=16)
    b = RngStream(123, 7).generator.integers(0, 1 << 30, size=16)
    c = RngStream(123, 8).generator.integers(0, 1 << 30, size=16)
    d = RngStream(124, 7).generator.integers(0, 1 << 30, size=16)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


@given(st.integers(min_value=1, max_value=30), st.integers(min_value=0, max_value=2**30))
@settings(max_examples=30)
def test_uniform_rows_are_valid(n, seed):
    rows = uniform_rows(RngStream(seed, 0), 8, n)
    assert rows.shape == (8, n)
    assert rows_are_permutations(rows, n)


@given(
    st.integers(min_value=2, max_value=20),
    st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5)]),
)
@settings(max_examples=20)
def test_ewens_rows_are_valid(n, theta):
    rows = ewens_rows(RngStream(5, 1), 16, n, float(theta))
    assert rows_are_permutations(rows, n)


def test_uniform_frequencies_at_n3():
    rows = uniform_rows(RngStream(42, 0), 60000, 3)
    _, counts = np.unique(rows, axis=0, return_counts=True)
    assert len(counts) == 6
    # each of the 6 permutations: p = 1/6, 4 sigma band
    sd = math.sqrt(60000 * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - 10000) < 4 * sd)


def test_ewens_class_frequencies_match_exact_law():
    n, theta, m = 4, Fraction(2), 80000
    rows = ewens_rows(RngStream(9, 3), m, n, float(theta))
    law = dict(ExactDistribution.ewens(n, theta).class_probs)
    got: dict[tuple[int, ...], int] = {}
    for row in rows:
        t = cycle_type(perm_from_row(row))
        got[t] = got.get(t, 0) + 1
    assert set(got) <= set(law)
    for part, p in law.items():
        expect = m * float(p)
        sd = math.sqrt(m * float(p) * (1 - float(p)))
        assert abs(got.get(part, 0) - expect) < 4 * sd, part


def test_ewens_theta_zero_gives_single_cycle():
    rows = ewens_rows(RngStream(1, 0), 32, 6, 0.0)
    for row in rows:
        assert cycle_type(perm_from_row(row)) == (6,)


@given(st.integers(min_value=0, max_value=6))
@settings(max_examples=10)
def test_sqrt_fixed_rows_have_declared_type(f):
    n = 9
    rows = sqrt_fixed_rows(RngStream(3, 2), 24, n, f)
    want = (1,) * n if f == n else (n - f,) + (1,) * f
    for row in rows:
        assert cycle_type(perm_from_row(row)) == want


def test_sqrt_fixed_rejects_length_one_long_cycle():
    with pytest.raises(ValueError):
        sqrt_fixed_rows(RngStream(0, 0), 4, 5, 4)


def test_sqrt_fixed_full_fix_is_identity():
    rows = sqrt_fixed_rows(RngStream(0, 0), 4, 5, 5)
    assert np.all(rows == np.arange(5))


def test_matching_heavy_rows_have_declared_type():
    n, frac = 10, Fraction(1, 2)
    rows = matching_heavy_rows(RngStream(11, 4), 24, n, frac)
    for row in rows:
        assert cycle_type(perm_from_row(row)) == (2, 2, 2, 2, 2)
    n = 11
    rows = matching_heavy_rows(RngStream(11, 5), 24, n, Fraction(1, 4))
    # m = floor(11/4) = 2 two-cycles, rest-cycle of length 7
    for row in rows:
        assert cycle_type(perm_from_row(row)) == (7, 2, 2)


def test_matching_heavy_rejects_tiny_rest_cycle():
    # n=9, frac=1/2: m=4, rest=1
    with pytest.raises(ValueError):
        matching_heavy_rows(RngStream(0, 0), 4, 9, Fraction(1, 2))
    # n=8, frac=3/8: m=3, rest=2
    with pytest.raises(ValueError):
        matching_heavy_rows(RngStream(0, 0), 4, 8, Fraction(3, 8))


def test_conjugated_samplers_hit_all_positions():
    # fixed points must not stick to the low indices after conjugation
    rows = sqrt_fixed_rows(RngStream(17, 0), 4000, 6, 2)
    fixed_freq = (rows == np.arange(6)).mean(axis=0)
    assert np.all(fixed_freq > 0.2) and np.all(fixed_freq < 0.5)


def test_spec_validation_and_labels():
    assert SamplerSpec("uniform").label() == "uniform"
    assert SamplerSpec("ewens", theta=Fraction(1, 2)).label() == "ewens(1/2)"
    assert SamplerSpec("sqrt_fixed", fixed_count="sqrt").label() == "sqrt_fixed(sqrt)"
    assert (
        SamplerSpec("matching_heavy", two_cycle_fraction=Fraction(1, 2)).label()
        == "matching_heavy(1/2)"
    )
    with pytest.raises(ValueError):
        SamplerSpec("uniform", theta=1)
    with pytest.raises(ValueError):
        SamplerSpec("ewens")
    with pytest.raises(ValueError):
        SamplerSpec("ewens", theta=-1)
    with pytest.raises(ValueError):
        SamplerSpec("matching_heavy", two_cycle_fraction=Fraction(2, 3))
    with pytest.raises(ValueError):
        SamplerSpec("nope")


def test_spec_bind_and_sqrt_resolution():
    spec = SamplerSpec("sqrt_fixed", fixed_count="sqrt")
    bound = spec.bind(n=17, seed=5)
    assert bound.n == 17 and bound.seed == 5
    assert bound.resolved_fixed_count() == 4
    assert spec.n is None  # bind does not mutate


def test_spec_draw_batch_matches_row_sampler():
    spec = SamplerSpec("uniform", n=6)
    a = spec.draw_batch(RngStream(31, 2), 5)
    b = uniform_rows(RngStream(31, 2), 5, 6)
    assert np.array_equal(a, b)


def test_product_rows_is_left_composition():
    s = Permutation.from_cycles(4, [(1, 2, 3)])
    r = Permutation.from_cycles(4, [(3, 4)])
    prod = product_rows([row_from_perm(s)[None, :], row_from_perm(r)[None, :]])
    assert perm_from_row(prod[0]) == compose(s, r)


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=2, max_value=4))
@settings(max_examples=25)
def test_product_rows_associates_with_perm_composition(n, k):
    rng = RngStream(77, 0)
    factors = [uniform_rows(rng, 3, n) for _ in range(k)]
    prod = product_rows(factors)
    for i in range(3):
        perms = [perm_from_row(f[i]) for f in factors]
        expect = perms[0]
        for p in perms[1:]:
            expect = compose(expect, p)
        assert perm_from_row(prod[i]) == expect


@given(st.integers(min_value=1, max_value=8), st.integers(min_value=1, max_value=8))
@settings(max_examples=40)
def test_small_cycle_counts_match_brute_force(n, kmax):
    rows = uniform_rows(RngStream(13, n), 6, n)
    table = small_cycle_counts(rows, kmax)
    assert table.shape == (6, kmax)
    for i, row in enumerate(rows):
        counts = cycle_counts(perm_from_row(row))
        for k in range(1, kmax + 1):
            assert table[i, k - 1] == counts.get(k)


def test_total_cycle_counts_match_brute_force():
    rows = uniform_rows(RngStream(29, 1), 50, 7)
    totals = total_cycle_counts(rows)
    for i, row in enumerate(rows):
        assert totals[i] == cycle_counts(perm_from_row(row)).num_cycles


def test_row_perm_round_trip():
    p = Permutation.from_cycles(5, [(1, 5, 2)])
    assert perm_from_row(row_from_perm(p)) == p
