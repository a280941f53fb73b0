import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabispec.eigensolve import (
    ConvergenceError,
    converge_spectrum,
    eigs_dense,
    eigs_tridiag,
    gershgorin,
    jacobi_sweeps,
    parity_spectrum,
    sturm_count,
)
from rabispec.analytic import zhang_level
from rabispec.model import (
    DenseSym,
    ModelParams,
    Parity,
    TriBlock,
    Truncation,
    build_full,
    build_jc,
    build_parity_block,
)

from oracles import sign_changes_of_minors

JUDD = ModelParams(1.0, math.sqrt(3) / 4, 0.5)


def _block(diag, off, parity=Parity.PLUS):
    return TriBlock(diag, off, parity, ModelParams(1.0, 0.5, 0.3))


def test_sturm_count_example():
    b = _block([0.3, 0.7, 2.3], [0.5, 0.5 * math.sqrt(2)])
    assert sturm_count(b, 0.0) == 1
    assert sign_changes_of_minors(b.to_dense(), 0.0) == 1


def test_sturm_count_limits():
    b = _block([0.3, 0.7, 2.3], [0.5, 0.7071])
    assert sturm_count(b, -math.inf) == 0
    assert sturm_count(b, math.inf) == 3
    lo, hi = gershgorin(b.diag, b.offdiag)
    assert sturm_count(b, lo - 1e-9) == 0
    assert sturm_count(b, hi + 1e-9) == 3


@settings(max_examples=60, deadline=None)
@given(
    d=st.lists(st.floats(-5, 5), min_size=2, max_size=8),
    data=st.data(),
)
def test_sturm_count_matches_minor_signs(d, data):
    e = data.draw(st.lists(st.floats(0.05, 3), min_size=len(d) - 1, max_size=len(d) - 1))
    b = _block(d, e)
    ev = np.linalg.eigvalsh(b.to_dense())
    x = data.draw(st.floats(-12, 12))
    # stay clear of eigenvalues where both counts are legitimately ambiguous
    if np.min(np.abs(ev - x)) > 1e-6:
        assert sturm_count(b, x) == int(np.sum(ev < x))
        brute = sign_changes_of_minors(b.to_dense(), x)
        if brute is not None:
            assert sturm_count(b, x) == brute


@settings(max_examples=30, deadline=None)
@given(d=st.lists(st.floats(-5, 5), min_size=2, max_size=10), xs=st.lists(st.floats(-20, 20), min_size=2, max_size=6))
def test_sturm_count_is_monotone(d, xs):
    b = _block(d, np.linspace(0.1, 1, len(d) - 1))
    counts = [sturm_count(b, x) for x in sorted(xs)]
    assert counts == sorted(counts)


def test_uncoupled_block_gives_its_diagonal():
    b = build_parity_block(ModelParams(1.0, 0.0, 0.3), Truncation(6), Parity.MINUS)
    np.testing.assert_allclose(eigs_tridiag(b, 6).energies, np.sort(b.diag), atol=1e-12)


def test_degenerate_diagonal_with_zero_couplings():
    b = build_parity_block(ModelParams(1.0, 0.0, 0.5), Truncation(4), Parity.PLUS)
    np.testing.assert_allclose(eigs_tridiag(b, 4).energies, [0.5, 0.5, 2.5, 2.5], atol=1e-12)


def test_bisection_counts_agree_with_sturm():
    b = _block([0.3, 0.7, 2.3], [0.5, 0.5 * math.sqrt(2)])
    ev = eigs_tridiag(b, 3).energies
    assert np.sum(ev < 0) == 1 and np.sum(ev > 0) == 2


@settings(max_examples=25, deadline=None)
@given(g=st.floats(0.0, 2.0), lam=st.floats(-1, 1), n=st.integers(2, 60), p=st.sampled_from(list(Parity)))
def test_tridiag_matches_lapack(g, lam, n, p):
    b = build_parity_block(ModelParams(1.0, g, lam), Truncation(n), p)
    k = max(1, n // 2)
    got = eigs_tridiag(b, k, abs_tol=1e-12).energies
    np.testing.assert_allclose(got, np.linalg.eigvalsh(b.to_dense())[:k], atol=1e-10)


def test_tridiag_rejects_bad_k():
    b = _block([0.0, 1.0], [0.2])
    for k in (0, 3):
        with pytest.raises(ValueError):
            eigs_tridiag(b, k)


def test_juddian_level_in_both_parities():
    for p in Parity:
        ev = eigs_tridiag(build_parity_block(JUDD, Truncation(200), p), 4).energies
        assert np.min(np.abs(ev - 0.8125)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(g=st.floats(0.05, 1.5), lam=st.floats(-1, 1), p=st.sampled_from(list(Parity)))
def test_blocks_with_positive_couplings_are_nondegenerate(g, lam, p):
    abs_tol = 1e-13
    ev = eigs_tridiag(build_parity_block(ModelParams(1.0, g, lam), Truncation(40), p), 20, abs_tol).energies
    assert np.min(np.diff(ev)) > 2 * abs_tol


def test_dense_diagonal_input():
    m = DenseSym(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_array_equal(eigs_dense(m).energies, [-1.0, 2.0, 3.0])


def test_dense_two_by_two_closed_form():
    lam, g = 0.3, 0.4
    ev = eigs_dense(DenseSym(np.array([[-lam, g], [g, lam]]))).energies
    r = math.hypot(lam, g)
    np.testing.assert_allclose(ev, [-r, r], atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12))
def test_jacobi_matches_lapack_on_random_symmetric(seed, n):
    a = np.random.default_rng(seed).normal(size=(n, n))
    a = a + a.T
    np.testing.assert_allclose(eigs_dense(DenseSym(a)).energies, np.linalg.eigvalsh(a), atol=1e-11)


def test_jacobi_preserves_trace():
    a = build_full(ModelParams(1.0, 0.8, 0.3), Truncation(20)).entries
    _, sweeps, traces = jacobi_sweeps(a)
    assert sweeps >= 1
    bound = 1e-12 * np.sum(np.abs(np.diag(a)))
    assert all(abs(t1 - t0) <= bound for t0, t1 in zip(traces, traces[1:]))


def test_jacobi_budget_reports_sweeps():
    a = np.random.default_rng(3).normal(size=(8, 8))
    with pytest.raises(ConvergenceError) as info:
        jacobi_sweeps(a + a.T, abs_tol=1e-14, max_sweeps=1)
    assert info.value.diagnostic["sweeps"] == 1


def test_full_matrix_equals_union_of_parity_blocks():
    p, t = ModelParams(1.0, 0.6, 0.4), Truncation(24)
    dense = eigs_dense(build_full(p, t)).energies
    blocks = parity_spectrum(p, t, 24).energies
    np.testing.assert_allclose(dense, blocks, atol=1e-11)


def test_asymmetric_model_uses_dense_route():
    p, t = ModelParams(1.0, 0.6, 0.4, 0.2), Truncation(16)
    dense = eigs_dense(build_full(p, t)).energies
    np.testing.assert_allclose(dense, np.linalg.eigvalsh(build_full(p, t).entries), atol=1e-11)


def test_jc_dense_matches_closed_form():
    p, t = ModelParams(1.0, 0.2, 0.3), Truncation(12)
    ev = eigs_dense(build_jc(p, t)).energies
    for n in range(t.n_max - 1):
        for b in (+1, -1):
            assert np.min(np.abs(ev - zhang_level(p, "II", n, b))) < 1e-12


def test_converge_juddian():
    spec, trunc = converge_spectrum(JUDD, 4, 1e-10)
    assert trunc.n_max <= 512
    assert spec.converged_count == 8 == len(spec)
    hits = [lv for lv in spec.levels if abs(lv.energy - 0.8125) < 1e-8]
    assert sorted(int(lv.parity) for lv in hits) == [-1, 1]


def test_converge_uncoupled_stops_at_first_doubling():
    spec, trunc = converge_spectrum(ModelParams(1.0, 0.0, 0.3), 3)
    assert trunc.n_max == 64 and len(spec.history) == 1
    expected = sorted([n + 0.3 * s for n in range(6) for s in (1, -1)])[:6]
    np.testing.assert_allclose(spec.energies, expected, atol=1e-12)


def test_converge_history_decreases():
    spec, trunc = converge_spectrum(ModelParams(1.0, 1.0, 0.3), 8, 1e-10)
    deltas = [d for _, d in spec.history]
    assert all(b < a for a, b in zip(deltas, deltas[1:]))
    assert deltas[-1] < 1e-10 and trunc.n_max <= 1024


def test_converge_budget_is_an_error():
    with pytest.raises(ConvergenceError) as info:
        converge_spectrum(ModelParams(1.0, 3.0, 0.3), 4, 1e-10, n_cap=64)
    assert info.value.diagnostic["n_cap"] == 64


def test_converge_requires_parity():
    with pytest.raises(ValueError, match="parity broken"):
        converge_spectrum(ModelParams(1.0, 0.5, 0.3, 0.1), 4)


def test_spectrum_levels_are_sorted_and_indexed():
    spec, _ = converge_spectrum(ModelParams(1.0, 0.7, 0.3), 5)
    e = spec.energies
    assert np.all(np.diff(e) >= 0)
    for p in Parity:
        assert [lv.index for lv in spec.levels if lv.parity == p] == list(range(5))
