import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rabispec.analytic import enumerate_zhang, zhang_level
from rabispec.eigensolve import converge_spectrum
from rabispec.model import ModelParams, Parity, Truncation, build_full
from rabispec.recurrence import (
    RESCALE_HI,
    RESCALE_LO,
    classify_energy,
    defect_zeros,
    forward_trail,
    miller_boundary,
    miller_defect,
    minimal_init,
    trail_residuals,
)

JUDD = ModelParams(1.0, math.sqrt(3) / 4, 0.5)


def test_displaced_vacuum_at_zero_splitting():
    # lambda = 0, sigma_x = -1: H = (a - g)^dag (a - g) - g^2, a coherent state
    g = 0.5
    t = forward_trail(ModelParams(1.0, g, 0.0), -g * g, (1.0, -1.0), 12)
    a, b = t.true_coefficients()
    expected = np.array([g**m / math.sqrt(math.factorial(m)) for m in range(13)])
    np.testing.assert_allclose(a[:9], expected[:9], rtol=1e-8)
    np.testing.assert_allclose(b[:9], -expected[:9], rtol=1e-8)
    # partial norm settles at log(2 e^{g^2}) before rounding noise takes over
    assert t.partial_norms[8] == pytest.approx(math.log(2) + g * g, abs=1e-8)


def test_forward_trail_matches_matrix_action():
    p, e = ModelParams(1.0, 0.6, 0.3), 0.37
    t = forward_trail(p, e, (0.8, -0.2), 20)
    a, b = t.true_coefficients()
    v = np.empty(42)
    v[0::2], v[1::2] = a, b
    h = build_full(p, Truncation(21)).entries
    r = (h @ v - e * v)[:-2]  # the last level's equations need m = 21
    assert np.max(np.abs(r)) < 1e-8 * np.max(np.abs(v))


@settings(max_examples=40, deadline=None)
@given(g=st.floats(0.05, 2), lam=st.floats(-1, 1), e=st.floats(-3, 8),
       a0=st.floats(-1, 1), b0=st.floats(-1, 1), m=st.integers(2, 300))
def test_trail_residual_and_rescaling_invariants(g, lam, e, a0, b0, m):
    if abs(a0) + abs(b0) < 1e-3:
        a0 = 1.0
    t = forward_trail(ModelParams(1.0, g, lam), e, (a0, b0), m)
    assert np.max(trail_residuals(t)) < 1e-10
    big = np.maximum(np.abs(t.alphas), np.abs(t.betas))[1:]
    big = big[big > 0]
    assert np.all((big >= RESCALE_LO) & (big <= RESCALE_HI))
    assert np.all(np.diff(t.partial_norms) >= -1e-12)


@settings(max_examples=30, deadline=None)
@given(g=st.floats(0.05, 2), lam=st.floats(-1, 1), e=st.floats(-3, 8), a0=st.floats(-1, 1), b0=st.floats(0.1, 1))
def test_spin_flip_symmetry(g, lam, e, a0, b0):
    t1 = forward_trail(ModelParams(1.0, g, lam), e, (a0, b0), 60)
    t2 = forward_trail(ModelParams(1.0, g, -lam), e, (b0, a0), 60)
    np.testing.assert_array_equal(t1.alphas, t2.betas)
    np.testing.assert_array_equal(t1.betas, t2.alphas)
    np.testing.assert_array_equal(t1.partial_norms, t2.partial_norms)


def test_generic_energy_grows_like_dominant_solution():
    g, m_max = 0.5, 400
    p = ModelParams(1.0, g, 0.3)
    spec, _ = converge_spectrum(p, 2)
    e_mid = 0.5 * (spec.energies[0] + spec.energies[1])
    t = forward_trail(p, e_mid, (1.0, 0.0), m_max)
    # the parity -1 chain alternates alpha (even m) and beta (odd m)
    chain = np.where(np.arange(m_max + 1) % 2 == 0, t.log_abs_alpha, t.log_abs_beta)
    rate = np.diff(chain)
    m = m_max - 1
    assert rate[m] == pytest.approx(math.log(math.sqrt(m) / g), abs=0.01)
    assert t.partial_norms[-1] > t.partial_norms[m_max // 2] + 100


def test_forward_rejects_bad_input():
    with pytest.raises(ValueError):
        forward_trail(ModelParams(1.0, 0.5, 0.3), 0.1, (0.0, 0.0), 10)
    with pytest.raises(ValueError):
        forward_trail(ModelParams(1.0, 0.0, 0.3), 0.1, (1.0, 0.0), 10)
    with pytest.raises(ValueError, match="parity broken"):
        forward_trail(ModelParams(1.0, 0.5, 0.3, 0.1), 0.1, (1.0, 0.0), 10)


def test_defect_vanishes_at_juddian_energy():
    assert miller_defect(JUDD, 0.8125) < 1e-6


def test_defect_at_eigenvalues_and_between():
    p = ModelParams(1.0, 0.5, 0.3)
    spec, _ = converge_spectrum(p, 4)
    e = spec.energies
    for x in e:
        assert miller_defect(p, x) < 1e-6
    assert miller_defect(p, 0.5 * (e[0] + e[1])) > 1e-2


def test_claimed_level_is_not_spectral():
    p = ModelParams(1.0, 0.5, 0.3)
    assert miller_defect(p, zhang_level(p, "I", 0, -1)) > 1e-2


def test_defect_zeros_are_truncated_eigenvalues():
    # backward recursion from M is exact for the block truncated at M + 1 levels
    from rabispec.eigensolve import parity_spectrum

    p, M = ModelParams(1.0, 0.9, 0.4), 20
    ref = parity_spectrum(p, Truncation(M + 1), 5)
    zeros = defect_zeros(p, ref.energies[0] - 0.3, 0.5 * (ref.energies[4] + ref.energies[5]), 300, depth=M)
    np.testing.assert_allclose([z for z, _ in zeros], ref.energies[:5], atol=1e-10)
    assert [int(par) for _, par in zeros] == [int(lv.parity) for lv in ref.levels[:5]]


def test_seeds_are_independent():
    mb = miller_boundary(ModelParams(1.0, 0.5, 0.3), 0.4)
    assert mb.seed_conditioning > 0.5
    assert mb.defect == pytest.approx(abs(mb.factor(Parity.PLUS) * mb.factor(Parity.MINUS)), rel=1e-12)


def test_tail_regime_is_enforced():
    with pytest.raises(ValueError, match="tail regime"):
        miller_defect(ModelParams(1.0, 0.5, 0.3), 10.0, depth=5)


def test_minimal_init_stabilizes_partial_norm():
    p = ModelParams(1.0, 0.5, 0.3)
    spec, _ = converge_spectrum(p, 2)
    ground = spec.levels[0]
    init = minimal_init(p, ground.energy, ground.parity)
    good = forward_trail(p, ground.energy, init, 40)
    bad = forward_trail(p, ground.energy + 0.1, init, 40)
    # before the growing solution is excited by rounding the norm is flat
    assert abs(good.partial_norms[10] - good.partial_norms[6]) < 1e-4
    assert bad.partial_norms[10] - bad.partial_norms[6] > 1e-2
    # and past the contamination horizon both grow
    assert bad.partial_norms[-1] > bad.partial_norms[20]
    assert good.partial_norms[-1] > good.partial_norms[20]


def test_classify_ground_and_gap():
    p = ModelParams(1.0, 0.5, 0.3)
    spec, _ = converge_spectrum(p, 2)
    e0 = spec.energies[0]
    c = classify_energy(p, e0)
    assert c.label == "spectral" and c.agree
    assert spec.energies[1] - e0 > 0.2
    c = classify_energy(p, e0 + 0.1)
    assert c.label == "non_spectral" and c.agree


@pytest.mark.parametrize("lam", [0.3, 0.5])
def test_every_claimed_level_is_non_spectral(lam):
    p = ModelParams(1.0, 0.5, lam)
    levels = enumerate_zhang(p, 4.0)
    assert levels
    for lv in levels:
        c = classify_energy(p, lv.energy)
        assert c.label == "non_spectral", lv
        assert c.agree


def test_classify_reports_disagreement():
    p = ModelParams(1.0, 0.5, 0.3)
    spec, _ = converge_spectrum(p, 2)
    # a defect tolerance too tight to be met lets the two routes disagree
    c = classify_energy(p, spec.energies[0] + 1e-9, tol=1e-30)
    assert c.label == "non_spectral"
    assert not c.agree and "disagree" in c.diagnostic
