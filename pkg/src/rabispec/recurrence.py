"""Fock-space recurrences for the ansatz psi = sum_m alpha_m |m,dn> + beta_m |m,up>.

Projecting H psi = E psi (epsilon = 0) onto <m,dn| and <m,up| gives

    (omega m - lambda) alpha_m + g (sqrt(m) beta_{m-1} + sqrt(m+1) beta_{m+1}) = E alpha_m
    (omega m + lambda) beta_m  + g (sqrt(m) alpha_{m-1} + sqrt(m+1) alpha_{m+1}) = E beta_m

Run forward from (alpha_0, beta_0) these fix every coefficient for any E,
but the resulting series is normalizable only at eigenvalues.  Forward
iteration is swamped by the growing solution, so eigenvalues are located by
running the same equations backward from a deep tail (Miller's algorithm),
which converges onto the minimal, normalizable solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ModelParams, Parity

RESCALE_HI = 1e4
RESCALE_LO = 1e-4


@dataclass(frozen=True)
class CoeffTrail:
    """Forward coefficients in a rescaled frame.

    True values are ``alphas[m] * exp(logscale[m])`` (same for betas).
    ``partial_norms[k]`` is log sum_{m<=k} (alpha_m^2 + beta_m^2) of the true
    coefficients.
    """

    alphas: np.ndarray
    betas: np.ndarray
    logscale: np.ndarray
    partial_norms: np.ndarray
    energy: float
    params: ModelParams

    @property
    def log_abs_alpha(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.alphas)) + self.logscale

    @property
    def log_abs_beta(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.betas)) + self.logscale

    def true_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Unscaled coefficients; overflows to inf for long trails."""
        f = np.exp(self.logscale)
        return self.alphas * f, self.betas * f


def _check(params: ModelParams):
    params.require_parity()
    if params.g <= 0:
        raise ValueError("recurrence divides by g; need g > 0")


def forward_trail(params: ModelParams, energy: float, init=(1.0, 0.0), m_max: int = 100) -> CoeffTrail:
    """Iterate the recurrences upward from (alpha_0, beta_0) to m = m_max."""
    _check(params)
    a0, b0 = map(float, init)
    if a0 == 0 and b0 == 0:
        raise ValueError("initial coefficients must not both vanish")
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    w, g, lam, E = params.omega, params.g, params.lam, energy

    alphas = np.empty(m_max + 1)
    betas = np.empty(m_max + 1)
    logscale = np.empty(m_max + 1)
    alphas[0], betas[0], logscale[0] = a0, b0, 0.0
    a_prev = b_prev = 0.0  # alpha_{m-1}, beta_{m-1} in the current frame
    a, b, log_s = a0, b0, 0.0
    for m in range(m_max):
        sm, sm1 = math.sqrt(m), math.sqrt(m + 1)
        b_next = ((E - w * m + lam) * a - g * sm * b_prev) / (g * sm1)
        a_next = ((E - w * m - lam) * b - g * sm * a_prev) / (g * sm1)
        a_prev, b_prev, a, b = a, b, a_next, b_next
        big = max(abs(a), abs(b))
        if big > 0 and not RESCALE_LO <= big <= RESCALE_HI:
            a_prev, b_prev, a, b = a_prev / big, b_prev / big, a / big, b / big
            log_s += math.log(big)
        alphas[m + 1], betas[m + 1], logscale[m + 1] = a, b, log_s

    sq = alphas**2 + betas**2
    with np.errstate(divide="ignore"):
        logterms = np.log(sq) + 2 * logscale
    partial = np.logaddexp.accumulate(logterms)
    return CoeffTrail(alphas, betas, logscale, partial, energy, params)


def trail_residuals(trail: CoeffTrail) -> np.ndarray:
    """Relative residual of both defining equations at every interior step.

    Entry m (0 <= m < M) uses coefficients m-1, m, m+1 brought to the frame
    of step m+1, divided by the sum of magnitudes of the terms.
    """
    p = trail.params
    w, g, lam, E = p.omega, p.g, p.lam, trail.energy
    al, be, ls = trail.alphas, trail.betas, trail.logscale
    M = len(al) - 1
    out = np.zeros(M)
    for m in range(M):
        ref = ls[m + 1]
        f0 = math.exp(ls[m] - ref)
        fm = math.exp(ls[m - 1] - ref) if m > 0 else 0.0
        am, bm = al[m] * f0, be[m] * f0
        apm, bpm = (al[m - 1] * fm, be[m - 1] * fm) if m > 0 else (0.0, 0.0)
        sm, sm1 = math.sqrt(m), math.sqrt(m + 1)
        t_dn = ((w * m - lam - E) * am, g * sm * bpm, g * sm1 * be[m + 1])
        t_up = ((w * m + lam - E) * bm, g * sm * apm, g * sm1 * al[m + 1])
        r = 0.0
        for terms in (t_dn, t_up):
            scale = sum(abs(t) for t in terms)
            if scale > 0:
                r = max(r, abs(sum(terms)) / scale)
        out[m] = r
    return out


def default_depth(params: ModelParams, energy: float) -> int:
    """Miller start index: max(4 E / omega, 200), pushed past the tail threshold."""
    m = max(int(math.ceil(4 * energy / params.omega)), 200)
    need = (abs(energy) + 2 * abs(params.lam) + 4 * params.g) / params.omega
    return max(m, int(math.floor(need)) + 1)


@dataclass(frozen=True)
class MillerBoundary:
    """Result of the backward pass.

    ``matrix[i, j]`` is boundary equation i (0: <0,dn|, 1: <0,up|) applied to
    the m <= 1 coefficients of tail seed j, divided by the norm of the
    equation's coefficient row and by the norm of the seed's
    (alpha_0, beta_0, alpha_1, beta_1).
    """

    matrix: np.ndarray
    seeds: np.ndarray  # seeds[j] = (alpha_0, beta_0, alpha_1, beta_1)
    depth: int

    @property
    def defect(self) -> float:
        return float(abs(np.linalg.det(self.matrix)))

    def factor(self, parity) -> float:
        """Signed boundary residual of one parity chain.

        The <0,dn| equation lives on the parity -1 chain, <0,up| on +1.  Each
        tail seed populates a single chain, so the defect is |product| of the
        two factors.
        """
        row = 0 if Parity(parity) == Parity.MINUS else 1
        return float(self.matrix[row, self._chain_seed(row)])

    def _chain_seed(self, row: int) -> int:
        a0, b0, a1, b1 = self.seeds.T
        weight = np.abs(a0) + np.abs(b1) if row == 0 else np.abs(b0) + np.abs(a1)
        return int(np.argmax(weight))

    @property
    def seed_conditioning(self) -> float:
        """|sin| of the angle between the two seed vectors (1 = orthogonal)."""
        u, v = self.seeds
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        cos = abs(u @ v) / (nu * nv)
        return math.sqrt(max(0.0, 1 - cos * cos))


def miller_boundary(params: ModelParams, energy: float, depth: Optional[int] = None) -> MillerBoundary:
    """Backward recursion from m = depth with seeds alpha_M = 1 and beta_M = 1."""
    _check(params)
    w, g, lam, E = params.omega, params.g, params.lam, energy
    M = default_depth(params, energy) if depth is None else int(depth)
    if w * M <= abs(E) + 2 * abs(lam) + 4 * g:
        raise ValueError(
            f"tail regime violated: omega*M = {w * M} <= |E| + 2|lambda| + 4g = {abs(E) + 2 * abs(lam) + 4 * g}"
        )
    # per seed: alpha_{m+1}, beta_{m+1}, alpha_m, beta_m; plain floats are
    # much faster than tiny arrays here
    runs = []
    for a1, b1, a, b in ((0.0, 0.0, 1.0, 0.0), (0.0, 0.0, 0.0, 1.0)):
        for m in range(M, 0, -1):
            gsm, gsm1 = g * math.sqrt(m), g * math.sqrt(m + 1)
            a_dn = ((E - w * m - lam) * b - gsm1 * a1) / gsm
            b_dn = ((E - w * m + lam) * a - gsm1 * b1) / gsm
            big = max(abs(a), abs(b), abs(a_dn), abs(b_dn))
            a1, b1, a, b = a / big, b / big, a_dn / big, b_dn / big
        runs.append((a1, b1, a, b))
    state = np.array(runs)
    a1, b1, a0, b0 = state.T
    seeds = np.column_stack([a0, b0, a1, b1])
    row_dn = np.array([-lam - E, g])  # acts on (alpha_0, beta_1)
    row_up = np.array([lam - E, g])  # acts on (beta_0, alpha_1)
    norms = np.linalg.norm(seeds, axis=1)
    mat = np.empty((2, 2))
    for j in range(2):
        mat[0, j] = row_dn @ (a0[j], b1[j]) / (np.linalg.norm(row_dn) * norms[j])
        mat[1, j] = row_up @ (b0[j], a1[j]) / (np.linalg.norm(row_up) * norms[j])
    return MillerBoundary(mat, seeds, M)


def miller_defect(params: ModelParams, energy: float, depth: Optional[int] = None) -> float:
    """Dimensionless boundary determinant; vanishes exactly at eigenvalues."""
    return miller_boundary(params, energy, depth).defect


def defect_zeros(params: ModelParams, e_lo: float, e_hi: float, n_grid: int = 200,
                 depth: Optional[int] = None, xtol: float = 1e-12) -> list[tuple[float, Parity]]:
    """Energies in [e_lo, e_hi] where the Miller defect vanishes.

    Scans the signed per-parity factors on an ``n_grid`` grid and bisects
    every sign change.  Splitting by parity keeps nearly degenerate
    opposite-parity pairs (and exact Juddian doublets, where the defect has
    a double zero) apart.
    """
    M = default_depth(params, max(abs(e_lo), abs(e_hi))) if depth is None else depth
    grid = np.linspace(e_lo, e_hi, n_grid)
    facs = [miller_boundary(params, e, M) for e in grid]
    zeros = []
    for p in Parity:
        f = np.array([mb.factor(p) for mb in facs])
        for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0):
            if f[i + 1] == 0 and i + 2 < len(f):
                continue  # counted at the next interval
            lo, hi, flo = grid[i], grid[i + 1], f[i]
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                fm = miller_boundary(params, mid, M).factor(p)
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            zeros.append((0.5 * (lo + hi), p))
    return sorted(zeros)


def minimal_init(params: ModelParams, energy: float, parity, depth: Optional[int] = None) -> tuple[float, float]:
    """(alpha_0, beta_0) of the backward (minimal) solution on one parity chain.

    Parity -1 runs through alpha_0, beta_1, alpha_2, ...; parity +1 through
    beta_0, alpha_1, ...  The chains decouple, so only the sign of the m=0
    coefficient is informative.  At an eigenvalue of that sector, iterating
    :func:`forward_trail` from here follows the normalizable solution until
    rounding errors excite the growing one.
    """
    mb = miller_boundary(params, energy, depth)
    row = 0 if Parity(parity) == Parity.MINUS else 1
    a0, b0, _, _ = mb.seeds[mb._chain_seed(row)]
    if row == 0:
        return (math.copysign(1.0, a0), 0.0)
    return (0.0, math.copysign(1.0, b0))


@dataclass(frozen=True)
class Classification:
    label: str  # "spectral" or "non_spectral"
    defect: float
    nearest_eigenvalue: float
    by_defect: bool
    by_spectrum: bool

    @property
    def agree(self) -> bool:
        return self.by_defect == self.by_spectrum

    @property
    def diagnostic(self) -> str:
        if self.agree:
            return ""
        return (
            f"criteria disagree: miller defect says {'spectral' if self.by_defect else 'non_spectral'}, "
            f"diagonalization says {'spectral' if self.by_spectrum else 'non_spectral'}"
        )


def classify_energy(params: ModelParams, energy: float, tol: float = 1e-6, rel_tol: float = 1e-10) -> Classification:
    """Decide whether ``energy`` is an eigenvalue, by two independent routes.

    Spectral only if the Miller defect is below ``tol`` and a converged
    eigenvalue lies within 1e-6 omega.  When the routes disagree the label is
    non_spectral and :attr:`Classification.diagnostic` says why.
    """
    from .eigensolve import converge_spectrum

    defect = miller_defect(params, energy)
    w = params.omega
    k = max(4, int(math.ceil((energy + abs(params.lam) + params.g**2 / w) / w)) + 3)
    while True:
        spec, _ = converge_spectrum(params, k, rel_tol)
        if all(spec.sector(p)[-1] > energy + w for p in Parity):
            break
        k *= 2
    e = spec.energies
    nearest = float(e[np.argmin(np.abs(e - energy))])
    by_defect = defect < tol
    by_spectrum = abs(nearest - energy) < 1e-6 * w
    label = "spectral" if by_defect and by_spectrum else "non_spectral"
    return Classification(label, defect, nearest, by_defect, by_spectrum)
