"""Real symmetric eigensolvers written from scratch.

Sturm-sequence bisection handles the parity blocks, cyclic Jacobi handles
dense matrices (epsilon != 0 and the JC/AJC cross checks), and
:func:`converge_spectrum` doubles the truncation until the low-lying levels
stop moving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .model import (
    DenseSym,
    ModelParams,
    Parity,
    TriBlock,
    Truncation,
    build_parity_block,
)

EPS = np.finfo(float).eps

#: levels in the top fraction of a truncated spectrum are never compared
EDGE_FRACTION = 0.1


class ConvergenceError(RuntimeError):
    """A solver or truncation sweep ran out of budget.

    ``diagnostic`` carries whatever was learned before giving up.
    """

    def __init__(self, message: str, **diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


@dataclass(frozen=True)
class Level:
    energy: float
    parity: Union[Parity, str]
    index: int


@dataclass(frozen=True)
class Spectrum:
    levels: tuple
    trunc_used: Truncation
    converged_count: int
    history: tuple = field(default=())

    def __post_init__(self):
        energies = [lv.energy for lv in self.levels]
        if any(b < a for a, b in zip(energies, energies[1:])):
            raise ValueError("levels must be sorted by energy")
        if self.converged_count > len(self.levels):
            raise ValueError("converged_count exceeds number of levels")

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    def sector(self, parity) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels if lv.parity == parity])

    def __len__(self):
        return len(self.levels)


def gershgorin(diag, offdiag) -> tuple[float, float]:
    d = np.asarray(diag, dtype=float)
    r = np.zeros_like(d)
    e = np.abs(np.asarray(offdiag, dtype=float))
    r[:-1] += e
    r[1:] += e
    return float(np.min(d - r)), float(np.max(d + r))


def split_offdiag(diag, offdiag) -> np.ndarray:
    """Zero couplings with |e_n| <= eps (|d_n| + |d_{n+1}|).

    A zero coupling decouples the block into independent pieces; the Sturm
    count of the whole matrix is then the sum over those pieces.
    """
    d = np.asarray(diag, dtype=float)
    e = np.array(offdiag, dtype=float)
    tiny = np.abs(e) <= EPS * (np.abs(d[:-1]) + np.abs(d[1:]))
    e[tiny] = 0.0
    return e


def _sturm_counts(diag, e2, x, pivmin) -> np.ndarray:
    # Vectorized over the shifts in x.
    x = np.asarray(x, dtype=float)
    count = np.zeros(x.shape, dtype=int)
    q = diag[0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count += q < 0
    for n in range(1, len(diag)):
        with np.errstate(invalid="ignore", divide="ignore"):
            q = diag[n] - x - np.where(e2[n - 1] == 0.0, 0.0, e2[n - 1] / q)
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def _pivmin(diag, offdiag) -> float:
    scale = max(np.max(np.abs(diag)), np.max(np.abs(offdiag), initial=0.0), 1.0)
    return np.finfo(float).tiny / EPS * scale**2


def sturm_count(block: TriBlock, x: float) -> int:
    """Number of eigenvalues of ``block`` strictly below ``x``.

    Counts negative pivots of the LDL^T factorization of (T - x), which equals
    the number of sign agreements of the Sturm sequence.  Pivots that vanish
    are replaced by a tiny negative value.
    """
    d = block.diag
    e = split_offdiag(d, block.offdiag)
    return int(_sturm_counts(d, e * e, np.array([x]), _pivmin(d, e))[0])


def _bisect_lowest(diag, offdiag, k: int, abs_tol: float, max_iter: int = 400) -> np.ndarray:
    d = np.asarray(diag, dtype=float)
    e = split_offdiag(d, offdiag)
    e2 = e * e
    pivmin = _pivmin(d, e)
    lo0, hi0 = gershgorin(d, e)
    pad = 2 * EPS * max(abs(lo0), abs(hi0), 1.0) + abs_tol
    lo = np.full(k, lo0 - pad)
    hi = np.full(k, hi0 + pad)
    target = np.arange(k)  # eigenvalue i satisfies count(lo) <= i < count(hi)
    for _ in range(max_iter):
        width = hi - lo
        if np.all(width < abs_tol):
            break
        active = width >= abs_tol
        mid = 0.5 * (lo + hi)
        c = _sturm_counts(d, e2, mid[active], pivmin)
        below = c > target[active]
        idx = np.flatnonzero(active)
        hi[idx[below]] = mid[active][below]
        lo[idx[~below]] = mid[active][~below]
    else:
        raise ConvergenceError("bisection did not reach abs_tol", widths=hi - lo)
    return 0.5 * (lo + hi)


def eigs_tridiag(block: TriBlock, k: int, abs_tol: float = 1e-13) -> Spectrum:
    """The ``k`` lowest eigenvalues of a parity block by Sturm bisection."""
    n = block.size
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    vals = _bisect_lowest(block.diag, block.offdiag, k, abs_tol)
    levels = tuple(Level(float(v), block.parity, i) for i, v in enumerate(vals))
    return Spectrum(levels, Truncation(n), k)


def jacobi_sweeps(a, abs_tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization.

    Returns ``(eigenvalues, sweeps, traces)`` with unsorted eigenvalues and the
    trace recorded after every sweep.  Stops once the off-diagonal Frobenius
    norm is below ``abs_tol`` times the initial Frobenius norm.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    target = abs_tol * np.linalg.norm(a)
    traces = [float(np.trace(a))]

    def off(m):
        return float(np.linalg.norm(m - np.diag(np.diag(m))))

    sweeps = 0
    while off(a) > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps", sweeps=sweeps, off=off(a)
            )
        for p in range(n - 1):
            row = a[p, p + 1 :]
            for q in np.flatnonzero(row) + p + 1:
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff  # theta would overflow
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = a[q, p] = 0.0
        sweeps += 1
        traces.append(float(np.trace(a)))
    return np.diag(a).copy(), sweeps, traces


def eigs_dense(m: DenseSym, abs_tol: float = 1e-14, max_sweeps: int = 60) -> Spectrum:
    if m.dim < 1:
        raise ValueError("empty matrix")
    vals, _, _ = jacobi_sweeps(m.entries, abs_tol, max_sweeps)
    vals = np.sort(vals)
    levels = tuple(Level(float(v), "full", i) for i, v in enumerate(vals))
    return Spectrum(levels, Truncation(max(m.dim // 2, 2)), len(levels))


def merge_levels(*sector_spectra: Spectrum) -> tuple:
    levels = [lv for sp in sector_spectra for lv in sp.levels]
    return tuple(sorted(levels, key=lambda lv: (lv.energy, -int(lv.parity))))


def parity_spectrum(params: ModelParams, trunc: Truncation, k: int, abs_tol: float = 1e-13) -> Spectrum:
    """Both parity sectors at a fixed truncation, merged and sorted."""
    sectors = [eigs_tridiag(build_parity_block(params, trunc, p), k, abs_tol) for p in Parity]
    return Spectrum(merge_levels(*sectors), trunc, 2 * k)


def converge_spectrum(
    params: ModelParams,
    k: int,
    rel_tol: float = 1e-10,
    n_cap: int = 4096,
    abs_tol: float = 1e-13,
    n_start: int | None = None,
) -> tuple[Spectrum, Truncation]:
    """Lowest ``k`` levels of each parity, converged in the truncation size.

    N starts at ``n_start`` (default max(32, 4k)) and doubles until no level of either sector moves
    by more than ``rel_tol * omega``.  The per-step maximum changes are kept
    in ``Spectrum.history``.

    Raises
    ------
    ConvergenceError
        If N would exceed ``n_cap``.
    """
    params.require_parity()
    if k < 1:
        raise ValueError("k must be >= 1")
    n = max(32, 4 * k) if n_start is None else n_start
    if n < max(k, 2):
        raise ValueError(f"n_start must be >= max(k, 2), got {n}")
    if n > n_cap:
        raise ConvergenceError("initial truncation already exceeds cap", n_cap=n_cap, k=k)

    def lowest(n):
        trunc = Truncation(n)
        return {p: eigs_tridiag(build_parity_block(params, trunc, p), k, abs_tol) for p in Parity}

    prev = lowest(n)
    history = []
    while True:
        if 2 * n > n_cap:
            raise ConvergenceError(
                f"truncation budget exceeded (N > {n_cap}) at g={params.g}",
                n_cap=n_cap,
                history=tuple(history),
                params=params,
            )
        n *= 2
        cur = lowest(n)
        delta = max(float(np.max(np.abs(cur[p].energies - prev[p].energies))) for p in Parity)
        history.append((n, delta))
        prev = cur
        if delta < rel_tol * params.omega:
            break
    trunc = Truncation(n)
    spec = Spectrum(merge_levels(*cur.values()), trunc, 2 * k, tuple(history))
    return spec, trunc
