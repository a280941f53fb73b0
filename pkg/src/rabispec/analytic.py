"""Closed-form Jaynes-Cummings and anti-Jaynes-Cummings ladders.

These are the levels that were put forward as the Rabi spectrum:

    subspectrum I  (AJC): omega (n + 1/2) +- sqrt((omega/2 + lambda)^2 + (n+1) g^2)
    subspectrum II (JC):  omega (n + 1/2) +- sqrt((omega/2 - lambda)^2 + (n+1) g^2)

Each pair is the 2x2 block {|n+1,up>, |n,dn>} (AJC) or {|n+1,dn>, |n,up>}
(JC).  The uncoupled states |0,up> (AJC, energy +lambda) and |0,dn> (JC,
energy -lambda) are not part of the ladders and only appear when asked for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model import ModelParams

SUBSPECTRA = ("I", "II")
BRANCHES = (+1, -1)


@dataclass(frozen=True, order=True)
class AnalyticLevel:
    energy: float
    subspectrum: str
    n: int  # -1 marks the isolated uncoupled level
    branch: int

    @property
    def model(self) -> str:
        return "AJC" if self.subspectrum == "I" else "JC"


def _detuning(params: ModelParams, sub: str) -> float:
    if sub == "I":
        return params.omega / 2 + params.lam
    if sub == "II":
        return params.omega / 2 - params.lam
    raise ValueError(f"subspectrum must be 'I' or 'II', got {sub!r}")


def _branch(branch) -> int:
    b = {"+": 1, "-": -1, 1: 1, -1: -1}.get(branch)
    if b is None:
        raise ValueError(f"branch must be +1 or -1, got {branch!r}")
    return b


def zhang_level(params: ModelParams, sub: str, n, branch) -> float:
    """Energy of ladder ``sub`` at quantum number ``n`` on branch ``branch``.

    ``n`` may be a real number; that is what :func:`invert_level` solves for.
    """
    c = _detuning(params, sub)
    root = math.sqrt(c * c + (n + 1) * params.g**2)
    return params.omega * (n + 0.5) + _branch(branch) * root


def isolated_levels(params: ModelParams) -> list[AnalyticLevel]:
    return [
        AnalyticLevel(params.lam, "I", -1, +1),
        AnalyticLevel(-params.lam, "II", -1, -1),
    ]


def _branch_minimum_n(params: ModelParams, c: float) -> float:
    # d/dn [omega n - sqrt(c^2 + (n+1) g^2)] = 0
    g2 = params.g**2
    if g2 == 0:
        return 0.0
    return max(0.0, (g2 / (2 * params.omega)) ** 2 / g2 - c * c / g2 - 1)


def enumerate_zhang(params: ModelParams, e_max: float, include_isolated: bool = False) -> list[AnalyticLevel]:
    """All ladder levels with energy <= e_max, sorted by energy."""
    if not math.isfinite(e_max):
        raise ValueError("e_max must be finite")
    out = []
    for sub in SUBSPECTRA:
        c = _detuning(params, sub)
        n_turn = _branch_minimum_n(params, c)
        n = 0
        while True:
            lower = zhang_level(params, sub, n, -1)
            if lower > e_max and n >= n_turn:
                break
            for b in BRANCHES:
                e = zhang_level(params, sub, n, b)
                if e <= e_max:
                    out.append(AnalyticLevel(e, sub, n, b))
            n += 1
    if include_isolated:
        out.extend(lv for lv in isolated_levels(params) if lv.energy <= e_max)
    return sorted(out)


def invert_level_roots(params: ModelParams, sub: str, branch, energy: float, allow_negative: bool = False) -> list[float]:
    """Every real n with zhang_level(params, sub, n, branch) == energy.

    Squaring ``energy - omega (n + 1/2) = branch * sqrt(...)`` gives

        omega^2 n^2 - (2 omega u + g^2) n + (u^2 - c^2 - g^2) = 0,  u = energy - omega/2,

    and a root belongs to the branch when ``u - omega n`` has the branch's sign.
    Negative roots are kept only with ``allow_negative``.
    """
    b = _branch(branch)
    w, g2 = params.omega, params.g**2
    c = _detuning(params, sub)
    u = energy - w / 2
    qa, qb, qc = w * w, -(2 * w * u + g2), u * u - c * c - g2
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        return []
    s = math.sqrt(disc)
    # numerically stable pair of roots
    q = -0.5 * (qb + math.copysign(s, qb)) if qb != 0 else 0.5 * s
    roots = {q / qa, qc / q} if q != 0 else {0.0}
    out = []
    snap = 1e-12 * max(1.0, abs(u) / w)
    for n in sorted(roots):
        if -snap < n < 0:
            n = 0.0  # rounding residue of an exact n = 0 root
        if not allow_negative and n < 0:
            continue
        if n <= -1:  # radicand c^2 + (n+1) g^2 may turn negative
            if c * c + (n + 1) * g2 < 0:
                continue
        resid = u - w * n
        if b * resid >= 0 or abs(resid) <= 1e-12 * max(1.0, abs(u)):
            out.append(n)
    return out


def invert_level(params: ModelParams, sub: str, branch, energy: float) -> Optional[float]:
    """Real n >= 0 placing ``energy`` on the given ladder branch, or None.

    The + branch is increasing in n, so its root is unique.  The - branch can
    dip for strong coupling; there the larger root (rising part) is returned.
    """
    roots = invert_level_roots(params, sub, branch, energy)
    return max(roots) if roots else None


def nearest_zhang(params: ModelParams, energy: float) -> tuple[AnalyticLevel, float]:
    """Closest ladder level to ``energy`` and its distance."""
    levels = enumerate_zhang(params, energy + 2 * params.omega)
    if not levels:
        raise ValueError(f"no ladder level lies below {energy + 2 * params.omega}")
    best = min(levels, key=lambda lv: abs(lv.energy - energy))
    return best, abs(best.energy - energy)
