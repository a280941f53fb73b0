"""Bargmann-space checks of the Juddian (quasi-exact) eigenstates.

Conventions (omega = 1 frame):

* A Fock state |m> is the monomial z^m / sqrt(m!), so a function with power
  series sum a_m z^m has Fock amplitudes a_m sqrt(m!) and Bargmann norm
  sum |a_m|^2 m!.
* The two components (phi1, phi2) are amplitudes on the sigma_x eigenstates
  |+> = (|up> + |dn>)/sqrt(2) and |-> = (|up> - |dn>)/sqrt(2), in which
  H psi = E psi reads

      (z + g) phi1' + g z phi1 + lambda phi2 = E phi1
      (z - g) phi2' - g z phi2 + lambda phi1 = E phi2

  Hence alpha_m = (a1_m - a2_m) sqrt(m!/2), beta_m = (a1_m + a2_m) sqrt(m!/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

CONSTRAINT_TOL = 1e-12


def _factorials(m_max: int) -> np.ndarray:
    # float(m!) is exact to 22! and correctly rounded to 170!; inf past that
    return np.array([float(math.factorial(m)) if m <= 170 else math.inf for m in range(m_max + 1)])


def _weighted_squares(a: np.ndarray) -> np.ndarray:
    """a_m^2 m!, in log space where m! overflows."""
    small = min(len(a), 171)
    out = np.zeros(len(a))
    out[:small] = a[:small] ** 2 * _factorials(small - 1)
    m = np.arange(small, len(a))
    nz = a[small:] != 0
    lg = np.array([math.lgamma(k + 1) for k in m[nz]])
    out[small:][nz] = np.exp(2 * np.log(np.abs(a[small:][nz])) + lg)
    return out


@dataclass(frozen=True)
class PolyExp:
    """f(z) = (sum_j poly[j] z^j) * exp(rate z)."""

    poly: tuple
    rate: float = 0.0
    label: int = 0

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly) or (0.0,))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex if np.iscomplexobj(z) else float)
        return np.polynomial.polynomial.polyval(z, self.poly) * np.exp(self.rate * z)

    def _like(self, poly) -> "PolyExp":
        return PolyExp(poly, self.rate, self.label)

    def derivative(self) -> "PolyExp":
        p = np.array(self.poly)
        dp = np.polynomial.polynomial.polyder(p) if len(p) > 1 else np.zeros(1)
        return self._like(np.polynomial.polynomial.polyadd(dp, self.rate * p))

    def times_z(self) -> "PolyExp":
        return self._like((0.0,) + self.poly)

    def scale(self, c: float) -> "PolyExp":
        return self._like([c * x for x in self.poly])

    def __add__(self, other: "PolyExp") -> "PolyExp":
        if other.rate != self.rate:
            raise ValueError("PolyExp sums need equal exponential rates")
        return self._like(np.polynomial.polynomial.polyadd(self.poly, other.poly))

    def __sub__(self, other: "PolyExp") -> "PolyExp":
        return self + other.scale(-1.0)

    def series(self, m_max: int) -> np.ndarray:
        """Power-series coefficients a_0..a_{m_max} of f."""
        e = np.empty(m_max + 1)  # rate^k / k!
        e[0] = 1.0
        for k in range(1, m_max + 1):
            e[k] = e[k - 1] * self.rate / k
        a = np.zeros(m_max + 1)
        for j, c in enumerate(self.poly):
            if j <= m_max:
                a[j:] += c * e[: m_max + 1 - j]
        return a

    def fock(self, m_max: int) -> np.ndarray:
        """Fock amplitudes a_m sqrt(m!) for m = 0..m_max."""
        a = self.series(m_max)
        return np.copysign(np.sqrt(_weighted_squares(a)), a)


@dataclass(frozen=True)
class JuddPoint:
    params: ModelParams
    energy: float
    constraint_residual: float


def constraint_residual(lam: float, g: float, omega: float = 1.0) -> float:
    """lambda^2 + 4 g^2 - omega^2; zero on the first Juddian curve."""
    return lam * lam + 4 * g * g - omega * omega


def to_unit_frame(params: ModelParams) -> ModelParams:
    """Rescale all couplings by omega; energies scale the same way."""
    w = params.omega
    return ModelParams(1.0, params.g / w, params.lam / w, params.epsilon / w)


def from_unit_frame(energy: float, omega: float) -> float:
    return energy * omega


def judd_candidate(lam: float, g: float) -> tuple[PolyExp, PolyExp, JuddPoint]:
    """Closed-form eigenfunction on lambda^2 + 4 g^2 = 1 with energy 1 - g^2."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    res = constraint_residual(lam, g)
    if abs(res) > CONSTRAINT_TOL:
        raise ValueError(f"constraint lambda^2 + 4 g^2 = 1 violated by {res:.3e}")
    phi1 = PolyExp((lam + 2 * g * g / lam, 2 * g / lam), -g, 1)
    phi2 = PolyExp((1.0,), -g, 2)
    return phi1, phi2, JuddPoint(ModelParams(1.0, g, lam), 1.0 - g * g, res)


def judd_candidate_unchecked(lam: float, g: float) -> tuple[PolyExp, PolyExp]:
    """Same functional form without the constraint check (for negative tests)."""
    return (
        PolyExp((lam + 2 * g * g / lam, 2 * g / lam), -g, 1),
        PolyExp((1.0,), -g, 2),
    )


def ode_residuals(phi1: PolyExp, phi2: PolyExp, g: float, lam: float, energy: float) -> tuple[PolyExp, PolyExp]:
    """Left minus right side of both Bargmann equations, as PolyExp."""
    r1 = (
        phi1.derivative().times_z()
        + phi1.derivative().scale(g)
        + phi1.times_z().scale(g)
        + phi2.scale(lam)
        - phi1.scale(energy)
    )
    r2 = (
        phi2.derivative().times_z()
        - phi2.derivative().scale(g)
        - phi2.times_z().scale(g)
        + phi1.scale(lam)
        - phi2.scale(energy)
    )
    return r1, r2


@dataclass(frozen=True)
class OdeResidual:
    max_abs: float  # over the sample points
    max_coeff: float  # largest polynomial coefficient of either residual
    r1: PolyExp
    r2: PolyExp

    def vanishes(self, tol: float = 1e-12) -> bool:
        return self.max_coeff <= tol


def ode_residual(phi1: PolyExp, phi2: PolyExp, params: ModelParams, energy: float, z_samples=(0.0,)) -> OdeResidual:
    """Evaluate the residuals on samples and on their coefficients.

    A residual of the form poly * exp is identically zero iff all of its
    polynomial coefficients vanish, which is the check that matters; the
    sampled maximum is reported for reference.
    """
    if params.omega != 1.0:
        raise ValueError("Bargmann equations are written for omega = 1; use to_unit_frame")
    r1, r2 = ode_residuals(phi1, phi2, params.g, params.lam, energy)
    z = np.asarray(z_samples, dtype=float)
    max_abs = float(max(np.max(np.abs(r1(z))), np.max(np.abs(r2(z)))))
    max_coeff = float(max(np.max(np.abs(r1.poly)), np.max(np.abs(r2.poly))))
    return OdeResidual(max_abs, max_coeff, r1, r2)


def bargmann_norm_with_bound(f: PolyExp, rel_stop: float = 1e-18, patience: int = 5) -> tuple[float, float, int]:
    """Bargmann norm, an upper bound on the neglected tail, and the cutoff used.

    Terms m! a_m^2 are summed until ``patience`` consecutive terms fall below
    ``rel_stop`` times the running sum.  Past the polynomial degree d,
    |a_m| <= sum_j |c_j| |mu|^(m-j) / (m-j)!, and the square root of m! times
    each of those pieces shrinks by at most q = |mu| sqrt(m+1) / (m+1-d) per
    step, so the tail is below t_{M+1} / (1 - q^2).
    """
    if not any(f.poly):
        return 0.0, 0.0, 0
    deg = len(f.poly) - 1
    mu = abs(f.rate)
    chunk = 64
    m_max = chunk
    while True:
        a = f.series(m_max)
        terms = _weighted_squares(a)
        total = 0.0
        quiet = 0
        cutoff = None
        for m, t in enumerate(terms):
            total += t
            if m > deg and t <= rel_stop * total:
                quiet += 1
                if quiet >= patience:
                    cutoff = m
                    break
            else:
                quiet = 0
        if cutoff is not None:
            break
        m_max *= 2
    M = cutoff
    q = mu * math.sqrt(M + 2) / (M + 2 - deg)
    if q >= 1:
        return total, math.inf, M
    piece = sum(
        abs(c) * math.exp((M + 1 - j) * math.log(mu) + 0.5 * math.lgamma(M + 2) - math.lgamma(M + 2 - j))
        for j, c in enumerate(f.poly)
        if c != 0
    ) if mu > 0 else 0.0
    return total, piece * piece / (1 - q * q), M


def bargmann_norm(f: PolyExp) -> float:
    """sum_m |a_m|^2 m! over the power series of f (finite for every PolyExp)."""
    return bargmann_norm_with_bound(f)[0]


@dataclass(frozen=True)
class DivergenceTable:
    z: np.ndarray
    abs_f: np.ndarray
    norm: float


def real_axis_divergence_demo(f: PolyExp, z_min: float = -10.0) -> DivergenceTable:
    """|f(z)| at z = 0, -1, ..., z_min next to the (finite) Bargmann norm."""
    if f.rate >= 0:
        raise ValueError("the demo needs a decaying rate (exp_rate < 0)")
    z = np.arange(0.0, math.floor(z_min) - 0.5, -1.0)
    return DivergenceTable(z, np.abs(f(z)), bargmann_norm(f))


def fock_coefficients(phi1: PolyExp, phi2: PolyExp, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(alpha_m, beta_m) on |m,dn>, |m,up> from the sigma_x-frame pair."""
    f1, f2 = phi1.fock(m_max), phi2.fock(m_max)
    return (f1 - f2) / math.sqrt(2), (f1 + f2) / math.sqrt(2)


@dataclass(frozen=True)
class JuddReport:
    lam: float
    g: float
    energy: float
    constraint_residual: float
    found_in_parity_plus: bool
    found_in_parity_minus: bool
    miller_defect: float
    nearest_zhang_distance: float
    ode_residual_max: float
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def judd_cross_check(lam: float, g: float, eig_tol: float = 1e-8, defect_tol: float = 1e-6) -> JuddReport:
    """Full chain for one Juddian point.

    (a) 1 - g^2 is an eigenvalue of both parity blocks, (b) the Miller defect
    vanishes there, (c) it is not on any JC/AJC ladder, (d) the closed-form
    Bargmann pair solves the equations exactly.
    """
    from .analytic import nearest_zhang
    from .eigensolve import converge_spectrum
    from .model import Parity
    from .recurrence import miller_defect

    phi1, phi2, point = judd_candidate(lam, g)
    params, energy = point.params, point.energy
    spec, _ = converge_spectrum(params, k=4)
    found = {
        p: bool(np.min(np.abs(spec.sector(p) - energy)) < eig_tol) for p in Parity
    }
    defect = miller_defect(params, energy)
    _, dist = nearest_zhang(params, energy)
    ode = ode_residual(phi1, phi2, params, energy, np.linspace(-5, 5, 11))
    checks = {
        "eigenvalue_both_parities": found[Parity.PLUS] and found[Parity.MINUS],
        "miller_defect": defect < defect_tol,
        "not_on_ladder": dist > 0.01,
        "ode_identically_zero": ode.vanishes(1e-12),
    }
    return JuddReport(
        lam, g, energy, point.constraint_residual,
        found[Parity.PLUS], found[Parity.MINUS],
        defect, dist, ode.max_coeff, checks,
    )
