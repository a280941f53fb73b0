"""Parameters and truncated Hamiltonian matrices for the quantum Rabi model.

The full Hamiltonian is

    H = omega a^dag a + g (a + a^dag) sigma_x + lambda sigma_z + epsilon sigma_x

acting on Fock levels 0..N-1 tensored with a spin-1/2.  Basis ordering is
interleaved, |0,dn>, |0,up>, |1,dn>, |1,up>, ..., and sigma_z |dn> = -|dn>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

DOWN = -1
UP = +1


class ParityBrokenError(ValueError):
    """Raised when a parity-resolved quantity is requested at epsilon != 0."""


class Parity(IntEnum):
    PLUS = 1
    MINUS = -1

    @classmethod
    def of_state(cls, m: int, spin: int) -> "Parity":
        """Parity (-1)^m * spin of the basis state |m, spin>."""
        return cls(spin if m % 2 == 0 else -spin)


@dataclass(frozen=True)
class ModelParams:
    omega: float = 1.0
    g: float = 0.0
    lam: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("omega", "g", "lam", "epsilon"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.g < 0:
            raise ValueError(f"g must be nonnegative, got {self.g}")

    def require_parity(self):
        if self.epsilon != 0:
            raise ParityBrokenError(
                f"parity broken: epsilon = {self.epsilon} != 0 mixes the two parity sectors"
            )


@dataclass(frozen=True)
class Truncation:
    """Number of retained Fock levels (0..n_max-1)."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"truncation needs an integer n_max >= 2, got {self.n_max}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TriBlock:
    """Real symmetric tridiagonal matrix of one parity sector."""

    diag: np.ndarray
    offdiag: np.ndarray
    parity: Parity
    params: ModelParams

    def __post_init__(self):
        object.__setattr__(self, "diag", _frozen(self.diag))
        object.__setattr__(self, "offdiag", _frozen(self.offdiag))
        if self.offdiag.shape != (max(len(self.diag) - 1, 0),):
            raise ValueError("offdiag must have length len(diag) - 1")

    @property
    def size(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class DenseSym:
    entries: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))
        n, m = self.entries.shape
        if n != m:
            raise ValueError("matrix must be square")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def basis_labels(trunc: Truncation) -> tuple:
    return tuple((m, s) for m in range(trunc.n_max) for s in (DOWN, UP))


def _index(m: int, spin: int) -> int:
    return 2 * m + (0 if spin == DOWN else 1)


def _spin_diagonal(params: ModelParams, trunc: Truncation) -> np.ndarray:
    return np.array([params.omega * m + params.lam * s for m, s in basis_labels(trunc)])


def _assemble(params: ModelParams, trunc: Truncation, couplings) -> DenseSym:
    # Each (i, j, value) is written to both triangles from the same float.
    h = np.diag(_spin_diagonal(params, trunc))
    for i, j, v in couplings:
        h[i, j] = v
        h[j, i] = v
    return DenseSym(h, basis_labels(trunc))


def _jc_couplings(params, trunc):
    # a sigma^+ + h.c.: |n+1,dn> <-> |n,up>
    for n in range(trunc.n_max - 1):
        yield _index(n + 1, DOWN), _index(n, UP), params.g * math.sqrt(n + 1)


def _ajc_couplings(params, trunc):
    # a sigma^- + h.c.: |n+1,up> <-> |n,dn>
    for n in range(trunc.n_max - 1):
        yield _index(n + 1, UP), _index(n, DOWN), params.g * math.sqrt(n + 1)


def build_full(params: ModelParams, trunc: Truncation) -> DenseSym:
    """Truncated matrix of the (asymmetric) Rabi Hamiltonian, dimension 2N."""

    def couplings():
        yield from _jc_couplings(params, trunc)
        yield from _ajc_couplings(params, trunc)
        if params.epsilon != 0:
            for m in range(trunc.n_max):
                yield _index(m, DOWN), _index(m, UP), params.epsilon

    return _assemble(params, trunc, couplings())


def build_jc(params: ModelParams, trunc: Truncation) -> DenseSym:
    """Jaynes-Cummings matrix; epsilon is ignored."""
    return _assemble(params, trunc, _jc_couplings(params, trunc))


def build_ajc(params: ModelParams, trunc: Truncation) -> DenseSym:
    """Anti-Jaynes-Cummings matrix; epsilon is ignored."""
    return _assemble(params, trunc, _ajc_couplings(params, trunc))


def build_parity_block(params: ModelParams, trunc: Truncation, parity: Parity) -> TriBlock:
    """Tridiagonal block of one parity sector.

    The sector with parity p is spanned by |n, s_n> with s_n = p (-1)^n, so
    the diagonal is omega n + p lambda (-1)^n and consecutive Fock levels are
    linked by g sqrt(n+1).
    """
    params.require_parity()
    p = Parity(parity)
    n = np.arange(trunc.n_max)
    diag = params.omega * n + p * params.lam * np.where(n % 2 == 0, 1.0, -1.0)
    offdiag = params.g * np.sqrt(n[:-1] + 1.0)
    return TriBlock(diag, offdiag, p, params)


def parity_permutation(trunc: Truncation) -> tuple[np.ndarray, np.ndarray]:
    """Indices into the full basis of the +1 and -1 sectors, ordered by Fock level."""
    plus, minus = [], []
    for m in range(trunc.n_max):
        for s in (DOWN, UP):
            (plus if Parity.of_state(m, s) == Parity.PLUS else minus).append(_index(m, s))
    return np.array(plus), np.array(minus)
