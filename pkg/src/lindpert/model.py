"""Lindblad generators as explicit superoperator matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .errors import ValidationError
from .linalg import as_matrix, dagger, devectorize, expm, vectorize

__all__ = [
    "LindbladSpec",
    "Superop",
    "build_generator",
    "build_dual",
    "combine",
    "evolve",
    "dual_matrix",
    "swap_matrix",
]

HERMITICITY_TOL = 1e-12
KINDS = ("generator", "dual", "projector", "inverse", "propagator")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian plus jump operators, ``-i[H, x] + sum_a D_{h_a}[x]``.

    Jumps are taken as given (no normalization). A Hamiltonian that is not
    Hermitian to 1e-12 is rejected instead of silently symmetrized.
    """

    hamiltonian: np.ndarray
    jumps: tuple = ()
    label: str = ""

    def __post_init__(self):
        try:
            h = as_matrix(self.hamiltonian)
        except ValueError as exc:
            raise ValidationError(f"hamiltonian: {exc}") from None
        scale = max(1.0, float(np.max(np.abs(h))))
        dev = float(np.max(np.abs(h - dagger(h))))
        if dev > HERMITICITY_TOL * scale:
            raise ValidationError(f"hamiltonian is not Hermitian (max |H - H^dag| = {dev:.3e})")
        jumps = []
        for n, j in enumerate(self.jumps):
            try:
                jumps.append(_frozen(as_matrix(j, h.shape[0])))
            except ValueError as exc:
                raise ValidationError(f"jump {n}: {exc}") from None
        object.__setattr__(self, "hamiltonian", _frozen(h))
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @classmethod
    def zero(cls, dim: int, label: str = "zero") -> "LindbladSpec":
        return cls(np.zeros((dim, dim)), (), label)

    def jump_array(self) -> np.ndarray:
        if not self.jumps:
            return np.zeros((0, self.dim, self.dim), dtype=np.complex128)
        return np.stack(self.jumps)


@dataclass(frozen=True)
class Superop:
    """A ``d^2 x d^2`` matrix acting on column-stacked ``d x d`` matrices."""

    dim: int
    matrix: np.ndarray = field(repr=False)
    kind: str = "generator"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        d2 = self.dim * self.dim
        if m.shape != (d2, d2):
            raise ValidationError(f"superoperator for dim {self.dim} must be {d2}x{d2}, got {m.shape}")
        if self.kind not in KINDS:
            raise ValidationError(f"unknown superoperator kind {self.kind!r}")
        object.__setattr__(self, "matrix", _frozen(m))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return devectorize(self.matrix @ vectorize(x), self.dim)

    __call__ = apply

    def compose(self, other: "Superop", kind: str | None = None) -> "Superop":
        """``self after other``."""
        return Superop(self.dim, self.matrix @ other.matrix, kind or self.kind)


def build_generator(spec: LindbladSpec) -> Superop:
    m = _backend.kernels.lindblad_superop(spec.hamiltonian, spec.jump_array())
    return Superop(spec.dim, m, "generator")


def build_dual(spec: LindbladSpec) -> Superop:
    """Heisenberg-picture generator ``i[H, X] + sum_a (h^dag X h - {h^dag h, X}/2)``."""
    d = spec.dim
    eye = np.eye(d)
    h0 = spec.hamiltonian
    m = 1j * (np.kron(eye, h0) - np.kron(h0.T, eye))
    for h in spec.jumps:
        k = dagger(h) @ h
        m = m + np.kron(h.T, dagger(h)) - 0.5 * np.kron(eye, k) - 0.5 * np.kron(k.T, eye)
    return Superop(d, m, "dual")


def swap_matrix(dim: int) -> np.ndarray:
    """Permutation with ``swap @ vec(X) == vec(X.T)``."""
    perm = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            perm[j * dim + i, i * dim + j] = 1.0
    return perm


def dual_matrix(op: Superop, kind: str = "dual") -> Superop:
    """Trace-pairing dual: ``Tr(op[r] X) == Tr(r dual[X])``."""
    p = swap_matrix(op.dim)
    return Superop(op.dim, p @ op.matrix.T @ p, kind)


def combine(l0: Superop, l1: Superop, epsilon: float) -> Superop:
    if l0.dim != l1.dim:
        raise ValidationError(f"dimension mismatch: {l0.dim} vs {l1.dim}")
    return Superop(l0.dim, l0.matrix + epsilon * l1.matrix, l0.kind)


def propagator(l: Superop, t: float) -> Superop:
    if t < 0:
        raise ValidationError("time must be non-negative")
    return Superop(l.dim, expm(t * l.matrix), "propagator")


def evolve(l: Superop, rho: np.ndarray, t: float | Sequence[float]) -> np.ndarray:
    """``exp(t L)[rho]``; a sequence of times returns a stacked array."""
    rho = as_matrix(rho, l.dim)
    if np.ndim(t) == 0:
        return propagator(l, float(t)).apply(rho)
    return np.stack([propagator(l, float(s)).apply(rho) for s in t])
