"""Dense complex matrix primitives.

All matrices are plain ``numpy`` complex arrays. Superoperators act on
column-stacked vectors, ``v[j*d + i] = x[i, j]``, so that

    vec(A @ X @ B) == kron(B.T, A) @ vec(X)

and the map ``X -> h X h^dag`` has matrix ``kron(h.conj(), h)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "BipartiteDims",
    "DEFAULT_KERNEL_TOL",
    "as_matrix",
    "is_hermitian",
    "is_density",
    "kron",
    "vectorize",
    "devectorize",
    "partial_transpose",
    "partial_trace",
    "null_space",
    "expm",
    "hs_inner",
    "dagger",
]

#: singular values below ``DEFAULT_KERNEL_TOL * sigma_max`` count as zero
DEFAULT_KERNEL_TOL = 1e-10


@dataclass(frozen=True)
class BipartiteDims:
    """Tensor split ``C^d = C^d1 (x) C^d2`` with basis ``|a b> -> a*d2 + b``."""

    d1: int
    d2: int

    def __post_init__(self):
        if int(self.d1) < 1 or int(self.d2) < 1:
            raise ValueError(f"bipartite dims must be positive, got ({self.d1}, {self.d2})")

    @property
    def dim(self) -> int:
        return self.d1 * self.d2

    def check(self, x: np.ndarray) -> None:
        if x.shape != (self.dim, self.dim):
            raise ValueError(
                f"matrix of shape {x.shape} does not factor as {self.d1}x{self.d2}"
            )


def as_matrix(x, dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a square complex128 array, validating the shape."""
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got {m.shape}")
    return m


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(x).T


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt product ``Tr(a^dag b)``."""
    return complex(np.vdot(a, b))


def is_hermitian(x: np.ndarray, tol: float = 1e-12) -> bool:
    x = np.asarray(x)
    return bool(np.max(np.abs(x - dagger(x)), initial=0.0) <= tol)


def is_density(x: np.ndarray, tol: float = 1e-10) -> bool:
    """Hermitian, eigenvalues >= -tol and unit trace within tol."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return False
    if not is_hermitian(x, tol):
        return False
    if abs(np.trace(x) - 1.0) > tol:
        return False
    herm = 0.5 * (x + dagger(x))
    return bool(np.linalg.eigvalsh(herm).min() >= -tol)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def vectorize(x: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    return np.asarray(x, dtype=np.complex128).reshape(-1, order="F")


def devectorize(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`; ``dim`` defaults to ``sqrt(len(v))``."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if v.size != dim * dim:
        raise ValueError(f"vector of length {v.size} cannot be a {dim}x{dim} matrix")
    return v.reshape(dim, dim, order="F")


def partial_transpose(x: np.ndarray, dims: BipartiteDims, party: int = 2) -> np.ndarray:
    """Transpose the indices of one tensor factor (``party`` is 1 or 2)."""
    x = as_matrix(x)
    dims.check(x)
    t = x.reshape(dims.d1, dims.d2, dims.d1, dims.d2)
    if party == 1:
        t = t.transpose(2, 1, 0, 3)
    elif party == 2:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"party must be 1 or 2, got {party}")
    return t.reshape(dims.dim, dims.dim)


def partial_trace(x: np.ndarray, dims: BipartiteDims, party: int = 2) -> np.ndarray:
    """Trace out ``party``; the result lives on the other factor."""
    x = as_matrix(x)
    dims.check(x)
    t = x.reshape(dims.d1, dims.d2, dims.d1, dims.d2)
    if party == 2:
        return np.einsum("ajbj->ab", t)
    if party == 1:
        return np.einsum("iaib->ab", t)
    raise ValueError(f"party must be 1 or 2, got {party}")


def null_space(m: np.ndarray, tol: float = DEFAULT_KERNEL_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the right null space of ``m``.

    A singular direction counts as null when its singular value is at most
    ``tol * sigma_max`` (or ``tol * scale`` when ``scale`` is given, which
    keeps roundoff-level matrices from looking full rank). The zero matrix
    has the full standard basis as null space. Returns an array of shape
    ``(ncols, k)``; ``k`` may be 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    n = m.shape[1]
    if m.size == 0 or not np.any(m):
        return np.eye(n, dtype=np.complex128)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    ref = s[0] if scale is None else float(scale)
    if ref == 0.0:
        return np.eye(n, dtype=np.complex128)
    rank = int(np.sum(s > tol * ref))
    return vh[rank:].conj().T


def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with a Pade core)."""
    return scipy.linalg.expm(np.asarray(m, dtype=np.complex128))
