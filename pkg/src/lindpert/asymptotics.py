"""Time-average projector, constrained inverse and orthogonal stationary states."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotInRangeError, NumericalDegeneracyError, UnsupportedStructureError, ValidationError
from .linalg import DEFAULT_KERNEL_TOL, as_matrix, dagger, devectorize, expm, null_space, vectorize
from .model import Superop, combine, dual_matrix

__all__ = [
    "AveragingData",
    "time_average_projector",
    "time_average_map",
    "numerical_time_average_check",
    "constrained_inverse",
    "stationary_family",
    "orthogonal_states",
    "count_monotonicity_check",
    "conditional_expectation_check",
]

#: condition number of K_L^dag K above which the zero eigenvalue is deemed defective
MAX_KERNEL_CONDITION = 1e8
STATIONARITY_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-8
FAITHFUL_TOL = 1e-8
SUPPORT_TOL = 1e-8


@dataclass(frozen=True)
class AveragingData:
    """Spectral data of a generator's zero eigenvalue.

    ``g`` projects onto ``ker L`` along the other generalized eigenspaces,
    ``f = id - g``. ``kernel_basis`` is Hilbert-Schmidt orthonormal;
    ``dual_kernel_basis`` spans the invariant observables.
    """

    g: Superop
    f: Superop
    kernel_basis: tuple
    dual_kernel_basis: tuple
    stationary_states: tuple
    faithful: bool
    tol: float = DEFAULT_KERNEL_TOL
    inverse_matrix: np.ndarray = field(default=None, repr=False)

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel_basis)

    @property
    def kernel_columns(self) -> np.ndarray:
        return np.stack([vectorize(k) for k in self.kernel_basis], axis=1)


def time_average_projector(l: Superop, tol: float = DEFAULT_KERNEL_TOL) -> AveragingData:
    m = l.matrix
    d = l.dim
    right = null_space(m, tol)
    left = null_space(dagger(m), tol)
    if right.shape[1] != left.shape[1]:
        raise NumericalDegeneracyError(
            "left and right kernels have different dimensions",
            {"right": right.shape[1], "left": left.shape[1]},
        )
    if right.shape[1] == 0:
        raise NumericalDegeneracyError("generator has trivial kernel at this tolerance")
    overlap = dagger(left) @ right
    cond = np.linalg.cond(overlap)
    if not np.isfinite(cond) or cond > MAX_KERNEL_CONDITION:
        raise NumericalDegeneracyError(
            "ill-conditioned kernel overlap; zero eigenvalue looks defective",
            {"condition": float(cond)},
        )
    gm = right @ np.linalg.solve(overlap, dagger(left))
    g = Superop(d, gm, "projector")
    f = Superop(d, np.eye(d * d) - gm, "projector")

    aug = np.vstack([m, gm])
    inverse = np.linalg.pinv(aug)[:, : d * d]

    kernel = tuple(devectorize(right[:, i], d) for i in range(right.shape[1]))
    dual = dual_matrix(l)
    dual_kernel = null_space(dual.matrix, tol)
    dual_basis = tuple(devectorize(dual_kernel[:, i], d) for i in range(dual_kernel.shape[1]))

    states = orthogonal_states(m, right, d, strict=True)
    bary = sum(states) / len(states)
    faithful = bool(np.linalg.eigvalsh(0.5 * (bary + dagger(bary))).min() > FAITHFUL_TOL)
    return AveragingData(g, f, kernel, dual_basis, tuple(states), faithful, tol, inverse)


def _hermitian_basis(columns: np.ndarray, d: int) -> list[np.ndarray]:
    """Real-orthonormal Hermitian basis of a dagger-closed complex subspace."""
    k = columns.shape[1]
    reals = []
    for i in range(k):
        x = devectorize(columns[:, i], d)
        for h in (0.5 * (x + dagger(x)), -0.5j * (x - dagger(x))):
            v = vectorize(h)
            reals.append(np.concatenate([v.real, v.imag]))
    u, s, _ = np.linalg.svd(np.array(reals).T, full_matrices=False)
    rank = max(1, min(k, int(np.sum(s > 1e-8 * s[0]))))
    out = []
    for i in range(rank):
        v = u[: d * d, i] + 1j * u[d * d :, i]
        h = devectorize(v, d)
        out.append(0.5 * (h + dagger(h)))
    return out


def _support(x: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(x)
    keep = w > SUPPORT_TOL * max(abs(w).max(), 1e-300)
    return v[:, keep]


def _restrict(basis: np.ndarray, proj: np.ndarray, d: int) -> np.ndarray:
    """Columns of ``basis`` spanning elements ``x`` with ``x = P x P``."""
    if basis.shape[1] == 0:
        return basis
    c = np.eye(d * d) - np.kron(proj.T, proj)
    cb = c @ basis
    if np.abs(cb).max() <= SUPPORT_TOL:
        return basis
    _, s, vh = np.linalg.svd(cb, full_matrices=True)
    rank = int(np.sum(s > SUPPORT_TOL))
    coeffs = vh[rank:].conj().T
    if coeffs.shape[1] == 0:
        return basis[:, :0]
    q, _ = np.linalg.qr(basis @ coeffs)
    return q


def _residual(check: np.ndarray, x: np.ndarray) -> float:
    scale = max(1.0, float(np.linalg.norm(check, 2)))
    return float(np.linalg.norm(check @ vectorize(x))) / scale


def _minimal_state(check, basis, d, strict):
    """Stationary state of minimal support inside span(basis), by repeated
    positive/negative splitting of traceless Hermitian kernel elements."""
    while True:
        herm = _hermitian_basis(basis, d)
        traces = np.array([np.trace(h).real for h in herm])
        if len(herm) == 1:
            x = herm[0]
            tr = np.trace(x).real
            if abs(tr) < 1e-12:
                raise NumericalDegeneracyError("one-dimensional kernel element is traceless")
            sigma = x / tr
            sigma = 0.5 * (sigma + dagger(sigma))
            lam_min = float(np.linalg.eigvalsh(sigma).min())
            bad = lam_min < -STATIONARITY_TOL or _residual(check, sigma) > STATIONARITY_TOL
            if bad:
                if strict:
                    raise NumericalDegeneracyError(
                        "kernel element is not a stationary state",
                        {"min_eigenvalue": lam_min, "residual": _residual(check, sigma)},
                    )
                return None
            return sigma
        if np.abs(traces).max() < 1e-14:
            a = np.eye(len(herm))[0]
        else:
            a = np.linalg.svd(traces[None, :])[2][1]
        x = sum(ai * h for ai, h in zip(a, herm))
        x = x / np.linalg.norm(x)
        w, v = np.linalg.eigh(x)
        cut = SUPPORT_TOL * abs(w).max()
        pos, neg = v[:, w > cut], v[:, w < -cut]
        part = pos if pos.shape[1] <= neg.shape[1] else neg
        sign = 1.0 if part is pos else -1.0
        lam = w[w > cut] if sign > 0 else -w[w < -cut]
        piece = (part * lam) @ dagger(part)
        piece = piece / np.trace(piece).real
        if _residual(check, piece) > STATIONARITY_TOL:
            if strict:
                raise NumericalDegeneracyError(
                    "positive/negative part of a kernel element is not stationary",
                    {"residual": _residual(check, piece)},
                )
            return None
        proj = part @ dagger(part)
        restricted = _restrict(basis, proj, d)
        if restricted.shape[1] == 0:
            return None
        basis = restricted


def orthogonal_states(check: np.ndarray, basis: np.ndarray, d: int, strict: bool = True) -> list:
    """Greedy maximal family of mutually orthogonal states in ``span(basis)``.

    ``basis`` columns span a dagger-closed kernel of ``check``; each output
    is a unit-trace positive matrix annihilated by ``check``.
    """
    states = []
    remaining = np.eye(d, dtype=np.complex128)
    sub = basis
    while sub.shape[1] > 0:
        sigma = _minimal_state(check, sub, d, strict)
        if sigma is None:
            break
        states.append(sigma)
        supp = _support(sigma)
        w, v = np.linalg.eigh(remaining - supp @ dagger(supp))
        keep = v[:, w > 0.5]
        remaining = keep @ dagger(keep)
        if keep.shape[1] == 0:
            break
        sub = _restrict(basis, remaining, d)
    return states


def stationary_family(l: Superop, avg: AveragingData | None = None, tol: float = DEFAULT_KERNEL_TOL) -> list:
    """Mutually orthogonal stationary density matrices (one maximal family)."""
    if avg is not None:
        return list(avg.stationary_states)
    basis = null_space(l.matrix, tol)
    return orthogonal_states(l.matrix, basis, l.dim, strict=True)


def time_average_map(l: Superop, T: float, samples: int) -> np.ndarray:
    """Trapezoid approximation of ``(1/T) int_0^T exp(tL) dt`` as a matrix."""
    if T <= 0:
        raise ValidationError("T must be positive")
    if samples < 2:
        raise ValidationError("need at least two samples")
    n = l.matrix.shape[0]
    h = T / (samples - 1)
    step = expm(h * l.matrix)
    acc = 0.5 * np.eye(n, dtype=np.complex128)
    p = np.eye(n, dtype=np.complex128)
    for _ in range(samples - 2):
        p = step @ p
        acc += p
    p = step @ p
    acc += 0.5 * p
    return acc * (h / T)


def numerical_time_average_check(l: Superop, T: float, samples: int, avg: AveragingData | None = None) -> float:
    """Max entrywise deviation of the finite-T average from ``g``."""
    avg = avg or time_average_projector(l)
    return float(np.abs(time_average_map(l, T, samples) - avg.g.matrix).max())


def constrained_inverse(l: Superop, avg: AveragingData, y: np.ndarray, range_tol: float = 1e-9) -> np.ndarray:
    """Unique ``x`` with ``L[x] = y`` and ``G[x] = 0``; requires ``G[y] = 0``."""
    y = as_matrix(y, l.dim)
    vy = vectorize(y)
    scale = max(1.0, float(np.linalg.norm(vy)))
    leak = float(np.linalg.norm(avg.g.matrix @ vy))
    if leak > range_tol * scale:
        raise NotInRangeError(
            "right-hand side has a component in the kernel (not in the range of F)",
            {"kernel_component": leak},
        )
    x = avg.inverse_matrix @ vy
    res = float(np.linalg.norm(l.matrix @ x - vy))
    if res > 1e-9 * scale:
        raise NumericalDegeneracyError("constrained inverse residual too large", {"residual": res})
    return devectorize(x, l.dim)


def count_monotonicity_check(l0: Superop, l1: Superop, eps_grid: Sequence[float], tol: float = DEFAULT_KERNEL_TOL) -> list:
    """Rows ``{epsilon, n, n0, ok}`` with ``n`` the orthogonal stationary count."""
    n0 = len(stationary_family(l0, tol=tol))
    rows = [{"epsilon": 0.0, "n": n0, "n0": n0, "ok": True}]
    for eps in eps_grid:
        n = len(stationary_family(combine(l0, l1, eps), tol=tol))
        rows.append({"epsilon": float(eps), "n": n, "n0": n0, "ok": n <= n0})
    return rows


def conditional_expectation_check(l: Superop, avg: AveragingData, samples: int = 8, seed: int = 0) -> dict:
    """Max violation of ``G^T[Y1 X Y2] = Y1 G^T[X] Y2`` over sampled
    invariant observables ``Y1, Y2`` and random ``X``."""
    if not avg.faithful:
        raise UnsupportedStructureError("no faithful stationary state; the dual average is not a conditional expectation")
    d = l.dim
    gt = dual_matrix(avg.g)
    rng = np.random.default_rng(seed)
    basis = avg.dual_kernel_basis

    def sample_y():
        c = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        return sum(ci * b for ci, b in zip(c, basis))

    pairs = [(np.eye(d), np.eye(d))] + [(sample_y(), sample_y()) for _ in range(samples)]
    worst = 0.0
    for y1, y2 in pairs:
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        lhs = gt.apply(y1 @ x @ y2)
        rhs = y1 @ gt.apply(x) @ y2
        scale = max(1.0, float(np.abs(y1).max() * np.abs(x).max() * np.abs(y2).max()))
        worst = max(worst, float(np.abs(lhs - rhs).max()) / scale)
    return {"max_violation": worst, "pairs": len(pairs), "dual_kernel_dim": len(basis)}
