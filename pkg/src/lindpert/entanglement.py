"""Partial-transposition tests for stationary states of bipartite systems.

A negative eigenvalue of the partial transpose certifies entanglement.
A positive partial transpose decides nothing in general, so the verdict
is then ``"ppt-undecided"``, never "separable".
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg import BipartiteDims, as_matrix, dagger, is_density, partial_transpose

__all__ = [
    "EntanglementReport",
    "ppt_test",
    "witness_expectation",
    "total_energies",
    "first_order_state",
    "first_order_witness",
    "separability_margin",
]

PPT_TOL = 1e-10


@dataclass(frozen=True)
class EntanglementReport:
    min_pt_eigenvalue: float
    negativity: float
    verdict: str
    witness_vector: np.ndarray | None = field(default=None, repr=False)
    first_order_value: float | None = None
    pt_eigenvalues: np.ndarray | None = field(default=None, repr=False)
    party: int = 2

    @property
    def entangled(self) -> bool:
        return self.verdict == "entangled"


def _density(rho, dims: BipartiteDims) -> np.ndarray:
    try:
        rho = as_matrix(rho)
        dims.check(rho)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if not is_density(rho, 1e-9):
        raise ValidationError("input is not a density matrix (Hermitian, positive, unit trace)")
    return 0.5 * (rho + dagger(rho))


def ppt_test(rho: np.ndarray, dims: BipartiteDims, tol: float = PPT_TOL, party: int = 2) -> EntanglementReport:
    rho = _density(rho, dims)
    pt = partial_transpose(rho, dims, party)
    w, v = np.linalg.eigh(0.5 * (pt + dagger(pt)))
    lam_min = float(w[0])
    neg = float(np.sum(-w[w < -tol]))
    if lam_min < -tol:
        return EntanglementReport(lam_min, neg, "entangled", v[:, 0].copy(), None, w, party)
    return EntanglementReport(lam_min, 0.0, "ppt-undecided", None, None, w, party)


def witness_expectation(rho: np.ndarray, phi: np.ndarray, dims: BipartiteDims, party: int = 2) -> float:
    """``<phi| rho^Gamma |phi>`` for a (not necessarily positive) Hermitian ``rho``."""
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    pt = partial_transpose(as_matrix(rho), dims, party)
    return float(np.real(np.vdot(phi, pt @ phi)))


def total_energies(e1, e2) -> np.ndarray:
    """Energies of ``H1 (x) 1 + 1 (x) H2`` in the product basis ``|a b>``."""
    return np.add.outer(np.asarray(e1, dtype=float), np.asarray(e2, dtype=float)).reshape(-1)


def first_order_state(psi, energies, epsilon: float, tol: float = 1e-12) -> np.ndarray:
    """``rho_0 + eps * rho_1`` for ``L = -i[H, .] + eps (Tr(.)|psi><psi| - .)``.

    ``rho_0 = sum |psi_j|^2 |j><j|`` and
    ``rho_1 = -i sum_{j != k} psi_j psi_k^* / (E_j - E_k) |j><k|``,
    with ``|j>`` the eigenbasis of ``H`` and ``energies`` its eigenvalues.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    e = np.asarray(energies, dtype=float).reshape(-1)
    if psi.size != e.size:
        raise ValidationError(f"psi has {psi.size} entries but {e.size} energies were given")
    if abs(np.vdot(psi, psi) - 1.0) > 1e-10:
        raise ValidationError("psi must be normalized")
    coh = np.outer(psi, psi.conj())
    omega = e[:, None] - e[None, :]
    off = ~np.eye(e.size, dtype=bool)
    resonant = off & (np.abs(omega) <= tol) & (np.abs(coh) > tol)
    if resonant.any():
        j, k = map(int, np.argwhere(resonant)[0])
        raise ValidationError(f"degenerate energies E_{j} = E_{k} with psi_{j} psi_{k}^* != 0")
    rho1 = np.zeros_like(coh)
    safe = off & ~resonant & (np.abs(omega) > tol)
    rho1[safe] = -1j * coh[safe] / omega[safe]
    rho = np.diag(np.abs(psi) ** 2).astype(np.complex128) + epsilon * rho1
    return 0.5 * (rho + dagger(rho))


def first_order_witness(psi, phi, e1, e2, indices, party: int = 2, tol: float = 1e-12) -> float:
    """Coefficient of ``eps`` in ``<phi| rho(eps)^Gamma |phi>``.

    Hypotheses: ``psi`` vanishes on ``|a1 b1>`` and ``|a2 b2>`` with
    ``a1 != a2`` and ``b1 != b2``; ``phi`` lives on their span. Then the
    zeroth order vanishes and the value is ``2 Im(w) / (E_{a2 b1} - E_{a1 b2})``
    with ``w = phi_{a1b1} phi^*_{a2b2} psi_{a2b1} psi^*_{a1b2}`` when the
    second party is transposed (``phi`` conjugated for the first party).
    """
    e1 = np.asarray(e1, dtype=float).reshape(-1)
    e2 = np.asarray(e2, dtype=float).reshape(-1)
    d1, d2 = e1.size, e2.size
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    if psi.size != d1 * d2 or phi.size != d1 * d2:
        raise ValidationError(f"psi and phi must have {d1 * d2} entries")
    a1, b1, a2, b2 = (int(i) for i in indices)
    if not (0 <= a1 < d1 and 0 <= a2 < d1 and 0 <= b1 < d2 and 0 <= b2 < d2):
        raise ValidationError(f"indices {indices} out of range for dims ({d1}, {d2})")
    if a1 == a2 or b1 == b2:
        raise ValidationError("need a1 != a2 and b1 != b2")

    def ix(a, b):
        return a * d2 + b

    p11, p22 = ix(a1, b1), ix(a2, b2)
    if abs(psi[p11]) > tol or abs(psi[p22]) > tol:
        raise ValidationError("psi must vanish on |a1 b1> and |a2 b2>")
    outside = np.delete(phi, [p11, p22])
    if outside.size and np.abs(outside).max() > tol:
        raise ValidationError("phi must be supported on span{|a1 b1>, |a2 b2>}")
    delta = (e1[a2] + e2[b1]) - (e1[a1] + e2[b2])
    if abs(delta) <= tol:
        raise ValidationError("resonant energies: E_{a2 b1} = E_{a1 b2}")
    cross = psi[ix(a2, b1)] * np.conj(psi[ix(a1, b2)])
    if party == 2:
        w = phi[p11] * np.conj(phi[p22]) * cross
    elif party == 1:
        w = np.conj(phi[p11]) * phi[p22] * cross
    else:
        raise ValidationError(f"party must be 1 or 2, got {party}")
    return float(2.0 * w.imag / delta)


def separability_margin(rho: np.ndarray, dims: BipartiteDims, tol: float = PPT_TOL) -> dict:
    """Heuristic interiority proxy.

    Combines the partial-transpose margin ``lambda_min(rho^Gamma) - tol``
    with the distance to ``I/d`` relative to the radius ``1/sqrt(d(d-1))``
    of the Hilbert-Schmidt ball of separable states around it. A positive
    ``margin`` is evidence for, not proof of, an interior separable state.
    """
    rho = _density(rho, dims)
    d = dims.dim
    pt = partial_transpose(rho, dims)
    lam_min = float(np.linalg.eigvalsh(0.5 * (pt + dagger(pt)))[0])
    radius = 1.0 / np.sqrt(d * (d - 1)) if d > 1 else np.inf
    dist = float(np.linalg.norm(rho - np.eye(d) / d))
    pt_margin = lam_min - tol
    ball_margin = float(radius - dist)
    return {
        "pt_margin": pt_margin,
        "ball_radius": float(radius),
        "distance_to_maximally_mixed": dist,
        "ball_margin": ball_margin,
        "margin": min(pt_margin, ball_margin),
        "proxy": True,
    }
