"""First-order spectral analysis of ``L_eps = -i[H, .] + eps * L1``.

For a Hamiltonian ``L0`` with simple spectrum the matrix units
``|j><k|`` of the energy basis are eigenvectors with eigenvalues
``-i(E_j - E_k)``. To first order the perturbation shifts them by
``eps * eta_jk`` with ``eta_jk = <j| L1[|j><k|] |k>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import NumericalDegeneracyError, UnsupportedStructureError
from .linalg import dagger
from .model import LindbladSpec, Superop, build_generator, combine

__all__ = [
    "FirstOrderShifts",
    "StabilityReport",
    "energy_basis",
    "first_order_shifts",
    "obstruction_subsets",
    "obstruction_scan",
    "exact_spectrum",
    "eigenvalue_shift_check",
    "stability_report",
]

#: relative spacing below which two energies count as degenerate
DEGENERACY_TOL = 1e-8
SCAN_TOL = 1e-10
MAX_SCAN_DIM = 16
SPECTRUM_TOL = 1e-8


def energy_basis(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hamiltonian with simple spectrum."""
    e, u = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(e).max()))
    if len(e) > 1 and float(np.diff(e).min()) <= DEGENERACY_TOL * scale:
        raise UnsupportedStructureError(
            "Hamiltonian spectrum is degenerate; energy-basis formulas do not apply",
            {"min_gap": float(np.diff(e).min())},
        )
    return e, u


@dataclass(frozen=True)
class FirstOrderShifts:
    """Shifts ``eta_jk`` of the off-diagonal eigenvalues (diagonal entries are NaN).

    ``bound`` holds ``-1/2 sum_a |<j|h_a|j> - <k|h_a|k>|^2``, which always
    dominates ``Re eta_jk``; ``literal_bound`` is the same expression with
    the second diagonal entry conjugated.
    """

    energies: np.ndarray
    basis: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    literal_bound: np.ndarray = field(repr=False)

    @property
    def pairs(self):
        d = len(self.energies)
        return [(j, k) for j in range(d) for k in range(d) if j != k]

    @property
    def worst_real_part(self) -> float:
        return max((float(self.eta[j, k].real) for j, k in self.pairs), default=float("-inf"))

    def bound_violation(self, literal: bool = False) -> float:
        """``max(Re eta_jk - bound_jk)``; non-positive means the bound holds."""
        b = self.literal_bound if literal else self.bound
        return max((float(self.eta[j, k].real - b[j, k]) for j, k in self.pairs), default=float("-inf"))


def first_order_shifts(spec0: LindbladSpec, l1spec: LindbladSpec) -> FirstOrderShifts:
    e, u = energy_basis(spec0.hamiltonian)
    d = len(e)
    jumps = [dagger(u) @ h @ u for h in l1spec.jumps]
    h1 = dagger(u) @ l1spec.hamiltonian @ u
    eta = np.full((d, d), np.nan, dtype=np.complex128)
    bound = np.full((d, d), np.nan)
    literal = np.full((d, d), np.nan)
    diag_h = np.array([np.diag(h) for h in jumps]).reshape(-1, d)
    diag_k = np.real(sum((np.diag(dagger(h) @ h) for h in jumps), np.zeros(d)))
    for j in range(d):
        for k in range(d):
            if j == k:
                continue
            a, b = diag_h[:, j], diag_h[:, k]
            eta[j, k] = (
                -1j * (h1[j, j] - h1[k, k])
                + np.sum(a * np.conj(b))
                - 0.5 * (diag_k[j] + diag_k[k])
            )
            bound[j, k] = -0.5 * float(np.sum(np.abs(a - b) ** 2))
            literal[j, k] = -0.5 * float(np.sum(np.abs(a - np.conj(b)) ** 2))
    return FirstOrderShifts(e, u, eta, bound, literal)


def obstruction_subsets(spec: LindbladSpec, tol: float = SCAN_TOL) -> list[tuple[int, ...]]:
    """Proper nonempty subsets ``S`` of the energy basis whose projection
    commutes with every jump and compresses each one to a scalar."""
    if spec.dim > MAX_SCAN_DIM:
        raise UnsupportedStructureError(f"subset scan limited to d <= {MAX_SCAN_DIM}, got {spec.dim}")
    _, u = energy_basis(spec.hamiltonian)
    d = spec.dim
    jumps = np.array([dagger(u) @ h @ u for h in spec.jumps], dtype=np.complex128).reshape(-1, d, d)
    masks = _backend.kernels.scan_projections(jumps, float(tol))
    return [tuple(i for i in range(d) if (int(m) >> i) & 1) for m in masks]


def obstruction_scan(spec: LindbladSpec, tol: float = SCAN_TOL) -> list[np.ndarray]:
    """Projections ``P != 1`` with ``[P, H] = [P, h_a] = 0`` and ``P h_a P = c_a P``.

    An empty list means no such projection exists, so every nonzero
    eigenvalue of ``-i[H, .] + eps D`` has negative real part.
    """
    _, u = energy_basis(spec.hamiltonian)
    out = []
    for subset in obstruction_subsets(spec, tol):
        cols = u[:, list(subset)]
        out.append(cols @ dagger(cols))
    return out


def exact_spectrum(l_eps: Superop, tol: float = SPECTRUM_TOL) -> tuple[np.ndarray, int, float]:
    """All eigenvalues, the number within ``tol`` of zero and the spectral gap.

    The gap is ``-max Re(lambda)`` over eigenvalues farther than ``tol``
    from zero (``inf`` if there are none).
    """
    lam = np.linalg.eigvals(l_eps.matrix)
    lam = lam[np.lexsort((lam.imag, lam.real))]
    worst = float(lam.real.max())
    if worst > tol:
        raise NumericalDegeneracyError(
            "eigenvalue with positive real part; not a contraction semigroup",
            {"max_real_part": worst},
        )
    zero = np.abs(lam) <= tol
    rest = lam[~zero]
    gap = float(-rest.real.max()) if rest.size else float("inf")
    return lam, int(zero.sum()), gap


def eigenvalue_shift_check(spec0: LindbladSpec, l1spec: LindbladSpec, epsilon: float) -> dict:
    """Compare ``-i(E_j-E_k) + eps*eta_jk`` with the nearest exact eigenvalue of ``L_eps``."""
    shifts = first_order_shifts(spec0, l1spec)
    l_eps = combine(build_generator(spec0), build_generator(l1spec), epsilon)
    lam = np.linalg.eigvals(l_eps.matrix)
    e = shifts.energies
    worst = 0.0
    rows = []
    for j, k in shifts.pairs:
        pred = -1j * (e[j] - e[k]) + epsilon * shifts.eta[j, k]
        err = float(np.abs(lam - pred).min())
        rows.append({"j": j, "k": k, "predicted": complex(pred), "error": err})
        worst = max(worst, err)
    return {"max_error": worst, "pairs": rows, "epsilon": float(epsilon)}


@dataclass(frozen=True)
class StabilityReport:
    eta: np.ndarray = field(repr=False)
    worst_real_part: float
    obstruction_projections: list = field(repr=False)
    obstruction_subsets: list
    exact_gap: float
    zero_multiplicity: int
    eigenvalues: np.ndarray = field(repr=False, default=None)
    bound_violation: float = float("-inf")


def stability_report(spec0: LindbladSpec, l1spec: LindbladSpec, epsilon: float = 1e-2) -> StabilityReport:
    """Shifts, subset scan of the perturbation and the exact spectrum of ``L_eps``."""
    shifts = first_order_shifts(spec0, l1spec)
    subsets = obstruction_subsets(LindbladSpec(spec0.hamiltonian, l1spec.jumps))
    _, u = energy_basis(spec0.hamiltonian)
    projections = [u[:, list(s)] @ dagger(u[:, list(s)]) for s in subsets]
    l_eps = combine(build_generator(spec0), build_generator(l1spec), epsilon)
    lam, zeros, gap = exact_spectrum(l_eps)
    return StabilityReport(
        shifts.eta, shifts.worst_real_part, projections, subsets, gap, zeros, lam,
        shifts.bound_violation(),
    )
