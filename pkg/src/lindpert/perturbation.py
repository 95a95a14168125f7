"""Order-by-order stationary states of ``L_eps = L0 + eps * L1``.

Writing ``rho(eps) = sum_n eps^n rho_n`` and collecting powers of ``eps`` in
``L_eps[rho(eps)] = 0`` gives ``L0[rho_0] = 0`` and
``L0[rho_n] + L1[rho_{n-1}] = 0``. Each step inverts ``L0`` on the range of
``F0 = id - G0``, which is only possible when ``G0 L1[rho_{n-1}] = 0``.

* When ``L0`` has a one-dimensional kernel that solvability condition holds
  automatically (``G0[x] = Tr(x) rho_0`` and ``L1`` is trace-annihilating),
  so the plain Neumann-type recursion works.
* Otherwise every coefficient may pick up a kernel component ``sigma_n``
  chosen so that the next order is solvable. This is governed by the
  compressed perturbation ``Lhat = G0 L1 G0`` on ``ker L0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .asymptotics import AveragingData, constrained_inverse, orthogonal_states, time_average_projector
from .errors import NotInRangeError, NumericalDegeneracyError, UnsupportedStructureError, ValidationError
from .linalg import DEFAULT_KERNEL_TOL, as_matrix, dagger, devectorize, expm, is_density, null_space, vectorize
from .model import Superop, combine

__all__ = [
    "ReducedGenerator",
    "PerturbationResult",
    "reduced_generator",
    "dhat_positivity_check",
    "expand_unique",
    "expand_degenerate",
    "expand",
    "series_diagnostics",
    "validate_against_direct",
    "direct_stationary_state",
    "degenerate_step_matrix",
]

DEFAULT_ORDER = 4
OBSTRUCTION_TOL = 1e-10
RESIDUAL_TOL = 1e-9
HERMITIZE_TOL = 1e-10


@dataclass(frozen=True)
class ReducedGenerator:
    """``Lhat = G0 L1 G0`` together with its action on ``ker L0``.

    ``restricted_matrix`` is ``K^dag Lhat K`` where the columns of ``K`` are
    the (Hilbert-Schmidt orthonormal) kernel basis of ``L0``.
    ``traceless_coords`` spans the coordinate vectors of traceless kernel
    elements; ``trace_row`` is the trace functional in coordinates.
    """

    lhat: Superop
    restricted_matrix: np.ndarray = field(repr=False)
    kernel_states: tuple
    invertible_on_traceless: bool
    kernel_columns: np.ndarray = field(repr=False, default=None)
    trace_row: np.ndarray = field(repr=False, default=None)
    traceless_coords: np.ndarray = field(repr=False, default=None)
    null_dim: int = 0

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Kernel-basis coordinates of ``x`` (exact when ``x`` is in ``ker L0``)."""
        return dagger(self.kernel_columns) @ vectorize(x)


def _op_scale(*mats) -> float:
    return max([1.0] + [float(np.linalg.norm(m, 2)) for m in mats])


def reduced_generator(l0avg: AveragingData, l1: Superop, tol: float = DEFAULT_KERNEL_TOL) -> ReducedGenerator:
    g0 = l0avg.g.matrix
    d = l1.dim
    lhat = g0 @ l1.matrix @ g0
    kcols = l0avg.kernel_columns
    r = dagger(kcols) @ lhat @ kcols
    # absolute scale: keeps an identically-vanishing Lhat (roundoff only) rank zero
    scale = _op_scale(l1.matrix)
    null_r = null_space(r, tol, scale=scale)

    trace_row = (vectorize(np.eye(d)) @ kcols).reshape(1, -1)
    m = kcols.shape[1]
    if m == 1:
        traceless = np.zeros((1, 0), dtype=np.complex128)
    else:
        traceless = null_space(trace_row, 1e-12)

    if traceless.shape[1] == 0:
        invertible = True
    else:
        s = np.linalg.svd(r @ traceless, compute_uv=False)
        invertible = bool(s.min() > tol * scale)

    check = np.vstack([np.eye(d * d) - g0, lhat])
    states = orthogonal_states(check, kcols @ null_r, d, strict=False)
    return ReducedGenerator(
        Superop(d, lhat, "generator"),
        r,
        tuple(states),
        invertible,
        kcols,
        trace_row,
        traceless,
        int(null_r.shape[1]),
    )


def dhat_positivity_check(
    rg: ReducedGenerator,
    t_grid: Sequence[float],
    jumps: Sequence[np.ndarray] | None = None,
    basis: np.ndarray | None = None,
    tol: float = 1e-10,
) -> dict:
    """Positivity and trace preservation of ``exp(t Lhat)`` on diagonal states.

    Requires ``ker L0`` to be the diagonal algebra of ``basis`` (default:
    the computational basis), i.e. ``L0`` Hamiltonian with simple spectrum.
    Also checks ``d rho_jj / dt >= -h rho_jj`` along each trajectory with
    ``h = ||sum h^dag h||`` (from ``jumps``) and reports whether the squared
    constant ``||sum h^dag h||^2`` also bounds the flow.
    """
    d = rg.lhat.dim
    u = np.eye(d, dtype=np.complex128) if basis is None else as_matrix(basis, d)
    if rg.kernel_columns.shape[1] != d:
        raise UnsupportedStructureError(
            "unperturbed kernel is not the diagonal algebra (need a Hamiltonian L0 with simple spectrum)",
            {"kernel_dim": int(rg.kernel_columns.shape[1]), "dim": d},
        )
    # every kernel element must be diagonal in the chosen basis
    for i in range(d):
        k = devectorize(rg.kernel_columns[:, i], d)
        kd = dagger(u) @ k @ u
        if np.abs(kd - np.diag(np.diag(kd))).max() > 1e-8:
            raise UnsupportedStructureError("unperturbed kernel is not diagonal in the supplied basis")

    lhat = rg.lhat.matrix
    projectors = [np.outer(u[:, i], u[:, i].conj()) for i in range(d)]
    # population transfer matrix A_ji = <j| Lhat[|i><i|] |j>
    pop = np.array(
        [[np.real(np.vdot(u[:, j], rg.lhat.apply(p) @ u[:, j])) for p in projectors] for j in range(d)]
    )

    if jumps is not None and len(jumps):
        k = sum(dagger(h) @ h for h in jumps)
        h_const = float(np.linalg.norm(k, 2))
    else:
        h_const = float(max(0.0, -pop.diagonal().min()))
    h_squared = h_const ** 2

    rng = np.random.default_rng(0)
    w = rng.random(d)
    starts = projectors + [sum(wi * p for wi, p in zip(w / w.sum(), projectors))]

    min_entry = np.inf
    max_trace_err = 0.0
    bound_margin = np.inf
    squared_margin = np.inf
    for t in t_grid:
        prop = expm(float(t) * lhat)
        for rho in starts:
            rt = devectorize(prop @ vectorize(rho), d)
            diag_t = np.real(np.diag(dagger(u) @ rt @ u))
            min_entry = min(min_entry, float(diag_t.min()))
            max_trace_err = max(max_trace_err, abs(complex(np.trace(rt)) - 1.0))
            deriv = np.real(np.diag(dagger(u) @ devectorize(lhat @ vectorize(rt), d) @ u))
            bound_margin = min(bound_margin, float((deriv + h_const * diag_t).min()))
            squared_margin = min(squared_margin, float((deriv + h_squared * diag_t).min()))

    return {
        "population_matrix": pop,
        "min_population": min_entry,
        "max_trace_error": max_trace_err,
        "h": h_const,
        "h_squared": h_squared,
        "bound_margin": bound_margin,
        "squared_bound_margin": squared_margin,
        "positive": bool(min_entry >= -tol),
        "trace_preserving": bool(max_trace_err <= tol),
        "bound_holds": bool(bound_margin >= -tol),
        "squared_bound_holds": bool(squared_margin >= -tol),
    }


@dataclass(frozen=True)
class PerturbationResult:
    order: int
    coefficients: tuple
    sigmas: tuple
    epsilon: float
    assembled: np.ndarray = field(repr=False)
    branch: str = "unique"
    diagnostics: dict = field(default_factory=dict, repr=False)

    def assemble(self, epsilon: float, order: int | None = None) -> np.ndarray:
        n = self.order if order is None else min(order, self.order)
        return _assemble(self.coefficients[: n + 1], epsilon)

    def with_epsilon(self, epsilon: float) -> "PerturbationResult":
        diag = dict(self.diagnostics)
        out = PerturbationResult(
            self.order, self.coefficients, self.sigmas, float(epsilon),
            _assemble(self.coefficients, epsilon), self.branch, diag,
        )
        diag["series"] = series_diagnostics(out)
        return out


def _assemble(coeffs, epsilon: float) -> np.ndarray:
    out = np.zeros_like(coeffs[0])
    for n, c in enumerate(coeffs):
        out = out + (epsilon ** n) * c
    return out


def _hermitize(x: np.ndarray, what: str) -> np.ndarray:
    dev = float(np.abs(x - dagger(x)).max())
    if dev > HERMITIZE_TOL * max(1.0, float(np.abs(x).max())):
        raise NumericalDegeneracyError(f"{what} is not Hermitian before symmetrization", {"deviation": dev})
    return 0.5 * (x + dagger(x))


def _step(l0, l0avg, l1, prev, n, diag):
    """Raw order-n coefficient ``-L0^{-1} L1[prev]``."""
    y = -l1.apply(prev)
    leak = float(np.linalg.norm(l0avg.g.apply(y)))
    diag["pre_inversion_obstruction"].append(leak)
    try:
        return constrained_inverse(l0, l0avg, y)
    except NotInRangeError as exc:
        raise NumericalDegeneracyError(
            f"order {n}: solvability condition G0 L1[rho_{n - 1}] = 0 fails",
            {"order": n, "obstruction": leak, **exc.diagnostics},
        ) from None


def _finish(l0, l1, coeffs, sigmas, epsilon, branch, diag) -> PerturbationResult:
    residuals = []
    for n in range(1, len(coeffs)):
        r = l0.apply(coeffs[n]) + l1.apply(coeffs[n - 1])
        residuals.append(float(np.linalg.norm(r)))
    diag["residuals"] = residuals
    diag["traces"] = [complex(np.trace(c)) for c in coeffs]
    worst = max(residuals, default=0.0)
    if worst > RESIDUAL_TOL:
        raise NumericalDegeneracyError("order recursion residual too large", {"residual": worst})
    res = PerturbationResult(
        len(coeffs) - 1, tuple(coeffs), tuple(sigmas), float(epsilon),
        _assemble(coeffs, epsilon), branch, diag,
    )
    diag["series"] = series_diagnostics(res)
    return res


def _check_order(order):
    if int(order) != order or order < 0:
        raise ValidationError(f"order must be a non-negative integer, got {order!r}")
    return int(order)


def expand_unique(
    l0: Superop,
    l0avg: AveragingData,
    l1: Superop,
    order: int = DEFAULT_ORDER,
    epsilon: float = 0.0,
    obstruction_tol: float = OBSTRUCTION_TOL,
) -> PerturbationResult:
    """Series for a generator ``L0`` with a unique stationary state.

    ``rho_n = (-1)^n (L0^{-1} L1)^n [rho_0]``; the kernel component of each
    ``L1[rho_{n-1}]`` is checked to vanish before inversion.
    """
    order = _check_order(order)
    if l0avg.kernel_dim != 1:
        raise ValidationError(
            f"unique branch needs a one-dimensional kernel of L0, got {l0avg.kernel_dim}"
        )
    rho = l0avg.stationary_states[0]
    coeffs = [rho]
    sigmas = [np.zeros_like(rho)]
    diag = {"pre_inversion_obstruction": [], "obstructions": []}
    for n in range(1, order + 1):
        leak = float(np.linalg.norm(l0avg.g.apply(l1.apply(coeffs[-1]))))
        if leak > obstruction_tol * max(1.0, float(np.linalg.norm(coeffs[-1]))):
            raise NumericalDegeneracyError(
                f"order {n}: kernel component of L1[rho_{n - 1}] does not vanish",
                {"order": n, "obstruction": leak},
            )
        x = _hermitize(_step(l0, l0avg, l1, coeffs[-1], n, diag), f"rho_{n}")
        diag["obstructions"].append(float(np.linalg.norm(l0avg.g.apply(l1.apply(x)))))
        coeffs.append(x)
        sigmas.append(np.zeros_like(x))
    return _finish(l0, l1, coeffs, sigmas, epsilon, "unique", diag)


def _solve_sigma(rg: ReducedGenerator, obstruction: np.ndarray) -> np.ndarray:
    """Traceless kernel element ``s`` with ``Lhat[s] = -obstruction``."""
    rhs = -rg.coords(obstruction)
    a_mat = rg.restricted_matrix @ rg.traceless_coords
    a, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    res = float(np.linalg.norm(a_mat @ a - rhs))
    if res > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(rhs))):
        raise NumericalDegeneracyError("sigma correction solve failed", {"residual": res})
    d = rg.lhat.dim
    return devectorize(rg.kernel_columns @ (rg.traceless_coords @ a), d)


def expand_degenerate(
    l0: Superop,
    l0avg: AveragingData,
    l1: Superop,
    order: int = DEFAULT_ORDER,
    epsilon: float = 0.0,
    rho0: np.ndarray | None = None,
    rg: ReducedGenerator | None = None,
    obstruction_tol: float = OBSTRUCTION_TOL,
) -> PerturbationResult:
    """Series when ``ker L0`` is degenerate.

    The seed is the unique stationary state of ``Lhat`` inside ``ker L0``
    (or ``rho0`` if given, which must be annihilated by both ``L0`` and
    ``Lhat``). At each order the raw coefficient is corrected by a
    traceless kernel element so that the next order is solvable. When the
    obstruction vanishes no correction is needed; when it does not and
    ``Lhat`` is singular on traceless kernel elements the expansion stops
    with :class:`UnsupportedStructureError`.
    """
    order = _check_order(order)
    rg = rg or reduced_generator(l0avg, l1)
    d = l0.dim
    if rho0 is None:
        if rg.null_dim != 1 or len(rg.kernel_states) != 1:
            raise UnsupportedStructureError(
                "reduced generator does not have a unique stationary state; pass rho0 explicitly",
                {"reduced_kernel_dim": rg.null_dim, "states": len(rg.kernel_states)},
            )
        rho = rg.kernel_states[0]
    else:
        rho = as_matrix(rho0, d)
        if not is_density(rho, 1e-9):
            raise ValidationError("rho0 must be a density matrix")
        r0 = float(np.linalg.norm(l0.apply(rho)))
        r1 = float(np.linalg.norm(rg.lhat.apply(rho)))
        if r0 > 1e-9 or r1 > 1e-9:
            raise ValidationError(
                f"rho0 must satisfy L0[rho0] = 0 and Lhat[rho0] = 0 (residuals {r0:.2e}, {r1:.2e})"
            )

    coeffs = [rho]
    sigmas = [np.zeros_like(rho)]
    diag = {"pre_inversion_obstruction": [], "obstructions": [], "sigma_norms": []}
    for n in range(1, order + 1):
        raw = _step(l0, l0avg, l1, coeffs[-1], n, diag)
        obstruction = l0avg.g.apply(l1.apply(raw))
        size = float(np.linalg.norm(obstruction))
        diag["obstructions"].append(size)
        if size <= obstruction_tol * max(1.0, float(np.linalg.norm(raw))):
            sigma = np.zeros_like(raw)
        elif rg.invertible_on_traceless:
            sigma = _solve_sigma(rg, obstruction)
        else:
            raise UnsupportedStructureError(
                "higher-order degeneracy: obstruction is nonzero but the reduced generator "
                "is singular on traceless kernel elements",
                {"order": n, "obstruction": size, "reduced_kernel_dim": rg.null_dim},
            )
        diag["sigma_norms"].append(float(np.linalg.norm(sigma)))
        coeffs.append(_hermitize(raw + sigma, f"rho_{n}"))
        sigmas.append(sigma)
    return _finish(l0, l1, coeffs, sigmas, epsilon, "degenerate", diag)


def expand(
    l0: Superop,
    l1: Superop,
    order: int = DEFAULT_ORDER,
    epsilon: float = 0.0,
    branch: str = "auto",
    l0avg: AveragingData | None = None,
    tol: float = DEFAULT_KERNEL_TOL,
    rho0: np.ndarray | None = None,
) -> PerturbationResult:
    """Dispatch to the unique or degenerate branch."""
    if branch not in ("auto", "unique", "degenerate"):
        raise ValidationError(f"unknown branch {branch!r}")
    l0avg = l0avg or time_average_projector(l0, tol)
    if branch == "auto":
        branch = "unique" if l0avg.kernel_dim == 1 and rho0 is None else "degenerate"
    if branch == "unique":
        return expand_unique(l0, l0avg, l1, order, epsilon)
    return expand_degenerate(l0, l0avg, l1, order, epsilon, rho0=rho0)


def series_diagnostics(result: PerturbationResult, epsilon: float | None = None) -> dict:
    """Term norms ``||rho_n|| eps^n``, successive ratios and a divergence flag."""
    eps = result.epsilon if epsilon is None else float(epsilon)
    terms = [float(np.linalg.norm(c)) * abs(eps) ** n for n, c in enumerate(result.coefficients)]
    ratios = []
    for a, b in zip(terms[1:], terms[2:]):
        if a == 0.0:
            ratios.append(0.0 if b == 0.0 else float("inf"))
        else:
            ratios.append(b / a)
    run = best = 0
    for r in ratios:
        run = run + 1 if r > 1.0 else 0
        best = max(best, run)
    return {"term_norms": terms, "ratios": ratios, "divergent": best >= 3}


def direct_stationary_state(l_eps: Superop, tol: float = DEFAULT_KERNEL_TOL) -> np.ndarray:
    """The stationary state of ``l_eps`` from its null space."""
    k = null_space(l_eps.matrix, tol)
    if k.shape[1] != 1:
        raise UnsupportedStructureError(
            "direct kernel is not one-dimensional", {"kernel_dim": int(k.shape[1])}
        )
    x = devectorize(k[:, 0], l_eps.dim)
    x = x / np.trace(x)
    return 0.5 * (x + dagger(x))


def validate_against_direct(result: PerturbationResult, l_eps: Superop, tol: float = DEFAULT_KERNEL_TOL) -> float:
    """``min_c ||assembled - c v||`` with ``v`` spanning ``ker l_eps``."""
    k = null_space(l_eps.matrix, tol)
    if k.shape[1] != 1:
        raise UnsupportedStructureError(
            "direct kernel is not one-dimensional", {"kernel_dim": int(k.shape[1])}
        )
    v = k[:, 0]
    a = vectorize(result.assembled)
    c = np.vdot(v, a) / np.vdot(v, v)
    return float(np.linalg.norm(a - c * v))


def degenerate_step_matrix(l0: Superop, l0avg: AveragingData, l1: Superop, rg: ReducedGenerator, rho0: np.ndarray) -> np.ndarray:
    """Matrix of ``-(id - Lhat^{-1} G0 L1) L0^{-1} L1`` built from group inverses.

    ``L0^{-1}`` is ``(L0 + G0)^{-1} - G0`` and ``Lhat^{-1}`` the group
    inverse of the restricted matrix along the seed ``rho0``. This is an
    independent route to the degenerate coefficients:
    ``rho_n = T^n rho_0``.
    """
    g0 = l0avg.g.matrix
    l0_inv = np.linalg.inv(l0.matrix + g0) - g0
    c0 = rg.coords(rho0).reshape(-1, 1)
    t = rg.trace_row
    ghat = c0 @ t / (t @ c0)
    r_inv = np.linalg.inv(rg.restricted_matrix + ghat) - ghat
    k = rg.kernel_columns
    lhat_inv = k @ r_inv @ dagger(k)
    n = l0.matrix.shape[0]
    return -(np.eye(n) - lhat_inv @ g0 @ l1.matrix) @ l0_inv @ l1.matrix
