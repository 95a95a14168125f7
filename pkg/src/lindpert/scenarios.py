"""Worked example generators with closed-form reference data, and seeded
random instances for property tests.

Each :class:`Scenario` bundles the unperturbed and perturbing generators
with an ``oracle`` dictionary. Oracle entries are either arrays or small
closed-form callables (``g_map(X)``, ``inverse(Y)``, ``flow(rho, t)``, ...).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entanglement import first_order_state, first_order_witness, total_energies
from .errors import ValidationError
from .linalg import BipartiteDims, dagger
from .model import LindbladSpec

__all__ = [
    "Scenario",
    "EXAMPLES",
    "make_example",
    "random_instance",
    "random_hamiltonian",
    "bohr_separation",
    "random_witness_configuration",
    "projector_jumps",
]


@dataclass(frozen=True)
class Scenario:
    name: str
    l0spec: LindbladSpec
    l1spec: LindbladSpec
    dims: BipartiteDims | None = None
    oracle: dict = field(default_factory=dict, repr=False)
    params: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.l0spec.dim


def _unit(v, name="psi") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValidationError(f"{name} must be nonzero")
    return v / n


def _energies(e, name="energies") -> np.ndarray:
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.size < 2:
        raise ValidationError(f"{name} needs at least two levels")
    if np.min(np.abs(np.subtract.outer(e, e)) + np.eye(e.size)) <= 1e-12:
        raise ValidationError(f"{name} must be non-degenerate")
    return e


def projector_jumps(psi: np.ndarray) -> tuple:
    """Jumps ``|psi><a|`` over the standard basis (generator ``Tr(X)|psi><psi| - X``)."""
    d = psi.size
    return tuple(np.outer(psi, np.eye(d)[a]) for a in range(d))


def _hamiltonian_inverse(e):
    omega = e[:, None] - e[None, :]
    off = ~np.eye(e.size, dtype=bool)

    def inverse(y):
        y = np.asarray(y, dtype=np.complex128)
        x = np.zeros_like(y)
        x[off] = 1j * y[off] / omega[off]
        return x

    return inverse


def _diagonal_g(x):
    return np.diag(np.diag(np.asarray(x, dtype=np.complex128)))


def _rho1_projector_perturbation(psi, e):
    omega = e[:, None] - e[None, :]
    off = ~np.eye(e.size, dtype=bool)
    out = np.zeros((e.size, e.size), dtype=np.complex128)
    out[off] = -1j * np.outer(psi, psi.conj())[off] / omega[off]
    return out


def _exact_projector_state(psi, e):
    """Exact stationary state of ``-i[diag(E), .] + eps (Tr(.)|psi><psi| - .)``."""
    omega = e[:, None] - e[None, :]
    coh = np.outer(psi, psi.conj())

    def state(eps):
        return eps * coh / (eps + 1j * omega)

    return state


def _ex1(energies=(0.0, 1.0, 2.5, 4.5)):
    e = _energies(energies)
    d = e.size
    spec0 = LindbladSpec(np.diag(e), (), "ex1")
    oracle = {
        "g_map": _diagonal_g,
        "inverse": _hamiltonian_inverse(e),
        "stationary_states": [np.diag(np.eye(d)[j]).astype(np.complex128) for j in range(d)],
        "flow": lambda rho, t: np.exp(-1j * np.subtract.outer(e, e) * t) * np.asarray(rho),
    }
    return Scenario("ex1", spec0, LindbladSpec.zero(d), None, oracle, {"energies": e})


def _ex2(psi=(1.0, 1j, 0.5)):
    psi = _unit(psi)
    d = psi.size
    proj = np.outer(psi, psi.conj())
    spec0 = LindbladSpec(np.zeros((d, d)), projector_jumps(psi), "ex2")
    oracle = {
        "g_map": lambda x: np.trace(x) * proj,
        "inverse": lambda y: -np.asarray(y, dtype=np.complex128),
        "stationary_states": [proj],
        "flow": lambda rho, t: np.exp(-t) * np.asarray(rho) + (1 - np.exp(-t)) * proj,
        "eigenvalues": np.array([0.0] + [-1.0] * (d * d - 1)),
    }
    return Scenario("ex2", spec0, LindbladSpec.zero(d), None, oracle, {"psi": psi})


def _ex3(psi=(0.6, 0.48j, 0.64)):
    psi = _unit(psi)
    d = psi.size
    p1 = abs(psi[0])
    if not 0.0 < p1 < 1.0:
        raise ValidationError("needs 0 < |<1|psi>| < 1")
    mu = 1.0 - p1 ** 2
    q = np.diag([0.0] + [1.0] * (d - 1)).astype(np.complex128)
    qpsi = q @ psi
    jump = np.outer(psi, np.eye(d)[0])
    spec0 = LindbladSpec(np.zeros((d, d)), (jump,), "ex3")

    def g_map(x):
        x = np.asarray(x, dtype=np.complex128)
        return q @ x @ q + x[0, 0] / mu * np.outer(qpsi, qpsi.conj())

    def inverse(y):
        y = np.asarray(y, dtype=np.complex128)
        x = np.zeros_like(y)
        x[0, 0] = -y[0, 0] / mu
        x[0, 1:] = -2.0 * (y[0, 1:] + psi[0] * psi[1:].conj() * y[0, 0] / mu)
        x[1:, 0] = -2.0 * (y[1:, 0] + psi[1:] * np.conj(psi[0]) * y[0, 0] / mu)
        x[1:, 1:] = y[0, 0] * np.outer(psi[1:], psi[1:].conj()) / mu ** 2
        return x

    def flow(rho, t):
        rho = np.asarray(rho, dtype=np.complex128)
        r11 = rho[0, 0]
        out = np.empty_like(rho)
        out[0, 0] = np.exp(-mu * t) * r11
        if abs(mu - 0.5) < 1e-8:
            kernel = t * np.exp(-t / 2)
        else:
            kernel = (np.exp(-t / 2) - np.exp(-mu * t)) / (mu - 0.5)
        out[0, 1:] = np.exp(-t / 2) * rho[0, 1:] + psi[0] * psi[1:].conj() * r11 * kernel
        out[1:, 0] = np.exp(-t / 2) * rho[1:, 0] + psi[1:] * np.conj(psi[0]) * r11 * kernel
        out[1:, 1:] = rho[1:, 1:] + (1 - np.exp(-mu * t)) / mu * r11 * np.outer(psi[1:], psi[1:].conj())
        return out

    oracle = {"g_map": g_map, "inverse": inverse, "flow": flow, "q": q, "mu": mu}
    return Scenario("ex3", spec0, LindbladSpec.zero(d), None, oracle, {"psi": psi, "mu": mu})


_EX7_H1 = np.array(
    [
        [0.3, 0.5 - 0.2j, 0.1j, 0.2],
        [0.5 + 0.2j, -0.4, 0.3 + 0.1j, -0.1j],
        [-0.1j, 0.3 - 0.1j, 0.1, 0.4 - 0.3j],
        [0.2, 0.1j, 0.4 + 0.3j, -0.2],
    ]
)


def _ex7(energies=(0.0, 1.0, 2.5, 4.5), h1=None, p=(0.4, 0.3, 0.2, 0.1)):
    e = _energies(energies)
    d = e.size
    h1 = _EX7_H1[:d, :d] if h1 is None else np.asarray(h1, dtype=np.complex128)
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != d or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValidationError("p must be a probability vector matching the dimension")
    omega = e[:, None] - e[None, :]
    off = ~np.eye(d, dtype=bool)

    def rho1(weights):
        w = np.asarray(weights, dtype=float)
        out = np.zeros((d, d), dtype=np.complex128)
        dp = w[None, :] - w[:, None]  # p_k - p_j
        out[off] = -(dp[off] / omega[off]) * h1[off]
        return out

    def eigvec_derivative(level):
        """First-order correction of the energy eigenvector ``|level>``."""
        v = np.zeros(d, dtype=np.complex128)
        for j in range(d):
            if j != level:
                v[j] = h1[j, level] / (e[level] - e[j])
        return v

    def eigvec(level, eps):
        return np.eye(d, dtype=np.complex128)[level] + eps * eigvec_derivative(level)

    spec0 = LindbladSpec(np.diag(e), (), "ex7")
    spec1 = LindbladSpec(h1, (), "ex7-perturbation")
    oracle = {
        "rho0": np.diag(p).astype(np.complex128),
        "rho1": rho1(p),
        "rho1_for": rho1,
        "eigenvector": eigvec,
        "eigenvector_derivative": eigvec_derivative,
        "lhat_norm": 0.0,
        "obstruction": 0.0,
        "inverse": _hamiltonian_inverse(e),
    }
    return Scenario("ex7", spec0, spec1, None, oracle, {"energies": e, "h1": h1, "p": p})


def _ex8(energies=(0.0, 1.0, 2.5, 4.5), psi=(1.0, 1j, -0.5, 0.8), name="ex8"):
    e = _energies(energies)
    psi = _unit(psi)
    if psi.size != e.size:
        raise ValidationError("psi and energies must have the same length")
    d = e.size
    spec0 = LindbladSpec(np.diag(e), (), name)
    spec1 = LindbladSpec(np.zeros((d, d)), projector_jumps(psi), f"{name}-perturbation")
    pops = np.abs(psi) ** 2
    oracle = {
        "rho0": np.diag(pops).astype(np.complex128),
        "rho1": _rho1_projector_perturbation(psi, e),
        "obstruction": 0.0,
        "exact_state": _exact_projector_state(psi, e),
        "reduced_flow": lambda diag, t: pops * (1 - np.exp(-t)) + np.asarray(diag) * np.exp(-t),
    }
    return Scenario(name, spec0, spec1, None, oracle, {"energies": e, "psi": psi})


def _ex9(energies=(0.0, 1.0, 2.5, 4.5), psi=(1.0, 1j, -0.5, 0.8)):
    return _ex8(energies, psi, name="ex9")


_EX10_PSI = (0.0, 1j / np.sqrt(2), 1 / np.sqrt(2), 0.0)
_EX10_PHI = (1 / np.sqrt(2), 0.0, 0.0, 1 / np.sqrt(2))


def _ex10(e1=(0.0, 1.0), e2=(0.0, 2.0), psi=_EX10_PSI, phi=_EX10_PHI, indices=(0, 0, 1, 1)):
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    dims = BipartiteDims(e1.size, e2.size)
    e = _energies(total_energies(e1, e2), "total energies")
    psi = _unit(psi)
    phi = _unit(phi, "phi")
    if psi.size != dims.dim:
        raise ValidationError(f"psi must have {dims.dim} entries")
    d = dims.dim
    spec0 = LindbladSpec(np.diag(e), (), "ex10")
    spec1 = LindbladSpec(np.zeros((d, d)), projector_jumps(psi), "ex10-perturbation")
    pops = np.abs(psi) ** 2
    oracle = {
        "rho0": np.diag(pops).astype(np.complex128),
        "rho1": _rho1_projector_perturbation(psi, e),
        "first_order_state": lambda eps: first_order_state(psi, e, eps),
        "exact_state": _exact_projector_state(psi, e),
        "witness": first_order_witness(psi, phi, e1, e2, indices),
        "obstruction": 0.0,
    }
    params = {"e1": e1, "e2": e2, "psi": psi, "phi": phi, "indices": tuple(indices)}
    return Scenario("ex10", spec0, spec1, dims, oracle, params)


EXAMPLES = {
    "ex1": _ex1,
    "ex2": _ex2,
    "ex3": _ex3,
    "ex7": _ex7,
    "ex8": _ex8,
    "ex9": _ex9,
    "ex10": _ex10,
}


def make_example(name: str, **params) -> Scenario:
    try:
        builder = EXAMPLES[name]
    except KeyError:
        raise ValidationError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ValidationError(f"{name}: {exc}") from None


def bohr_separation(e) -> float:
    """Smallest distance between distinct transition frequencies ``E_j - E_k`` (zero included)."""
    w = np.unique(np.round(np.subtract.outer(e, e).reshape(-1), 14))
    return float(np.diff(w).min()) if w.size > 1 else float("inf")


def random_hamiltonian(dim: int, rng: np.random.Generator, min_gap: float = 0.1,
                       min_bohr_gap: float | None = None) -> np.ndarray:
    """Hermitian matrix with sorted eigenvalues spaced by at least ``min_gap``.

    With ``min_bohr_gap`` the spacings are redrawn until all transition
    frequencies ``E_j - E_k`` are also separated by that much.
    """
    for _ in range(10000):
        gaps = min_gap + rng.random(dim - 1)
        e = np.concatenate([[0.0], np.cumsum(gaps)])
        if min_bohr_gap is None or bohr_separation(e) >= min_bohr_gap:
            break
    else:
        raise ValidationError(f"could not draw energies with transition-frequency gap {min_bohr_gap}")
    e -= e.mean()
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u, r = np.linalg.qr(z)
    u = u * (np.diag(r) / np.abs(np.diag(r)))
    h = u @ np.diag(e) @ dagger(u)
    return 0.5 * (h + dagger(h))


def _random_jumps(dim, n, rng, scale):
    return tuple(
        scale * (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2 * dim)
        for _ in range(n)
    )


def random_instance(dim: int, n_jumps: int = 2, seed: int = 0, flavor: str = "generic",
                    jump_scale: float = 1.0, min_bohr_gap: float | None = None) -> Scenario:
    """Seeded random pair of generators.

    ``generic``: both generators have a random Hamiltonian and random jumps.
    ``hamiltonian-plus-dissipator``: ``L0`` is a Hamiltonian with simple
    spectrum and the perturbation is a pure dissipator. ``min_bohr_gap``
    additionally separates the transition frequencies of ``H0``.
    """
    if not 1 <= dim <= 16:
        raise ValidationError(f"dim must be in 1..16, got {dim}")
    if n_jumps < 0:
        raise ValidationError("n_jumps must be non-negative")
    rng = np.random.default_rng(seed)
    h0 = random_hamiltonian(dim, rng, min_bohr_gap=min_bohr_gap)
    if flavor == "generic":
        spec0 = LindbladSpec(h0, _random_jumps(dim, n_jumps, rng, jump_scale), f"random-{seed}")
        spec1 = LindbladSpec(random_hamiltonian(dim, rng), _random_jumps(dim, n_jumps, rng, jump_scale), f"random-{seed}-perturbation")
    elif flavor == "hamiltonian-plus-dissipator":
        spec0 = LindbladSpec(h0, (), f"random-{seed}")
        spec1 = LindbladSpec(np.zeros((dim, dim)), _random_jumps(dim, n_jumps, rng, jump_scale), f"random-{seed}-perturbation")
    else:
        raise ValidationError(f"unknown flavor {flavor!r}")
    return Scenario(spec0.label, spec0, spec1, None, {}, {"seed": seed, "flavor": flavor})


def random_witness_configuration(rng: np.random.Generator, d1: int = 2, d2: int = 2, min_gap: float = 0.1) -> dict:
    """Random ``(psi, phi, E1, E2, indices)`` satisfying the witness hypotheses."""
    if d1 < 2 or d2 < 2:
        raise ValidationError("both parties need dimension >= 2")
    d = d1 * d2
    while True:
        e1 = np.sort(rng.uniform(0, 3, d1))
        e2 = np.sort(rng.uniform(0, 3, d2))
        e = total_energies(e1, e2)
        spread = np.abs(np.subtract.outer(e, e)) + np.eye(d) * 10
        if spread.min() < min_gap:
            continue
        a1, a2 = rng.choice(d1, 2, replace=False)
        b1, b2 = rng.choice(d2, 2, replace=False)
        if abs((e1[a2] + e2[b1]) - (e1[a1] + e2[b2])) < min_gap:
            continue
        break
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi[a1 * d2 + b1] = psi[a2 * d2 + b2] = 0.0
    psi /= np.linalg.norm(psi)
    phi = np.zeros(d, dtype=np.complex128)
    phi[[a1 * d2 + b1, a2 * d2 + b2]] = rng.normal(size=2) + 1j * rng.normal(size=2)
    phi /= np.linalg.norm(phi)
    return {"psi": psi, "phi": phi, "e1": e1, "e2": e2, "indices": (int(a1), int(b1), int(a2), int(b2))}
