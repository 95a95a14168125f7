"""Command-line front end.

Every command reads a JSON scenario file and writes one JSON report to
stdout (keys sorted, so identical inputs give byte-identical output).
Progress and timing go to stderr.

Exit codes: 0 success, 2 invalid input, 3 numerical degeneracy,
4 unsupported structure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import _backend
from .asymptotics import time_average_projector
from .entanglement import first_order_witness, ppt_test, witness_expectation
from .errors import LindpertError, UnsupportedStructureError, ValidationError
from .linalg import DEFAULT_KERNEL_TOL, is_density
from .model import LindbladSpec, build_generator, combine, evolve
from .perturbation import DEFAULT_ORDER, expand, reduced_generator, validate_against_direct
from .scenario_io import canonical_json, decode_matrix, decode_vector, load_scenario, scenario_to_dict
from .scenarios import EXAMPLES, make_example, random_instance
from .stability import exact_spectrum, first_order_shifts, obstruction_subsets

TOL_ENV = "LINDBLAD_PERTURB_TOL"


def _bundled(name: str) -> Path | None:
    ref = resources.files("lindpert") / "data" / f"{name}.json"
    return Path(str(ref)) if ref.is_file() else None


def _open_scenario(arg: str):
    path = Path(arg)
    if not path.is_file():
        path = _bundled(arg)
        if path is None:
            raise ValidationError(f"no scenario file or bundled scenario named {arg!r}")
    return load_scenario(path)


def _kernel_tol(args, sf) -> float:
    tol = DEFAULT_KERNEL_TOL
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            tol = float(env)
        except ValueError:
            raise ValidationError(f"{TOL_ENV} must be a number, got {env!r}") from None
    tol = sf.tolerances.get("kernel", tol)
    if getattr(args, "tol", None) is not None:
        tol = args.tol
    if not tol > 0:
        raise ValidationError("kernel tolerance must be positive")
    return float(tol)


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _vector(text: str, what: str) -> np.ndarray:
    text = text.strip()
    if text.startswith("["):
        try:
            return decode_vector(json.loads(text), what)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{what}: {exc.msg}") from None
    try:
        return np.array([complex(t.strip().replace("i", "j")) for t in text.split(",")], dtype=np.complex128)
    except ValueError:
        raise ValidationError(f"{what}: cannot parse {text!r}") from None


def _matrix_arg(text: str, what: str, dim: int) -> np.ndarray:
    path = Path(text)
    raw = path.read_text(encoding="utf-8") if path.is_file() else text
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return decode_matrix(data, what, dim)


def _generators(sf):
    return build_generator(sf.l0spec), build_generator(sf.l1spec)


# ---------------------------------------------------------------- commands

def cmd_stationary(args, sf):
    tol = _kernel_tol(args, sf)
    l0, l1 = _generators(sf)
    l = combine(l0, l1, args.epsilon) if args.epsilon else l0
    avg = time_average_projector(l, tol)
    residuals = [float(np.linalg.norm(l.apply(s))) for s in avg.stationary_states]
    outputs = {
        "epsilon": args.epsilon,
        "kernel_dim": avg.kernel_dim,
        "states": list(avg.stationary_states),
        "count": len(avg.stationary_states),
        "faithful": avg.faithful,
        "g": avg.g.matrix,
    }
    return outputs, {"state_residuals": residuals, "kernel_tol": tol}


def cmd_perturb(args, sf):
    tol = _kernel_tol(args, sf)
    l0, l1 = _generators(sf)
    avg = time_average_projector(l0, tol)
    rho0 = _matrix_arg(args.rho0, "--rho0", sf.dim) if args.rho0 else None
    result = expand(l0, l1, args.order, args.epsilon, args.branch, l0avg=avg, tol=tol, rho0=rho0)
    eps_list = [args.epsilon] + (_floats(args.sweep, "--sweep") if args.sweep else [])
    rows = []
    for k, eps in enumerate(eps_list):
        r = result.with_epsilon(eps)
        row = {"epsilon": eps, "assembled": r.assembled, "divergent": r.diagnostics["series"]["divergent"]}
        try:
            row["validation_error"] = validate_against_direct(r, combine(l0, l1, eps), tol) if eps else None
        except UnsupportedStructureError:
            row["validation_error"] = None
        rows.append(row)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "validation_error", "divergent"])
            for row in rows:
                err = row["validation_error"]
                w.writerow([repr(row["epsilon"]), "" if err is None else repr(err), int(row["divergent"])])
    outputs = {
        "branch": result.branch,
        "order": result.order,
        "coefficients": list(result.coefficients),
        "sigmas": list(result.sigmas),
        "assembled": result.assembled,
        "epsilon": result.epsilon,
        "sweep": rows[1:],
        "validation_error": rows[0]["validation_error"],
    }
    diag = {k: v for k, v in result.diagnostics.items() if k != "series"}
    diag["series"] = result.diagnostics["series"]
    diag["kernel_dim_l0"] = avg.kernel_dim
    if avg.kernel_dim > 1:
        diag["reduced_kernel_dim"] = reduced_generator(avg, l1, tol).null_dim
    return outputs, diag


def cmd_stability(args, sf):
    if sf.l0spec.jumps:
        raise UnsupportedStructureError("stability analysis needs a purely Hamiltonian unperturbed generator")
    shifts = first_order_shifts(sf.l0spec, sf.l1spec)
    subsets = obstruction_subsets(LindbladSpec(sf.l0spec.hamiltonian, sf.l1spec.jumps))
    l0, l1 = _generators(sf)
    lam, zeros, gap = exact_spectrum(combine(l0, l1, args.epsilon))
    pairs = [
        {"j": j, "k": k, "eta": shifts.eta[j, k], "bound": shifts.bound[j, k]}
        for j, k in shifts.pairs
    ]
    outputs = {
        "energies": shifts.energies,
        "eta": pairs,
        "worst_real_part": shifts.worst_real_part,
        "bound_violation": shifts.bound_violation(),
        "obstruction_subsets": [list(s) for s in subsets],
        "decay_certified": not subsets,
        "epsilon": args.epsilon,
        "eigenvalues": lam,
        "zero_multiplicity": zeros,
        "gap": gap,
    }
    diag = {}
    if subsets:
        diag["notice"] = "invariant projections exist; purely imaginary eigenvalues may survive the perturbation"
    return outputs, diag


def _projector_psi(spec):
    """``psi`` if the jumps are exactly ``|psi><a|`` over the standard basis."""
    d = spec.dim
    if len(spec.jumps) != d or np.any(spec.hamiltonian):
        return None
    psi = spec.jumps[0][:, 0]
    for a, h in enumerate(spec.jumps):
        if np.abs(h - np.outer(psi, np.eye(d)[a])).max() > 1e-12:
            return None
    return psi


def _party_energies(h0, dims):
    if np.abs(h0 - np.diag(np.diag(h0))).max() > 1e-12:
        return None
    e = np.real(np.diag(h0))
    e1 = e[:: dims.d2].copy()
    e2 = e[: dims.d2] - e[0]
    if np.abs(np.add.outer(e1, e2).reshape(-1) - e).max() > 1e-12:
        return None
    return e1, e2


def cmd_entangle(args, sf):
    if sf.bipartite is None:
        raise ValidationError("scenario has no bipartite block; entanglement tests need [d1, d2]")
    dims = sf.bipartite
    tol = _kernel_tol(args, sf)
    l0, l1 = _generators(sf)
    result = expand(l0, l1, args.order, args.epsilon, "auto", tol=tol)
    rho = result.assembled
    report = ppt_test(rho, dims, sf.tolerances.get("ppt", 1e-10), args.party)
    outputs = {
        "epsilon": args.epsilon,
        "order": args.order,
        "branch": result.branch,
        "state": rho,
        "verdict": report.verdict,
        "min_pt_eigenvalue": report.min_pt_eigenvalue,
        "negativity": report.negativity,
        "pt_eigenvalues": report.pt_eigenvalues,
        "witness_vector": report.witness_vector,
        "party": args.party,
    }
    diag = {}
    if args.phi:
        phi = _vector(args.phi, "--phi")
        if phi.size != dims.dim:
            raise ValidationError(f"--phi must have {dims.dim} entries")
        phi = phi / np.linalg.norm(phi)
        outputs["phi_expectation"] = witness_expectation(rho, phi, dims, args.party)
        psi = _vector(args.psi, "--psi") if args.psi else _projector_psi(sf.l1spec)
        energies = _party_energies(sf.l0spec.hamiltonian, dims)
        if args.indices:
            idx = [int(x) for x in _floats(args.indices, "--indices")]
        else:
            support = np.flatnonzero(np.abs(phi) > 1e-12)
            idx = None
            if support.size == 2:
                (a1, b1), (a2, b2) = (divmod(int(s), dims.d2) for s in support)
                idx = [a1, b1, a2, b2]
        if psi is None or energies is None or idx is None or len(idx) != 4:
            diag["witness"] = "analytic first-order value unavailable (needs diagonal product Hamiltonian, projector jumps and a two-term phi)"
        else:
            outputs["first_order_value"] = first_order_witness(psi, phi, energies[0], energies[1], idx, args.party)
    return outputs, diag


def cmd_evolve(args, sf):
    tol = _kernel_tol(args, sf)
    d = sf.dim
    if args.rho0:
        rho0 = _matrix_arg(args.rho0, "--rho0", d)
    else:
        plus = np.ones(d, dtype=np.complex128) / np.sqrt(d)
        rho0 = np.outer(plus, plus.conj())
    if not is_density(rho0, 1e-9):
        raise ValidationError("--rho0 must be a density matrix")
    times = _floats(args.t, "--t")
    if any(t < 0 for t in times):
        raise ValidationError("--t values must be non-negative")
    l0, l1 = _generators(sf)
    l = combine(l0, l1, args.epsilon) if args.epsilon else l0
    target = time_average_projector(l, tol).g.apply(rho0)
    rows = []
    for t in times:
        rt = evolve(l, rho0, t)
        rows.append({"t": t, "rho": rt, "distance_to_average": float(np.linalg.norm(rt - target))})
    return {"epsilon": args.epsilon, "rho0": rho0, "time_average": target, "trajectory": rows}, {}


COMMANDS = {
    "stationary": cmd_stationary,
    "perturb": cmd_perturb,
    "stability": cmd_stability,
    "entangle": cmd_entangle,
    "evolve": cmd_evolve,
}


def cmd_export(args) -> str:
    if args.name == "random":
        sc = random_instance(args.dim, args.n_jumps, args.seed, args.flavor)
    else:
        sc = make_example(args.name)
    data = scenario_to_dict(sc.name, sc.l0spec, sc.l1spec, sc.dims)
    return canonical_json(data) + "\n"


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lindpert",
        description="Stationary states of perturbed Lindblad generators.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="scenario JSON file, or the name of a bundled scenario")
        p.add_argument("--tol", type=float, default=None, help=f"kernel tolerance (default 1e-10, env {TOL_ENV})")
        p.add_argument("--timing", action="store_true", help="include wall time in the report")
        return p

    p = scenario_cmd("stationary", "orthogonal stationary states and the time-average projector")
    p.add_argument("--epsilon", type=float, default=0.0)

    p = scenario_cmd("perturb", "perturbation series of the stationary state")
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--branch", choices=("auto", "unique", "degenerate"), default="auto")
    p.add_argument("--sweep", default=None, help="extra epsilon values, comma separated")
    p.add_argument("--csv", default=None, help="write the sweep table to this CSV file")
    p.add_argument("--rho0", default=None, help="zeroth-order state (JSON or file) when the reduced kernel is degenerate")

    p = scenario_cmd("stability", "first-order eigenvalue shifts, projection scan and exact spectrum")
    p.add_argument("--epsilon", type=float, default=1e-2)

    p = scenario_cmd("entangle", "partial-transpose test of the perturbed stationary state")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--phi", default=None, help="test vector, e.g. '0.7071,0,0,0.7071' or a JSON [re, im] list")
    p.add_argument("--psi", default=None, help="state of the projector jumps (inferred when possible)")
    p.add_argument("--indices", default=None, help="a1,b1,a2,b2 (inferred from the support of phi)")
    p.add_argument("--party", type=int, choices=(1, 2), default=2)

    p = scenario_cmd("evolve", "trajectory exp(tL)[rho0]")
    p.add_argument("--t", default="0,1,5", help="comma-separated times")
    p.add_argument("--rho0", default=None, help="initial density matrix (JSON or file); default |+><+|")
    p.add_argument("--epsilon", type=float, default=0.0)

    p = sub.add_parser("export", help="write a built-in scenario as a JSON file")
    p.add_argument("name", choices=sorted(EXAMPLES) + ["random"])
    p.add_argument("--out", default=None)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--n-jumps", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--flavor", choices=("generic", "hamiltonian-plus-dissipator"), default="generic")
    return ap


def _flags(args) -> dict:
    skip = {"command", "scenario", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _safe(obj):
    try:
        json.dumps(canonical_json(obj))
        return obj
    except (TypeError, ValueError):
        return str(obj)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    if args.command == "export":
        text = cmd_export(args)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0

    report = {"command": args.command, "backend": _backend.BACKEND}
    code = 0
    try:
        sf, sha = _open_scenario(args.scenario)
        report["inputs"] = {"scenario": sf.name, "scenario_sha256": sha, "flags": _flags(args)}
        outputs, diag = COMMANDS[args.command](args, sf)
        report["outputs"] = outputs
        report["diagnostics"] = diag
    except LindpertError as exc:
        code = exc.exit_code
        report["error"] = {
            "type": type(exc).__name__,
            "message": str(exc),
            "diagnostics": {k: _safe(v) for k, v in getattr(exc, "diagnostics", {}).items()},
        }
        print(f"lindpert {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
    elapsed = time.perf_counter() - start
    if args.timing:
        report["wall_time_s"] = elapsed
    sys.stdout.write(canonical_json(report) + "\n")
    print(f"lindpert {args.command}: exit {code} after {elapsed:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
