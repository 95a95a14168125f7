import os
import subprocess
import sys

import numpy as np
import pytest

from lindpert import _backend, _kernels_py
from lindpert.scenarios import make_example, random_instance
from lindpert.stability import energy_basis
from lindpert.linalg import dagger
from lindpert.model import LindbladSpec


def _energy_frame_jumps(spec):
    _, u = energy_basis(spec.hamiltonian)
    return np.array([dagger(u) @ h @ u for h in spec.jumps], dtype=np.complex128).reshape(-1, spec.dim, spec.dim)


@pytest.mark.parametrize("seed", range(5))
def test_superop_parity(seed):
    spec = random_instance(4, 3, seed=seed).l0spec
    a = _backend.kernels.lindblad_superop(spec.hamiltonian, spec.jump_array())
    b = _kernels_py.lindblad_superop(spec.hamiltonian, spec.jump_array())
    assert np.allclose(a, b, atol=1e-13)


@pytest.mark.parametrize("jumps", [
    [np.diag([1.0, 1.0, 3.0, 2.0])],
    "random",
    "ex8",
])
def test_scan_parity(jumps):
    if jumps == "random":
        spec = random_instance(4, seed=0).l0spec
        arr = _energy_frame_jumps(LindbladSpec(np.diag([0.0, 1.0, 2.5, 4.5]), spec.jumps))
    elif jumps == "ex8":
        arr = np.array(make_example("ex8").l1spec.jumps, dtype=np.complex128)
    else:
        arr = np.array(jumps, dtype=np.complex128)
    a = sorted(int(m) for m in _backend.kernels.scan_projections(arr, 1e-10))
    b = sorted(int(m) for m in _kernels_py.scan_projections(arr, 1e-10))
    assert a == b


def test_pure_python_switch():
    env = dict(os.environ, LINDPERT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import lindpert; print(lindpert.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == _kernels_py.BACKEND
