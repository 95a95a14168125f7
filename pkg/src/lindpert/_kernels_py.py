"""Pure-Python/numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` extension; used
when the extension is unavailable or ``LINDPERT_PURE_PYTHON=1``.
"""
import numpy as np

BACKEND = "python"


def lindblad_superop(hamiltonian, jumps):
    """Column-stacked matrix of ``-i[H, x] + sum_a (h x h^dag - {h^dag h, x}/2)``."""
    h0 = np.ascontiguousarray(hamiltonian, dtype=np.complex128)
    d = h0.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    m = -1j * (np.kron(eye, h0) - np.kron(h0.T, eye))
    for h in jumps:
        h = np.asarray(h, dtype=np.complex128)
        k = h.conj().T @ h
        m += np.kron(h.conj(), h) - 0.5 * np.kron(eye, k) - 0.5 * np.kron(k.T, eye)
    return m


def scan_projections(jumps, tol):
    """Bitmasks ``S`` (0 < S < 2^d - 1) such that every jump is block
    diagonal w.r.t. ``S`` / complement and is a scalar on the ``S`` block.

    ``jumps`` must already be expressed in the Hamiltonian eigenbasis.
    """
    jumps = np.asarray(jumps, dtype=np.complex128)
    n, d = jumps.shape[0], jumps.shape[-1]
    full = (1 << d) - 1
    if n == 0:
        return np.arange(1, full, dtype=np.int64)
    big = np.abs(jumps) > tol
    coupled = big.any(axis=0)
    np.fill_diagonal(coupled, False)
    idx = np.arange(d)
    out = []
    for mask in range(1, full):
        ins = ((mask >> idx) & 1).astype(bool)
        if coupled[np.ix_(ins, ~ins)].any() or coupled[np.ix_(~ins, ins)].any():
            continue
        block = jumps[:, ins][:, :, ins]
        c = block[:, 0, 0]
        diff = block - c[:, None, None] * np.eye(block.shape[-1])
        if np.abs(diff).max() <= tol:
            out.append(mask)
    return np.asarray(out, dtype=np.int64)
