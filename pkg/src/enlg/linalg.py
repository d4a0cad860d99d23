"""Dense complex linear algebra and small quantum-information helpers.

Matrices are plain ``numpy`` arrays. Functions that require Hermitian or
positive semidefinite input check it against the shared tolerances and raise
:class:`~enlg.errors.InvariantError` otherwise.
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError, InvariantError
from .tolerances import HERMITIAN_TOL, NULLSPACE_TOL, PSD_TOL

__all__ = [
    "EigDecomp",
    "as_matrix",
    "is_hermitian",
    "check_hermitian",
    "kron",
    "kron_all",
    "partial_trace",
    "vec",
    "unvec",
    "spectral_norm",
    "trace_norm",
    "herm_eig",
    "psd_sqrt",
    "psd_inv_sqrt",
    "is_psd",
    "min_eigenvalue",
    "projector",
    "basis_vector",
    "gen_pauli",
    "bell_basis",
    "mub",
    "is_prime",
    "random_unitary",
    "random_density",
    "teleport_simulate",
    "real_embedding",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class EigDecomp(NamedTuple):
    """Spectral decomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def check_hermitian(m, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    """Validate and return a square Hermitian matrix."""
    m = as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"{name} must be square, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T), initial=0.0)
    if dev > tol:
        raise InvariantError(f"{name} is not Hermitian (deviation {dev:.3g} > {tol:.1g})")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product; entry ``(i*rb + k, j*cb + l)`` is ``a[i,j]*b[k,l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats: Sequence) -> np.ndarray:
    return reduce(np.kron, mats)


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem whose index is not in ``keep``.

    Kept subsystems stay in their original order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    n = int(np.prod(dims)) if dims else 1
    if m.shape != (n, n):
        raise InputError(f"dims {dims} do not match matrix of shape {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise InputError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    k = len(dims)
    t = m.reshape(dims + dims)
    # Trace the highest-numbered systems first so remaining axis numbers stay valid.
    for i in reversed(range(k)):
        if i in keep:
            continue
        half = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + half)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d, d)


def vec(a) -> np.ndarray:
    """Row-stacking vectorization, so that ``vec(E_ab) = e_a (x) e_b``."""
    return np.asarray(a).reshape(-1)


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    return np.asarray(v).reshape(rows, rows if cols is None else cols)


def spectral_norm(m) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, "nuc"))


def herm_eig(h, tol: float = HERMITIAN_TOL) -> EigDecomp:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    h = check_hermitian(h, tol)
    h = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return EigDecomp(w[::-1].copy(), v[:, ::-1].copy())


def min_eigenvalue(h) -> float:
    h = np.asarray(h)
    if h.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((h + h.conj().T) / 2)[0])


def is_psd(h, tol: float = PSD_TOL) -> bool:
    return is_hermitian(h, max(tol, HERMITIAN_TOL)) and min_eigenvalue(h) >= -tol


def _psd_eig(p, tol: float) -> EigDecomp:
    d = herm_eig(p, max(HERMITIAN_TOL, tol))
    if d.eigenvalues.size and d.eigenvalues[-1] < -tol:
        raise InvariantError(
            f"matrix is not positive semidefinite (eigenvalue {d.eigenvalues[-1]:.3g})"
        )
    return d


def psd_sqrt(p, tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix."""
    w, v = _psd_eig(p, tol)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def psd_inv_sqrt(p, tol: float = NULLSPACE_TOL, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Pseudo-inverse square root; eigenvalues at or below ``tol`` map to zero."""
    w, v = _psd_eig(p, psd_tol)
    inv = np.zeros_like(w)
    big = w > tol
    inv[big] = 1.0 / np.sqrt(w[big])
    return (v * inv) @ v.conj().T


def basis_vector(n: int, i: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[i] = 1.0
    return e


def projector(v) -> np.ndarray:
    """Rank-one operator ``v v*`` (``v`` is not normalized)."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def gen_pauli(m: int, k1: int, k2: int) -> np.ndarray:
    """Generalized Pauli operator ``X^k1 Z^k2`` in dimension ``m``."""
    if m < 1:
        raise InputError("dimension must be positive")
    if not (0 <= k1 < m and 0 <= k2 < m):
        raise InputError(f"exponents must lie in [0, {m}), got ({k1}, {k2})")
    shift = np.roll(np.eye(m, dtype=complex), 1, axis=0)
    phase = np.diag(np.exp(2j * np.pi * np.arange(m) / m))
    return np.linalg.matrix_power(shift, k1) @ np.linalg.matrix_power(phase, k2)


def bell_basis(m: int) -> dict[tuple[int, int], np.ndarray]:
    """Generalized Bell basis ``{(k1,k2): vec(W)vec(W)*/m}`` on ``C^m (x) C^m``."""
    if m < 1:
        raise InputError("dimension must be positive")
    return {
        (k1, k2): projector(vec(gen_pauli(m, k1, k2))) / m
        for k1 in range(m)
        for k2 in range(m)
    }


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > 1e-14)
    if idx.size == 0:
        return v
    z = v[idx[0]]
    return v * (abs(z) / z)


def mub(d: int) -> list[np.ndarray]:
    """``d + 1`` mutually unbiased bases of ``C^d`` for prime ``d``.

    Each basis is returned as a unitary whose columns are the basis vectors.
    Basis 0 is the computational basis. For odd ``d``, vector ``j`` of basis
    ``k >= 1`` has components ``w^((k-1) n(n-1)/2 - j n) / sqrt(d)`` with
    ``w = exp(2 pi i / d)``. Every vector is rescaled so that its first
    nonzero component is real and positive.
    """
    d = int(d)
    if not is_prime(d):
        raise InputError(f"mutually unbiased bases are only built for prime d, got {d}")
    s = 1 / np.sqrt(d)
    bases = [np.eye(d, dtype=complex)]
    if d == 2:
        bases.append(s * np.array([[1, 1], [1, -1]], dtype=complex))
        bases.append(s * np.array([[1, 1], [1j, -1j]], dtype=complex))
    else:
        w = np.exp(2j * np.pi / d)
        n = np.arange(d)
        for k in range(1, d + 1):
            cols = [
                w ** (((k - 1) * (n * (n - 1) // 2) - j * n) % d) * s for j in range(d)
            ]
            bases.append(np.column_stack(cols))
    return [np.column_stack([_fix_phase(b[:, j]) for j in range(d)]) for b in bases]


def random_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise InputError("dimension must be positive")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(n: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random density matrix ``G G* / tr(G G*)`` with ``G`` complex Gaussian."""
    rng = np.random.default_rng(seed)
    k = n if rank is None else rank
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def teleport_simulate(m: int, rho) -> np.ndarray:
    """Run the generalized teleportation protocol on ``rho`` and return Bob's state.

    The input register Z holds ``rho``; X and Y share the maximally entangled
    state. A Bell measurement on (Z, X) with outcome ``(k1, k2)`` is followed
    by the correction ``W = X^k1 Z^k2`` on Y. The unnormalized corrected
    states are summed over outcomes.
    """
    rho = check_hermitian(rho, 1e-10, "rho")
    if rho.shape != (m, m):
        raise InputError(f"rho must be {m}x{m}, got {rho.shape}")
    if abs(np.trace(rho) - 1) > 1e-9 or min_eigenvalue(rho) < -PSD_TOL:
        raise InvariantError("rho is not a density matrix")
    phi = bell_basis(m)[0, 0]
    sigma = np.kron(rho, phi)
    eye = np.eye(m)
    out = np.zeros((m, m), dtype=complex)
    for (k1, k2), b in bell_basis(m).items():
        p = np.kron(b, eye)
        post = partial_trace(p @ sigma @ p, [m, m, m], keep=[2])
        w = gen_pauli(m, k1, k2)
        out += w @ post @ w.conj().T
    return out


def real_embedding(h) -> np.ndarray:
    """Map ``H`` to ``[[Re H, -Im H], [Im H, Re H]]``."""
    h = np.asarray(h)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])
