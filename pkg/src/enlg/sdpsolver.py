"""Primal-dual interior-point solver for block-structured standard-form SDPs.

The primal problem is::

    maximize    sum_b <A_b, X_b>
    subject to  sum_b <B_jb, X_b> = gamma_j   for every constraint j
                X_b >= 0                      for every block b

with Hermitian data, and the dual is::

    minimize    gamma . y
    subject to  sum_j y_j B_jb - A_b = S_b >= 0.

Complex blocks are mapped to real symmetric blocks of twice the size through
``H -> [[Re H, -Im H], [Im H, Re H]] / 2`` (the factor keeps inner products
unchanged). Iterations use the HKM search direction with Mehrotra's
predictor-corrector scheme from the infeasible start ``X = S = tau I``,
``y = 0``.

Constraints are stored as sparse real-linear functionals on the Hermitian
blocks, which keeps problem assembly cheap for the moment-matrix relaxations
that emit thousands of short constraints.
"""

from __future__ import annotations

import dataclasses
import enum
import time
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import InputError, InvariantError
from .tolerances import HERMITIAN_TOL

__all__ = [
    "Status",
    "SolverOptions",
    "SdpProblem",
    "SdpBuilder",
    "SdpSolution",
    "CertificateReport",
    "embed_real",
    "solve",
    "check_certificate",
]


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITER = "MaxIter"
    INFEASIBLE = "Infeasible"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclasses.dataclass(frozen=True)
class SolverOptions:
    """Stopping rules and safeguards for :func:`solve`.

    Parameters
    ----------
    gap_tol : float
        Relative duality gap ``|p - d| / max(1, |p|)`` required for ``Optimal``.
    feas_tol : float
        Bound on the primal and dual residuals, relative to ``1 + ||data||``.
    max_iter : int
        Iteration limit.
    step_fraction : float
        Fraction of the distance to the PSD boundary taken per step.
    reg_start, reg_max : float
        Schur complement regularization, doubled from ``reg_start`` until the
        Cholesky factorization succeeds or ``reg_max`` is exceeded. Both are
        relative to the largest diagonal entry.
    refine_steps : int
        Iterative-refinement passes on each Schur complement solve.
    log : text stream or None
        If given, one fixed-width line per iteration is written to it.
    """

    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.95
    reg_start: float = 1e-12
    reg_max: float = 1e-6
    refine_steps: int = 2
    log: IO[str] | None = None


# --------------------------------------------------------------------------
# Problem data
# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True, eq=False)
class SdpProblem:
    """Block-structured SDP in standard form (maximization).

    Attributes
    ----------
    block_dims : tuple of int
        Dimension of each PSD block.
    complex_blocks : tuple of bool
        Whether each block is a complex Hermitian (``True``) or real
        symmetric (``False``) variable.
    objective : tuple of ndarray
        Dense Hermitian objective matrix per block.
    con_index, con_block, con_row, con_col : ndarray of int
    con_value : ndarray of complex
        Coordinate list of the constraint matrices: entry ``(row, col)`` of
        ``B_j`` on block ``b`` has value ``con_value``. Both triangles are
        stored, so each ``B_j`` is explicitly Hermitian.
    rhs : ndarray of float
        The right-hand sides ``gamma_j``.
    """

    block_dims: tuple[int, ...]
    complex_blocks: tuple[bool, ...]
    objective: tuple[np.ndarray, ...]
    con_index: np.ndarray
    con_block: np.ndarray
    con_row: np.ndarray
    con_col: np.ndarray
    con_value: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        nb = len(self.block_dims)
        if nb == 0:
            raise InputError("an SDP needs at least one block")
        if len(self.complex_blocks) != nb or len(self.objective) != nb:
            raise InputError("block metadata lengths disagree")
        for b, (n, a) in enumerate(zip(self.block_dims, self.objective)):
            if a.shape != (n, n):
                raise InputError(f"objective block {b} has shape {a.shape}, expected {(n, n)}")
            dev = np.max(np.abs(a - a.conj().T), initial=0.0)
            if dev > HERMITIAN_TOL * max(1.0, np.max(np.abs(a), initial=0.0)):
                raise InvariantError(f"objective block {b} is not Hermitian (deviation {dev:.3g})")
            if not self.complex_blocks[b] and np.any(np.abs(a.imag) > HERMITIAN_TOL):
                raise InvariantError(f"objective block {b} is complex but the block is real")
        m = self.rhs.shape[0]
        if m == 0:
            raise InputError("the constraint list is empty")
        k = self.con_index
        if k.size and (k.min() < 0 or k.max() >= m):
            raise InputError("constraint index out of range")
        dims = np.asarray(self.block_dims)
        if self.con_block.size:
            if self.con_block.min() < 0 or self.con_block.max() >= nb:
                raise InputError("constraint block index out of range")
            n = dims[self.con_block]
            bad = (self.con_row < 0) | (self.con_col < 0) | (self.con_row >= n) | (self.con_col >= n)
            if np.any(bad):
                raise InputError("constraint entry outside its block")
        self._check_constraint_hermitian()

    @property
    def num_constraints(self) -> int:
        return int(self.rhs.shape[0])

    def _keyed_matrix(self, transpose: bool) -> sp.csr_matrix:
        offsets = np.concatenate([[0], np.cumsum(np.asarray(self.block_dims) ** 2)])
        n = np.asarray(self.block_dims)[self.con_block]
        r, c = (self.con_col, self.con_row) if transpose else (self.con_row, self.con_col)
        cols = offsets[self.con_block] + r * n + c
        vals = self.con_value.conj() if transpose else self.con_value
        return sp.csr_matrix(
            (vals, (self.con_index, cols)), shape=(self.num_constraints, int(offsets[-1]))
        )

    def _check_constraint_hermitian(self):
        if self.con_value.size == 0:
            return
        a = self._keyed_matrix(False)
        d = a - self._keyed_matrix(True)
        dev = np.max(np.abs(d.data), initial=0.0)
        if dev > HERMITIAN_TOL * max(1.0, np.max(np.abs(a.data), initial=0.0)):
            raise InvariantError(f"a constraint matrix is not Hermitian (deviation {dev:.3g})")
        real = ~np.asarray(self.complex_blocks)[self.con_block]
        if np.any(np.abs(self.con_value.imag[real]) > HERMITIAN_TOL):
            raise InvariantError("complex constraint coefficients on a real block")

    def constraint_matrix(self, j: int, block: int) -> np.ndarray:
        """Dense ``B_j`` restricted to ``block``."""
        n = self.block_dims[block]
        out = np.zeros((n, n), dtype=complex)
        sel = (self.con_index == j) & (self.con_block == block)
        np.add.at(out, (self.con_row[sel], self.con_col[sel]), self.con_value[sel])
        return out

    def apply(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        """Return ``(<B_j, X>)_j`` for block matrices ``xs``."""
        vals = np.zeros(self.num_constraints)
        for b in range(len(self.block_dims)):
            sel = self.con_block == b
            x = np.asarray(xs[b])[self.con_row[sel], self.con_col[sel]]
            np.add.at(vals, self.con_index[sel], np.real(np.conj(self.con_value[sel]) * x))
        return vals

    def adjoint(self, y) -> list[np.ndarray]:
        """Return the blocks of ``sum_j y_j B_j``."""
        out = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        y = np.asarray(y, dtype=float)
        for b in range(len(self.block_dims)):
            sel = self.con_block == b
            np.add.at(out[b], (self.con_row[sel], self.con_col[sel]), y[self.con_index[sel]] * self.con_value[sel])
        return out

    def objective_value(self, xs: Sequence[np.ndarray]) -> float:
        return float(sum(np.real(np.vdot(a, x)) for a, x in zip(self.objective, xs)))

    @classmethod
    def from_dense(cls, objective, constraints, rhs, complex_blocks=None) -> "SdpProblem":
        """Build a problem from dense matrices.

        ``objective`` is a list of per-block matrices; ``constraints`` is a
        list whose ``j``-th element is a list of per-block matrices ``B_j``
        (``None`` for an all-zero block).
        """
        objective = [np.asarray(a, dtype=complex) for a in objective]
        dims = [a.shape[0] for a in objective]
        if complex_blocks is None:
            complex_blocks = [bool(np.any(np.abs(a.imag) > 0)) for a in objective]
            for bs in constraints:
                for b, mat in enumerate(bs):
                    if mat is not None and np.any(np.abs(np.imag(mat)) > 0):
                        complex_blocks[b] = True
        idx, blk, row, col, val = [], [], [], [], []
        for j, bs in enumerate(constraints):
            if len(bs) != len(dims):
                raise InputError(f"constraint {j} has {len(bs)} blocks, expected {len(dims)}")
            for b, mat in enumerate(bs):
                if mat is None:
                    continue
                mat = np.asarray(mat, dtype=complex)
                if mat.shape != (dims[b], dims[b]):
                    raise InputError(f"constraint {j} block {b} has shape {mat.shape}")
                p, q = np.nonzero(mat)
                idx.extend([j] * len(p))
                blk.extend([b] * len(p))
                row.extend(p)
                col.extend(q)
                val.extend(mat[p, q])
        return cls(
            block_dims=tuple(dims),
            complex_blocks=tuple(bool(c) for c in complex_blocks),
            objective=tuple(objective),
            con_index=np.asarray(idx, dtype=np.int64),
            con_block=np.asarray(blk, dtype=np.int64),
            con_row=np.asarray(row, dtype=np.int64),
            con_col=np.asarray(col, dtype=np.int64),
            con_value=np.asarray(val, dtype=complex),
            rhs=np.asarray(rhs, dtype=float),
        )


class SdpBuilder:
    """Incremental assembly of an :class:`SdpProblem`.

    Constraints are added as real-linear functionals of the block entries:
    a term ``(b, p, q, re, im)`` contributes ``re * Re X_b[p,q] + im * Im X_b[p,q]``.
    Terms naming the same entry accumulate. On real blocks the imaginary
    coefficient is ignored.
    """

    def __init__(self):
        self.block_dims: list[int] = []
        self.complex_blocks: list[bool] = []
        self._objective: list[np.ndarray] = []
        self._terms: list[tuple[int, int, int, int, complex]] = []
        self._rhs: list[float] = []

    def add_block(self, dim: int, complex_: bool = True) -> int:
        self.block_dims.append(int(dim))
        self.complex_blocks.append(bool(complex_))
        self._objective.append(np.zeros((dim, dim), dtype=complex))
        return len(self.block_dims) - 1

    def add_objective(self, block: int, mat) -> None:
        mat = np.asarray(mat, dtype=complex)
        if not self.complex_blocks[block]:
            mat = mat.real.astype(complex)
        self._objective[block] += mat

    @property
    def num_constraints(self) -> int:
        return len(self._rhs)

    def add_linear(self, terms: Iterable[tuple[int, int, int, float, float]], rhs: float) -> int:
        """Add ``sum re*Re X[p,q] + im*Im X[p,q] = rhs`` and return its index."""
        j = len(self._rhs)
        acc: dict[tuple[int, int, int], complex] = {}
        for b, p, q, re, im in terms:
            if not self.complex_blocks[b]:
                im = 0.0
            if p > q:  # Re is symmetric, Im antisymmetric
                p, q, im = q, p, -im
            if p == q:
                im = 0.0
            key = (b, p, q)
            acc[key] = acc.get(key, 0.0) + complex(re, im)
        for (b, p, q), c in acc.items():
            if c == 0:
                continue
            if p == q:
                if c.real != 0:
                    self._terms.append((j, b, p, p, complex(c.real)))
                continue
            v = complex(c.real, c.imag) / 2
            self._terms.append((j, b, p, q, v))
            self._terms.append((j, b, q, p, v.conjugate()))
        self._rhs.append(float(rhs))
        return j

    def add_matrix_equality(self, terms: Sequence[tuple[int, float]], rhs) -> list[int]:
        """Constrain ``sum_i c_i X_{b_i} = rhs`` entrywise (Hermitian ``rhs``).

        One constraint is added per real degree of freedom of the upper
        triangle. Imaginary parts are skipped when every block involved is real.
        """
        n = self.block_dims[terms[0][0]]
        rhs = np.zeros((n, n)) if rhs is None else np.asarray(rhs, dtype=complex)
        cplx = any(self.complex_blocks[b] for b, _ in terms)
        out = []
        for p in range(n):
            for q in range(p, n):
                out.append(self.add_linear([(b, p, q, c, 0.0) for b, c in terms], rhs[p, q].real))
                if cplx and q > p:
                    out.append(self.add_linear([(b, p, q, 0.0, c) for b, c in terms], rhs[p, q].imag))
        return out

    def build(self) -> SdpProblem:
        if self._terms:
            j, b, p, q, v = (np.asarray(a) for a in zip(*self._terms))
        else:
            j = b = p = q = np.zeros(0, dtype=np.int64)
            v = np.zeros(0, dtype=complex)
        return SdpProblem(
            block_dims=tuple(self.block_dims),
            complex_blocks=tuple(self.complex_blocks),
            objective=tuple(a.copy() for a in self._objective),
            con_index=j.astype(np.int64),
            con_block=b.astype(np.int64),
            con_row=p.astype(np.int64),
            con_col=q.astype(np.int64),
            con_value=v.astype(complex),
            rhs=np.asarray(self._rhs, dtype=float),
        )


# --------------------------------------------------------------------------
# Real embedding
# --------------------------------------------------------------------------


def embed_real(p: SdpProblem) -> SdpProblem:
    """Equivalent problem whose blocks are all real symmetric.

    A complex block of dimension ``d`` becomes a real block of dimension
    ``2d``. Its data matrices are mapped by ``H -> E(H)/2`` with
    ``E(H) = [[Re H, -Im H], [Im H, Re H]]``, so that
    ``<E(B)/2, E(X)> = <B, X>``: constraint right-hand sides and the optimal
    value are unchanged. Real blocks are copied as they are.
    """
    dims, objective = [], []
    for n, c, a in zip(p.block_dims, p.complex_blocks, p.objective):
        if c:
            dims.append(2 * n)
            objective.append((_embed(a) / 2).astype(complex))
        else:
            dims.append(n)
            objective.append(a.real.astype(complex))
    cplx = np.asarray(p.complex_blocks)[p.con_block]
    d = np.asarray(p.block_dims)[p.con_block]
    re, im = p.con_value.real, p.con_value.imag
    parts_idx, parts_blk, parts_row, parts_col, parts_val = [], [], [], [], []

    def put(mask, dr, dc, val):
        parts_idx.append(p.con_index[mask])
        parts_blk.append(p.con_block[mask])
        parts_row.append(p.con_row[mask] + dr[mask])
        parts_col.append(p.con_col[mask] + dc[mask])
        parts_val.append(val[mask])

    zero = np.zeros_like(d)
    real_mask = ~cplx
    put(real_mask, zero, zero, re)
    half_re, half_im = re / 2, im / 2
    re_mask = cplx & (re != 0)
    im_mask = cplx & (im != 0)
    put(re_mask, zero, zero, half_re)
    put(re_mask, d, d, half_re)
    put(im_mask, d, zero, half_im)
    put(im_mask, zero, d, -half_im)
    cat = np.concatenate
    return SdpProblem(
        block_dims=tuple(dims),
        complex_blocks=tuple(False for _ in dims),
        objective=tuple(objective),
        con_index=cat(parts_idx),
        con_block=cat(parts_blk),
        con_row=cat(parts_row),
        con_col=cat(parts_col),
        con_value=cat(parts_val).astype(complex),
        rhs=p.rhs.copy(),
    )


def _embed(h: np.ndarray) -> np.ndarray:
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _unembed(x: np.ndarray) -> np.ndarray:
    d = x.shape[0] // 2
    re = (x[:d, :d] + x[d:, d:]) / 2
    im = (x[d:, :d] - x[:d, d:]) / 2
    return re + 1j * im


# --------------------------------------------------------------------------
# Solution and certificate
# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True, eq=False)
class SdpSolution:
    """Primal-dual pair returned by :func:`solve`.

    ``X`` and ``S`` hold one Hermitian matrix per block of the original
    problem; ``S = sum_j y_j B_j - A`` is the dual slack.
    """

    X: tuple[np.ndarray, ...]
    y: np.ndarray
    S: tuple[np.ndarray, ...]
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    status: Status
    iterations: int
    solve_time: float

    @property
    def value(self) -> float:
        return self.primal_value

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclasses.dataclass(frozen=True)
class CertificateReport:
    """Independent check of an SDP solution.

    ``ok`` is true when every quantity is inside the supplied tolerances.
    ``violations`` lists human-readable descriptions of the failures.
    """

    min_primal_eigenvalue: float
    min_dual_eigenvalue: float
    max_constraint_residual: float
    worst_constraint: int
    max_dual_residual: float
    primal_value: float
    dual_value: float
    gap: float
    ok: bool
    violations: tuple[str, ...]


def check_certificate(
    p: SdpProblem,
    s: SdpSolution,
    feas_tol: float = 1e-8,
    psd_tol: float = 1e-8,
    gap_tol: float = 1e-6,
) -> CertificateReport:
    """Recompute feasibility, slackness and the duality gap from scratch."""
    xs = [np.asarray(x) for x in s.X]
    res = p.apply(xs) - p.rhs
    worst = int(np.argmax(np.abs(res)))
    max_res = float(np.abs(res[worst]))
    lam_x = min(float(np.linalg.eigvalsh((x + x.conj().T) / 2)[0]) for x in xs)
    slack = [a_y - a for a_y, a in zip(p.adjoint(s.y), p.objective)]
    lam_s = min(float(np.linalg.eigvalsh((z + z.conj().T) / 2)[0]) for z in slack)
    dual_res = max(float(np.max(np.abs(z - zs), initial=0.0)) for z, zs in zip(slack, s.S))
    pval = p.objective_value(xs)
    dval = float(p.rhs @ s.y)
    gap = abs(pval - dval)
    bad = []
    if lam_x < -psd_tol:
        bad.append(f"primal block not PSD (min eigenvalue {lam_x:.3g})")
    if lam_s < -psd_tol:
        bad.append(f"dual slack not PSD (min eigenvalue {lam_s:.3g})")
    if max_res > feas_tol:
        bad.append(f"constraint {worst} residual {max_res:.3g}")
    if gap > gap_tol * max(1.0, abs(pval)):
        bad.append(f"duality gap {gap:.3g}")
    return CertificateReport(
        min_primal_eigenvalue=lam_x,
        min_dual_eigenvalue=lam_s,
        max_constraint_residual=max_res,
        worst_constraint=worst,
        max_dual_residual=dual_res,
        primal_value=pval,
        dual_value=dval,
        gap=gap,
        ok=not bad,
        violations=tuple(bad),
    )


# --------------------------------------------------------------------------
# Interior-point iteration on the real form
# --------------------------------------------------------------------------


class _RealForm:
    """Real symmetric problem data laid out for the Schur complement."""

    def __init__(self, p: SdpProblem):
        self.dims = list(p.block_dims)
        self.offsets = np.concatenate([[0], np.cumsum(np.asarray(self.dims) ** 2)]).astype(np.int64)
        self.C = [a.real.copy() for a in p.objective]
        n = np.asarray(self.dims)[p.con_block]
        cols = self.offsets[p.con_block] + p.con_row * n + p.con_col
        A = sp.csr_matrix(
            (p.con_value.real, (p.con_index, cols)), shape=(p.num_constraints, int(self.offsets[-1]))
        )
        A.sum_duplicates()
        A.eliminate_zeros()
        self.A = A
        self.AT = A.T.tocsr()
        self.b = p.rhs.copy()
        self.m = A.shape[0]
        self.n_total = int(sum(self.dims))
        self.blocks = [self._block_layout(k) for k in range(len(self.dims))]

    def _block_layout(self, k):
        n = self.dims[k]
        Ab = self.A[:, self.offsets[k]:self.offsets[k + 1]].tocsr()
        rows = np.flatnonzero(np.diff(Ab.indptr))
        if rows.size == 0:
            return None
        sub = Ab[rows]
        cols_used = np.unique(sub.indices)
        sub_used = sub[:, cols_used].tocsr()
        lens = np.diff(sub.indptr)
        L = int(lens.max())
        P = np.zeros((rows.size, L), dtype=np.int64)
        Q = np.zeros((rows.size, L), dtype=np.int64)
        V = np.zeros((rows.size, L))
        for r in range(rows.size):
            lo, hi = sub.indptr[r], sub.indptr[r + 1]
            c = sub.indices[lo:hi]
            P[r, : hi - lo] = c // n
            Q[r, : hi - lo] = c % n
            V[r, : hi - lo] = sub.data[lo:hi]
        chunk = max(1, int(2e7 // max(1, n * n * max(1, L // 4))))
        return dict(rows=rows, P=P, Q=Q, V=V, cols=cols_used, sub=sub_used, chunk=chunk)

    def apply(self, xs):
        return self.A @ np.concatenate([x.ravel() for x in xs])

    def adjoint(self, y):
        v = self.AT @ y
        return [v[self.offsets[k]:self.offsets[k + 1]].reshape(n, n) for k, n in enumerate(self.dims)]

    def schur(self, xs, zs):
        """``M[k, l] = <B_k, X B_l Z>`` accumulated block by block."""
        M = np.zeros((self.m, self.m))
        for lay, x, z in zip(self.blocks, xs, zs):
            if lay is None:
                continue
            rows, P, Q, V, cols, sub, chunk = (
                lay[k] for k in ("rows", "P", "Q", "V", "cols", "sub", "chunk")
            )
            K = rows.size
            n = x.shape[0]
            local = np.empty((K, K))
            for lo in range(0, K, chunk):
                hi = min(K, lo + chunk)
                xp = x[P[lo:hi]] * V[lo:hi, :, None]  # (c, L, n): rows X[p_e, :] scaled
                zq = z[Q[lo:hi]]  # (c, L, n)
                g = np.matmul(xp.transpose(0, 2, 1), zq)  # X B_k Z
                h = g.reshape(hi - lo, n * n)[:, cols]
                local[lo:hi] = (sub @ h.T).T
            M[np.ix_(rows, rows)] += local
        return (M + M.T) / 2


def _inner(xs, ys) -> float:
    return float(sum(np.vdot(x, y).real for x, y in zip(xs, ys)))


def _max_step(xs, dxs, cap: float = 1.0) -> float:
    """Largest ``a <= cap`` with ``X + a dX`` PSD (X positive definite)."""
    worst = 0.0
    for x, dx in zip(xs, dxs):
        L = np.linalg.cholesky(x)
        t = sla.solve_triangular(L, dx, lower=True)
        t = sla.solve_triangular(L, t.T, lower=True)
        lam = np.linalg.eigvalsh((t + t.T) / 2)[0]
        worst = min(worst, lam)
    if worst >= 0:
        return cap
    return min(cap, -1.0 / worst)


def _factor(M, reg_start, reg_max):
    scale = max(1.0, float(np.max(np.abs(np.diag(M)), initial=0.0)))
    try:
        return sla.cho_factor(M, lower=True, check_finite=False), 0.0
    except (np.linalg.LinAlgError, sla.LinAlgError):
        pass
    reg = reg_start
    eye = np.eye(M.shape[0])
    while reg <= reg_max:
        try:
            return sla.cho_factor(M + reg * scale * eye, lower=True, check_finite=False), reg
        except (np.linalg.LinAlgError, sla.LinAlgError):
            reg *= 2
    return None, reg


def _spd_inverse(s):
    c = sla.cho_factor(s, lower=True, check_finite=False)
    z = sla.cho_solve(c, np.eye(s.shape[0]), check_finite=False)
    return (z + z.T) / 2


def _log_header(log):
    log.write(f"{'iter':>4} {'primal':>15} {'dual':>15} {'gap':>10} {'p_res':>10} {'d_res':>10} {'step_p':>8} {'step_d':>8}\n")


def _solve_real(rf: _RealForm, opts: SolverOptions):
    dims = rf.dims
    tau = 1.0 + float(np.max(np.abs(rf.b), initial=0.0))
    X = [tau * np.eye(n) for n in dims]
    S = [tau * np.eye(n) for n in dims]
    y = np.zeros(rf.m)
    b_norm = 1.0 + float(np.max(np.abs(rf.b), initial=0.0))
    c_norm = 1.0 + max(float(np.max(np.abs(c), initial=0.0)) for c in rf.C)
    status = Status.MAX_ITER
    log = opts.log
    if log is not None:
        _log_header(log)
    ap = ad = 0.0
    it = 0
    best = None
    for it in range(opts.max_iter + 1):
        rp = rf.b - rf.apply(X)
        ATy = rf.adjoint(y)
        Rd = [c + s - aty for c, s, aty in zip(rf.C, S, ATy)]
        pobj = _inner(rf.C, X)
        dobj = float(rf.b @ y)
        gap = abs(pobj - dobj) / max(1.0, abs(pobj))
        pres = float(np.max(np.abs(rp), initial=0.0)) / b_norm
        dres = max(float(np.max(np.abs(r), initial=0.0)) for r in Rd) / c_norm
        if log is not None:
            log.write(f"{it:4d} {pobj:15.8e} {dobj:15.8e} {gap:10.3e} {pres:10.3e} {dres:10.3e} {ap:8.4f} {ad:8.4f}\n")
        merit = max(gap, pres, dres)
        if best is None or merit < best[0]:
            best = (merit, [x.copy() for x in X], y.copy(), [s.copy() for s in S], it)
        if gap <= opts.gap_tol and pres <= opts.feas_tol and dres <= opts.feas_tol:
            status = Status.OPTIMAL
            break
        if it == opts.max_iter:
            break
        # Unboundedness of an iterate signals an infeasibility certificate.
        ynorm = float(np.max(np.abs(y), initial=0.0))
        xnorm = max(float(np.max(np.abs(x))) for x in X)
        if ynorm > 1e10 and dobj < 0 and pres > opts.feas_tol:
            status = Status.INFEASIBLE
            break
        if xnorm > 1e10 and dres > opts.feas_tol:
            status = Status.INFEASIBLE
            break
        try:
            Z = [_spd_inverse(s) for s in S]
        except (np.linalg.LinAlgError, sla.LinAlgError):
            status = Status.NUMERICAL_FAILURE
            break
        mu = _inner(X, S) / rf.n_total
        M = rf.schur(X, Z)
        fac, _ = _factor(M, opts.reg_start, opts.reg_max)
        if fac is None:
            status = Status.NUMERICAL_FAILURE
            break
        XRdZ = [x @ r @ z for x, r, z in zip(X, Rd, Z)]

        def direction(T):
            rhs = rf.apply([t + w for t, w in zip(T, XRdZ)]) - rp
            dy = sla.cho_solve(fac, rhs, check_finite=False)
            for _ in range(opts.refine_steps):  # the Schur matrix is ill-conditioned near the optimum
                dy += sla.cho_solve(fac, rhs - M @ dy, check_finite=False)
            dS = [a - r for a, r in zip(rf.adjoint(dy), Rd)]
            dX = [t - x @ ds @ z for t, x, ds, z in zip(T, X, dS, Z)]
            dX = [(d + d.T) / 2 for d in dX]
            return dX, dy, dS

        # Predictor
        dX, dy, dS = direction([-x for x in X])
        try:
            ap = _max_step(X, dX)
            ad = _max_step(S, dS)
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_FAILURE
            break
        mu_aff = _inner([x + ap * d for x, d in zip(X, dX)], [s + ad * d for s, d in zip(S, dS)]) / rf.n_total
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
        # Corrector
        T = [sigma * mu * z - x - (dx @ ds) @ z for z, x, dx, ds in zip(Z, X, dX, dS)]
        dX, dy, dS = direction(T)
        try:
            ap = min(1.0, opts.step_fraction * _max_step(X, dX, cap=1e30))
            ad = min(1.0, opts.step_fraction * _max_step(S, dS, cap=1e30))
        except np.linalg.LinAlgError:
            status = Status.NUMERICAL_FAILURE
            break
        if not (np.isfinite(ap) and np.isfinite(ad)) or not np.all(np.isfinite(dy)):
            status = Status.NUMERICAL_FAILURE
            break
        X = [x + ap * d for x, d in zip(X, dX)]
        S = [s + ad * d for s, d in zip(S, dS)]
        y = y + ad * dy
    if status is not Status.OPTIMAL and best is not None:
        _, X, y, S, _ = best
    return X, y, S, status, it


def solve(p: SdpProblem, opts: SolverOptions | None = None, **kwargs) -> SdpSolution:
    """Solve ``p`` and return the primal-dual pair with a status.

    Keyword arguments override fields of ``opts``. Exact duplicate and zero
    constraint rows are removed before iterating; their multipliers are
    reported as zero.
    """
    opts = dataclasses.replace(opts or SolverOptions(), **kwargs)
    t0 = time.perf_counter()
    q = embed_real(p)
    keep = _independent_rows(q)
    if keep is not None:
        q = _select_rows(q, keep)
    rf = _RealForm(q)
    X, y_red, S, status, it = _solve_real(rf, opts)
    y = np.zeros(p.num_constraints)
    y[keep if keep is not None else slice(None)] = y_red
    xs, ss = [], []
    for k, c in enumerate(p.complex_blocks):
        if c:
            xs.append(_unembed(X[k]))
            ss.append(2 * _unembed(S[k]))  # the embedded slack carries the 1/2 factor
        else:
            xs.append(X[k].astype(complex))
            ss.append(S[k].astype(complex))
    pval = p.objective_value(xs)
    dval = float(p.rhs @ y)
    pres = float(np.max(np.abs(p.apply(xs) - p.rhs), initial=0.0))
    slack = [ay - a for ay, a in zip(p.adjoint(y), p.objective)]
    dres = max(float(np.max(np.abs(z - s), initial=0.0)) for z, s in zip(slack, ss))
    return SdpSolution(
        X=tuple(xs),
        y=y,
        S=tuple(ss),
        primal_value=pval,
        dual_value=dval,
        gap=abs(pval - dval),
        primal_residual=pres,
        dual_residual=dres,
        status=status,
        iterations=it,
        solve_time=time.perf_counter() - t0,
    )


def _independent_rows(q: SdpProblem):
    """Indices of rows kept after dropping zero rows and exact duplicates.

    Returns ``None`` when nothing is dropped. A zero row with a nonzero
    right-hand side makes the problem infeasible and is rejected.
    """
    rf_cols = np.concatenate([[0], np.cumsum(np.asarray(q.block_dims) ** 2)])
    n = np.asarray(q.block_dims)[q.con_block]
    cols = rf_cols[q.con_block] + q.con_row * n + q.con_col
    A = sp.csr_matrix((q.con_value.real, (q.con_index, cols)), shape=(q.num_constraints, int(rf_cols[-1])))
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    seen: dict = {}
    keep = []
    for j in range(A.shape[0]):
        lo, hi = A.indptr[j], A.indptr[j + 1]
        if lo == hi:
            if abs(q.rhs[j]) > 1e-12:
                raise InvariantError(f"constraint {j} has a zero left-hand side but right-hand side {q.rhs[j]:g}")
            continue
        data = A.data[lo:hi]
        s = data[0]
        key = (A.indices[lo:hi].tobytes(), np.round(data / s, 12).tobytes())
        rhs = q.rhs[j] / s
        if key in seen:
            if abs(seen[key] - rhs) > 1e-9 * max(1.0, abs(rhs)):
                raise InvariantError(f"constraint {j} duplicates an earlier one with a different right-hand side")
            continue
        seen[key] = rhs
        keep.append(j)
    if len(keep) == A.shape[0]:
        return None
    return np.asarray(keep, dtype=np.int64)


def _select_rows(q: SdpProblem, keep: np.ndarray) -> SdpProblem:
    remap = -np.ones(q.num_constraints, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    sel = remap[q.con_index] >= 0
    return SdpProblem(
        block_dims=q.block_dims,
        complex_blocks=q.complex_blocks,
        objective=q.objective,
        con_index=remap[q.con_index[sel]],
        con_block=q.con_block[sel],
        con_row=q.con_row[sel],
        con_col=q.con_col[sel],
        con_value=q.con_value[sel],
        rhs=q.rhs[keep],
    )
