"""Moment-matrix hierarchy giving upper bounds on the quantum value.

The variable is one Hermitian matrix of dimension ``m * |W|`` whose
``(i, j)`` sub-block ``M_ij`` is indexed by pairs of words ``(s, t)`` from
:func:`~enlg.bounds.words.word_set`; entry ``M_ij(s, t)`` plays the role of
``u_i* P_s* P_t u_j`` for a commuting-measurement strategy. Row and column
``i * |W| + s`` belong to referee index ``i`` and word ``s``.

Entries are tied together when ``reverse(s) t`` reduces to the same
canonical word, vanish when it reduces to zero, satisfy the completeness
relations ``sum_a phi(u1 (x,a) u2) = phi(u1 u2)`` whenever every word involved
is represented in the matrix, and the empty-word diagonal entries sum to one.

The constraint pattern is identical for every sub-block, so linear
dependencies are removed once per pattern with a pivoted QR factorization
instead of on the full problem.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np
import scipy.linalg as sla

from ..errors import InputError, SizeCapError
from ..games import ExtendedGame, QuantumStrategy
from ..sdpsolver import SdpBuilder, SdpProblem, SdpSolution, SolverOptions, solve
from ..tolerances import DEFAULT_SIZE_CAP, PROJECTIVE_TOL
from ._common import require_optimal
from .words import ALICE, BOB, CanonicalWord, HierarchyLevel, alphabet, reduce_letters, word_set

__all__ = [
    "MomentStructure",
    "HierarchyResult",
    "moment_structure",
    "build_hierarchy_sdp",
    "qc_upper_bound",
    "strategy_moment_matrix",
]


@dataclasses.dataclass(frozen=True, eq=False)
class MomentStructure:
    """Combinatorial description of one ``|W| x |W|`` sub-block.

    Attributes
    ----------
    words : tuple of CanonicalWord
    classes : dict
        Maps each canonical letter tuple (``None`` for zero) to the list of
        flat positions ``s * |W| + t`` whose entry reduces to it.
    equations : ndarray, shape (k, |W|**2)
        Homogeneous linear relations satisfied by every sub-block.
    """

    words: tuple[CanonicalWord, ...]
    classes: dict
    equations: np.ndarray

    @property
    def size(self) -> int:
        return len(self.words)

    def position(self, s: int, t: int) -> int:
        return s * self.size + t


def moment_structure(game: ExtendedGame, level) -> MomentStructure:
    level = HierarchyLevel.parse(level)
    words = word_set(game, level)
    n = len(words)
    classes: dict = {}
    for s, ws in enumerate(words):
        rev = ws.letters[::-1]
        for t, wt in enumerate(words):
            key = reduce_letters(rev + wt.letters)
            classes.setdefault(key, []).append(s * n + t)
    rep = {key: pos[0] for key, pos in classes.items() if key is not None}
    rows: list[dict[int, float]] = []
    for key, pos in classes.items():
        if key is None:
            rows.extend({p: 1.0} for p in pos)
        else:
            rows.extend({p: 1.0, pos[0]: -1.0} for p in pos[1:])
    rows.extend(_completeness_rows(game, rep))
    eq = np.zeros((len(rows), n * n))
    for r, row in enumerate(rows):
        for p, c in row.items():
            eq[r, p] += c
    return MomentStructure(tuple(words), classes, eq)


def _completeness_rows(game: ExtendedGame, rep: dict) -> list[dict[int, float]]:
    """Relations ``sum_a phi(u1 (x,a) u2) - phi(u1 u2) = 0`` inside the class set."""
    letters = alphabet(game.num_questions_a, game.num_answers_a, game.num_questions_b, game.num_answers_b)
    questions = [(ALICE, x, game.num_answers_a) for x in range(game.num_questions_a)] + [
        (BOB, y, game.num_answers_b) for y in range(game.num_questions_b)
    ]
    max_len = max(len(k) for k in rep)
    seen = set()
    rows = []

    def visit(u: tuple):
        base = reduce_letters(u)
        if base is None:
            return
        if base in rep:
            for party, x, k in questions:
                for cut in range(len(u) + 1):
                    out = [reduce_letters(u[:cut] + ((party, x, a),) + u[cut:]) for a in range(k)]
                    if any(w is not None and w not in rep for w in out):
                        continue
                    row: dict[int, float] = {}
                    for w in out:
                        if w is not None:
                            row[rep[w]] = row.get(rep[w], 0.0) + 1.0
                    row[rep[base]] = row.get(rep[base], 0.0) - 1.0
                    row = {p: c for p, c in row.items() if c != 0}
                    key = tuple(sorted(row.items()))
                    if row and key not in seen:
                        seen.add(key)
                        rows.append(row)
        if len(u) + 1 < max_len:
            for letter in letters:
                visit(u + (letter,))

    visit(())
    return rows


def _independent(rows: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Indices of a maximal linearly independent subset of ``rows``."""
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    _, r, piv = sla.qr(rows.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(r))
    if d.size == 0 or d[0] == 0:
        return np.zeros(0, dtype=np.int64)
    rank = int(np.sum(d > tol * d[0]))
    return np.sort(piv[:rank])


def _dof_rows(eq: np.ndarray, n: int, kind: str) -> np.ndarray:
    """Rewrite generic sub-block relations in independent real coordinates.

    ``kind`` is ``"sym"`` for the real parts of a diagonal sub-block (entry
    ``(s,t)`` equals ``(t,s)``) and ``"anti"`` for its imaginary parts
    (entry ``(s,t)`` is minus ``(t,s)``, diagonal zero).
    """
    s, t = np.divmod(np.arange(n * n), n)
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    target = lo * n + hi
    sign = np.ones(n * n)
    if kind == "anti":
        sign = np.where(s < t, 1.0, np.where(s > t, -1.0, 0.0))
    out = np.zeros_like(eq)
    for p in range(n * n):
        out[:, target[p]] += sign[p] * eq[:, p]
    return out


# Relation patterns depend only on the alphabets, the level and realness,
# so the QR reductions are shared between games of the same shape.
_PATTERNS: dict = {}
_PATTERN_CACHE_SIZE = 32


def _pattern(game: ExtendedGame, level: HierarchyLevel, cplx: bool):
    """``(structure, off-diagonal rows, symmetric rows, antisymmetric rows)``."""
    key = (game.V.shape[:4], str(level), cplx)
    hit = _PATTERNS.get(key)
    if hit is not None:
        return hit
    st = moment_structure(game, level)
    n, eq = st.size, st.equations
    transposed = eq.reshape(-1, n, n).transpose(0, 2, 1).reshape(-1, n * n)
    off_rows = np.vstack([eq, transposed])
    off_sel = off_rows[_independent(off_rows)]
    sym_sel = eq[_independent(_dof_rows(eq, n, "sym"))]
    anti_sel = eq[_independent(_dof_rows(eq, n, "anti"))] if cplx else eq[:0]
    for a in (eq, off_sel, sym_sel, anti_sel):
        a.flags.writeable = False
    if len(_PATTERNS) >= _PATTERN_CACHE_SIZE:
        _PATTERNS.clear()
    _PATTERNS[key] = (st, off_sel, sym_sel, anti_sel)
    return _PATTERNS[key]


def build_hierarchy_sdp(
    game: ExtendedGame, level=1, size_cap: int | None = None
) -> tuple[SdpProblem, MomentStructure]:
    """Assemble the moment-matrix SDP for ``game`` at ``level``."""
    level = HierarchyLevel.parse(level)
    n, m = len(word_set(game, level)), game.ref_dim
    N = n * m
    cap = DEFAULT_SIZE_CAP if size_cap is None else size_cap
    if N > cap:
        raise SizeCapError(f"moment matrix dimension {N} exceeds the cap {cap}", cap=cap)
    cplx = not game.is_real
    st, off_sel, sym_sel, anti_sel = _pattern(game, level, cplx)

    bld = SdpBuilder()
    blk = bld.add_block(N, complex_=cplx)

    def emit(rows, i, j, re, im):
        for row in rows:
            (pos,) = np.nonzero(row)
            s, t = np.divmod(pos, n)
            bld.add_linear(
                [(blk, i * n + a, j * n + b, re * c, im * c) for a, b, c in zip(s, t, row[pos])], 0.0
            )

    for i in range(m):
        emit(sym_sel, i, i, 1.0, 0.0)
        emit(anti_sel, i, i, 0.0, 1.0)
        for j in range(i + 1, m):
            emit(off_sel, i, j, 1.0, 0.0)
            if cplx:
                emit(off_sel, i, j, 0.0, 1.0)
    eps = st.words.index(CanonicalWord())
    bld.add_linear([(blk, i * n + eps, i * n + eps, 1.0, 0.0) for i in range(m)], 1.0)

    index = {w.letters: k for k, w in enumerate(st.words)}
    A = np.zeros((N, N), dtype=complex)
    W = game.weighted()
    for x, y in itertools.product(range(game.num_questions_a), range(game.num_questions_b)):
        for a, b in itertools.product(range(game.num_answers_a), range(game.num_answers_b)):
            v = W[a, b, x, y]
            if not v.any():
                continue
            s = index[((ALICE, x, a),)]
            t = index[((BOB, y, b),)]
            rows = np.arange(m) * n + s
            cols = np.arange(m) * n + t
            # M_ij(s,t) carries sigma_ji, so the assemblage appears transposed
            A[np.ix_(rows, cols)] += v.T / 2
            A[np.ix_(cols, rows)] += v.conj() / 2
    bld.add_objective(blk, A)
    return bld.build(), st


@dataclasses.dataclass(frozen=True, eq=False)
class HierarchyResult:
    """Optimal value and moment matrix of one hierarchy level."""

    value: float
    moment: np.ndarray
    words: tuple[CanonicalWord, ...]
    level: HierarchyLevel
    solution: SdpSolution
    problem: SdpProblem

    def block(self, i: int, j: int) -> np.ndarray:
        n = len(self.words)
        return self.moment[i * n:(i + 1) * n, j * n:(j + 1) * n]


def qc_upper_bound(
    game: ExtendedGame,
    level=1,
    opts: SolverOptions | None = None,
    size_cap: int | None = None,
) -> HierarchyResult:
    """Upper bound on the commuting-measurement (hence quantum) value."""
    level = HierarchyLevel.parse(level)
    prob, st = build_hierarchy_sdp(game, level, size_cap)
    sol = require_optimal(solve(prob, opts), f"hierarchy level {level}")
    return HierarchyResult(
        value=sol.primal_value,
        moment=sol.X[0],
        words=st.words,
        level=level,
        solution=sol,
        problem=prob,
    )


def strategy_moment_matrix(strategy: QuantumStrategy, words) -> np.ndarray:
    """Moment matrix ``M_ij(s,t) = tr(P_s* P_t sigma_ji)`` of a projective strategy.

    Alice's letter ``(x, a)`` acts as ``A(a|x) (x) I`` and Bob's ``(y, b)`` as
    ``I (x) B(b|y)`` on ``U (x) V``; ``sigma_ji`` is the ``(j, i)`` referee
    block of the state.
    """
    A, B = strategy.alice, strategy.bob
    for name, ops in (("Alice", A), ("Bob", B)):
        for p in ops.reshape(-1, ops.shape[2], ops.shape[3]):
            if np.max(np.abs(p @ p - p)) > PROJECTIVE_TOL:
                raise InputError(f"{name}'s measurements must be projective")
    du, dv, m = strategy.dim_u, strategy.dim_v, strategy.ref_dim
    ops = {}
    for x in range(A.shape[1]):
        for a in range(A.shape[0]):
            ops[(ALICE, x, a)] = np.kron(A[a, x], np.eye(dv))
    for y in range(B.shape[1]):
        for b in range(B.shape[0]):
            ops[(BOB, y, b)] = np.kron(np.eye(du), B[b, y])
    d = du * dv
    word_ops = []
    for w in words:
        p = np.eye(d, dtype=complex)
        for letter in w.letters:
            p = p @ ops[letter]
        word_ops.append(p)
    lam, vecs = np.linalg.eigh(strategy.state)
    n = len(words)
    M = np.zeros((m * n, m * n), dtype=complex)
    for weight, v in zip(lam, vecs.T):
        if weight <= 0:
            continue
        u = v.reshape(du, m, dv).transpose(1, 0, 2).reshape(m, d)  # u[i] in U (x) V
        # column i*n + s holds P_s u_i
        cols = np.stack([word_ops[s] @ u[i] for i in range(m) for s in range(n)], axis=1)
        M += weight * cols.conj().T @ cols
    return M
