"""Extended nonlocal games, monogamy-of-entanglement games and strategies.

Alphabets are the integer ranges ``0..n-1``. Tables are dense arrays:

* ``ExtendedGame.V[a, b, x, y]`` is the referee operator ``V(a,b|x,y)``;
* ``MonogamyGame.R[a, x]`` is the referee measurement ``R(a|x)``;
* ``QuantumStrategy.alice[a, x]`` / ``bob[b, y]`` are the players' POVMs;
* ``Assemblage.K[a, b, x, y]`` is the unnormalized referee state.

All objects validate their invariants on construction and store read-only
arrays.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from . import linalg as la
from .errors import InputError, InvariantError, SizeCapError
from .tolerances import DEFAULT_SIZE_CAP, DISTRIBUTION_TOL, GAME_TOL

__all__ = [
    "ExtendedGame",
    "MonogamyGame",
    "QuantumStrategy",
    "Assemblage",
    "monogamy_to_extended",
    "quantum_value_of_strategy",
    "strategy_assemblage",
    "assemblage_value",
    "parallel_repeat",
    "bb84_monogamy",
    "bb84_extended",
    "chsh_extended",
    "mub_monogamy",
    "random_projective_monogamy",
]


def _frozen(a, dtype=complex) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _check_distribution(pi: np.ndarray, tol: float, name: str = "pi") -> None:
    if not np.all(np.isfinite(pi)):
        raise InputError(f"{name} has non-finite entries")
    if np.any(pi < -tol):
        raise InvariantError(f"{name} has a negative entry ({pi.min():.3g})")
    total = float(pi.sum())
    if abs(total - 1.0) > max(tol, DISTRIBUTION_TOL):
        raise InvariantError(f"{name} sums to {total:.12g}, not 1 (residual {abs(total - 1):.3g})")


def _check_povm(ops: np.ndarray, tol: float, what: str) -> None:
    """``ops[a, x]`` must be PSD and sum over ``a`` to the identity for every ``x``."""
    na, nx, d, _ = ops.shape
    eye = np.eye(d)
    for x in range(nx):
        for a in range(na):
            h = ops[a, x]
            if not la.is_hermitian(h, tol):
                raise InvariantError(f"{what}({a}|{x}) is not Hermitian")
            lam = la.min_eigenvalue(h)
            if lam < -tol:
                raise InvariantError(f"{what}({a}|{x}) is not PSD (eigenvalue {lam:.3g})")
        dev = float(np.max(np.abs(ops[:, x].sum(axis=0) - eye)))
        if dev > tol:
            raise InvariantError(f"{what}(.|{x}) does not sum to the identity (residual {dev:.3g})")


@dataclasses.dataclass(frozen=True, eq=False)
class ExtendedGame:
    """Extended nonlocal game ``(pi, V)``.

    Parameters
    ----------
    pi : array_like, shape (|Sigma_A|, |Sigma_B|)
        Question distribution.
    V : array_like, shape (|Gamma_A|, |Gamma_B|, |Sigma_A|, |Sigma_B|, m, m)
        Referee operators; each must satisfy ``0 <= V <= I``.
    tol : float
        Tolerance for the invariant checks.
    """

    pi: np.ndarray
    V: np.ndarray
    tol: dataclasses.InitVar[float] = GAME_TOL

    def __post_init__(self, tol):
        pi = np.asarray(self.pi, dtype=float)
        V = np.asarray(self.V, dtype=complex)
        if pi.ndim != 2:
            raise InputError(f"pi must be a 2-D table, got shape {pi.shape}")
        if V.ndim != 6 or V.shape[2:4] != pi.shape or V.shape[4] != V.shape[5]:
            raise InputError(f"V has shape {V.shape}, incompatible with pi of shape {pi.shape}")
        if not np.all(np.isfinite(V)):
            raise InputError("V has non-finite entries")
        _check_distribution(pi, tol)
        m = V.shape[4]
        eye = np.eye(m)
        for a, b, x, y in itertools.product(*map(range, V.shape[:4])):
            v = V[a, b, x, y]
            if not v.any():
                continue
            if not la.is_hermitian(v, tol):
                raise InvariantError(f"V({a},{b}|{x},{y}) is not Hermitian")
            w = np.linalg.eigvalsh((v + v.conj().T) / 2)
            if w[0] < -tol or w[-1] > 1 + tol:
                raise InvariantError(
                    f"V({a},{b}|{x},{y}) violates 0 <= V <= I (eigenvalues in [{w[0]:.3g}, {w[-1]:.3g}])"
                )
        object.__setattr__(self, "pi", _frozen(pi, float))
        object.__setattr__(self, "V", _frozen(V))

    @property
    def num_questions_a(self) -> int:
        return self.V.shape[2]

    @property
    def num_questions_b(self) -> int:
        return self.V.shape[3]

    @property
    def num_answers_a(self) -> int:
        return self.V.shape[0]

    @property
    def num_answers_b(self) -> int:
        return self.V.shape[1]

    @property
    def ref_dim(self) -> int:
        return self.V.shape[4]

    @property
    def is_real(self) -> bool:
        return not np.any(np.abs(self.V.imag) > 0)

    def weighted(self) -> np.ndarray:
        """``pi(x,y) V(a,b|x,y)`` with the same layout as ``V``."""
        return self.V * self.pi[None, None, :, :, None, None]


@dataclasses.dataclass(frozen=True, eq=False)
class MonogamyGame:
    """Monogamy-of-entanglement game ``(pi, R)``.

    Parameters
    ----------
    pi : array_like, shape (|Sigma|,)
    R : array_like, shape (|Gamma|, |Sigma|, m, m)
        ``R[a, x]`` is the referee's POVM element for outcome ``a`` on question ``x``.
    """

    pi: np.ndarray
    R: np.ndarray
    tol: dataclasses.InitVar[float] = GAME_TOL

    def __post_init__(self, tol):
        pi = np.asarray(self.pi, dtype=float)
        R = np.asarray(self.R, dtype=complex)
        if pi.ndim != 1:
            raise InputError(f"pi must be a vector, got shape {pi.shape}")
        if R.ndim != 4 or R.shape[1] != pi.shape[0] or R.shape[2] != R.shape[3]:
            raise InputError(f"R has shape {R.shape}, incompatible with pi of length {pi.shape[0]}")
        if not np.all(np.isfinite(R)):
            raise InputError("R has non-finite entries")
        _check_distribution(pi, tol)
        _check_povm(R, tol, "R")
        object.__setattr__(self, "pi", _frozen(pi, float))
        object.__setattr__(self, "R", _frozen(R))

    @property
    def num_questions(self) -> int:
        return self.R.shape[1]

    @property
    def num_answers(self) -> int:
        return self.R.shape[0]

    @property
    def ref_dim(self) -> int:
        return self.R.shape[2]

    def is_projective(self, tol: float = GAME_TOL) -> bool:
        return all(
            np.max(np.abs(r @ r - r)) <= tol for r in self.R.reshape(-1, self.ref_dim, self.ref_dim)
        )

    def is_uniform(self, tol: float = DISTRIBUTION_TOL) -> bool:
        return bool(np.max(np.abs(self.pi - 1.0 / self.num_questions)) <= tol)


@dataclasses.dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """Standard quantum strategy on ``U (x) R (x) V``.

    Parameters
    ----------
    state : array_like
        Density matrix on ``U (x) R (x) V`` (Alice, referee, Bob in that order).
    alice : array_like, shape (|Gamma_A|, |Sigma_A|, dim_u, dim_u)
    bob : array_like, shape (|Gamma_B|, |Sigma_B|, dim_v, dim_v)
    """

    state: np.ndarray
    alice: np.ndarray
    bob: np.ndarray
    tol: dataclasses.InitVar[float] = GAME_TOL

    def __post_init__(self, tol):
        A = np.asarray(self.alice, dtype=complex)
        B = np.asarray(self.bob, dtype=complex)
        s = la.as_matrix(self.state, "state")
        if A.ndim != 4 or B.ndim != 4:
            raise InputError("POVM tables must be 4-D arrays")
        du, dv = A.shape[2], B.shape[2]
        if s.shape[0] != s.shape[1] or s.shape[0] % (du * dv):
            raise InputError(f"state of shape {s.shape} does not fit dim_u={du}, dim_v={dv}")
        if not la.is_hermitian(s, tol) or la.min_eigenvalue(s) < -tol:
            raise InvariantError("state is not a density matrix")
        if abs(np.trace(s).real - 1) > tol:
            raise InvariantError(f"state has trace {np.trace(s).real:.12g}, not 1")
        _check_povm(A, tol, "A")
        _check_povm(B, tol, "B")
        object.__setattr__(self, "state", _frozen(s))
        object.__setattr__(self, "alice", _frozen(A))
        object.__setattr__(self, "bob", _frozen(B))

    @property
    def dim_u(self) -> int:
        return self.alice.shape[2]

    @property
    def dim_v(self) -> int:
        return self.bob.shape[2]

    @property
    def ref_dim(self) -> int:
        return self.state.shape[0] // (self.dim_u * self.dim_v)


@dataclasses.dataclass(frozen=True, eq=False)
class Assemblage:
    """Table ``K[a, b, x, y]`` of unnormalized referee states."""

    K: np.ndarray
    tol: dataclasses.InitVar[float] = GAME_TOL

    def __post_init__(self, tol):
        K = np.asarray(self.K, dtype=complex)
        if K.ndim != 6 or K.shape[4] != K.shape[5]:
            raise InputError(f"assemblage must have shape (a, b, x, y, m, m), got {K.shape}")
        for idx in itertools.product(*map(range, K.shape[:4])):
            k = K[idx]
            if not la.is_hermitian(k, tol) or la.min_eigenvalue(k) < -tol:
                raise InvariantError(f"K{idx} is not PSD")
        tr = np.einsum("abxyii->xy", K).real
        dev = float(np.max(np.abs(tr - 1)))
        if dev > tol:
            raise InvariantError(f"assemblage traces deviate from 1 by {dev:.3g}")
        object.__setattr__(self, "K", _frozen(K))


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def monogamy_to_extended(g: MonogamyGame) -> ExtendedGame:
    """Extended game in which both players receive the same question and win
    when they both report the referee's outcome."""
    n, k, m = g.num_questions, g.num_answers, g.ref_dim
    pi = np.diag(g.pi)
    V = np.zeros((k, k, n, n, m, m), dtype=complex)
    for x in range(n):
        for a in range(k):
            V[a, a, x, x] = g.R[a, x]
    return ExtendedGame(pi, V)


def strategy_assemblage(g: ExtendedGame, s: QuantumStrategy) -> np.ndarray:
    """``K(a,b|x,y) = tr_{U,V}((A_a^x (x) I (x) B_b^y) sigma)`` as an array."""
    m = g.ref_dim
    if s.ref_dim != m or s.state.shape[0] != s.dim_u * m * s.dim_v:
        raise InputError(f"strategy referee dimension {s.ref_dim} does not match game ({m})")
    if s.alice.shape[:2] != (g.num_answers_a, g.num_questions_a):
        raise InputError("Alice's POVM table does not match the game alphabets")
    if s.bob.shape[:2] != (g.num_answers_b, g.num_questions_b):
        raise InputError("Bob's POVM table does not match the game alphabets")
    du, dv = s.dim_u, s.dim_v
    sig = s.state.reshape(du, m, dv, du, m, dv)
    # K[a,b,x,y][r,r'] = sum A[a,x][j,i] B[b,y][l,k] sig[i,r,k,j,r',l]
    return np.einsum("axji,bylk,irkjsl->abxyrs", s.alice, s.bob, sig, optimize=True)


def assemblage_value(g: ExtendedGame, K) -> float:
    """``sum pi(x,y) <V(a,b|x,y), K(a,b|x,y)>``."""
    K = K.K if isinstance(K, Assemblage) else np.asarray(K)
    if K.shape != g.V.shape:
        raise InputError(f"assemblage shape {K.shape} does not match V {g.V.shape}")
    return float(np.real(np.einsum("abxyrs,abxyrs->", g.weighted().conj(), K)))


def quantum_value_of_strategy(g: ExtendedGame, s: QuantumStrategy) -> float:
    """Winning probability ``sum pi <A_a^x (x) V(a,b|x,y) (x) B_b^y, sigma>``.

    Evaluated term by term on the full space, independently of
    :func:`strategy_assemblage`.
    """
    m = g.ref_dim
    if s.ref_dim != m or s.state.shape[0] != s.dim_u * m * s.dim_v:
        raise InputError(f"strategy referee dimension {s.ref_dim} does not match game ({m})")
    if s.alice.shape[:2] != (g.num_answers_a, g.num_questions_a) or s.bob.shape[:2] != (
        g.num_answers_b,
        g.num_questions_b,
    ):
        raise InputError("strategy POVM tables do not match the game alphabets")
    W = g.weighted()
    sigma_t = s.state.T
    total = 0.0
    for a, b, x, y in itertools.product(*map(range, W.shape[:4])):
        v = W[a, b, x, y]
        if not v.any():
            continue
        op = la.kron_all([s.alice[a, x], v, s.bob[b, y]])
        total += float(np.real(np.sum(op * sigma_t)))  # tr(op sigma)
    return total


def parallel_repeat(g: MonogamyGame, r: int, size_cap: int | None = None) -> MonogamyGame:
    """``r``-fold parallel repetition.

    Question and answer tuples are indexed in mixed radix with the first
    round most significant, i.e. ``(x1, x2) -> x1 * |Sigma| + x2``. The
    referee operators are Kronecker products in round order.
    """
    if r < 1:
        raise InputError("the number of repetitions must be at least 1")
    cap = DEFAULT_SIZE_CAP if size_cap is None else size_cap
    size = g.ref_dim**r * g.num_answers**r
    if size > cap:
        raise SizeCapError(
            f"repetition size m^r * |Gamma|^r = {size} exceeds the cap {cap}", cap=cap
        )
    n, k, m = g.num_questions, g.num_answers, g.ref_dim
    pi = g.pi
    R = g.R
    for _ in range(r - 1):
        pi = np.kron(pi, g.pi)
        d = R.shape[2]
        # new[a1*k + a2, x1*n + x2] = R[a1, x1] (x) g.R[a2, x2]
        R = np.einsum("axij,bykl->abxyikjl", R, g.R).reshape(
            R.shape[0] * k, R.shape[1] * n, d * m, d * m
        )
    return MonogamyGame(pi, R)


# --------------------------------------------------------------------------
# Catalogue
# --------------------------------------------------------------------------


def _basis_game(bases, pi=None) -> MonogamyGame:
    n = len(bases)
    d = bases[0].shape[0]
    R = np.zeros((d, n, d, d), dtype=complex)
    for x, basis in enumerate(bases):
        for a in range(d):
            R[a, x] = la.projector(basis[:, a])
    return MonogamyGame(np.full(n, 1.0 / n) if pi is None else pi, R)


def bb84_monogamy() -> MonogamyGame:
    """Referee measures in the computational or the Hadamard basis."""
    return mub_monogamy(2, 2)


def mub_monogamy(d: int, num_bases: int | None = None) -> MonogamyGame:
    """Uniform monogamy game over the first ``num_bases`` MUBs of ``C^d``."""
    bases = la.mub(d)
    k = len(bases) if num_bases is None else int(num_bases)
    if not 1 <= k <= len(bases):
        raise InputError(f"between 1 and {len(bases)} bases are available for d={d}, got {k}")
    return _basis_game(bases[:k])


def bb84_extended() -> ExtendedGame:
    """The BB84 monogamy game written directly as an extended game."""
    return monogamy_to_extended(bb84_monogamy())


def chsh_extended() -> ExtendedGame:
    """CHSH-style extended game on a qubit referee.

    For question pairs other than ``(1, 1)`` the players win by answering
    ``a = b`` equal to the referee's computational-basis outcome; on ``(1, 1)``
    they win by answering ``a != b`` matching the Hadamard-basis outcome
    (``(0,1)`` for ``|+>``, ``(1,0)`` for ``|->``).
    """
    e0, e1 = la.basis_vector(2, 0), la.basis_vector(2, 1)
    plus, minus = (e0 + e1) / np.sqrt(2), (e0 - e1) / np.sqrt(2)
    V = np.zeros((2, 2, 2, 2, 2, 2), dtype=complex)
    for x, y in [(0, 0), (0, 1), (1, 0)]:
        V[0, 0, x, y] = la.projector(e0)
        V[1, 1, x, y] = la.projector(e1)
    V[0, 1, 1, 1] = la.projector(plus)
    V[1, 0, 1, 1] = la.projector(minus)
    return ExtendedGame(np.full((2, 2), 0.25), V)


def random_projective_monogamy(dim: int, num_questions: int = 2, seed=None) -> MonogamyGame:
    """Uniform game whose questions are Haar-random orthonormal bases."""
    rng = np.random.default_rng(seed)
    bases = [la.random_unitary(dim, rng) for _ in range(num_questions)]
    return _basis_game(bases)
