import numpy as np
import pytest

from enlg import ExtendedGame, MonogamyGame, linalg as la
from enlg.sdpsolver import SdpProblem


def random_referee_op(rng, m):
    """Random Hermitian V with 0 <= V <= I."""
    u = la.random_unitary(m, rng)
    w = rng.uniform(0.0, 1.0, m)
    w[rng.uniform(size=m) < 0.3] = 0.0
    return (u * w) @ u.conj().T


def random_extended_game(rng, m=2, nq=2, na=2, sparsity=0.3):
    pi = rng.dirichlet(np.ones(nq * nq)).reshape(nq, nq)
    V = np.zeros((na, na, nq, nq, m, m), dtype=complex)
    for a, b, x, y in np.ndindex(na, na, nq, nq):
        if rng.uniform() > sparsity:
            v = random_referee_op(rng, m)
            V[a, b, x, y] = (v + v.conj().T) / 2
    return ExtendedGame(pi, V)


def random_povm(rng, num_outcomes, nq, dim):
    """Projective measurements built from random unitaries."""
    ops = np.zeros((num_outcomes, nq, dim, dim), dtype=complex)
    for x in range(nq):
        u = la.random_unitary(dim, rng)
        labels = rng.integers(num_outcomes, size=dim)
        for c in range(dim):
            ops[labels[c], x] += la.projector(u[:, c])
    return ops


def random_monogamy_povm_game(rng, dim, nq=2, na=2):
    """Uniform monogamy game with generic (non-projective) referee POVMs."""
    R = np.zeros((na, nq, dim, dim), dtype=complex)
    for x in range(nq):
        mats = [la.random_density(dim, rng) for _ in range(na)]
        total = sum(mats)
        t = la.psd_inv_sqrt(total)
        for a in range(na):
            r = t @ mats[a] @ t
            R[a, x] = (r + r.conj().T) / 2
        R[-1, x] += np.eye(dim) - R[:, x].sum(axis=0)
    return MonogamyGame(np.full(nq, 1.0 / nq), R)


def random_projective_monogamy_game(rng, dim, nq=2, na=2):
    """Uniform monogamy game whose referee measures random orthonormal bases.

    Every answer gets at least one basis vector when ``na <= dim``.
    """
    R = np.zeros((na, nq, dim, dim), dtype=complex)
    for x in range(nq):
        u = la.random_unitary(dim, rng)
        labels = np.concatenate([np.arange(min(na, dim)), rng.integers(na, size=max(0, dim - na))])
        for c in range(dim):
            R[labels[c], x] += la.projector(u[:, c])
    return MonogamyGame(np.full(nq, 1.0 / nq), R)


def random_sdp(rng, n, k, complex_):
    """Single-block SDP with tr X = 1 plus k-1 constraints satisfied by a random interior point."""
    def herm():
        g = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if complex_ else 0)
        return (g + g.conj().T) / 2

    x0 = la.random_density(n, rng) if complex_ else None
    if x0 is None:
        g = rng.standard_normal((n, n))
        x0 = g @ g.T
        x0 /= np.trace(x0)
    cons = [np.eye(n)] + [herm() for _ in range(k - 1)]
    rhs = [float(np.real(np.vdot(b, x0))) for b in cons]
    return SdpProblem.from_dense([herm()], [[b] for b in cons], rhs, complex_blocks=[complex_])


def cvxpy_value(problem):
    """Independent optimum of an SdpProblem via cvxpy (test oracle only)."""
    import cvxpy as cp

    xs = [cp.Variable((n, n), hermitian=True) for n in problem.block_dims]
    cons = [x >> 0 for x in xs]
    for j in range(problem.num_constraints):
        sel = problem.con_index == j
        expr = 0
        for b in np.unique(problem.con_block[sel]):
            B = problem.constraint_matrix(j, b)
            expr = expr + cp.real(cp.trace(B.conj().T @ xs[b]))
        cons.append(expr == problem.rhs[j])
    obj = sum(cp.real(cp.trace(a.conj().T @ x)) for a, x in zip(problem.objective, xs))
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
