"""See-saw lower bounds on the quantum value.

With Bob's measurements fixed, the best assemblage ``rho_a^x`` on
``R (x) B`` that Alice can steer is an SDP (variables ``rho_a^x >= 0`` with
``sum_a rho_a^x = tau`` for every ``x`` and ``tr tau = 1``). With the
assemblage fixed, Bob's best measurements are again an SDP. Alternating the
two never decreases the objective; each restart starts from Bob measuring
in the columns of a random unitary.

The final assemblage is turned into an explicit strategy: Alice holds a
purification of ``tau`` and measures ``(tau^-1/2 rho_a^x tau^-1/2)^T``, which
reproduces every ``rho_a^x`` exactly. The reported value is that strategy's
winning probability, so it is a genuine lower bound.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging

import numpy as np

from .. import linalg as la
from ..errors import InputError, SolverError
from ..games import ExtendedGame, QuantumStrategy, quantum_value_of_strategy
from ..sdpsolver import SdpBuilder, SolverOptions, solve
from ..tolerances import NULLSPACE_TOL
from ._common import require_usable

# Inner solves that stall this close to optimality still give usable
# iterates; the final strategy is re-evaluated independently.
_INNER_ACCEPT = 1e-6

__all__ = ["SeesawResult", "RestartRecord", "seesaw_lower_bound", "extract_alice_povm"]

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class RestartRecord:
    index: int
    value: float | None
    iterations: int
    error: str | None = None


@dataclasses.dataclass(frozen=True, eq=False)
class SeesawResult:
    """Best strategy found by the see-saw iteration.

    Attributes
    ----------
    value : float
        Winning probability of :attr:`strategy`, re-evaluated from scratch.
    objective : float
        Final SDP objective of the best restart.
    alice_povm : ndarray, shape (|Gamma_A|, |Sigma_A|, m, m)
        ``tr_B(tau)^-1/2 tr_B(rho_a^x) tr_B(tau)^-1/2``, Alice's measurement
        expressed on a copy of the referee space.
    bob_povm : ndarray, shape (|Gamma_B|, |Sigma_B|, d_B, d_B)
    tau : ndarray
        The common marginal ``sum_a rho_a^x`` on ``R (x) B``.
    assemblage : ndarray, shape (|Gamma_A|, |Sigma_A|, m d_B, m d_B)
        The optimal ``rho_a^x``.
    strategy : QuantumStrategy
        Dilated strategy realizing the assemblage and Bob's measurements.
    iterations : int
        See-saw iterations of the best restart.
    restarts_used : int
        Restarts that finished without a solver failure.
    best_restart : int
    history : tuple of RestartRecord
    """

    value: float
    objective: float
    alice_povm: np.ndarray
    bob_povm: np.ndarray
    tau: np.ndarray
    assemblage: np.ndarray
    strategy: QuantumStrategy
    iterations: int
    restarts_used: int
    best_restart: int
    history: tuple[RestartRecord, ...]


def _fix_completeness(ops: np.ndarray) -> np.ndarray:
    """Add ``I - sum_a ops[a, x]`` to the last answer so each POVM is complete."""
    ops = ops.copy()
    d = ops.shape[-1]
    for x in range(ops.shape[1]):
        ops[:, x] = (ops[:, x] + ops[:, x].conj().transpose(0, 2, 1)) / 2
        ops[-1, x] += np.eye(d) - ops[:, x].sum(axis=0)
    return ops


def extract_alice_povm(rho: np.ndarray, tau: np.ndarray, ref_dim: int, bob_dim: int) -> np.ndarray:
    """Alice's measurement on the referee-sized space from the reduced assemblage."""
    tau_r = la.partial_trace(tau, [ref_dim, bob_dim], keep=[0])
    t = la.psd_inv_sqrt(tau_r, NULLSPACE_TOL)
    na, nx = rho.shape[:2]
    out = np.zeros((na, nx, ref_dim, ref_dim), dtype=complex)
    for a, x in itertools.product(range(na), range(nx)):
        out[a, x] = t @ la.partial_trace(rho[a, x], [ref_dim, bob_dim], keep=[0]) @ t
    return _fix_completeness(out)


def _dilate(rho: np.ndarray, tau: np.ndarray, bob: np.ndarray) -> QuantumStrategy:
    """Strategy whose Alice-steered states are exactly ``rho``."""
    D = tau.shape[0]
    t = la.psd_inv_sqrt(tau, NULLSPACE_TOL)
    na, nx = rho.shape[:2]
    A = np.zeros((na, nx, D, D), dtype=complex)
    for a, x in itertools.product(range(na), range(nx)):
        A[a, x] = (t @ rho[a, x] @ t).T
    A = _fix_completeness(A)
    # psi = vec(sqrt(tau)^T) on U (x) (R (x) B) has tr_U |psi><psi| = tau.
    psi = la.vec(la.psd_sqrt(tau).T)
    psi = psi / np.linalg.norm(psi)
    return QuantumStrategy(la.projector(psi), A, bob, tol=1e-6)


def _initial_bob(game: ExtendedGame, dim: int, rng) -> np.ndarray:
    nb, ny = game.num_answers_b, game.num_questions_b
    B = np.zeros((nb, ny, dim, dim), dtype=complex)
    for y in range(ny):
        U = la.random_unitary(dim, rng)
        for b in range(min(nb, dim)):
            B[b, y] = la.projector(U[:, b])
        if nb < dim:  # fold the remaining columns into the last answer
            for c in range(nb, dim):
                B[nb - 1, y] += la.projector(U[:, c])
    return B


def _start_povm(game: ExtendedGame, dim: int, start) -> np.ndarray:
    nb, ny = game.num_answers_b, game.num_questions_b
    arr = np.asarray(start)
    if arr.ndim == 1:
        if arr.shape != (ny,) or np.any((arr < 0) | (arr >= nb)):
            raise InputError(f"bob_start must give one answer in range({nb}) per question, got {start!r}")
        B = np.zeros((nb, ny, dim, dim), dtype=complex)
        for y, b in enumerate(arr):
            B[int(b), y] = np.eye(dim)
        return B
    if arr.shape != (nb, ny, dim, dim):
        raise InputError(f"bob_start has shape {arr.shape}, expected {(nb, ny, dim, dim)}")
    return arr.astype(complex)


class _Alternation:
    """The two SDPs of one see-saw run, sharing fixed constraint structure."""

    def __init__(self, game: ExtendedGame, bob_dim: int, opts: SolverOptions | None):
        self.g = game
        self.m = game.ref_dim
        self.dB = bob_dim
        self.D = self.m * bob_dim
        self.opts = opts
        self.W = game.weighted()
        na, nx = game.num_answers_a, game.num_questions_a
        nb, ny = game.num_answers_b, game.num_questions_b
        # SDP-1 layout: one block per (a, x), then tau.
        bld = SdpBuilder()
        self.rho_blocks = {(a, x): bld.add_block(self.D) for a in range(na) for x in range(nx)}
        self.tau_block = bld.add_block(self.D)
        for x in range(nx):
            terms = [(self.rho_blocks[a, x], 1.0) for a in range(na)] + [(self.tau_block, -1.0)]
            bld.add_matrix_equality(terms, None)
        bld.add_linear([(self.tau_block, i, i, 1.0, 0.0) for i in range(self.D)], 1.0)
        self.sdp1 = bld.build()
        # SDP-2 layout: one block per (b, y).
        bld = SdpBuilder()
        self.bob_blocks = {(b, y): bld.add_block(self.dB) for b in range(nb) for y in range(ny)}
        for y in range(ny):
            bld.add_matrix_equality([(self.bob_blocks[b, y], 1.0) for b in range(nb)], np.eye(self.dB))
        self.sdp2 = bld.build()

    def optimize_alice(self, B: np.ndarray):
        g = self.g
        obj = [np.zeros((self.D, self.D), dtype=complex) for _ in self.sdp1.block_dims]
        for (a, x), k in self.rho_blocks.items():
            for b, y in itertools.product(range(g.num_answers_b), range(g.num_questions_b)):
                v = self.W[a, b, x, y]
                if v.any():
                    obj[k] += np.kron(v, B[b, y])
        prob = dataclasses.replace(self.sdp1, objective=tuple(obj))
        sol = require_usable(solve(prob, self.opts), "see-saw Alice step", _INNER_ACCEPT)
        na, nx = g.num_answers_a, g.num_questions_a
        rho = np.zeros((na, nx, self.D, self.D), dtype=complex)
        for (a, x), k in self.rho_blocks.items():
            rho[a, x] = sol.X[k]
        return rho, sol.X[self.tau_block], sol.primal_value

    def optimize_bob(self, rho: np.ndarray):
        g = self.g
        m, dB = self.m, self.dB
        obj = [np.zeros((dB, dB), dtype=complex) for _ in self.sdp2.block_dims]
        for (b, y), k in self.bob_blocks.items():
            for a, x in itertools.product(range(g.num_answers_a), range(g.num_questions_a)):
                v = self.W[a, b, x, y]
                if not v.any():
                    continue
                # Phi*(rho) = tr_R((V* (x) I) rho)
                r = rho[a, x].reshape(m, dB, m, dB)
                obj[k] += np.einsum("ji,jbic->bc", v.conj(), r)
        obj = [(o + o.conj().T) / 2 for o in obj]
        prob = dataclasses.replace(self.sdp2, objective=tuple(obj))
        sol = require_usable(solve(prob, self.opts), "see-saw Bob step", _INNER_ACCEPT)
        B = np.zeros((g.num_answers_b, g.num_questions_b, dB, dB), dtype=complex)
        for (b, y), k in self.bob_blocks.items():
            B[b, y] = sol.X[k]
        return B, sol.primal_value


def seesaw_lower_bound(
    game: ExtendedGame,
    restarts: int = 4,
    inner_tol: float = 1e-6,
    seed=0,
    max_iter: int = 200,
    bob_dim: int | None = None,
    opts: SolverOptions | None = None,
    bob_start=None,
) -> SeesawResult:
    """Best see-saw strategy over ``restarts`` random starting points.

    Parameters
    ----------
    game : ExtendedGame
    restarts : int
        Number of independent random starts.
    inner_tol : float
        A run stops once an Alice/Bob round improves the objective by less than this.
    seed : int or None
        Master seed; restart ``k`` draws from the ``k``-th spawned stream.
    max_iter : int
        Cap on alternation rounds per restart.
    bob_dim : int, optional
        Dimension of Bob's system; defaults to his number of answers.
    opts : SolverOptions, optional
        Options for the inner SDP solves.
    bob_start : sequence of int or ndarray, optional
        Extra starting point run after the random restarts, either Bob's
        answer for each question (he then answers deterministically) or an
        array of POVMs of shape ``(|Gamma_B|, |Sigma_B|, d_B, d_B)``.
        Starting from the deterministic part of an optimal unentangled
        strategy guarantees a value at least the unentangled value.
    """
    if restarts < 1:
        raise InputError("at least one restart is required")
    dB = game.num_answers_b if bob_dim is None else int(bob_dim)
    if dB < 1:
        raise InputError("Bob's dimension must be positive")
    alt = _Alternation(game, dB, opts)
    starts = [lambda ss=ss: _initial_bob(game, dB, np.random.default_rng(ss))
              for ss in np.random.SeedSequence(seed).spawn(restarts)]
    if bob_start is not None:
        fixed = _start_povm(game, dB, bob_start)
        starts.append(lambda: fixed.copy())
    best = None
    history = []
    for k, start in enumerate(starts):
        B = start()
        prev = -np.inf
        it = 0
        try:
            for it in range(1, max_iter + 1):
                rho, tau, _ = alt.optimize_alice(B)
                B, win = alt.optimize_bob(rho)
                if win - prev < inner_tol:
                    break
                prev = win
            rho, tau, win = alt.optimize_alice(B)  # assemblage matching the final B
        except SolverError as exc:
            log.info("restart %d aborted: %s", k, exc)
            history.append(RestartRecord(k, None, it, str(exc)))
            continue
        history.append(RestartRecord(k, float(win), it))
        if best is None or win > best[0] + 1e-12:
            best = (win, k, it, rho, tau, B)
    if best is None:
        raise SolverError("every see-saw restart failed")
    win, k, it, rho, tau, B = best
    B = _fix_completeness(B)
    strategy = _dilate(rho, tau, B)
    value = quantum_value_of_strategy(game, strategy)
    return SeesawResult(
        value=value,
        objective=float(win),
        alice_povm=extract_alice_povm(rho, tau, game.ref_dim, dB),
        bob_povm=B,
        tau=tau,
        assemblage=rho,
        strategy=strategy,
        iterations=it,
        restarts_used=sum(1 for h in history if h.error is None),
        best_restart=k,
        history=tuple(history),
    )
