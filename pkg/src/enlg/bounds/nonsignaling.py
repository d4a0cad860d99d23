"""Non-signaling value of an extended game."""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from ..games import Assemblage, ExtendedGame
from ..sdpsolver import SdpBuilder, SdpProblem, SdpSolution, SolverOptions, solve
from ._common import require_optimal

__all__ = ["NonSignalingResult", "build_nonsignaling_sdp", "nonsignaling_value"]


def build_nonsignaling_sdp(game: ExtendedGame) -> tuple[SdpProblem, dict]:
    """SDP over assemblages ``K(a,b|x,y) >= 0`` with consistent marginals.

    Alice's marginal ``sum_b K(a,b|x,y)`` may not depend on ``y`` and Bob's
    ``sum_a K(a,b|x,y)`` may not depend on ``x``; the total trace is one.
    Each marginal condition is imposed against the first question of the
    other party. Bob's condition for the last answer is implied by the others
    whenever ``y`` is not the first question, so it is omitted there to keep
    the constraint set linearly independent.

    Returns the problem and a map from ``(a, b, x, y)`` to block index.
    """
    na, nb = game.num_answers_a, game.num_answers_b
    nx, ny = game.num_questions_a, game.num_questions_b
    m = game.ref_dim
    cplx = not game.is_real
    bld = SdpBuilder()
    blocks = {}
    W = game.weighted()
    for a, b, x, y in itertools.product(range(na), range(nb), range(nx), range(ny)):
        k = bld.add_block(m, complex_=cplx)
        blocks[a, b, x, y] = k
        bld.add_objective(k, W[a, b, x, y])
    for x, a in itertools.product(range(nx), range(na)):
        for y in range(1, ny):
            terms = [(blocks[a, b, x, y], 1.0) for b in range(nb)]
            terms += [(blocks[a, b, x, 0], -1.0) for b in range(nb)]
            bld.add_matrix_equality(terms, None)
    for y in range(ny):
        answers = range(nb) if y == 0 else range(nb - 1)
        for b in answers:
            for x in range(1, nx):
                terms = [(blocks[a, b, x, y], 1.0) for a in range(na)]
                terms += [(blocks[a, b, 0, y], -1.0) for a in range(na)]
                bld.add_matrix_equality(terms, None)
    bld.add_linear(
        [(blocks[a, b, 0, 0], i, i, 1.0, 0.0) for a in range(na) for b in range(nb) for i in range(m)],
        1.0,
    )
    return bld.build(), blocks


@dataclasses.dataclass(frozen=True, eq=False)
class NonSignalingResult:
    value: float
    assemblage: Assemblage
    solution: SdpSolution
    problem: SdpProblem


def nonsignaling_value(game: ExtendedGame, opts: SolverOptions | None = None) -> NonSignalingResult:
    """Optimal winning probability over non-signaling assemblages."""
    prob, blocks = build_nonsignaling_sdp(game)
    sol = require_optimal(solve(prob, opts), "non-signaling SDP")
    m = game.ref_dim
    K = np.zeros(game.V.shape[:4] + (m, m), dtype=complex)
    for idx, k in blocks.items():
        K[idx] = sol.X[k]
    return NonSignalingResult(
        value=sol.primal_value,
        assemblage=Assemblage(K, tol=1e-6),
        solution=sol,
        problem=prob,
    )
