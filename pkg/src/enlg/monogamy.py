"""Analysis specific to monogamy-of-entanglement games."""

from __future__ import annotations

import dataclasses

import numpy as np

from . import linalg as la
from .errors import InputError
from .games import MonogamyGame
from .tolerances import DISTRIBUTION_TOL, PROJECTIVE_TOL

__all__ = ["OverlapReport", "max_overlap", "tfkw_bound", "spr_two_question_value"]

_TIE_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class OverlapReport:
    """Maximal overlap ``c`` and the first ``(x, y, a, b)`` attaining it."""

    c_value: float
    argmax: tuple[int, int, int, int]


def max_overlap(g: MonogamyGame) -> OverlapReport:
    """``max ||sqrt(R(a|x)) sqrt(R(b|y))||^2`` over distinct questions ``x != y``.

    Square roots are taken for every operator, projective or not.
    """
    n, k = g.num_questions, g.num_answers
    if n < 2:
        raise InputError("the maximal overlap needs at least two questions")
    roots = np.array([[la.psd_sqrt(g.R[a, x]) for x in range(n)] for a in range(k)])
    best, arg = -np.inf, None
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            # all (a, b) at once: spectral norms of the k*k products
            prods = np.einsum("aij,bjl->abil", roots[:, x], roots[:, y])
            vals = np.linalg.norm(prods, ord=2, axis=(2, 3)) ** 2
            top = float(vals.max())
            if top > best + _TIE_TOL:
                a, b = np.argwhere(vals >= top - _TIE_TOL)[0]
                best, arg = top, (x, y, int(a), int(b))
    return OverlapReport(best, arg)


def _require_uniform(g: MonogamyGame) -> None:
    if not g.is_uniform(DISTRIBUTION_TOL):
        dev = float(np.max(np.abs(g.pi - 1.0 / g.num_questions)))
        raise InputError(f"the question distribution must be uniform (max deviation {dev:.3g})")


def tfkw_bound(g: MonogamyGame, r: int) -> float:
    """Upper bound ``(1/n + (n-1)/n sqrt(c))^r`` on the quantum value of ``g^r``."""
    if r < 1:
        raise InputError("the number of repetitions must be at least 1")
    _require_uniform(g)
    n = g.num_questions
    c = max_overlap(g).c_value
    return float((1.0 / n + (n - 1) / n * np.sqrt(c)) ** r)


def spr_two_question_value(g: MonogamyGame, r: int) -> float:
    """Quantum value ``(1/2 + sqrt(c)/2)^r`` of ``g^r`` for two-question projective games.

    Raises :class:`InputError` naming the first hypothesis that fails: two
    questions, uniform distribution, projective referee measurements.
    """
    if r < 1:
        raise InputError("the number of repetitions must be at least 1")
    if g.num_questions != 2:
        raise InputError(f"exactly two questions are required, got {g.num_questions}")
    _require_uniform(g)
    m = g.ref_dim
    worst = max(float(np.max(np.abs(p @ p - p))) for p in g.R.reshape(-1, m, m))
    if worst > PROJECTIVE_TOL:
        raise InputError(f"the referee's measurements must be projective (max |R^2 - R| = {worst:.3g})")
    c = max_overlap(g).c_value
    return float((0.5 + 0.5 * np.sqrt(c)) ** r)
