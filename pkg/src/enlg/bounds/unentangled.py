"""Exact unentangled values by enumerating deterministic answer functions."""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from ..errors import SizeCapError
from ..games import ExtendedGame, MonogamyGame
from ..tolerances import DEFAULT_ENUMERATION_CAP

__all__ = [
    "UnentangledResult",
    "MonogamyUnentangledResult",
    "unentangled_value",
    "monogamy_unentangled_value",
]

# Values closer than this to the maximum count as ties; the first such
# function pair in lexicographic order wins.
_TIE_TOL = 1e-12
_BATCH = 1 << 14


@dataclasses.dataclass(frozen=True)
class UnentangledResult:
    value: float
    f: tuple[int, ...]
    g_fn: tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class MonogamyUnentangledResult:
    value: float
    f: tuple[int, ...]


def _functions(num_questions: int, num_answers: int) -> np.ndarray:
    """All maps questions -> answers in lexicographic order, one per row."""
    return np.array(list(itertools.product(range(num_answers), repeat=num_questions)), dtype=np.int64).reshape(
        -1, num_questions
    )


def _largest_eigenvalues(ops: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(ops)[..., -1]


def unentangled_value(game: ExtendedGame, cap: int = DEFAULT_ENUMERATION_CAP) -> UnentangledResult:
    """``max_{f,g} || sum_{x,y} pi(x,y) V(f(x), g(y)|x,y) ||`` over deterministic pairs."""
    na, nb = game.num_answers_a, game.num_answers_b
    nx, ny = game.num_questions_a, game.num_questions_b
    count = na**nx * nb**ny
    if count > cap:
        raise SizeCapError(f"{count} deterministic strategies exceed the enumeration cap {cap}", cap=cap)
    F, G = _functions(nx, na), _functions(ny, nb)
    W = game.weighted()
    m = game.ref_dim
    # Per-question contributions as a function of the chosen answers.
    best_val, best_idx = -np.inf, (0, 0)
    step = max(1, _BATCH // len(G))
    for lo in range(0, len(F), step):
        f = F[lo:lo + step]
        ops = np.zeros((len(f), len(G), m, m), dtype=complex)
        for x in range(nx):
            for y in range(ny):
                ops += W[f[:, x][:, None], G[:, y][None, :], x, y]
        vals = _largest_eigenvalues(ops)
        top = vals.max()
        if top > best_val + _TIE_TOL:
            i, j = np.argwhere(vals >= top - _TIE_TOL)[0]
            best_val, best_idx = float(vals[i, j]), (lo + i, j)
    i, j = best_idx
    return UnentangledResult(max(best_val, 0.0), tuple(int(v) for v in F[i]), tuple(int(v) for v in G[j]))


def monogamy_unentangled_value(game: MonogamyGame, cap: int = DEFAULT_ENUMERATION_CAP) -> MonogamyUnentangledResult:
    """``max_f || sum_x pi(x) R(f(x)|x) ||``, both players answering ``f(x)``."""
    n, k = game.num_questions, game.num_answers
    count = k**n
    if count > cap:
        raise SizeCapError(f"{count} answer functions exceed the enumeration cap {cap}", cap=cap)
    F = _functions(n, k)
    WR = game.R * game.pi[None, :, None, None]
    best_val, best_i = -np.inf, 0
    for lo in range(0, len(F), _BATCH):
        f = F[lo:lo + _BATCH]
        ops = sum(WR[f[:, x], x] for x in range(n))
        vals = _largest_eigenvalues(ops)
        top = vals.max()
        if top > best_val + _TIE_TOL:
            i = int(np.flatnonzero(vals >= top - _TIE_TOL)[0])
            best_val, best_i = float(vals[i]), lo + i
    return MonogamyUnentangledResult(max(best_val, 0.0), tuple(int(v) for v in F[best_i]))
