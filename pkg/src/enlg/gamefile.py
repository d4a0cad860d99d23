"""JSON game files.

A file looks like::

    {
      "schema_version": "1",
      "kind": "extended",
      "alphabets": {"questions_a": 2, "questions_b": 2, "answers_a": 2, "answers_b": 2},
      "ref_dim": 2,
      "pi": [[0.25, 0.25], [0.25, 0.25]],
      "operators": {"(0,0|0,0)": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]], ...}
    }

Matrix entries are ``[re, im]`` pairs. Monogamy games use ``"kind":
"monogamy"``, alphabets ``{"questions": n, "answers": k}``, a vector ``pi``
and keys ``"(a|x)"``. Missing keys of an extended game are zero operators;
a monogamy game must list every key.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import re
from pathlib import Path

import numpy as np

from .errors import InputError
from .games import ExtendedGame, MonogamyGame
from .tolerances import GAME_TOL

__all__ = ["SCHEMA_VERSION", "RawGame", "parse_game", "load_game", "game_to_dict", "dump_game", "read_raw"]

SCHEMA_VERSION = "1"

_KEY_EXT = re.compile(r"^\(\s*(\d+)\s*,\s*(\d+)\s*\|\s*(\d+)\s*,\s*(\d+)\s*\)$")
_KEY_MOG = re.compile(r"^\(\s*(\d+)\s*\|\s*(\d+)\s*\)$")


@dataclasses.dataclass(frozen=True, eq=False)
class RawGame:
    """Parsed but unvalidated file contents."""

    kind: str
    pi: np.ndarray
    ops: np.ndarray  # V[a, b, x, y] or R[a, x]

    def build(self, tol: float = GAME_TOL):
        if self.kind == "extended":
            return ExtendedGame(self.pi, self.ops, tol=tol)
        return MonogamyGame(self.pi, self.ops, tol=tol)


def _count(d: dict, key: str) -> int:
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise InputError(f"alphabets.{key} must be a positive integer, got {v!r}")
    return v


def _matrix(entry, m: int, key: str) -> np.ndarray:
    try:
        arr = np.asarray(entry, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"operator {key} is not a numeric array") from None
    if arr.shape != (m, m, 2):
        raise InputError(f"operator {key} has shape {arr.shape}, expected ({m}, {m}, 2) of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_game(doc) -> RawGame:
    """Check the structure of a decoded JSON document."""
    if not isinstance(doc, dict):
        raise InputError("a game file must contain a JSON object")
    version = doc.get("schema_version")
    if str(version) != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    kind = doc.get("kind")
    if kind not in ("extended", "monogamy"):
        raise InputError(f"kind must be 'extended' or 'monogamy', got {kind!r}")
    for key in ("alphabets", "ref_dim", "pi", "operators"):
        if key not in doc:
            raise InputError(f"missing key {key!r}")
    alph = doc["alphabets"]
    if not isinstance(alph, dict):
        raise InputError("alphabets must be an object")
    m = doc["ref_dim"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise InputError(f"ref_dim must be a positive integer, got {m!r}")
    ops_doc = doc["operators"]
    if not isinstance(ops_doc, dict):
        raise InputError("operators must be an object")
    try:
        pi = np.asarray(doc["pi"], dtype=float)
    except (TypeError, ValueError):
        raise InputError("pi is not a numeric array") from None

    if kind == "extended":
        nx, ny = _count(alph, "questions_a"), _count(alph, "questions_b")
        na, nb = _count(alph, "answers_a"), _count(alph, "answers_b")
        if pi.shape != (nx, ny):
            raise InputError(f"pi has shape {pi.shape}, expected {(nx, ny)}")
        ops = np.zeros((na, nb, nx, ny, m, m), dtype=complex)
        for key, entry in ops_doc.items():
            match = _KEY_EXT.match(key)
            if not match:
                raise InputError(f"operator key {key!r} is not of the form '(a,b|x,y)'")
            a, b, x, y = map(int, match.groups())
            if a >= na or b >= nb or x >= nx or y >= ny:
                raise InputError(f"operator key {key!r} is outside the alphabets")
            ops[a, b, x, y] = _matrix(entry, m, key)
    else:
        n, k = _count(alph, "questions"), _count(alph, "answers")
        if pi.shape != (n,):
            raise InputError(f"pi has shape {pi.shape}, expected ({n},)")
        ops = np.zeros((k, n, m, m), dtype=complex)
        seen = set()
        for key, entry in ops_doc.items():
            match = _KEY_MOG.match(key)
            if not match:
                raise InputError(f"operator key {key!r} is not of the form '(a|x)'")
            a, x = map(int, match.groups())
            if a >= k or x >= n:
                raise InputError(f"operator key {key!r} is outside the alphabets")
            ops[a, x] = _matrix(entry, m, key)
            seen.add((a, x))
        for a, x in itertools.product(range(k), range(n)):
            if (a, x) not in seen:
                raise InputError(f"monogamy game is missing operator '({a}|{x})'")
    return RawGame(kind, pi, ops)


def read_raw(path) -> RawGame:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_game(doc)


def load_game(path, tol: float = GAME_TOL):
    """Read and validate a game file."""
    return read_raw(path).build(tol)


def _encode(mat: np.ndarray) -> list:
    # adding 0.0 turns -0.0 into 0.0 so the text is stable across round trips
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in mat]


def game_to_dict(game) -> dict:
    if isinstance(game, ExtendedGame):
        na, nb, nx, ny = game.V.shape[:4]
        ops = {
            f"({a},{b}|{x},{y})": _encode(game.V[a, b, x, y])
            for a, b, x, y in itertools.product(range(na), range(nb), range(nx), range(ny))
            if game.V[a, b, x, y].any()
        }
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "extended",
            "alphabets": {"questions_a": nx, "questions_b": ny, "answers_a": na, "answers_b": nb},
            "ref_dim": game.ref_dim,
            "pi": game.pi.tolist(),
            "operators": ops,
        }
    if isinstance(game, MonogamyGame):
        k, n = game.R.shape[:2]
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "monogamy",
            "alphabets": {"questions": n, "answers": k},
            "ref_dim": game.ref_dim,
            "pi": game.pi.tolist(),
            "operators": {f"({a}|{x})": _encode(game.R[a, x]) for x in range(n) for a in range(k)},
        }
    raise InputError(f"cannot serialize {type(game).__name__}")


def dump_game(game, path=None) -> str:
    """Serialize ``game``; write it to ``path`` when given. Returns the JSON text."""
    text = json.dumps(game_to_dict(game), indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
