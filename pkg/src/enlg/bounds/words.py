"""Words over the question/answer alphabet and their canonical forms.

A letter is a triple ``(party, question, answer)`` with party ``0`` for
Alice and ``1`` for Bob. Letters of different parties commute, letters are
idempotent, and two adjacent letters of one party with the same question but
different answers multiply to zero. Every word therefore reduces to a
canonical form: Alice's reduced letters followed by Bob's.
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Iterable, Sequence

from ..errors import InputError

__all__ = [
    "ALICE",
    "BOB",
    "Letter",
    "CanonicalWord",
    "HierarchyLevel",
    "canonicalize",
    "reduce_letters",
    "alphabet",
    "word_set",
]

ALICE = 0
BOB = 1

Letter = tuple[int, int, int]


def reduce_letters(word: Iterable[Letter]) -> tuple[Letter, ...] | None:
    """Canonical letter sequence of ``word``, or ``None`` if it reduces to zero."""
    parts: tuple[list[Letter], list[Letter]] = ([], [])
    for letter in word:
        stack = parts[letter[0]]
        if stack:
            top = stack[-1]
            if top == letter:
                continue
            if top[1] == letter[1]:
                return None
        stack.append(letter)
    return tuple(parts[0]) + tuple(parts[1])


@dataclasses.dataclass(frozen=True, order=True)
class CanonicalWord:
    """Reduced word: Alice's letters, then Bob's, or the zero word."""

    alice_part: tuple[Letter, ...] = ()
    bob_part: tuple[Letter, ...] = ()
    is_zero: bool = False

    @property
    def letters(self) -> tuple[Letter, ...]:
        return self.alice_part + self.bob_part

    def __len__(self) -> int:
        return len(self.alice_part) + len(self.bob_part)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        if not len(self):
            return "e"
        return "".join(f"{'AB'[p]}({x},{a})" for p, x, a in self.letters)

    @classmethod
    def from_letters(cls, letters: tuple[Letter, ...] | None) -> "CanonicalWord":
        if letters is None:
            return ZERO
        k = sum(1 for p, _, _ in letters if p == ALICE)
        return cls(letters[:k], letters[k:])


ZERO = CanonicalWord(is_zero=True)


def canonicalize(word: Sequence[Letter]) -> CanonicalWord:
    """Reduce ``word`` to its canonical form."""
    if isinstance(word, CanonicalWord):
        return word
    for letter in word:
        if len(letter) != 3 or letter[0] not in (ALICE, BOB):
            raise InputError(f"invalid letter {letter!r}")
    return CanonicalWord.from_letters(reduce_letters(tuple(tuple(l) for l in word)))


@dataclasses.dataclass(frozen=True)
class HierarchyLevel:
    """Level ``base`` of the hierarchy, optionally extended by the products
    of one Alice letter and one Bob letter (the ``1 + AB`` level)."""

    base: int = 1
    plus_ab: bool = False

    def __post_init__(self):
        if self.base < 1:
            raise InputError(f"hierarchy level must be at least 1, got {self.base}")

    @classmethod
    def parse(cls, text: str | int | "HierarchyLevel") -> "HierarchyLevel":
        if isinstance(text, HierarchyLevel):
            return text
        s = str(text).replace(" ", "").upper()
        plus = s.endswith("+AB")
        if plus:
            s = s[:-3]
        try:
            return cls(int(s), plus)
        except ValueError:
            raise InputError(f"cannot parse hierarchy level {text!r}") from None

    def __str__(self) -> str:
        return f"{self.base}+AB" if self.plus_ab else str(self.base)


def alphabet(num_questions_a: int, num_answers_a: int, num_questions_b: int, num_answers_b: int):
    """All letters, Alice's first, each party in (question, answer) order."""
    return [(ALICE, x, a) for x in range(num_questions_a) for a in range(num_answers_a)] + [
        (BOB, y, b) for y in range(num_questions_b) for b in range(num_answers_b)
    ]


def word_set(game, level) -> list[CanonicalWord]:
    """Ordered index set of the moment matrix.

    Contains every nonzero canonical word of length at most ``level.base``
    (plus every Alice-Bob letter pair for ``1 + AB`` levels), ordered by
    length and then lexicographically: the empty word, Alice's letters,
    Bob's letters, then longer words.
    """
    level = HierarchyLevel.parse(level)
    letters = alphabet(game.num_questions_a, game.num_answers_a, game.num_questions_b, game.num_answers_b)
    found: set[tuple[Letter, ...]] = set()
    for n in range(level.base + 1):
        for raw in itertools.product(letters, repeat=n):
            w = reduce_letters(raw)
            if w is not None:
                found.add(w)
    if level.plus_ab:
        for s in letters:
            for t in letters:
                if s[0] == ALICE and t[0] == BOB:
                    found.add((s, t))
    return [CanonicalWord.from_letters(w) for w in sorted(found, key=lambda w: (len(w), w))]
