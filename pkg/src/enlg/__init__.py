"""Unentangled, non-signaling and quantum values of extended nonlocal games."""

from importlib import resources

from .errors import EnlgError, InputError, InvariantError, SizeCapError, SolverError
from .gamefile import dump_game, load_game
from .games import (
    Assemblage,
    ExtendedGame,
    MonogamyGame,
    QuantumStrategy,
    assemblage_value,
    bb84_extended,
    bb84_monogamy,
    chsh_extended,
    monogamy_to_extended,
    mub_monogamy,
    parallel_repeat,
    quantum_value_of_strategy,
    random_projective_monogamy,
    strategy_assemblage,
)

__version__ = "0.1.0"

BUNDLED_GAMES = ("bb84_enlg", "chsh_enlg", "bb84_mog", "mub43_mog")


def bundled_game_path(name: str):
    """Path of a game file shipped with the package, e.g. ``"bb84_enlg"``."""
    if name not in BUNDLED_GAMES:
        raise InputError(f"unknown bundled game {name!r}; choose from {', '.join(BUNDLED_GAMES)}")
    return resources.files(__name__).joinpath("data", f"{name}.json")
