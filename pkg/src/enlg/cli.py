"""Command-line interface.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invariant
violation (or a failed ``validate`` check), 4 solver failure, 5 size cap
exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time

import numpy as np

from . import linalg as la
from .bounds import (
    monogamy_unentangled_value,
    nonsignaling_value,
    qc_upper_bound,
    seesaw_lower_bound,
    unentangled_value,
)
from .errors import InputError, InvariantError, SizeCapError, SolverError
from .gamefile import dump_game, read_raw
from .games import MonogamyGame, mub_monogamy, monogamy_to_extended, parallel_repeat
from .monogamy import tfkw_bound
from .sdpsolver import SolverOptions
from .tolerances import DEFAULT_SIZE_CAP, DISTRIBUTION_TOL, GAME_TOL

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_SOLVER, EXIT_CAP = 0, 2, 3, 4, 5

METHODS = ("unentangled", "nonsignaling", "qc", "seesaw", "tfkw")

log = logging.getLogger("enlg")


@dataclasses.dataclass
class ResultRecord:
    method: str
    value: float
    wall_time: float
    game: str
    repetitions: int | None = None
    level: str | None = None
    restarts: int | None = None
    seed: int | None = None
    certificate: dict | None = None
    extra: dict | None = None

    def to_json(self) -> str:
        d = {k: v for k, v in dataclasses.asdict(self).items() if v is not None}
        # repr keeps all 17 significant digits
        return json.dumps(d, indent=1)


def _certificate(sol) -> dict:
    return {
        "status": sol.status.value,
        "primal_value": sol.primal_value,
        "dual_value": sol.dual_value,
        "gap": sol.gap,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual,
        "iterations": sol.iterations,
    }


def _solver_opts(args) -> SolverOptions:
    return SolverOptions(log=sys.stderr if args.verbose else None)


def _run_method(game, args, name: str) -> ResultRecord:
    method = args.method
    t0 = time.perf_counter()
    rec = ResultRecord(method=method, value=float("nan"), wall_time=0.0, game=name)
    if method == "tfkw":
        if not isinstance(game, MonogamyGame):
            raise InputError("--method tfkw needs a monogamy game")
        # the bound for the repeated game is the single-round bound to the r-th power
        base = getattr(args, "_base_game", game)
        rec.value = tfkw_bound(base, getattr(args, "repetitions", None) or 1)
    elif method == "unentangled":
        if isinstance(game, MonogamyGame):
            res = monogamy_unentangled_value(game)
            rec.extra = {"f": list(res.f)}
        else:
            res = unentangled_value(game)
            rec.extra = {"f": list(res.f), "g": list(res.g_fn)}
        rec.value = res.value
    else:
        ext = monogamy_to_extended(game) if isinstance(game, MonogamyGame) else game
        opts = _solver_opts(args)
        if method == "nonsignaling":
            res = nonsignaling_value(ext, opts)
            rec.certificate = _certificate(res.solution)
        elif method == "qc":
            res = qc_upper_bound(ext, args.level, opts)
            rec.level = str(res.level)
            rec.certificate = _certificate(res.solution)
        else:
            res = seesaw_lower_bound(ext, restarts=args.restarts, seed=args.seed, bob_dim=args.bob_dim, opts=opts)
            rec.restarts = args.restarts
            rec.seed = args.seed
            rec.extra = {
                "objective": res.objective,
                "best_restart": res.best_restart,
                "restarts_used": res.restarts_used,
                "iterations": res.iterations,
            }
        rec.value = res.value
    rec.wall_time = time.perf_counter() - t0
    return rec


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_value(args) -> int:
    game = read_raw(args.game).build(args.tol)
    rec = _run_method(game, args, str(args.game))
    _emit(rec.to_json(), args.out)
    return EXIT_OK


def _size_cap() -> int:
    env = os.environ.get("ENLG_SIZE_CAP")
    if env is None:
        return DEFAULT_SIZE_CAP
    try:
        cap = int(env)
    except ValueError:
        raise InputError(f"ENLG_SIZE_CAP must be an integer, got {env!r}") from None
    if cap < 1:
        raise InputError("ENLG_SIZE_CAP must be positive")
    return cap


def cmd_repeat(args) -> int:
    game = read_raw(args.game).build(args.tol)
    if not isinstance(game, MonogamyGame):
        raise InputError("repeat needs a monogamy game file")
    if args.repetitions < 1:
        raise InputError("-r must be at least 1")
    repeated = parallel_repeat(game, args.repetitions, size_cap=_size_cap())
    args._base_game = game
    rec = _run_method(repeated, args, str(args.game))
    rec.repetitions = args.repetitions
    _emit(rec.to_json(), args.out)
    return EXIT_OK


def cmd_mub(args) -> int:
    if not la.is_prime(args.d):
        raise InputError(f"-d must be prime, got {args.d}")
    game = mub_monogamy(args.d, args.bases)
    text = dump_game(game, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def _validate_checks(raw) -> list[tuple[str, bool, float]]:
    """(name, passed, worst residual) for every invariant of the raw game."""
    tol = GAME_TOL
    checks = []
    pi = raw.pi
    checks.append(("pi nonnegative", bool(pi.min() >= -tol), float(max(0.0, -pi.min()))))
    dev = abs(float(pi.sum()) - 1.0)
    checks.append(("pi sums to 1", dev <= max(tol, DISTRIBUTION_TOL), dev))
    m = raw.ops.shape[-1]
    if raw.kind == "extended":
        flat = raw.ops.reshape(-1, m, m)
        herm = max(float(np.max(np.abs(v - v.conj().T))) for v in flat)
        checks.append(("V Hermitian", herm <= tol, herm))
        low, high = 0.0, 0.0
        for v in flat:
            w = np.linalg.eigvalsh((v + v.conj().T) / 2)
            low, high = max(low, -w[0]), max(high, w[-1] - 1.0)
        checks.append(("V >= 0", low <= tol, low))
        checks.append(("V <= I", high <= tol, high))
    else:
        R = raw.ops
        herm = max(float(np.max(np.abs(v - v.conj().T))) for v in R.reshape(-1, m, m))
        checks.append(("R Hermitian", herm <= tol, herm))
        neg = max(max(0.0, -float(np.linalg.eigvalsh((v + v.conj().T) / 2)[0])) for v in R.reshape(-1, m, m))
        checks.append(("R >= 0", neg <= tol, neg))
        for x in range(R.shape[1]):
            dev = float(np.max(np.abs(R[:, x].sum(axis=0) - np.eye(m))))
            checks.append((f"R(.|{x}) sums to I", dev <= tol, dev))
    return checks


def cmd_validate(args) -> int:
    raw = read_raw(args.game)
    checks = _validate_checks(raw)
    lines = [f"{'PASS' if ok else 'FAIL'}  {name:<24} worst residual {res:.3e}" for name, ok, res in checks]
    _emit("\n".join(lines), args.out)
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_INVARIANT


def _add_method_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--level", default="1", help="hierarchy level: 1, 1+AB or 2")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bob-dim", type=int, default=None, help="Bob's dimension for the see-saw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enlg", description="Values of extended nonlocal games.")
    parser.add_argument("--verbose", "-v", action="store_true", help="log progress and solver iterations to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=GAME_TOL, help="tolerance for game invariants on load")
        p.add_argument("--out", default=None, help="write the result here instead of standard output")

    p = sub.add_parser("value", help="compute a value of a game")
    p.add_argument("game")
    _add_method_args(p)
    common(p)
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("repeat", help="compute a value of a parallel-repeated monogamy game")
    p.add_argument("game")
    p.add_argument("-r", dest="repetitions", type=int, required=True)
    _add_method_args(p)
    common(p)
    p.set_defaults(func=cmd_repeat)

    p = sub.add_parser("mub", help="write the monogamy game over mutually unbiased bases")
    p.add_argument("-d", type=int, required=True, help="prime dimension")
    p.add_argument("--bases", type=int, default=None, help="use the first BASES bases (default all d+1)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("validate", help="check every invariant of a game file")
    p.add_argument("game")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantError as exc:
        code, msg = EXIT_INVARIANT, f"invariant violated: {exc}"
    except SizeCapError as exc:
        code, msg = EXIT_CAP, f"size cap exceeded: {exc}"
    except SolverError as exc:
        code, msg = EXIT_SOLVER, f"solver failure: {exc}"
    except InputError as exc:
        code, msg = EXIT_PARSE, f"bad input: {exc}"
    print(f"enlg: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
