"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 budget exceeded.
Players are numbered from 1 on the command line.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import tempfile
import warnings
from fractions import Fraction
from typing import Sequence

from .approx import CertificateWarning, mp_value_float
from .chain import ChainError, induce, n_bound, parse_chain, serialize_chain
from .elimination import mp_value_with_trace
from .encoding import (
    EncodingError,
    emit_achieve_sentence,
    emit_ne_sentence,
    emit_strat,
    emit_val,
)
from .equilibria import (
    BudgetExceeded,
    GridSpec,
    best_response_grid,
    check_eps_achieve,
    check_eps_ne,
    decimal_string,
    float_value_of_profile,
    value_of_profile,
)
from .formula import ParseError, conj, exists, parse_smt2, serialize_smt2, stats
from .generators import random_chain, random_game, random_profile
from .model import (
    GameFormatError,
    dump_json,
    format_rational,
    parse_game,
    parse_profile,
    parse_rational,
    parse_strategy,
    serialize_game,
    serialize_profile,
    strategy_to_json,
)
from .sat import CapExceeded, CnfError, build_game, max_sat_bruteforce, parse_dimacs

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def show(x: Fraction) -> str:
    """Exact rational followed by a decimal rendering, e.g. ``3/2 (1.5)``."""
    return f"{format_rational(x)} ({decimal_string(x)})"


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except GameFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bounds(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bounds must be comma-separated integers: {text!r}") from None
    if any(b < 1 for b in values):
        raise argparse.ArgumentTypeError("bounds must be positive")
    return values


def _player(game, number: int) -> int:
    if not 1 <= number <= game.player_count:
        raise UsageError(f"player must be between 1 and {game.player_count}")
    return number - 1


def _grid(args) -> GridSpec:
    return GridSpec(args.grid, args.deterministic_only)


def _with_profile(game, args):
    profile = parse_profile(game, _read(args.profile))
    if len(profile.strategies) != game.player_count:
        raise GameFormatError("the profile needs one strategy per player")
    return profile


# -- subcommands --------------------------------------------------------------


def cmd_solve_mc(args) -> int:
    chain = parse_chain(_read(args.input))
    if args.mode == "float" or chain.mode != "exact":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CertificateWarning)
            result = mp_value_float(chain, args.u if chain.mode == "exact" else None)
        print(show(result.value))
        if result.bound is None:
            print(f"precision {result.u}: below the certificate floor, no error bound")
        else:
            print(f"precision {result.u}: error at most {show(result.bound)}")
        return EXIT_OK
    value, trace = mp_value_with_trace(chain)
    print(show(value))
    if args.trace:
        _write(dump_json(trace.to_json()), args.trace)
    return EXIT_OK


def cmd_induce(args) -> int:
    game = parse_game(_read(args.game))
    profile = _with_profile(game, args)
    player = _player(game, args.player)
    _write(serialize_chain(induce(game, profile, player, prune=args.prune)), args.output)
    return EXIT_OK


def cmd_value(args) -> int:
    game = parse_game(_read(args.game))
    profile = _with_profile(game, args)
    player = _player(game, args.player)
    if args.mode == "float":
        if args.epsilon is None and args.u is None:
            raise UsageError("float mode needs --u or --epsilon")
        target = args.epsilon if args.epsilon is not None else Fraction(1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CertificateWarning)
            value, u = float_value_of_profile(game, profile, player, target, args.u)
        print(show(value))
        print(f"precision {u}")
    else:
        print(show(value_of_profile(game, profile, player)))
    return EXIT_OK


def cmd_reduce_3sat(args) -> int:
    phi = parse_dimacs(_read(args.dimacs))
    _write(serialize_game(build_game(phi)), args.output)
    return EXIT_OK


def cmd_maxsat(args) -> int:
    phi = parse_dimacs(_read(args.dimacs))
    best, nu = max_sat_bruteforce(phi, args.cap)
    print(f"satisfied: {show(Fraction(best))}")
    print(f"value: {show(Fraction(best, phi.clause_count))}")
    print("assignment: " + " ".join(str(j if v else -j) for j, v in enumerate(nu, start=1)))
    return EXIT_OK


def cmd_check_ne(args) -> int:
    game = parse_game(_read(args.game))
    profile = _with_profile(game, args)
    report = check_eps_ne(
        game, profile, args.epsilon, _grid(args), args.mode, args.u, args.budget, args.jobs
    )
    _write(dump_json(report.to_json(game)), args.output)
    return EXIT_OK


def cmd_best_response(args) -> int:
    game = parse_game(_read(args.game))
    profile = _with_profile(game, args)
    player = _player(game, args.player)
    strategy, value = best_response_grid(
        game, profile, player, args.bound, _grid(args), args.budget, args.jobs
    )
    out = {
        "player": args.player,
        "value": {"exact": format_rational(value), "decimal": decimal_string(value)},
        "strategy": strategy_to_json(game, strategy),
    }
    _write(dump_json(out), args.output)
    return EXIT_OK


def cmd_check_achieve(args) -> int:
    game = parse_game(_read(args.game))
    strategy = parse_strategy(game, _read(args.strategy))
    if strategy.player != 0:
        raise GameFormatError("the guaranteeing strategy must belong to player 1")
    bounds = (strategy.memory_bound, args.opponent_bound)
    report = check_eps_achieve(
        game, strategy, args.value, args.epsilon, _grid(args), args.mode, bounds, args.u, args.budget, args.jobs
    )
    _write(dump_json(report.to_json(game)), args.output)
    return EXIT_OK


def _emit(args):
    game = parse_game(_read(args.game))
    bounds = args.bounds or [1] * game.player_count
    if len(bounds) != game.player_count:
        raise UsageError("give one memory bound per player")
    if args.kind == "ne":
        return emit_ne_sentence(game, bounds, args.epsilon)
    if args.kind == "achieve":
        if args.value is None:
            raise UsageError("--value is required for the guarantee sentence")
        return emit_achieve_sentence(game, bounds, args.value, args.epsilon)
    player = _player(game, args.player)
    strats = [emit_strat(game, i, bounds[i]) for i in range(game.player_count)]
    if args.kind == "strat":
        s = strats[player]
        return exists(s.variables, s.formula)
    val = emit_val(game, bounds, player, strats)
    inputs = [v for s in strats for v in s.variables]
    body = conj(*(s.formula for s in strats), val.formula)
    return exists(inputs + list(val.aux) + [val.output], body)


def cmd_emit_for(args) -> int:
    formula = _emit(args)
    text = serialize_smt2(formula)
    if args.output:
        _write(text, args.output)
    if args.stats:
        print(json.dumps(stats(formula).to_json()))
    elif not args.output:
        sys.stdout.write(text)
    if args.solver:
        path = args.output
        if not path:
            fd, path = tempfile.mkstemp(suffix=".smt2")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
        try:
            done = subprocess.run(
                [args.solver, path], capture_output=True, text=True, timeout=args.timeout
            )
            answer = (done.stdout.strip().splitlines() or ["unknown"])[0]
        except subprocess.TimeoutExpired:
            answer = "timeout"
        except OSError as exc:
            raise UsageError(f"cannot run solver: {exc}") from exc
        finally:
            if not args.output:
                os.unlink(path)
        print(f"solver: {answer}", file=sys.stderr)
    return EXIT_OK


def cmd_stats_for(args) -> int:
    formula = parse_smt2(_read(args.input))
    print(json.dumps(stats(formula).to_json()))
    return EXIT_OK


def cmd_random_chain(args) -> int:
    rng = random.Random(args.seed)
    _write(serialize_chain(random_chain(rng, n=args.states, max_n=8)), args.output)
    return EXIT_OK


def cmd_random_game(args) -> int:
    rng = random.Random(args.seed)
    game = random_game(
        rng,
        players=args.players,
        states=args.states,
        actions=args.actions,
        signals=args.signals,
        zero_sum=args.zero_sum,
    )
    _write(serialize_game(game), args.output)
    if args.profile_output:
        bounds = [args.memory] * game.player_count
        if n_bound(game, bounds) > 64:
            raise UsageError("the induced chain would be too large")
        with open(args.profile_output, "w", encoding="utf-8") as fh:
            fh.write(serialize_profile(game, random_profile(rng, game, bounds)))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boundedmem", description="Bounded-memory strategies in stochastic games.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def grid_flags(p):
        p.add_argument("--grid", type=int, default=1, help="probabilities are multiples of 1/g")
        p.add_argument("--deterministic-only", action="store_true")
        p.add_argument("--mode", choices=("exact", "float"), default="exact")
        p.add_argument("--u", type=int, default=None, help="float precision (default: derived from epsilon)")
        p.add_argument("--budget", type=int, default=None, help="maximum grid size per player")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--output", "-o")

    p = sub.add_parser("solve-mc", help="mean-payoff value of a chain")
    p.add_argument("--input", "-i")
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.add_argument("--u", type=int, default=None)
    p.add_argument("--trace", help="write the elimination trace as JSON to this file")
    p.set_defaults(func=cmd_solve_mc)

    p = sub.add_parser("induce", help="chain induced by a profile")
    p.add_argument("--game", "-g")
    p.add_argument("--profile", "-p", required=True)
    p.add_argument("--player", type=int, default=1)
    p.add_argument("--prune", action="store_true", help="keep reachable states only")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("value", help="value of a profile for one player")
    p.add_argument("--game", "-g")
    p.add_argument("--profile", "-p", required=True)
    p.add_argument("--player", type=int, default=1)
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.add_argument("--u", type=int, default=None)
    p.add_argument("--epsilon", type=_rational, default=None, help="target error in float mode")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("reduce-3sat", help="game of a 3-CNF formula")
    p.add_argument("--dimacs", "-i")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_reduce_3sat)

    p = sub.add_parser("maxsat", help="brute-force MAX-3SAT")
    p.add_argument("--dimacs", "-i")
    p.add_argument("--cap", type=int, default=None, help="largest variable count to enumerate")
    p.set_defaults(func=cmd_maxsat)

    p = sub.add_parser("check-ne", help="epsilon-equilibrium check over a grid")
    p.add_argument("--game", "-g")
    p.add_argument("--profile", "-p", required=True)
    p.add_argument("--epsilon", type=_rational, required=True)
    grid_flags(p)
    p.set_defaults(func=cmd_check_ne)

    p = sub.add_parser("best-response", help="best grid deviation of one player")
    p.add_argument("--game", "-g")
    p.add_argument("--profile", "-p", required=True)
    p.add_argument("--player", type=int, default=1)
    p.add_argument("--bound", type=int, default=None, help="memory bound of the deviation")
    grid_flags(p)
    p.set_defaults(func=cmd_best_response)

    p = sub.add_parser("check-achieve", help="guarantee check in a zero-sum game")
    p.add_argument("--game", "-g")
    p.add_argument("--strategy", "-s", required=True)
    p.add_argument("--value", type=_rational, required=True)
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--opponent-bound", type=int, default=1)
    grid_flags(p)
    p.set_defaults(func=cmd_check_achieve)

    p = sub.add_parser("emit-for", help="real-arithmetic formula in SMT-LIB2")
    p.add_argument("--game", "-g")
    p.add_argument("--kind", choices=("ne", "achieve", "val", "strat"), default="ne")
    p.add_argument("--bounds", type=_bounds, default=None, help="comma-separated memory bounds")
    p.add_argument("--epsilon", type=_rational, default=Fraction(0))
    p.add_argument("--value", type=_rational, default=None)
    p.add_argument("--player", type=int, default=1)
    p.add_argument("--output", "-o")
    p.add_argument("--stats", action="store_true", help="print formula statistics as JSON")
    p.add_argument("--solver", help="solver executable run on the emitted file")
    p.add_argument("--timeout", type=float, default=60.0)
    p.set_defaults(func=cmd_emit_for)

    p = sub.add_parser("stats-for", help="statistics of an SMT-LIB2 formula")
    p.add_argument("--input", "-i")
    p.set_defaults(func=cmd_stats_for)

    p = sub.add_parser("random-chain", help="seeded random chain")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--states", type=int, default=None)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_random_chain)

    p = sub.add_parser("random-game", help="seeded random game")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--players", type=int, default=2)
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--signals", type=int, default=1)
    p.add_argument("--zero-sum", action="store_true")
    p.add_argument("--memory", type=int, default=1, help="memory bound of the random profile")
    p.add_argument("--profile-output", help="also write a random profile here")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_random_game)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"boundedmem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, CapExceeded) as exc:
        print(f"boundedmem: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (GameFormatError, ChainError, CnfError, EncodingError, ParseError, ValueError, OSError) as exc:
        print(f"boundedmem: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
