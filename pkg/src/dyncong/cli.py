"""Command-line front end: one query per invocation, JSON on stdout.

Exit codes: 0 answered yes / computed, 1 answered no (bound unsatisfied,
check failed, no equilibrium), 2 invalid input, 3 search budget exceeded.
Stdout is deterministic for identical inputs; timing goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .arena import ArenaError, Game, parse_arena, serialize_arena, validate_arena
from .costfn import CostFunctionError
from .dynamics import (
    BlindProfile,
    StrategyError,
    blind_strategy,
    is_blind_ne,
    play_profile,
    potential,
    blind_ne,
)
from .graphs import (
    INF,
    NEG_INF,
    BudgetExceeded,
    SemanticsError,
    eval_path,
    path_from_json,
)
from .ne import check_ne_outcome, compute_values, gamma_min_ne
from .oracle import (
    brute_best_response,
    brute_ne_outcomes,
    brute_social_optimum,
    brute_values,
    gen_partition_arena,
)
from .socopt import constrained_social_optimum, social_optimum
from .spe import check_spe_outcome, compute_lambda, gamma_min_spe, spe_exists

EXIT_OK = 0
EXIT_NO = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


class InputError(ValueError):
    pass


def _load_game(args) -> Game:
    try:
        with open(args.arena, encoding="utf-8") as handle:
            arena = parse_arena(handle.read())
    except OSError as exc:
        raise InputError(f"cannot read arena file: {exc}") from exc
    if args.players < 1:
        raise InputError("--players must be at least 1")
    return Game(arena=arena, n=args.players)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _parse_gamma(args, n: int):
    chosen = [
        name
        for name, flag in (("--best", args.best), ("--worst", args.worst),
                           ("--gamma", args.gamma is not None))
        if flag
    ]
    if len(chosen) > 1:
        raise InputError(f"{' and '.join(chosen)} are mutually exclusive")
    if args.worst:
        return (-1,) * n
    if args.gamma is not None:
        try:
            gamma = tuple(int(part) for part in args.gamma.split(","))
        except ValueError as exc:
            raise InputError("--gamma wants comma-separated integers") from exc
        if len(gamma) != n:
            raise InputError("--gamma needs one weight per player")
        return gamma
    return (1,) * n


def _jsonable(value):
    if value == INF:
        return "+inf"
    if value == NEG_INF:
        return "-inf"
    return value


def _emit(payload, args) -> None:
    if getattr(args, "format", "json") == "pretty":
        print(json.dumps(payload, indent=2))
    else:
        print(json.dumps(payload))


def _profile_from_json(game: Game, data) -> BlindProfile:
    if not isinstance(data, dict) or "profile" not in data:
        raise InputError("profile file must contain {'profile': [...]}")
    strategies = []
    for entry in data["profile"]:
        edges = [
            (game.arena.index(frm), game.arena.index(to)) for frm, to in entry
        ]
        strategies.append(blind_strategy(game.arena, edges))
    if len(strategies) != game.n:
        raise InputError("profile size differs from --players")
    return BlindProfile(tuple(strategies))


def _equilibrium_ratio(numerator: int, denominator: int):
    """Exact equilibrium/optimum ratio; None encodes an infinite ratio
    (zero optimum against a positive equilibrium cost)."""
    if denominator == 0:
        return Fraction(1) if numerator == 0 else None
    return Fraction(numerator, denominator)


def poa(game: Game):
    """Price of anarchy: worst equilibrium social cost over the optimum."""
    so = social_optimum(game).cost
    worst = -gamma_min_ne(game, (-1,) * game.n)[0]
    return _equilibrium_ratio(worst, so)


def pos(game: Game):
    """Price of stability: best equilibrium social cost over the optimum."""
    so = social_optimum(game).cost
    best = gamma_min_ne(game, (1,) * game.n)[0]
    return _equilibrium_ratio(best, so)


def _ratio_payload(numerator: int, denominator: int):
    ratio = _equilibrium_ratio(numerator, denominator)
    if ratio is None:
        return {"ratio": None, "infinite": True, "decimal": None}
    return {
        "ratio": {"num": ratio.numerator, "den": ratio.denominator},
        "decimal": float(ratio),
    }


def cmd_validate(args):
    try:
        with open(args.arena, encoding="utf-8") as handle:
            arena = parse_arena(handle.read())
    except OSError as exc:
        raise InputError(f"cannot read arena file: {exc}") from exc
    violations = validate_arena(arena)
    if violations:
        raise InputError("; ".join(violations))
    payload = {
        "command": "validate",
        "ok": True,
        "states": len(arena.states),
        "edges": len(arena.edges),
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_so(args):
    game = _load_game(args)
    if args.bound is not None:
        satisfied, result = constrained_social_optimum(game, args.bound)
        payload = {"command": "so", "satisfied": satisfied}
        if satisfied:
            costs, social, _ = eval_path(
                game, [m for m, _, _ in result.witness.steps]
            )
            assert social == result.cost
            payload["cost"] = result.cost
            payload["witness"] = result.witness.to_json(game.arena)
        _emit(payload, args)
        return EXIT_OK if satisfied else EXIT_NO
    result = social_optimum(game)
    costs, social, _ = eval_path(game, [m for m, _, _ in result.witness.steps])
    assert social == result.cost
    payload = {
        "command": "so",
        "cost": result.cost,
        "witness": result.witness.to_json(game.arena),
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_blind_ne(args):
    game = _load_game(args)
    profile, swaps = blind_ne(game)
    costs, social, path = play_profile(game, profile)
    assert is_blind_ne(game, profile)
    payload = {
        "command": "blind-ne",
        "profile": [s.to_names(game.arena) for s in profile.strategies],
        "costs": [_jsonable(c) for c in costs],
        "social": _jsonable(social),
        "potential": potential(game, profile),
        "improvement_steps": swaps,
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_eval(args):
    game = _load_game(args)
    profile = _profile_from_json(game, _load_json(args.profile))
    costs, social, path = play_profile(game, profile)
    payload = {
        "command": "eval",
        "costs": [_jsonable(c) for c in costs],
        "social": _jsonable(social),
        "potential": potential(game, profile),
        "is_blind_ne": is_blind_ne(game, profile),
        "outcome": path.to_json(game.arena),
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_values(args):
    game = _load_game(args)
    table = compute_values(game)
    arena = game.arena
    entries = []
    for (own, counts), value in sorted(table.values.items()):
        entries.append(
            {
                "state": arena.states[own],
                "coalition": {
                    arena.states[v]: c for v, c in enumerate(counts) if c
                },
                "value": value,
            }
        )
    _emit({"command": "values", "values": entries}, args)
    return EXIT_OK


def cmd_ne(args):
    game = _load_game(args)
    gamma = _parse_gamma(args, game.n)
    cost, witness = gamma_min_ne(game, gamma)
    assert check_ne_outcome(game, witness)
    costs, social, _ = eval_path(game, [m for m, _, _ in witness.steps])
    payload = {
        "command": "ne",
        "gamma": list(gamma),
        "cost": cost,
        "social": _jsonable(social),
        "witness": witness.to_json(game.arena),
    }
    if args.bound is not None:
        payload["satisfied"] = cost <= args.bound
        _emit(payload, args)
        return EXIT_OK if cost <= args.bound else EXIT_NO
    _emit(payload, args)
    return EXIT_OK


def cmd_check_ne(args):
    game = _load_game(args)
    path = path_from_json(game.arena, _load_json(args.outcome))
    accepted = check_ne_outcome(game, path)
    _emit({"command": "check-ne", "accepted": accepted}, args)
    return EXIT_OK if accepted else EXIT_NO


def cmd_spe(args):
    game = _load_game(args)
    lam = compute_lambda(game)
    if args.dump_lambda:
        entries = []
        for (frm, to), labels in sorted(lam.labels.items()):
            entries.append(
                {
                    "from": [game.arena.states[s] for s in frm],
                    "to": [game.arena.states[s] for s in to],
                    "labels": [_jsonable(v) for v in labels],
                }
            )
        with open(args.dump_lambda, "w", encoding="utf-8") as handle:
            json.dump({"lambda": entries}, handle, indent=2)
    if args.exists:
        ok, witness = spe_exists(game, lam)
        payload = {"command": "spe", "exists": ok}
        if ok:
            payload["witness"] = witness.to_json(game.arena)
        _emit(payload, args)
        return EXIT_OK if ok else EXIT_NO
    gamma = _parse_gamma(args, game.n)
    found = gamma_min_spe(game, gamma, lam)
    if found is None:
        _emit({"command": "spe", "exists": False}, args)
        return EXIT_NO
    cost, witness = found
    costs, social, _ = eval_path(game, [m for m, _, _ in witness.steps])
    payload = {
        "command": "spe",
        "exists": True,
        "gamma": list(gamma),
        "cost": cost,
        "social": _jsonable(social),
        "witness": witness.to_json(game.arena),
    }
    if args.bound is not None:
        payload["satisfied"] = cost <= args.bound
        _emit(payload, args)
        return EXIT_OK if cost <= args.bound else EXIT_NO
    _emit(payload, args)
    return EXIT_OK


def cmd_check_spe(args):
    game = _load_game(args)
    path = path_from_json(game.arena, _load_json(args.outcome))
    accepted = check_spe_outcome(game, path)
    _emit({"command": "check-spe", "accepted": accepted}, args)
    return EXIT_OK if accepted else EXIT_NO


def _metrics(game: Game):
    so = social_optimum(game).cost
    best, _ = gamma_min_ne(game, (1,) * game.n)
    worst_neg, _ = gamma_min_ne(game, (-1,) * game.n)
    worst = -worst_neg
    return so, best, worst


def cmd_poa(args):
    game = _load_game(args)
    so, best, worst = _metrics(game)
    payload = {"command": "poa", "social_optimum": so, "worst_ne": worst}
    payload.update(_ratio_payload(worst, so))
    _emit(payload, args)
    return EXIT_OK


def cmd_pos(args):
    game = _load_game(args)
    so, best, worst = _metrics(game)
    payload = {"command": "pos", "social_optimum": so, "best_ne": best}
    payload.update(_ratio_payload(best, so))
    _emit(payload, args)
    return EXIT_OK


def cmd_oracle(args):
    if args.oracle_cmd == "gen-partition":
        family = [int(x) for x in args.family.split(",")]
        game, big_m = gen_partition_arena(family)
        payload = {
            "command": "oracle gen-partition",
            "players": game.n,
            "threshold": big_m,
            "arena": json.loads(serialize_arena(game.arena)),
        }
        _emit(payload, args)
        return EXIT_OK
    game = _load_game(args)
    if args.oracle_cmd == "so":
        cost = brute_social_optimum(game, args.max_steps)
        _emit({"command": "oracle so", "cost": cost}, args)
        return EXIT_OK
    if args.oracle_cmd == "br":
        profile = _profile_from_json(game, _load_json(args.profile))
        cost = brute_best_response(
            game, profile, args.player - 1, args.max_len
        )
        _emit({"command": "oracle br", "cost": cost}, args)
        return EXIT_OK
    if args.oracle_cmd == "values":
        table = brute_values(game, args.horizon)
        entries = []
        for (own, counts), value in sorted(table.items()):
            entries.append(
                {
                    "state": game.arena.states[own],
                    "coalition": {
                        game.arena.states[v]: c
                        for v, c in enumerate(counts)
                        if c
                    },
                    "value": _jsonable(value),
                }
            )
        _emit({"command": "oracle values", "values": entries}, args)
        return EXIT_OK
    if args.oracle_cmd == "ne-outcomes":
        outcomes = brute_ne_outcomes(game, args.max_steps)
        _emit(
            {
                "command": "oracle ne-outcomes",
                "count": len(outcomes),
                "outcomes": [p.to_json(game.arena) for p in outcomes],
            },
            args,
        )
        return EXIT_OK
    raise InputError(f"unknown oracle subcommand {args.oracle_cmd!r}")


def _add_game_args(parser):
    parser.add_argument("--arena", required=True, help="arena JSON file")
    parser.add_argument("--players", type=int, required=True)


def _add_gamma_args(parser):
    parser.add_argument("--gamma", help="comma-separated per-player weights")
    parser.add_argument("--best", action="store_true",
                        help="shorthand for an all-ones gamma (default)")
    parser.add_argument("--worst", action="store_true",
                        help="shorthand for an all-minus-ones gamma")
    parser.add_argument("--bound", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyncong",
        description="Dynamic network congestion game solvers. Bound "
        "comparisons are non-strict (cost <= bound).",
    )
    parser.add_argument("--format", choices=["json", "pretty"], default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate an arena file")
    p.add_argument("--arena", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("so", help="social optimum")
    _add_game_args(p)
    p.add_argument("--bound", type=int, default=None)
    p.set_defaults(func=cmd_so)

    p = sub.add_parser("blind-ne", help="blind Nash equilibrium by "
                       "best-response iteration")
    _add_game_args(p)
    p.set_defaults(func=cmd_blind_ne)

    p = sub.add_parser("eval", help="evaluate a blind profile")
    _add_game_args(p)
    p.add_argument("--profile", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("values", help="coalition punishment values")
    _add_game_args(p)
    p.set_defaults(func=cmd_values)

    p = sub.add_parser("ne", help="gamma-optimal Nash equilibrium")
    _add_game_args(p)
    _add_gamma_args(p)
    p.set_defaults(func=cmd_ne)

    p = sub.add_parser("check-ne", help="is the outcome a Nash equilibrium")
    _add_game_args(p)
    p.add_argument("--outcome", required=True)
    p.set_defaults(func=cmd_check_ne)

    p = sub.add_parser("spe", help="subgame-perfect equilibria")
    _add_game_args(p)
    _add_gamma_args(p)
    p.add_argument("--exists", action="store_true")
    p.add_argument("--dump-lambda", default=None, metavar="FILE")
    p.set_defaults(func=cmd_spe)

    p = sub.add_parser("check-spe", help="is the outcome subgame-perfect")
    _add_game_args(p)
    p.add_argument("--outcome", required=True)
    p.set_defaults(func=cmd_check_spe)

    p = sub.add_parser("poa", help="price of anarchy")
    _add_game_args(p)
    p.set_defaults(func=cmd_poa)

    p = sub.add_parser("pos", help="price of stability")
    _add_game_args(p)
    p.set_defaults(func=cmd_pos)

    p = sub.add_parser("oracle", help="brute-force reference queries")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)

    q = osub.add_parser("so")
    _add_game_args(q)
    q.add_argument("--max-steps", type=int, required=True)

    q = osub.add_parser("br")
    _add_game_args(q)
    q.add_argument("--profile", required=True)
    q.add_argument("--player", type=int, required=True, help="1-based index")
    q.add_argument("--max-len", type=int, required=True)

    q = osub.add_parser("values")
    _add_game_args(q)
    q.add_argument("--horizon", type=int, required=True)

    q = osub.add_parser("ne-outcomes")
    _add_game_args(q)
    q.add_argument("--max-steps", type=int, required=True)

    q = osub.add_parser("gen-partition")
    q.add_argument("--family", required=True,
                   help="comma-separated positive integers")
    p.set_defaults(func=cmd_oracle)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    started = time.perf_counter()
    try:
        code = args.func(args)
    except (InputError, ArenaError, CostFunctionError, SemanticsError,
            StrategyError) as exc:
        print(f"dyncong: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"dyncong: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    elapsed = (time.perf_counter() - started) * 1000
    print(f"[dyncong] {args.command}: {elapsed:.1f} ms", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))
