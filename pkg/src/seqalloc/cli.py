"""Command-line front end.

Exit codes: 0 success, 1 the checked property does not hold, 2 invalid
input, 3 a size guard was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import equilibria, pareto, stackelberg
from .core import (
    Instance,
    InvalidInstanceError,
    SizeGuardError,
    format_sequence,
    instance_to_dict,
    validate_instance,
)
from .mechanism import sequential_allocation

EXIT_OK, EXIT_VIOLATED, EXIT_INVALID, EXIT_GUARD = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInstanceError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"{path} is not valid JSON: {exc}") from None


def _load_profile(path, instance: Instance):
    raw = _load_json(path)
    if isinstance(raw, dict):
        raw = raw.get("rankings")
    if not isinstance(raw, list) or len(raw) != instance.n:
        raise InvalidInstanceError(f"{path}: expected a list of {instance.n} rankings")
    out = []
    for i, r in enumerate(raw):
        r = tuple(str(o) for o in r)
        if len(r) != instance.m or set(r) != set(instance.items):
            raise InvalidInstanceError(f"{path}: ranking of agent {i + 1} is not a permutation of the items")
        out.append(r)
    return tuple(out)


def _load_moves(path, instance: Instance):
    raw = _load_json(path)
    if isinstance(raw, dict):
        raw = raw.get("moves")
    if not isinstance(raw, list):
        raise InvalidInstanceError(f"{path}: expected a list of moves")
    moves = []
    for k, mv in enumerate(raw, 1):
        try:
            agent = int(mv["agent"]) - 1
            ranking = tuple(str(o) for o in mv["ranking"])
        except (KeyError, TypeError, ValueError):
            raise InvalidInstanceError(f"{path}: move {k} needs 'agent' and 'ranking'") from None
        if not 0 <= agent < instance.n:
            raise InvalidInstanceError(f"{path}: move {k} names unknown agent {agent + 1}")
        if len(ranking) != instance.m or set(ranking) != set(instance.items):
            raise InvalidInstanceError(f"{path}: move {k} ranking is not a permutation of the items")
        moves.append((agent, ranking))
    return moves


# -- rendering ----------------------------------------------------------------


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def _bundle_list(instance, bundle):
    return [o for o in instance.items if o in bundle]


def _allocation(instance, assignment):
    return {
        "bundles": {instance.names[i]: _bundle_list(instance, b) for i, b in enumerate(assignment.bundles)},
        "matrix": [[int(o in b) for o in instance.items] for b in assignment.bundles],
        "pick_order": list(assignment.pick_order),
    }


def _allocation_lines(instance, assignment):
    width = max(len(nm) for nm in instance.names)
    lines = []
    for i, b in enumerate(assignment.bundles):
        items = ", ".join(_bundle_list(instance, b))
        row = " ".join(str(int(o in b)) for o in instance.items)
        lines.append(f"  {instance.names[i]:>{width}}: {{{items}}}   [{row}]")
    lines.append("  pick order: " + ", ".join(assignment.pick_order))
    return lines


def _profile_lines(instance, profile):
    width = max(len(nm) for nm in instance.names)
    return [f"  {instance.names[i]:>{width}}: " + ", ".join(r) for i, r in enumerate(profile)]


# -- commands -----------------------------------------------------------------


def _cmd_run(args, instance):
    profile = _load_profile(args.profile, instance) if args.profile else instance.truthful
    a = sequential_allocation(profile, instance.sequence, instance.items)
    result = {"profile": [list(r) for r in profile], **_allocation(instance, a)}
    text = [f"sequence {format_sequence(instance.sequence)}", "profile:"] + _profile_lines(instance, profile)
    text += ["allocation:"] + _allocation_lines(instance, a)
    return EXIT_OK, result, None, text


def _cmd_bluff(args, instance):
    profile = equilibria.bluff_profile(instance)
    a = sequential_allocation(profile, instance.sequence, instance.items)
    result = {"profile": [list(r) for r in profile], **_allocation(instance, a)}
    text = ["bluff profile:"] + _profile_lines(instance, profile) + ["allocation:"] + _allocation_lines(instance, a)
    return EXIT_OK, result, None, text


def _cmd_crossout(args, instance):
    try:
        profile = equilibria.crossout_profile(instance)
    except ValueError as exc:
        raise _Failure(EXIT_INVALID, str(exc)) from None
    a = sequential_allocation(profile, instance.sequence, instance.items)
    result = {"profile": [list(r) for r in profile], **_allocation(instance, a)}
    text = ["crossout profile:"] + _profile_lines(instance, profile) + ["allocation:"] + _allocation_lines(instance, a)
    return EXIT_OK, result, None, text


def _cmd_dynamics(args, instance):
    start = _load_profile(args.start, instance) if args.start else instance.truthful
    policy = "replay" if args.replay else args.policy
    if policy == "replay" and not args.replay:
        raise InvalidInstanceError("--policy replay needs --replay FILE")
    moves = _load_moves(args.replay, instance) if args.replay else None
    try:
        trace = equilibria.better_response_dynamics(
            start, instance.utilities, instance.sequence, policy, moves, args.max_steps
        )
    except equilibria.NotABetterResponseError as exc:
        raise _Failure(EXIT_INVALID, f"replay rejected: {exc}") from None
    steps = []
    text = [f"policy {policy}, start:"] + _profile_lines(instance, start)
    for k, s in enumerate(trace.steps, 1):
        steps.append({
            "step": k,
            "agent": instance.names[s.agent],
            "ranking": list(s.new),
            **_allocation(instance, s.assignment),
        })
        text.append(f"step {k}: agent {instance.names[s.agent]} reports " + ", ".join(s.new))
        text += _allocation_lines(instance, s.assignment)
    result = {"verdict": trace.verdict, "summary": trace.describe(), "repeat_of": trace.repeat_of, "steps": steps}
    text.append(trace.describe())
    return EXIT_OK, result, None, text


def _cmd_check_pne(args, instance):
    profile = _load_profile(args.profile, instance) if args.profile else instance.truthful
    seq = instance.sequence
    witness = None
    if args.mode == "all-consistent":
        violation = equilibria.dominance_violation(profile, instance.truthful, seq)
        holds = violation is None
        if not holds:
            agent, bundle = violation
            witness = {"agent": instance.names[agent], "reachable_bundle": _bundle_list(instance, bundle)}
    else:
        if args.mode == "lex":
            us = equilibria.lexicographic_utilities(instance.truthful)
        else:
            if not args.explicit_utilities:
                raise InvalidInstanceError("--mode cardinal needs utilities in the instance file")
            us = instance.utilities
        holds, dev = equilibria.is_pure_nash(profile, us, seq)
        if dev is not None:
            witness = {
                "agent": instance.names[dev.agent],
                "ranking": list(dev.ranking),
                "bundle": _bundle_list(instance, dev.bundle),
                "old_value": _frac(dev.old_value),
                "new_value": _frac(dev.new_value),
            }
    result = {"mode": args.mode, "profile": [list(r) for r in profile], "pure_nash": holds}
    text = [f"profile ({args.mode}):"] + _profile_lines(instance, profile)
    text.append("pure Nash equilibrium: " + ("yes" if holds else "no"))
    if witness:
        text.append("witness: " + json.dumps(witness, sort_keys=True))
    return (EXIT_OK if holds else EXIT_VIOLATED), result, witness, text


def _cmd_check_pareto(args, instance):
    profile = _load_profile(args.profile, instance) if args.profile else instance.truthful
    a = sequential_allocation(profile, instance.sequence, instance.items)
    ok, better = pareto.is_pareto_optimal_pc(instance.truthful, a)
    witness = None
    if better is not None:
        witness = {instance.names[i]: _bundle_list(instance, b) for i, b in enumerate(better)}
    result = {"profile": [list(r) for r in profile], **_allocation(instance, a), "pareto_optimal": ok}
    text = ["allocation:"] + _allocation_lines(instance, a)
    text.append("Pareto optimal (pairwise comparisons): " + ("yes" if ok else "no"))
    if witness:
        text.append("dominated by: " + json.dumps(witness, sort_keys=True))
    return (EXIT_OK if ok else EXIT_VIOLATED), result, witness, text


def _solve_commitment(args, instance):
    leader = args.leader - 1
    try:
        u1, u2, seq = stackelberg.leader_view(instance, leader)
    except ValueError as exc:
        raise _Failure(EXIT_INVALID, str(exc)) from None
    solutions = {}
    if args.method in ("dp", "both"):
        solutions["dp"] = stackelberg.stackelberg_dp(u1, u2, seq)
    if args.method in ("brute", "both"):
        solutions["brute"] = stackelberg.stackelberg_brute(u1, u2, seq)
    return leader, u1, u2, seq, solutions


def _cmd_stackelberg(args, instance):
    leader, u1, u2, seq, solutions = _solve_commitment(args, instance)
    result = {"leader": instance.names[leader], "method": args.method}
    text = [f"leader: agent {instance.names[leader]}"]
    for method, (ranking, value) in solutions.items():
        take = stackelberg.follower_take_set(ranking, seq, sum(seq), u2, u1)
        keep = [o for o in instance.items if o in ranking and o not in take]
        result[method] = {"ranking": list(ranking), "value": _frac(value), "leader_bundle": keep}
        text.append(f"{method}: commit to {', '.join(ranking)} -> leader gets {{{', '.join(keep)}}}, value {value}")
    code = EXIT_OK
    if len(solutions) == 2:
        agree = solutions["dp"][1] == solutions["brute"][1]
        result["agree"] = agree
        text.append("dp and brute force agree" if agree else "dp and brute force DISAGREE")
        code = EXIT_OK if agree else EXIT_VIOLATED
    return code, result, None, text


def _cmd_advantage(args, instance):
    leader, u1, u2, seq, solutions = _solve_commitment(args, instance)
    ranking, value = solutions.get("dp") or solutions["brute"]
    truthful = stackelberg.leader_value(u1.base, seq, u2, u1)
    result = {
        "leader": instance.names[leader],
        "truthful_value": _frac(truthful),
        "optimal_value": _frac(value),
        "optimal_ranking": list(ranking),
        "advantage": _frac(value - truthful),
    }
    text = [
        f"leader: agent {instance.names[leader]}",
        f"truthful commitment value: {truthful}",
        f"optimal commitment value:  {value}  ({', '.join(ranking)})",
        f"advantage: {value - truthful}",
    ]
    return EXIT_OK, result, None, text


COMMANDS = {
    "run": _cmd_run,
    "bluff": _cmd_bluff,
    "crossout": _cmd_crossout,
    "dynamics": _cmd_dynamics,
    "check-pne": _cmd_check_pne,
    "check-pareto": _cmd_check_pareto,
    "stackelberg": _cmd_stackelberg,
    "advantage": _cmd_advantage,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqalloc", description="Strategic analysis of sequential allocation.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--instance", required=True, metavar="FILE")
    common.add_argument("--json", action="store_true", help="print a machine-readable document")
    common.add_argument("--utilities", choices=["lex", "uplex", "borda"], default="lex",
                        help="utilities for agents whose instance entry has none (default: lex)")

    p = sub.add_parser("run", parents=[common], help="run the mechanism")
    p.add_argument("--profile", metavar="FILE", help="reported rankings (default: truthful)")
    sub.add_parser("bluff", parents=[common], help="bluff profile and its allocation")
    sub.add_parser("crossout", parents=[common], help="crossout profile (two agents)")
    p = sub.add_parser("dynamics", parents=[common], help="better-response dynamics")
    p.add_argument("--policy", choices=equilibria.POLICIES, default="round-robin")
    p.add_argument("--replay", metavar="FILE", help="move list to replay")
    p.add_argument("--start", metavar="FILE", help="starting profile (default: truthful)")
    p.add_argument("--max-steps", type=int, default=10000)
    p = sub.add_parser("check-pne", parents=[common], help="pure Nash equilibrium check")
    p.add_argument("--mode", choices=["cardinal", "lex", "all-consistent"], default="all-consistent")
    p.add_argument("--profile", metavar="FILE")
    p = sub.add_parser("check-pareto", parents=[common], help="Pareto optimality w.r.t. pairwise comparisons")
    p.add_argument("--profile", metavar="FILE")
    for name in ("stackelberg", "advantage"):
        p = sub.add_parser(name, parents=[common], help="optimal commitment" if name == "stackelberg" else "value of commitment")
        p.add_argument("--leader", type=int, choices=[1, 2], default=1)
        p.add_argument("--method", choices=["dp", "brute", "both"], default="dp")
    return parser


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    ties = args.command in ("stackelberg", "advantage")
    try:
        raw = _load_json(args.instance)
        explicit = validate_instance(raw, None, allow_ties=ties)
        args.explicit_utilities = explicit.utilities is not None
        instance = explicit if args.explicit_utilities else validate_instance(raw, args.utilities, allow_ties=ties)
        code, result, witness, text = COMMANDS[args.command](args, instance)
    except (InvalidInstanceError, _Failure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "code", EXIT_INVALID)
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    if args.json:
        doc = {"command": args.command, "instance": instance_to_dict(instance), "result": result, "witness": witness}
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(text) + "\n")
    return code


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
