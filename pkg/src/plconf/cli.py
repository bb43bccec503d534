"""Command-line front end.  Every command prints one JSON document with its manifest.

Exit codes: 0 on success, 2 for a Refuted or Inconclusive verdict under --strict,
1 on any error.
"""
from __future__ import annotations

import functools
import hashlib
import logging
import sys
from importlib import metadata
from pathlib import Path
from typing import Any, Optional

import click

from . import confining as C
from . import lamplighter as L
from . import nonlamplike as NL
from . import treesim as T
from .exactnum import ParseError, format_rational, parse_rational
from .families import FamilyError, format_family, parse_family
from .plmap import (
    PLError,
    chi0,
    chi1,
    compose,
    epsilon,
    evaluate,
    fixed_set,
    identity,
    invert,
    make_bump,
    random_commutator,
    random_element,
    standard_generators,
)
from .serial import (
    ValidationError,
    dumps,
    element_from_json,
    element_to_json,
    lamp_from_json,
    lamp_to_json,
    loads_checked,
    verdict_to_json,
)

log = logging.getLogger("plconf")


class VerdictExit(Exception):
    """Raised after output when --strict turns a verdict into exit code 2."""


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class Context:
    def __init__(self, n: int, seed: int, samples: int, k_max: int, strict: bool):
        self.n, self.seed, self.strict = n, seed, strict
        self.budget = C.Budget(samples, k_max, seed)
        self.hashes: dict[str, str] = {}

    def manifest(self, command: str, params: dict) -> dict:
        return {
            "command": command,
            "parameters": params,
            "seed": self.seed,
            "budgets": self.budget.as_dict(),
            "n": self.n,
            "version": _version(),
            "input_hashes": dict(sorted(self.hashes.items())),
        }

    def read(self, source: str) -> Any:
        """JSON from a file path, '-' for stdin, or inline text starting with '{'."""
        if source.lstrip().startswith("{"):
            text, name = source, f"<inline {len(self.hashes)}>"
        elif source == "-":
            text, name = sys.stdin.read(), "<stdin>"
        else:
            path = Path(source)
            if not path.exists():
                raise ValidationError(f"{source}: no such file")
            text, name = path.read_text(), source
        self.hashes[name] = hashlib.sha256(text.encode()).hexdigest()
        return loads_checked(text, name)

    def element(self, source: str):
        """An element from JSON or a shorthand: identity, bump, gen:I, random:SEED, commutator:SEED."""
        head, _, arg = source.partition(":")
        if source == "identity":
            return identity(self.n)
        if source == "bump":
            return make_bump(self.n)
        if head == "gen" and arg.isdigit():
            return standard_generators(self.n)[int(arg)]
        if head == "random" and arg.isdigit():
            return random_element(int(arg), 4, self.n)
        if head == "commutator" and arg.isdigit():
            return random_commutator(int(arg), 2, self.n)
        return element_from_json(self.read(source))


def emit(ctx: Context, command: str, params: dict, result: Any, verdict=None) -> None:
    click.echo(dumps({"manifest": ctx.manifest(command, params), "result": result}))
    if verdict is not None and ctx.strict and not verdict.is_dominates:
        raise VerdictExit()


def common(fn):
    """Shared flags, accepted after any leaf command."""

    @click.option("--n", "n", type=int, default=2, show_default=True, help="base of F_n")
    @click.option("--seed", type=int, default=0, show_default=True)
    @click.option("--budget", "samples", type=int, default=200, show_default=True, help="sample budget")
    @click.option("--k-max", type=int, default=32, show_default=True)
    @click.option("--strict", is_flag=True, help="exit 2 on Refuted or Inconclusive verdicts")
    @functools.wraps(fn)
    def wrapper(n, seed, samples, k_max, strict, **kw):
        ctx = Context(n, seed, samples, k_max, strict)
        return fn(ctx, **kw)

    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="log progress to stderr")
def cli(verbose: bool) -> None:
    """Exact computations with F_n, its confining subsets, lamplighters and trees."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr)


# elt -----------------------------------------------------------------------------------------


@cli.group()
def elt() -> None:
    """Elements of F_n: products, inverses, characters, fixed sets."""


@elt.command("compose")
@click.argument("f")
@click.argument("g")
@common
def elt_compose(ctx, f, g):
    emit(ctx, "elt compose", {"f": f, "g": g}, element_to_json(compose(ctx.element(f), ctx.element(g))))


@elt.command("invert")
@click.argument("f")
@common
def elt_invert(ctx, f):
    emit(ctx, "elt invert", {"f": f}, element_to_json(invert(ctx.element(f))))


@elt.command("canon")
@click.argument("f")
@common
def elt_canon(ctx, f):
    emit(ctx, "elt canon", {"f": f}, element_to_json(ctx.element(f)))


@elt.command("chi")
@click.argument("f")
@common
def elt_chi(ctx, f):
    g = ctx.element(f)
    out = {"epsilon": epsilon(g)}
    if g.orientation == 1:
        out.update(chi0=chi0(g), chi1=chi1(g))
    emit(ctx, "elt chi", {"f": f}, out)


@elt.command("eval")
@click.argument("f")
@click.argument("x")
@common
def elt_eval(ctx, f, x):
    y = evaluate(ctx.element(f), parse_rational(x))
    emit(ctx, "elt eval", {"f": f, "x": x}, format_rational(y))


@elt.command("fixed")
@click.argument("f")
@common
def elt_fixed(ctx, f):
    fs = fixed_set(ctx.element(f))
    emit(ctx, "elt fixed", {"f": f}, {
        "points": [format_rational(p) for p in fs.points],
        "intervals": [[format_rational(a), format_rational(b)] for a, b in fs.intervals],
    })


# conf ----------------------------------------------------------------------------------------


@cli.group()
def conf() -> None:
    """Confining subsets of F_n': axioms, comparison, largest element, fixed points."""


def _family(ctx: Context, text: str):
    return parse_family(text, ctx.n)


@conf.command("check")
@click.argument("family")
@common
def conf_check(ctx, family):
    F = _family(ctx, family)
    r = C.axiom_check(F, ctx.budget)
    emit(ctx, "conf check", {"family": family}, {
        "family": format_family(F),
        "stay": r.stay_ok,
        "stay_rule": r.stay_rule,
        "stay_counterexample": None if r.stay_counterexample is None else element_to_json(r.stay_counterexample),
        "getin": [k for _, k in r.getin],
        "prod_k": r.prod_k,
        "prod_exact": r.prod_exact,
        "z0": list(r.z0(ctx.n)),
        "samples_used": r.samples_used,
        "passed": r.passed,
    })


@conf.command("compare")
@click.argument("family1")
@click.argument("family2")
@common
def conf_compare(ctx, family1, family2):
    F1, F2 = _family(ctx, family1), _family(ctx, family2)
    forward, backward = C.compare(F1, F2, ctx.budget), C.compare(F2, F1, ctx.budget)
    out = {"forward": verdict_to_json(forward), "backward": verdict_to_json(backward)}
    out["equivalent"] = forward.is_dominates and backward.is_dominates
    worst = forward if not forward.is_dominates else backward
    emit(ctx, "conf compare", {"family1": family1, "family2": family2}, out, worst)


@conf.command("largest")
@click.argument("family")
@common
def conf_largest(ctx, family):
    F = _family(ctx, family)
    r = C.largest_element_witness(F, ctx.budget)
    emit(ctx, "conf largest", {"family": family}, {
        "k": r.k,
        "t": format_rational(r.t),
        "threshold": format_rational(r.threshold),
        "strict": r.strict,
        "sampled_ok": r.sampled_ok,
    })


@conf.command("fixed")
@click.argument("family")
@click.option("--k-min", type=int, default=-3, show_default=True)
@common
def conf_fixed(ctx, family, k_min):
    r = C.global_fixed_points(_family(ctx, family), k_min)
    emit(ctx, "conf fixed", {"family": family, "k_min": k_min}, {
        "points": [format_rational(p) for p in r.points],
        "intervals": [[format_rational(a), format_rational(b)] for a, b in r.intervals],
        "certified": r.certified,
        "complete": r.complete,
        "note": r.note,
    })


@conf.command("parse")
@click.argument("family")
@common
def conf_parse(ctx, family):
    emit(ctx, "conf parse", {"family": family}, format_family(_family(ctx, family)))


# lamp ----------------------------------------------------------------------------------------


@cli.group()
def lamp() -> None:
    """Lamplighters Gamma wr Z with Gamma = Z ('int') or a free abelian group ('freeabelian')."""


def _lamp_opts(fn):
    return click.option("--group", "group_name", default="int", show_default=True,
                        type=click.Choice(["int", "freeabelian"]))(fn)


@lamp.command("check")
@click.argument("family")
@_lamp_opts
@common
def lamp_check(ctx, family, group_name):
    F = L.parse_lamp_family(family, L.lamp_group(group_name))
    r = L.lamp_axiom_check(F, ctx.budget)
    emit(ctx, "lamp check", {"family": family, "group": group_name}, {
        "family": r.family,
        "stay": r.stay_ok,
        "stay_counterexample": None if r.stay_counterexample is None else lamp_to_json(r.stay_counterexample),
        "getin": [k for _, k in r.getin],
        "prod_k": r.prod_k,
        "prod_proved": r.prod_proved,
        "right_heavy": L.is_right_heavy(F),
        "passed": r.passed,
    })


@lamp.command("compare")
@click.argument("family1")
@click.argument("family2")
@_lamp_opts
@common
def lamp_compare_cmd(ctx, family1, family2, group_name):
    G = L.lamp_group(group_name)
    F1, F2 = L.parse_lamp_family(family1, G), L.parse_lamp_family(family2, G)
    v = L.lamp_compare(F1, F2, ctx.budget)
    emit(ctx, "lamp compare", {"family1": family1, "family2": family2, "group": group_name}, verdict_to_json(v), v)


@lamp.command("member")
@click.argument("element")
@click.argument("family")
@_lamp_opts
@common
def lamp_member_cmd(ctx, element, family, group_name):
    G = L.lamp_group(group_name)
    u = lamp_from_json(ctx.read(element), G)
    emit(ctx, "lamp member", {"element": element, "family": family, "group": group_name},
         L.lamp_member(u, L.parse_lamp_family(family, G)))


@lamp.command("nonsplit")
@click.option("--p-max", type=int, default=16, show_default=True)
@common
def lamp_nonsplit(ctx, p_max):
    steps = L.nonsplit_certificate(p_max)
    emit(ctx, "lamp nonsplit", {"p_max": p_max}, {
        "ok": all(s.ok for s in steps),
        "steps": [{"p": s.p, "witness": lamp_to_json(s.witness), "source": lamp_to_json(s.source), "ok": s.ok}
                  for s in steps],
    })


@lamp.command("xi")
@click.argument("f")
@click.option("--t", "t_text", default="1/3", show_default=True)
@common
def lamp_xi(ctx, f, t_text):
    v = L.xi_t(ctx.element(f), parse_rational(t_text))
    emit(ctx, "lamp xi", {"f": f, "t": t_text}, {str(k): c for k, c in sorted(v.items())})


@lamp.command("section")
@click.argument("vector")
@click.option("--t", "t_text", default="1/3", show_default=True)
@common
def lamp_section(ctx, vector, t_text):
    """An element of F_n whose slope vector at t is VECTOR, e.g. '{"0": 1, "-2": -1}'."""
    raw = ctx.read(vector)
    if not isinstance(raw, dict):
        raise ValidationError("vector: expected an object mapping coordinates k <= 0 to integers")
    try:
        v = {int(k): int(c) for k, c in raw.items()}
    except (TypeError, ValueError):
        raise ValidationError("vector: keys and values must be integers") from None
    g = L.xi_section(v, parse_rational(t_text), ctx.n)
    emit(ctx, "lamp section", {"vector": vector, "t": t_text}, element_to_json(g))


# tree ----------------------------------------------------------------------------------------


@cli.group()
def tree() -> None:
    """The Bass-Serre tree with base Fix[0, t] and stable letter a_0."""


def _tree_opts(fn):
    return click.option("--t", "t_text", default="1/4", show_default=True, help="base point in (0, r)")(fn)


@tree.command("dist")
@click.argument("f")
@_tree_opts
@common
def tree_dist(ctx, f, t_text):
    emit(ctx, "tree dist", {"f": f, "t": t_text}, T.tree_distance(ctx.element(f), parse_rational(t_text)).as_dict())


@tree.command("type")
@click.argument("f")
@_tree_opts
@common
def tree_type(ctx, f, t_text):
    g, t = ctx.element(f), parse_rational(t_text)
    emit(ctx, "tree type", {"f": f, "t": t_text},
         {"type": T.isometry_type(g, t), "translation_length": T.translation_length(g, t)})


@tree.command("busemann")
@click.argument("f")
@_tree_opts
@click.option("--m", "m", type=int, default=12, show_default=True)
@common
def tree_busemann(ctx, f, t_text, m):
    r = T.busemann_estimate(ctx.element(f), parse_rational(t_text), m)
    emit(ctx, "tree busemann", {"f": f, "t": t_text, "m": m}, r.as_dict())


@tree.command("ball")
@_tree_opts
@click.option("--depth", type=int, default=3, show_default=True)
@common
def tree_ball_cmd(ctx, t_text, depth):
    b = T.tree_ball(parse_rational(t_text), depth, ctx.n)
    emit(ctx, "tree ball", {"t": t_text, "depth": depth}, {
        "vertices": b.vertex_count(),
        "edges": len(b.edges),
        "acyclic": b.is_tree,
        "mismatches": len(T.check_against_ball(b)),
    })


# nonlamplike ---------------------------------------------------------------------------------


def _intset(text: str) -> frozenset:
    body = text.strip().strip("{}")
    try:
        return frozenset(int(x) for x in body.split(",") if x.strip())
    except ValueError:
        raise ValidationError(f"expected a set of integers like {{3,5}}, got {text!r}") from None


@cli.group()
def nonlamplike() -> None:
    """The closure S~, good odd sets and the families Q_S."""


@nonlamplike.command("stilde")
@click.argument("s")
@click.argument("bound", type=int)
@common
def nl_stilde(ctx, s, bound):
    S = _intset(s)
    emit(ctx, "nonlamplike stilde", {"S": s, "N": bound}, {
        "elements": sorted(NL.stilde(S, bound)),
        "estimate_violations": NL.stilde_estimate_violations(S, bound),
    })


@nonlamplike.command("oddset")
@click.argument("count", type=int)
@common
def nl_oddset(ctx, count):
    odd = NL.good_odd_set(count)
    emit(ctx, "nonlamplike oddset", {"count": count},
         {"elements": list(odd.elements), "violations": NL.odd_set_violations(odd.elements, 40)})


@nonlamplike.command("member")
@click.argument("f")
@click.argument("s")
@common
def nl_member(ctx, f, s):
    F = C.NonLamplike(ctx.n, _intset(s))
    emit(ctx, "nonlamplike member", {"f": f, "S": s}, C.member(ctx.element(f), F))


@nonlamplike.command("compare")
@click.argument("s")
@click.argument("r")
@common
def nl_compare(ctx, s, r):
    v = C.compare(C.NonLamplike(ctx.n, _intset(s)), C.NonLamplike(ctx.n, _intset(r)), ctx.budget)
    emit(ctx, "nonlamplike compare", {"S": s, "R": r}, verdict_to_json(v), v)


# harness -------------------------------------------------------------------------------------


@cli.command()
@click.argument("which", default="all")
@common
def harness(ctx, which):
    """Replay the acceptance checks: 'all' or a criterion number."""
    from .harness import CRITERIA, run_criterion

    numbers = sorted(CRITERIA) if which == "all" else [int(which)]
    results = []
    for k in numbers:
        r = run_criterion(k, ctx.seed)
        log.info(r.line)
        d = r.as_dict()
        d.pop("seconds", None)  # wall time would break byte-identical replays
        results.append(d)
    ok = all(r["passed"] for r in results)
    emit(ctx, "harness", {"which": which}, {"passed": ok, "criteria": results})
    if ctx.strict and not ok:
        raise VerdictExit()


_USER_ERRORS = (ValidationError, ParseError, PLError, FamilyError, L.LampError, T.TreeError,
                C.BudgetExhausted, C.ScenarioError, ValueError)


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except VerdictExit:
        return 2
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return 1
    except _USER_ERRORS as e:
        click.echo(dumps({"error": type(e).__name__, "message": str(e)}))
        return 1
    return 0


def run(argv: list[str]) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
