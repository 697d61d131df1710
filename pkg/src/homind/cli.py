"""Command-line entry point.

Exit status: 0 success, 1 negative verdict, 2 usage or input error,
3 a size bound was exceeded.
"""

from __future__ import annotations

import json
import os
import re
import sys

import click

from .errors import CapabilityError, HomindError, ValidationError
from .graph import Graph, codec, generate, read_graph

_GEN = re.compile(r"^([a-z]+)\(([0-9,\s]*)\)$")


def load_graph(spec: str) -> Graph:
    """A graph file in the text or JSON codec, or a generator call such as ``path(7)``."""
    if os.path.exists(spec):
        return read_graph(spec)
    m = _GEN.match(spec.strip())
    if m:
        params = [int(x) for x in m.group(2).split(",") if x.strip()]
        return generate(m.group(1), *params)
    if spec.lstrip().startswith(("n=", "{")):
        return codec("decode", spec)
    raise ValidationError(f"no graph file or generator named {spec!r}")


class Ctx:
    def __init__(self, fmt: str, threads: int):
        self.fmt = fmt
        self.threads = threads

    def emit(self, text: str, data) -> None:
        if self.fmt == "json":
            click.echo(json.dumps(data, sort_keys=True, default=str))
        else:
            click.echo(text)


def _out(path: str | None, payload: str) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(payload + "\n")


@click.group()
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--threads", type=int, default=0, help="Worker processes; 0 means all cores.")
@click.pass_context
def cli(ctx: click.Context, fmt: str, threads: int) -> None:
    """Homomorphism counts, decompositions, games, logic and CFI graphs."""
    if threads < 0:
        raise click.BadParameter("must be non-negative", param_hint="--threads")
    ctx.obj = Ctx(fmt, threads or (os.cpu_count() or 1))


@cli.command()
@click.option("--from", "src", required=True, help="Pattern graph.")
@click.option("--to", "dst", required=True, help="Target graph.")
@click.pass_obj
def hom(obj: Ctx, src: str, dst: str) -> None:
    """Count homomorphisms."""
    from .hom import hom_count

    n = hom_count(load_graph(src), load_graph(dst))
    obj.emit(str(n), {"hom": n})


@cli.command()
@click.option("--graph", required=True)
@click.option("--k", type=int, default=None, help="Bag size bound (width + 1).")
@click.option("--q", type=int, default=None, help="Depth bound.")
@click.option("--guarded", is_flag=True)
@click.option("--emit", type=click.Choice(["td", "pfc", "ctree"]), default="td", show_default=True)
@click.option("--method", type=click.Choice(["search", "game"]), default="search", show_default=True)
@click.option("--out", default=None, help="Write the witness JSON here.")
@click.pass_obj
def decomp(obj: Ctx, graph: str, k: int | None, q: int | None, guarded: bool, emit: str, method: str,
           out: str | None) -> None:
    """Decide class membership and print a witness."""
    from .decomp import convert, decide_membership, measure

    g = load_graph(graph)
    if guarded:
        ok, w = decide_membership(g, k, q, guarded=True)
    else:
        ok, w = decide_membership(g, k, q, method=method, search=emit if method == "search" else "td")
        if ok and w.to_json()["type"] != emit:
            w = convert(g, w, emit)
    data = {"member": ok, "k": k, "q": q, "guarded": guarded}
    if ok:
        data["witness"] = w.to_json()
        data["measures"] = measure(w)
        _out(out, json.dumps(w.to_json(), sort_keys=True))
    obj.emit(("member" if ok else "not a member") + (f"\n{json.dumps(w.to_json())}" if ok else ""), data)
    sys.exit(0 if ok else 1)


@cli.command()
@click.option("--graph", required=True)
@click.option("--k", type=int, required=True, help="Number of cops.")
@click.option("--q", type=int, required=True, help="Round budget.")
@click.option("--monotone", is_flag=True, help="Play the monotone variant.")
@click.option("--emit", type=click.Choice(["none", "strategy", "transcript"]), default="none", show_default=True)
@click.option("--out", default=None)
@click.pass_obj
def game(obj: Ctx, graph: str, k: int, q: int, monotone: bool, emit: str, out: str | None) -> None:
    """Solve the round-bounded cops-and-robber game."""
    from .games import COPS, simulate, solve_cr

    g = load_graph(graph)
    res = solve_cr(g, k, q, monotone=monotone)
    text = "Cops win" if res.winner == COPS else "Robber wins"
    data = {"winner": res.winner, "rounds": res.rounds}
    extra = None
    if emit == "strategy":
        extra = res.strategy.to_json()
    elif emit == "transcript":
        extra = simulate(g, k, q, monotone=monotone).transcript
    if extra is not None:
        data[emit] = extra
        _out(out, json.dumps(extra, sort_keys=True))
        if not out:
            text += "\n" + json.dumps(extra, sort_keys=True)
    obj.emit(text, data)
    sys.exit(0 if res.winner == COPS else 1)


@cli.command()
@click.option("--a", "ga", required=True)
@click.option("--b", "gb", required=True)
@click.option("--k", type=int, required=True)
@click.option("--q", type=int, required=True)
@click.option("--gc", is_flag=True, help="Also compare guarded hom profiles.")
@click.option("--max-f", type=int, default=5, show_default=True)
@click.pass_obj
def equiv(obj: Ctx, ga: str, gb: str, k: int, q: int, gc: bool, max_f: int) -> None:
    """Counting-logic equivalence through the bijective pebble game."""
    from .games import equivalence_suite

    a, b = load_graph(ga), load_graph(gb)
    res = equivalence_suite(a, b, k, q, max_f=max_f, gc=gc)
    lines = [f"C^{k}_{q}: {'equivalent' if res['ckq_equivalent'] else 'not equivalent'}",
             f"C_{q}: {'equivalent' if res['cq_equivalent'] else 'not equivalent'}"]
    if gc:
        v = res["gc_equivalent_bounded"]
        lines.append(f"guarded (F <= {max_f}): {'distinguished' if v['distinguished'] else 'agree'}")
        if v["witness"] is not None:
            res["gc_equivalent_bounded"]["witness"] = codec("encode", v["witness"])
    obj.emit("\n".join(lines), res)
    sys.exit(0 if res["ckq_equivalent"] else 1)


@cli.group()
def logic() -> None:
    """Formulas: evaluation and the translations to and from graphs."""


def _formula(text: str):
    from .logic import formula_loads

    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    return formula_loads(text)


@logic.command("eval")
@click.option("--formula", "ftext", required=True, help="S-expression, JSON, or a file holding either.")
@click.option("--graph", required=True)
@click.pass_obj
def logic_eval(obj: Ctx, ftext: str, graph: str) -> None:
    from .logic import evaluate, fragment_check

    f = _formula(ftext)
    v = evaluate(f, load_graph(graph))
    fr = fragment_check(f)
    obj.emit("true" if v.value else "false",
             {"value": v.value, "interpretation": v.interpretation, "qr": fr.qr, "guarded": fr.guarded})
    sys.exit(0 if v.value else 1)


@logic.command("synth-formula")
@click.option("--graph", required=True, help="Labelled pattern.")
@click.option("--m", type=int, required=True)
@click.option("--k", type=int, default=None)
@click.option("--q", type=int, default=None)
@click.option("--guarded", is_flag=True)
@click.option("--max-size", type=int, default=4, show_default=True)
@click.pass_obj
def logic_synth_formula(obj: Ctx, graph: str, m: int, k: int | None, q: int | None, guarded: bool,
                        max_size: int) -> None:
    from .decomp import search_ctree
    from .logic import synth_formula, to_json, to_sexpr

    f = load_graph(graph)
    w = search_ctree(f, k, q, guarded=guarded)
    if w is None:
        raise ValidationError("no construction tree within the given bounds")
    phi = synth_formula(f, w, m, guarded=guarded, max_size=max_size)
    obj.emit(to_sexpr(phi), to_json(phi))


@logic.command("synth-qg")
@click.option("--formula", "ftext", required=True)
@click.option("--n", type=int, required=True)
@click.option("--guarded", is_flag=True)
@click.option("--budget", type=int, default=20_000, show_default=True)
@click.pass_obj
def logic_synth_qg(obj: Ctx, ftext: str, n: int, guarded: bool, budget: int) -> None:
    from .logic import synth_qg

    qg = synth_qg(_formula(ftext), n, guarded=guarded, budget=budget)
    lines = [f"{c} * {codec('encode', g)}" for c, g in qg.terms]
    obj.emit("\n".join(lines) or "0", qg.to_json())


@logic.command("distinguish")
@click.option("--a", "ga", required=True)
@click.option("--b", "gb", required=True)
@click.option("--k", type=int, required=True)
@click.option("--q", type=int, required=True)
@click.option("--max-size", type=int, default=None)
@click.pass_obj
def logic_distinguish(obj: Ctx, ga: str, gb: str, k: int, q: int, max_size: int | None) -> None:
    from .logic import distinguishing_graph, to_sexpr

    d = distinguishing_graph(load_graph(ga), load_graph(gb), k, q, max_size=max_size)
    data = {"status": d.status, "graph": d.graph and codec("encode", d.graph),
            "sentence": d.sentence and to_sexpr(d.sentence), "counts": d.counts}
    text = d.status
    if d.graph is not None:
        text += f"\n{codec('encode', d.graph)}\nhom: {d.counts[0]} vs {d.counts[1]}"
    if d.sentence is not None:
        text += f"\n{to_sexpr(d.sentence)}"
    obj.emit(text, data)
    sys.exit(0 if d.status == "distinguished" else 1)


@cli.command()
@click.option("--base", required=True)
@click.option("--odd", is_flag=True, help="Twist at vertex 0.")
@click.option("--twist", default=None, help="u,v: print the isomorphism from G_{u} to G_{v}.")
@click.option("--out", default=None)
@click.pass_obj
def cfi(obj: Ctx, base: str, odd: bool, twist: str | None, out: str | None) -> None:
    """CFI graphs over a base graph."""
    from .cfi import base_path, cfi_build, twist_iso

    g = load_graph(base)
    if twist:
        try:
            u, v = (int(x) for x in twist.split(","))
        except ValueError:
            raise click.BadParameter("expected u,v", param_hint="--twist") from None
        p = base_path(g, u, v)
        m = twist_iso(g, u, v, p)
        obj.emit(" ".join(f"{a}->{b}" for a, b in sorted(m.items())), {"path": p, "map": m})
        return
    c = cfi_build(g, {0} if odd else ())
    text = codec("encode", c.graph)
    _out(out, text)
    obj.emit(text, {"graph": text, "rho": list(c.rho)})


@cli.command()
@click.option("--n", type=int, required=True, help="Maximum number of vertices.")
@click.option("--k", type=int, default=None)
@click.option("--q", type=int, default=None)
@click.option("--guarded", is_flag=True)
@click.pass_obj
def enumerate(obj: Ctx, n: int, k: int | None, q: int | None, guarded: bool) -> None:
    """List class members up to isomorphism."""
    from .decomp import enumerate_class

    gs = enumerate_class(n, k, q, guarded=guarded)
    enc = [codec("encode", g) for g in gs]
    obj.emit("\n".join(enc), {"count": len(gs), "graphs": enc})


@cli.command()
@click.option("--only", type=int, multiple=True, help="Run just these criteria.")
@click.pass_obj
def accept(obj: Ctx, only: tuple[int, ...]) -> None:
    """Run the acceptance criteria and print a pass/fail table."""
    from .acceptance import run_all

    results = run_all(only or None, threads=obj.threads)
    obj.emit("\n".join(r.line() for r in results),
             [{"criterion": r.number, "name": r.name, "passed": r.passed, "seconds": round(r.seconds, 2),
               "detail": r.detail} for r in results])
    sys.exit(0 if all(r.passed for r in results) else 1)


def main(argv: list[str] | None = None) -> None:
    try:
        cli.main(args=argv, prog_name="homind", standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(2)
    except CapabilityError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except (HomindError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
