"""Batch command surface for the tower computations.

Seven subcommands drive the library end to end:

* ``pages``         -- run one named tower and dump its page sequence;
* ``presentation``  -- degreewise tables and generators/relations of the
  closed-form presentations (Adams summand, mod-v1 coefficients, or the
  full K-theory answer);
* ``diagram``       -- render one torsion block as SVG or TikZ (PNG with
  the optional matplotlib extra);
* ``verify``        -- the cross-consistency checks, optionally writing
  report.json, groups.csv and a chart PNG to an output directory;
* ``lint``          -- the collapse linter for one page;
* ``graph``         -- the differential pairing graph report;
* ``proptest``      -- seeded sweeps of the filtered-complex transfer
  checkers against the brute-force oracle.

Exit status is 0 when every check passed, 1 on the first check failure
(its location is printed), and 2 for usage errors.  All outputs are
byte-deterministic for a fixed invocation; ``--out`` (or the
``THHKU_OUT_DIR`` environment variable) redirects them to files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from ._lattice import GroupInvariants
from .bockstein_thh import (
    INF,
    PAGE_IDS,
    SUPPORTED_PRIMES,
    build_e1,
    circ_mark,
    collapse_linter,
    default_bound,
    differential_graph,
    lint_indecomposables,
    presentation_thh_ku,
    presentation_thh_ku_modv1,
    presentation_thh_l,
    run_named,
    torsion_block,
    verify_consistency,
)
from .ss_engine import (
    THEOREMS,
    einfty_oracle,
    random_filtered_complex,
    random_gather_map,
    ss_pages,
    transfer_check,
)

__all__ = ["RunConfig", "format_group", "render_diagram", "main"]

PRESENTATIONS = {
    "l": presentation_thh_l,
    "modv1": presentation_thh_ku_modv1,
    "ku": presentation_thh_ku,
}


@dataclass
class RunConfig:
    """One parsed invocation; validation happens in :meth:`check`."""

    command: str
    prime: int = 3
    bound: int | None = None
    ss: str = "u"
    which: str = "ku"
    block: int = 2
    n_max: int | None = None
    fmt: str = ""
    seed: int = 0
    count: int = 200
    theorem: str = "all"
    indecomposables: bool = False
    out: str | None = None

    def check(self) -> None:
        if self.prime not in SUPPORTED_PRIMES:
            raise UsageError(f"prime must be one of {SUPPORTED_PRIMES}")
        if self.bound is not None and self.bound < 2 * self.prime:
            raise UsageError("degree bound must be at least 2p")
        if self.count < 1:
            raise UsageError("count must be at least 1")

    @property
    def degree_bound(self) -> int:
        return default_bound(self.prime) if self.bound is None else self.bound

    def out_path(self, default_name: str) -> Path | None:
        """Resolve --out / THHKU_OUT_DIR to a concrete file path, if any."""
        target = self.out or os.environ.get("THHKU_OUT_DIR")
        if target is None:
            return None
        path = Path(target)
        if self.out is None or path.is_dir():
            path.mkdir(parents=True, exist_ok=True)
            return path / default_name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path


class UsageError(ValueError):
    """Bad flag combination (exit status 2)."""


class CheckFailure(Exception):
    """A verification failed; args[0] names the first failing location."""


def format_group(inv: GroupInvariants, p: int) -> str:
    """Render a group with the prime substituted in.

    >>> format_group(GroupInvariants(1, (1, 2)), 3)
    'Z + Z/3 + Z/9'
    >>> format_group(GroupInvariants(0, ()), 5)
    '0'
    """
    free, exps = inv.as_pair()
    parts = ["Z"] * free + [f"Z/{p**e}" for e in exps]
    return " + ".join(parts) if parts else "0"


def _order_str(e) -> str:
    return "inf" if e == INF else str(e)


def _monomial(gen: str, shift: int, var: str) -> str:
    if shift == 0:
        return gen
    power = var if shift == 1 else f"{var}^{shift}"
    return power if gen == "1" else f"{power}*{gen}"


def _emit(cfg: RunConfig, text: str, default_name: str) -> None:
    path = cfg.out_path(default_name)
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        path.write_text(text if text.endswith("\n") else text + "\n")
        print(f"wrote {path}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# pages
# ---------------------------------------------------------------------------


def _slot_row(run, lab, state):
    x, y = run.ss.xy(lab)
    return {
        "name": lab.name(),
        "x": x,
        "y": y,
        "multiplier": state[0],
        "order": _order_str(state[1]),
    }


def cmd_pages(cfg: RunConfig) -> int:
    run = run_named(cfg.ss, cfg.prime, cfg.degree_bound)
    key = lambda row: (row["x"] + row["y"], row["x"], row["name"])
    pages = [sorted((_slot_row(run, lab, st) for lab, st in pg.items()), key=key)
             for pg in run.pages]
    if cfg.fmt == "json":
        doc = {
            "ss": run.ss.id,
            "prime": run.ss.prime,
            "bound": run.ss.bound,
            "edge_degrees": sorted(run.edge_degrees),
            "stages": [
                {"jump": s.jump, "steps": s.steps,
                 "applied": len(s.applied), "skipped": len(s.skipped)}
                for s in run.stages],
            "pages": pages,
        }
        _emit(cfg, _dump(doc), f"pages_{cfg.ss}_p{cfg.prime}.json")
        return 0
    lines = [f"tower {run.ss.id}  p={run.ss.prime}  D={run.ss.bound}"]
    for i, rows in enumerate(pages):
        tag = "E^1" if i == 0 else f"after stage {run.stages[i - 1].jump}"
        lines.append(f"-- page {i} ({tag}): {len(rows)} slots")
    lines.append("-- final page:")
    for row in pages[-1]:
        mult = f"p^{row['multiplier']}*" if row["multiplier"] else ""
        lines.append(f"  ({row['x']:>3},{row['y']:>3})  {mult}{row['name']}"
                     f"  order {row['order']}")
    _emit(cfg, "\n".join(lines), f"pages_{cfg.ss}_p{cfg.prime}.txt")
    return 0


# ---------------------------------------------------------------------------
# presentation
# ---------------------------------------------------------------------------


def cmd_presentation(cfg: RunConfig) -> int:
    pres = PRESENTATIONS[cfg.which](cfg.prime, cfg.degree_bound)
    var = pres.var
    rows = []
    for d in range(cfg.degree_bound + 1):
        for sector in ("free", "torsion"):
            basis, lattice = pres.module(d, sector)
            if not basis:
                continue
            inv = lattice.invariants()
            if inv.is_trivial:
                continue
            names = [_monomial(g, s, var) for g, s in basis]
            rows.append((d, format_group(inv, cfg.prime), names))
    if cfg.fmt == "json":
        doc = {
            "presentation": cfg.which,
            "prime": cfg.prime,
            "bound": cfg.degree_bound,
            "variable": var,
            "generators": [{"name": g.name, "degree": g.degree}
                           for g in pres.generators],
            "relations": [dict(zip(("lhs", "rhs"), r.equation(var).split(" = ")))
                          for r in pres.relations],
            "groups": [{"degree": d, "group": grp, "basis": names}
                       for d, grp, names in rows],
        }
        _emit(cfg, _dump(doc), f"presentation_{cfg.which}_p{cfg.prime}.json")
        return 0
    lines = [f"presentation {cfg.which}  p={cfg.prime}  D={cfg.degree_bound}"]
    lines.append("generators:")
    for g in pres.generators:
        lines.append(f"  |{g.name}| = {g.degree}  ({g.sector})")
    lines.append("relations:")
    for r in pres.relations:
        lines.append(f"  {r.equation(var)}")
    lines.append("groups by degree:")
    for d, grp, names in rows:
        lines.append(f"  {d:>4}  {grp} {{{', '.join(names)}}}")
    _emit(cfg, "\n".join(lines), f"presentation_{cfg.which}_p{cfg.prime}.txt")
    return 0


# ---------------------------------------------------------------------------
# diagram
# ---------------------------------------------------------------------------


def _diagram_layout(block):
    """Chart coordinates for one torsion block, paper conventions.

    Base-row x is proportional to the window start, each u-step moves
    (+0.5, +0.2) and each p-step moves (0, +1).  Returns node rows
    (name, x, y, marked, labeled) and edge rows (source, target, bent).
    """
    base = block.window[0] - 2  # 2 * copy * p^n: degree of u^0 h=0 over mu
    nodes = []
    pos = {}
    for nd in block.nodes:
        x = (nd.degree - 2 * nd.j - 2 - base) / 4 + 0.5 * nd.j
        y = nd.h + 0.2 * nd.j
        pos[nd.name] = (x, y)
        nodes.append((nd.name, x, y, circ_mark(block.prime, nd),
                      nd.h == 0 and nd.j == 0))
    edges = []
    lookup = {nd.name: nd for nd in block.nodes}
    for e in block.edges:
        for t in e.targets:
            bent = e.kind == "p" and lookup[t].mu != lookup[e.source].mu
            edges.append((e.source, t, bent))
    return nodes, edges, pos


def render_diagram(block, fmt: str = "svg") -> str:
    """One torsion block as a deterministic SVG or TikZ document.

    >>> rep_block = torsion_block(5, 1).block
    >>> svg = render_diagram(rep_block, "svg")
    >>> svg.count("<circle"), svg.count("<line")
    (2, 2)
    >>> tikz = render_diagram(rep_block, "tikz")
    >>> tikz.count("\\\\node"), tikz.count("\\\\draw")
    (3, 2)
    """
    if fmt not in ("svg", "tikz"):
        raise UsageError(f"unsupported diagram format {fmt!r}")
    nodes, edges, pos = _diagram_layout(block)
    if fmt == "tikz":
        lines = ["\\begin{tikzpicture}[scale=1.4]"]
        for name, x, y, marked, labeled in nodes:
            if labeled:
                body = f"\\footnotesize${_tex_name(name)}$"
            else:
                body = "$\\circ$" if marked else "$\\bullet$"
            lines.append(f"\\node[inner sep=1pt] ({_tikz_id(name)}) "
                         f"at ({x:g},{y:g}) {{{body}}};")
        for src, tgt, bent in edges:
            opt = " to[bend right=8]" if bent else " to"
            lines.append(f"\\draw ({_tikz_id(src)}){opt} ({_tikz_id(tgt)});")
        lines.append("\\end{tikzpicture}")
        return "\n".join(lines) + "\n"
    # svg: y grows downwards, so flip; 80 units per x, 60 per y
    xs = [x for _n, x, _y, _m, _l in nodes] or [0]
    ys = [y for _n, _x, y, _m, _l in nodes] or [0]
    sx = lambda x: round(40 + 80 * (x - min(xs)), 1)
    sy = lambda y: round(30 + 60 * (max(ys) - y), 1)
    width = sx(max(xs)) + 40
    height = sy(min(ys)) + 30
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" '
           f'viewBox="0 0 {width} {height}" font-size="11">']
    for src, tgt, bent in edges:
        x1, y1 = pos[src]
        x2, y2 = pos[tgt]
        if bent:
            mx, my = (sx(x1) + sx(x2)) / 2, (sy(y1) + sy(y2)) / 2 + 14
            out.append(f'<path d="M {sx(x1)} {sy(y1)} Q {mx:g} {my:g} '
                       f'{sx(x2)} {sy(y2)}" fill="none" stroke="black"/>')
        else:
            out.append(f'<line x1="{sx(x1)}" y1="{sy(y1)}" x2="{sx(x2)}" '
                       f'y2="{sy(y2)}" stroke="black"/>')
    for name, x, y, marked, labeled in nodes:
        if labeled:
            out.append(f'<text x="{sx(x)}" y="{sy(y) + 4}" '
                       f'text-anchor="middle">{name}</text>')
        else:
            fill = "none" if marked else "black"
            out.append(f'<circle cx="{sx(x)}" cy="{sy(y)}" r="3.5" '
                       f'fill="{fill}" stroke="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _tikz_id(name: str) -> str:
    return name.replace("*", "-").replace("^", "")


def _tex_name(name: str) -> str:
    tex = []
    for part in name.split("*"):
        if part.startswith("mu_"):
            tex.append(f"\\mu_{{{part[3:]}}}")
        elif part == "su":
            tex.append("\\sigma u")
        elif part == "v0":
            tex.append("v_0")
        elif part.startswith("u^"):
            tex.append(f"u^{{{part[2:]}}}")
        else:
            tex.append(part)
    return " ".join(tex)


def _diagram_png(block, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    nodes, edges, pos = _diagram_layout(block)
    fig, ax = plt.subplots(figsize=(9, 3.2))
    for src, tgt, _bent in edges:
        (x1, y1), (x2, y2) = pos[src], pos[tgt]
        ax.plot([x1, x2], [y1, y2], color="black", lw=0.8, zorder=1)
    for name, x, y, marked, labeled in nodes:
        if labeled:
            ax.annotate(name, (x, y), ha="center", va="center", fontsize=7)
        else:
            face = "white" if marked else "black"
            ax.scatter([x], [y], s=22, facecolors=face, edgecolors="black",
                       zorder=2)
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def cmd_diagram(cfg: RunConfig) -> int:
    rep = torsion_block(cfg.prime, cfg.block)
    name = f"block_p{cfg.prime}_n{cfg.block}"
    if cfg.fmt == "png":
        path = cfg.out_path(f"{name}.png")
        if path is None:
            raise UsageError("png output needs --out or THHKU_OUT_DIR")
        _diagram_png(rep.block, path)
        print(f"wrote {path}")
        return 0
    _emit(cfg, render_diagram(rep.block, cfg.fmt), f"{name}.{cfg.fmt}")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _verify_csv(pres, bound: int, p: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["degree", "free_rank", "torsion_exponents", "group"])
    for d in range(bound + 1):
        inv = pres.group_in_degree(d)
        free, exps = inv.as_pair()
        writer.writerow([d, free, " ".join(map(str, exps)),
                         format_group(inv, p)])
    return buf.getvalue()


def _verify_png(pres, bound: int, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    degs = list(range(bound + 1))
    invs = [pres.group_in_degree(d) for d in degs]
    torsion = [sum(inv.exponents) for inv in invs]
    free = [inv.free_rank for inv in invs]
    fig, ax = plt.subplots(figsize=(9, 3))
    ax.bar(degs, torsion, color="tab:red", label="torsion length")
    ax.step(degs, free, where="mid", color="tab:blue", label="free rank")
    ax.set_xlabel("degree")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def cmd_verify(cfg: RunConfig) -> int:
    report = verify_consistency(cfg.prime, cfg.degree_bound)
    doc = {
        "prime": report.prime,
        "bound": report.bound,
        "passed": report.passed,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in report.checks],
    }
    print(_dump(doc) if cfg.fmt == "json" else str(report))
    outdir = cfg.out or os.environ.get("THHKU_OUT_DIR")
    if outdir is not None:
        # verify's --out is a directory: report + table + chart side by side
        directory = Path(outdir)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.json").write_text(_dump(doc) + "\n")
        pres = presentation_thh_ku(cfg.prime, cfg.degree_bound)
        (directory / "groups.csv").write_text(
            _verify_csv(pres, cfg.degree_bound, cfg.prime))
        written = ["report.json", "groups.csv"]
        try:
            _verify_png(pres, cfg.degree_bound, directory / "groups.png")
            written.append("groups.png")
        except ImportError:
            print("matplotlib not installed; skipped groups.png",
                  file=sys.stderr)
        print(f"wrote {', '.join(written)} to {directory}")
    if not report.passed:
        first = next(c for c in report.checks if not c.passed)
        raise CheckFailure(f"verify: {first.name}: {first.detail}")
    return 0


# ---------------------------------------------------------------------------
# lint
# ---------------------------------------------------------------------------


def cmd_lint(cfg: RunConfig) -> int:
    ss = build_e1(cfg.ss, cfg.prime, cfg.degree_bound)
    finder = lint_indecomposables if cfg.indecomposables else collapse_linter
    cands = finder(ss)
    rows = [{
        "source": c.source.name(),
        "target": c.target.name(),
        "jump": c.jump,
        "source_order": _order_str(c.source_order),
        "target_order": _order_str(c.target_order),
        "verdict": c.verdict,
    } for c in cands]
    if cfg.fmt == "json":
        doc = {"ss": cfg.ss, "prime": cfg.prime, "bound": cfg.degree_bound,
               "indecomposables_only": cfg.indecomposables,
               "candidates": rows}
        _emit(cfg, _dump(doc), f"lint_{cfg.ss}_p{cfg.prime}.json")
    else:
        lines = [f"lint {cfg.ss}  p={cfg.prime}  D={cfg.degree_bound}"
                 f"  candidates={len(rows)}"]
        for r in rows:
            lines.append(f"  d{r['jump'] + 1}: {r['source']} -> {r['target']}"
                         f"  [{r['verdict']}]")
        _emit(cfg, "\n".join(lines), f"lint_{cfg.ss}_p{cfg.prime}.txt")
    viable = [r for r in rows if r["verdict"] == "viable"]
    if viable:
        r = viable[0]
        raise CheckFailure(
            f"lint: viable candidate {r['source']} -> {r['target']}"
            f" (jump {r['jump']})")
    return 0


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------


def cmd_graph(cfg: RunConfig) -> int:
    n_max = cfg.n_max if cfg.n_max is not None else cfg.prime**6
    rep = differential_graph(cfg.prime, n_max)
    doc = {
        "prime": rep.prime,
        "n_max": rep.n_max,
        "vertices": rep.vertices,
        "edges": rep.edges,
        "bipartite": rep.bipartite,
        "acyclic": rep.acyclic,
        "valuation_unique": rep.valuation_unique,
        "offenders": list(rep.offenders),
        "excluded": list(rep.excluded),
        "components": [{"root": root, "size": size}
                       for root, size in rep.components],
    }
    if cfg.fmt == "json":
        _emit(cfg, _dump(doc), f"graph_p{cfg.prime}.json")
    else:
        lines = [f"graph p={rep.prime}  N_max={rep.n_max}:"
                 f" {rep.vertices} vertices, {rep.edges} edges,"
                 f" {len(rep.components)} trees",
                 f"bipartite={rep.bipartite} acyclic={rep.acyclic}"
                 f" valuation_unique={rep.valuation_unique}",
                 f"excluded: {', '.join(rep.excluded)}"]
        _emit(cfg, "\n".join(lines), f"graph_p{cfg.prime}.txt")
    for flag, label in ((rep.bipartite, "bipartite"),
                        (rep.acyclic, "acyclic"),
                        (rep.valuation_unique, "valuation_unique")):
        if not flag:
            raise CheckFailure(f"graph: {label} fails at p={rep.prime},"
                               f" N_max={rep.n_max}")
    return 0


# ---------------------------------------------------------------------------
# proptest
# ---------------------------------------------------------------------------


def cmd_proptest(cfg: RunConfig) -> int:
    theorems = THEOREMS if cfg.theorem == "all" else (cfg.theorem,)
    for th in theorems:
        if th not in THEOREMS:
            raise UsageError(f"unknown theorem {th!r}; known: {THEOREMS}")
    rng = random.Random(cfg.seed)
    checks = 0
    for i in range(cfg.count):
        seed = cfg.seed + i
        fc = random_filtered_complex(seed, max_degree=8, max_levels=6,
                                     max_rank=4)
        pages = ss_pages(fc)
        spots = {k: c.invariants for k, c in pages[-1].cells.items()}
        if spots != einfty_oracle(fc):
            raise CheckFailure(f"proptest: oracle mismatch at seed {seed}")
        phi = random_gather_map(rng, fc.n_min, fc.n_max)
        for th in theorems:
            report = transfer_check(fc, phi, th)
            checks += report.checks + 1
            if not report.passed:
                raise CheckFailure(f"proptest: {th} fails at seed {seed}:"
                                   f" {report.failures[0]}")
    print(f"proptest: {cfg.count} seeds x {len(theorems)} theorems,"
          f" {checks} checks, all passed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thhku",
        description="Bockstein towers for THH of connective K-theory.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json", "table"), default_fmt="table"):
        sp.add_argument("--p", dest="prime", type=int, default=3,
                        choices=SUPPORTED_PRIMES, metavar="P")
        sp.add_argument("--D", dest="bound", type=int, default=None,
                        metavar="D", help="degree bound (default 2p^3+4p)")
        sp.add_argument("--fmt", choices=fmt, default=default_fmt)
        sp.add_argument("--out", default=None,
                        help="output file or directory"
                             " (default: stdout / $THHKU_OUT_DIR)")

    sp = sub.add_parser("pages", help="run one named tower, dump its pages")
    sp.add_argument("--ss", choices=PAGE_IDS, default="u")
    common(sp)

    sp = sub.add_parser("presentation", help="degreewise presentation table")
    sp.add_argument("--which", choices=sorted(PRESENTATIONS), default="ku")
    common(sp)

    sp = sub.add_parser("diagram", help="render one torsion block")
    sp.add_argument("--n", dest="block", type=int, default=2,
                    help="block index (window [2p^n+2, 4p^n+1])")
    common(sp, fmt=("svg", "tikz", "png"), default_fmt="svg")

    sp = sub.add_parser("verify", help="run the cross-consistency checks")
    common(sp)

    sp = sub.add_parser("lint", help="collapse-lint one page")
    sp.add_argument("--ss", choices=PAGE_IDS, default="uZ")
    sp.add_argument("--indecomposables", action="store_true",
                    help="only candidates with indecomposable source")
    common(sp)

    sp = sub.add_parser("graph", help="differential pairing graph report")
    sp.add_argument("--n-max", dest="n_max", type=int, default=None,
                    help="largest tower index (default p^6)")
    common(sp)

    sp = sub.add_parser("proptest", help="seeded transfer/oracle sweeps")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=200)
    sp.add_argument("--theorem", default="all",
                    help=f"one of {THEOREMS} or 'all'")
    common(sp)

    return parser


_COMMANDS = {
    "pages": cmd_pages,
    "presentation": cmd_presentation,
    "diagram": cmd_diagram,
    "verify": cmd_verify,
    "lint": cmd_lint,
    "graph": cmd_graph,
    "proptest": cmd_proptest,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        cfg.check()
        return _COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"FAIL {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
