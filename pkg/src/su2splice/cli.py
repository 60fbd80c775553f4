"""Command-line interface.

Exit codes: 0 on success, 1 when a search finds no certificate, 2 on any
error (with a JSON envelope on stderr).  ``SU2SPLICE_THREADS`` sets the
worker count used by the splice search.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import load_entry, peripheral_homology, save_entry, standard_entries, validate_peripheral
from .errors import InvalidParameters, Su2SpliceError
from .groups import FPGroup
from .homology import (PRESETS, GluingMatrix, PeripheralHomologyData, SlopeClass, filling_homology,
                       format_group, normalize_order4_gluing, splice_homology)
from .klein import KLEIN, classify_by_bruteforce
from .pillowcase import SIGMA, read_polylines_csv
from .splice import NoneFound, SpliceProblem, normalized_problem, search_nonabelian
from .svg import write_svg
from .tracing import line_margin, trace_pillowcase_image, write_traced_csv

OK, NOT_FOUND, ERROR = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    inputs: tuple = ()
    step: float = 0.01
    grid: int = 10
    seed: int = 0
    tol: float = 1e-8
    outputs: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.step <= 0 or self.tol <= 0:
            raise InvalidParameters("step and tolerance must be positive")
        if self.grid < 1:
            raise InvalidParameters("grid must be positive")
        outs = [str(Path(p).resolve()) for p in self.outputs.values() if p]
        ins = [str(Path(p).resolve()) for p in self.inputs]
        if len(set(outs)) != len(outs) or set(outs) & set(ins):
            raise InvalidParameters("input and output paths must be distinct")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=False))


def _side_group(spec: str) -> FPGroup:
    if spec == "klein":
        return KLEIN
    return load_entry(spec).group


def _side_homology(spec: str) -> PeripheralHomologyData:
    if spec in PRESETS:
        return PRESETS[spec]
    return peripheral_homology(load_entry(spec).group)


# ---------------------------------------------------------------------------
# subcommands


def _trace(cfg: RunConfig) -> int:
    entry = load_entry(cfg.inputs[0])
    t0 = time.perf_counter()
    curves = trace_pillowcase_image(entry.group, step=cfg.step, grid=cfg.grid, seed=cfg.seed)
    elapsed = time.perf_counter() - t0
    stem = Path(cfg.inputs[0]).stem
    csv_path = cfg.outputs.get("csv") or f"{stem}.csv"
    svg_path = cfg.outputs.get("svg") or f"{stem}.svg"
    write_traced_csv(csv_path, curves)
    write_svg(svg_path, curves, labels=[("abelian" if c.abelian else f"arc {k}") for k, c in enumerate(curves)],
              title=entry.name)
    irr = [c for c in curves if not c.abelian]
    _emit({
        "group": entry.name,
        "seed": cfg.seed,
        "step": cfg.step,
        "csv": str(csv_path),
        "svg": str(svg_path),
        "curves": [{"abelian": c.abelian, "vertices": len(c.curve), "closed": c.curve.closed,
                    "endpoints_alpha": list(c.endpoints_alpha), "margin_delta": c.margin_delta,
                    "max_residual": c.max_residual()} for c in curves],
        "margin_delta": min((c.margin_delta for c in irr), default=None),
        "lens_line_margins": {str(sl): line_margin(curves, sl.r, sl.s) for sl in entry.lens_slopes()},
        "seconds": round(elapsed, 3),
    })
    return OK


def _glue(cfg: RunConfig) -> int:
    g1 = _side_group(cfg.inputs[0])
    g2 = _side_group(cfg.inputs[1])
    gluing = GluingMatrix.parse(cfg.options["gluing"])
    kw = dict(epsilon=cfg.options.get("epsilon", 1), step=cfg.step, grid=cfg.grid, seed=cfg.seed)
    moves = []
    if g2 is KLEIN:
        problem = SpliceProblem(g1, g2, gluing, **kw)
    else:
        problem, norm = normalized_problem(g1, g2, gluing, **kw)
        moves = [str(m) for m in norm.moves]
    result = search_nonabelian(problem)
    out = result.to_json()
    out.update({"seed": cfg.seed, "gluing": str(gluing), "moves": moves})
    if cfg.outputs.get("out"):
        Path(cfg.outputs["out"]).write_text(json.dumps(out, indent=2) + "\n")
    if cfg.outputs.get("svg"):
        c1 = trace_pillowcase_image(problem.side1, step=cfg.step, grid=cfg.grid, seed=cfg.seed)
        c2 = [] if problem.klein else trace_pillowcase_image(problem.side2, step=cfg.step, grid=cfg.grid,
                                                              seed=cfg.seed)
        curves = [c.curve for c in c1] + [c.curve.transform(SIGMA) for c in c2]
        labels = [f"c1 {k}" for k in range(len(c1))] + [f"sigma(c2) {k}" for k in range(len(c2))]
        pts = () if isinstance(result, NoneFound) else [result.certificate.point.as_tuple()]
        write_svg(cfg.outputs["svg"], curves, labels=labels, points=pts)
    _emit(out)
    return NOT_FOUND if isinstance(result, NoneFound) else OK


def _homology(cfg: RunConfig) -> int:
    opts = cfg.options
    if opts.get("splice"):
        factors = splice_homology(GluingMatrix.parse(opts["splice"]), _side_homology(opts["side1"]),
                                  _side_homology(opts["side2"]))
    elif opts.get("filling"):
        factors = filling_homology(_side_homology(opts["side"]), SlopeClass.parse(opts["filling"]))
    else:
        raise InvalidParameters("homology needs --splice or --filling")
    print(format_group(factors))
    return OK


def _normalize(cfg: RunConfig) -> int:
    res = normalize_order4_gluing(GluingMatrix.parse(cfg.options["gluing"]))
    print("[" + ", ".join(str(m) for m in res.moves) + "]")
    print(str(res.normal))
    for note in res.notes:
        print(note)
    return OK


def _klein_check(cfg: RunConfig) -> int:
    rep = classify_by_bruteforce(samples=cfg.options.get("samples", 10**6), seed=cfg.seed,
                                 mode=cfg.options.get("mode", "generic"))
    _emit(rep.to_dict())
    return OK if rep.ok else NOT_FOUND


def _plot(cfg: RunConfig) -> int:
    curves = []
    labels = []
    for path in cfg.inputs:
        for k, c in enumerate(read_polylines_csv(path)):
            curves.append(c)
            labels.append(f"{Path(path).stem} {k}")
    write_svg(cfg.outputs["out"], curves, labels=labels, lines=not cfg.options.get("no_lines", False))
    _emit({"svg": str(cfg.outputs["out"]), "curves": len(curves)})
    return OK


def _catalog(cfg: RunConfig) -> int:
    action = cfg.options["action"]
    entries = standard_entries()
    if action == "list":
        for name, e in entries.items():
            slopes = ", ".join(f"{s}{' (lens)' if lens else ''}" for s, lens in e.declared_surgeries)
            print(f"{name}: {e.family} {slopes}")
    elif action == "write":
        d = Path(cfg.options["directory"])
        d.mkdir(parents=True, exist_ok=True)
        for name, e in entries.items():
            save_entry(e, d / f"{name}.json")
        print(f"wrote {len(entries)} entries to {d}")
    elif action == "validate":
        reports = {}
        ok = True
        targets = {Path(p).stem: load_entry(p) for p in cfg.inputs} or entries
        for name, e in targets.items():
            rep = validate_peripheral(e, seed=cfg.seed)
            reports[name] = rep.to_dict()
            ok = ok and rep.ok
        _emit(reports)
        return OK if ok else NOT_FOUND
    return OK


COMMANDS = {
    "trace": _trace,
    "glue": _glue,
    "homology": _homology,
    "normalize-gluing": _normalize,
    "klein-check": _klein_check,
    "plot": _plot,
    "catalog": _catalog,
}


def run(config: RunConfig) -> int:
    return COMMANDS[config.subcommand](config)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="su2splice", description="SU(2) pillowcase images and splice certificates")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--step", type=float, default=0.01)
        sp.add_argument("--grid", type=int, default=10)
        sp.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("trace", help="trace the pillowcase image of a group")
    t.add_argument("group")
    common(t)
    t.add_argument("--csv")
    t.add_argument("--svg")

    g = sub.add_parser("glue", help="search for a non-abelian representation of a splice")
    g.add_argument("side1")
    g.add_argument("side2", help="group JSON, or 'klein' for the twisted I-bundle")
    g.add_argument("--gluing", required=True, help="a,b,c,d")
    g.add_argument("--epsilon", type=int, choices=(-1, 1), default=1)
    common(g)
    g.add_argument("--out")
    g.add_argument("--svg")

    h = sub.add_parser("homology", help="first homology of a filling or splice")
    h.add_argument("--splice", help="a,b,c,d")
    h.add_argument("--side1", default="zhs-knot")
    h.add_argument("--side2", default="zhs-knot")
    h.add_argument("--filling", help="p/q")
    h.add_argument("--side", default="zhs-knot")

    n = sub.add_parser("normalize-gluing", help="reduce an order-4 gluing to normal form")
    n.add_argument("gluing", help="a,b,c,d")

    k = sub.add_parser("klein-check", help="brute-force classification for the Klein bottle group")
    k.add_argument("--samples", type=int, default=10**6)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--mode", choices=("generic", "abelian", "sigma"), default="generic")

    pl = sub.add_parser("plot", help="render CSV curve sets as SVG")
    pl.add_argument("csv", nargs="+")
    pl.add_argument("--out", required=True)
    pl.add_argument("--no-lines", action="store_true")

    c = sub.add_parser("catalog", help="list, validate or write the built-in catalog")
    c.add_argument("action", choices=("list", "validate", "write"))
    c.add_argument("paths", nargs="*", help="entries to validate, or the output directory for write")
    c.add_argument("--seed", type=int, default=0)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.subcommand
    kw = {k: getattr(ns, k) for k in ("step", "grid", "seed") if hasattr(ns, k)}
    if cmd == "trace":
        return RunConfig(cmd, (ns.group,), outputs={"csv": ns.csv, "svg": ns.svg}, **kw)
    if cmd == "glue":
        return RunConfig(cmd, (ns.side1, ns.side2),
                         outputs={"out": ns.out, "svg": ns.svg},
                         options={"gluing": ns.gluing, "epsilon": ns.epsilon}, **kw)
    if cmd == "homology":
        return RunConfig(cmd, options={"splice": ns.splice, "side1": ns.side1, "side2": ns.side2,
                                       "filling": ns.filling, "side": ns.side})
    if cmd == "normalize-gluing":
        return RunConfig(cmd, options={"gluing": ns.gluing})
    if cmd == "klein-check":
        return RunConfig(cmd, options={"samples": ns.samples, "mode": ns.mode}, **kw)
    if cmd == "plot":
        return RunConfig(cmd, tuple(ns.csv), outputs={"out": ns.out}, options={"no_lines": ns.no_lines})
    if cmd == "catalog":
        if ns.action == "write":
            if len(ns.paths) != 1:
                raise InvalidParameters("catalog write takes one directory")
            return RunConfig(cmd, options={"action": "write", "directory": ns.paths[0]}, **kw)
        return RunConfig(cmd, tuple(ns.paths), options={"action": ns.action}, **kw)
    raise InvalidParameters(f"unknown subcommand {cmd!r}")


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns))
    except Su2SpliceError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return ERROR
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return ERROR
    except (ValueError, KeyError) as exc:
        print(json.dumps({"error": "invalid_input", "message": str(exc)}), file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
