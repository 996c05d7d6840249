"""``simplexmap`` command line: verify, simulate, analyze, optimize, render.

``--n`` is always the map's own size parameter. The cell domain it covers
has side ``n * rho`` for bb/rb/lambda and ``(n - 1) * rho`` for the H family
(h2d, padded, trapezoid, h3d).

Exit status: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import analysis, report
from .core import ContractViolation, RangeError, SimplexSpec, is_pow2, simplex_volume
from .maps import (
    GridSpec,
    MapKind,
    decompose_trapezoids,
    grid_bb,
    grid_h2d,
    grid_h2d_padded,
    grid_h3d,
    grid_lambda,
    grid_rb,
)
from .simulator import (
    KernelKind,
    SimplexGridState,
    check_cover,
    launch,
    verify_exact_cover,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
RENDER_MAX_N = 256

MAP_NAMES = {k.value: k for k in MapKind}
VALID_PAIRS = {
    "bb": (2, 3),
    "rb": (2,),
    "lambda": (2,),
    "h2d": (2,),
    "padded": (2,),
    "trapezoid": (2,),
    "h3d": (3,),
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    map_kind: Optional[str]
    m: int
    ns: tuple
    rho: int
    kernel: str
    steps: int
    T: int
    seed: int
    output: Optional[str]
    fmt: str
    raw: bool = False
    inv_r: int = 2
    beta: int = 2
    inv_r_max: int = 8
    beta_max: int = 8
    n_eval: int = 4096


# parsing ---------------------------------------------------------------------------

_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*(?:\((pow2|even)\))?\s*$")


def parse_n_range(text: str, pow2: bool = False) -> List[int]:
    """``"A..B"``, ``"A..B(pow2)"``, ``"A..B(even)"`` or a comma list."""
    m = _RANGE.match(text)
    if m:
        lo, hi, filt = int(m.group(1)), int(m.group(2)), m.group(3)
        if lo > hi:
            raise UsageError(f"empty range {text!r}")
        ns = list(range(lo, hi + 1))
        if pow2 or filt == "pow2":
            ns = [n for n in ns if is_pow2(n)]
        elif filt == "even":
            ns = [n for n in ns if n % 2 == 0]
    else:
        try:
            ns = [int(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"cannot parse n-range {text!r}; use A..B, A..B(pow2) or a comma list")
        if pow2:
            ns = [n for n in ns if is_pow2(n)]
    if not ns:
        raise UsageError(f"n-range {text!r} selects nothing")
    return ns


def _default_m(map_name: Optional[str]) -> int:
    return 3 if map_name == "h3d" else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simplexmap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_map=True, maps=tuple(VALID_PAIRS)):
        if need_map:
            sp.add_argument("--map", dest="map_kind", choices=maps, required=True)
        sp.add_argument("--m", type=int, default=None, help="simplex dimension (default 2, 3 for h3d)")
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--n-range", default=None, help="A..B, A..B(pow2), A..B(even) or a comma list")
        sp.add_argument("--pow2", action="store_true", help="keep only powers of two from --n-range")
        sp.add_argument("--rho", type=int, default=1, help="block edge in threads")
        sp.add_argument("--T", type=int, default=1, help="trapezoid padding threshold")
        sp.add_argument("--output", "-o", default=None)

    v = sub.add_parser("verify", help="exact-cover check over an n-range")
    common(v)
    v.add_argument("--raw", action="store_true", help="check before Void and thread filtering")
    v.add_argument("--format", dest="fmt", choices=("csv", "text"), default="text")

    s = sub.add_parser("simulate", help="run one kernel and compare with the sequential oracle")
    common(s)
    s.add_argument("--kernel", choices=[k.value for k in KernelKind], default="accum")
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", dest="fmt", choices=("csv", "text"), default="csv")

    a = sub.add_parser("analyze", help="space overhead table, measured and closed form")
    common(a, maps=tuple(VALID_PAIRS) + ("selfsimilar",))
    a.add_argument("--inv-r", type=int, default=2)
    a.add_argument("--beta", type=int, default=2)
    a.add_argument("--format", dest="fmt", choices=("csv", "text"), default="csv")

    o = sub.add_parser("optimize", help="rank integral (inv_r, beta) for a dimension")
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--inv-r-max", type=int, default=8)
    o.add_argument("--beta-max", type=int, default=8)
    o.add_argument("--n-eval", type=int, default=4096)
    o.add_argument("--output", "-o", default=None)
    o.add_argument("--format", dest="fmt", choices=("csv", "text"), default="csv")

    r = sub.add_parser("render", help="SVG of grid space and data space")
    common(r)
    r.add_argument("--format", dest="fmt", choices=("svg",), default="svg")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    map_name = getattr(ns, "map_kind", None)
    m = ns.m if ns.m is not None else _default_m(map_name)
    if cmd == "optimize":
        ns_list: tuple = ()
    elif ns.n_range is not None:
        ns_list = tuple(parse_n_range(ns.n_range, ns.pow2))
    elif ns.n is not None:
        ns_list = (ns.n,)
    else:
        raise UsageError("give --n or --n-range")
    if map_name in VALID_PAIRS and m not in VALID_PAIRS[map_name]:
        pairs = ", ".join(f"({k}, m={d})" for k, ds in VALID_PAIRS.items() for d in ds)
        raise UsageError(f"map {map_name} does not support m={m}; valid pairs: {pairs}")
    if getattr(ns, "rho", 1) < 1:
        raise UsageError("--rho must be >= 1")
    if getattr(ns, "T", 1) < 1:
        raise UsageError("--T must be >= 1")
    return RunConfig(
        command=cmd,
        map_kind=map_name,
        m=m,
        ns=ns_list,
        rho=getattr(ns, "rho", 1),
        kernel=getattr(ns, "kernel", "map"),
        steps=getattr(ns, "steps", 0),
        T=getattr(ns, "T", 1),
        seed=getattr(ns, "seed", 0),
        output=ns.output,
        fmt=ns.fmt,
        raw=getattr(ns, "raw", False),
        inv_r=getattr(ns, "inv_r", 2),
        beta=getattr(ns, "beta", 2),
        inv_r_max=getattr(ns, "inv_r_max", 8),
        beta_max=getattr(ns, "beta_max", 8),
        n_eval=getattr(ns, "n_eval", 4096),
    )


# launch plans ----------------------------------------------------------------------


def grids_for(kind: MapKind, n: int, m: int, T: int = 1, rho: int = 1) -> List[GridSpec]:
    if kind is MapKind.BB:
        gs = [grid_bb(n, m)]
    elif kind is MapKind.RB:
        gs = [grid_rb(n)]
    elif kind is MapKind.LAMBDA2D:
        gs = [grid_lambda(n)]
    elif kind is MapKind.H2D:
        gs = [grid_h2d(n)]
    elif kind is MapKind.H2D_PADDED:
        gs = [grid_h2d_padded(n)]
    elif kind is MapKind.H2D_TRAPEZOID:
        gs = [p.grid for p in decompose_trapezoids(n, T)]
    else:
        gs = [grid_h3d(n)]
    return [g.with_rho(rho) for g in gs]


def domain_for(grids: Sequence[GridSpec]) -> SimplexSpec:
    g = grids[0]
    return SimplexSpec.of_side(g.m, g.side * g.rho)


def _accounting_row(kind, n, m, rho, T, blocks, void, threads, useful) -> dict:
    row = {
        "map": kind.value, "m": m, "n": n, "side": None, "rho": rho,
        "blocks_launched": blocks, "blocks_void": void,
        "threads_launched": threads, "threads_useful": useful,
    }
    if useful:
        ov = Fraction(threads, useful) - 1
        row.update(report.fraction_fields("overhead", ov))
        row["overhead_decimal"] = report.decimal_str(ov)
    if rho == 1:
        row.update(report.fraction_fields("closed", report.closed_overhead(kind, n, m, T)))
    row.update(report.fraction_fields("limit", report.limit_overhead(kind, m)))
    return row


# commands ----------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, out) -> int:
    kind = MAP_NAMES[cfg.map_kind]
    rows = []
    status = EXIT_OK
    for n in cfg.ns:
        grids = grids_for(kind, n, cfg.m, cfg.T, cfg.rho)
        domain = domain_for(grids)
        threads = sum(g.threads for g in grids)
        blocks = sum(g.blocks for g in grids)
        if cfg.raw:
            rep = launch(grids, domain, KernelKind.MAP, filter_void=False)
            verdict, void, useful = verify_exact_cover(rep), rep.blocks_void, rep.threads_useful
        else:
            verdict, void, useful = check_cover(grids, domain)
        row = _accounting_row(kind, n, cfg.m, cfg.rho, cfg.T, blocks, void, threads, useful)
        row["side"] = domain.side
        row["verdict"] = "Exact" if verdict else f"NotExact {verdict.witness} x{verdict.multiplicity}"
        rows.append(row)
        if not verdict:
            status = EXIT_FAIL
            print(f"{kind.value} m={cfg.m} n={n}: {verdict}", file=sys.stderr)
            break
    if cfg.fmt == "csv":
        out.write(report.to_csv(rows, report.EFFICIENCY_COLUMNS))
    else:
        for r in rows:
            out.write(f"{r['map']} m={r['m']} n={r['n']} side={r['side']} rho={r['rho']}: {r['verdict']}\n")
        if status == EXIT_OK:
            out.write(f"all {len(rows)} exact\n")
    return status


def _inputs(cfg: RunConfig, domain: SimplexSpec):
    rng = np.random.default_rng(cfg.seed)
    if cfg.kernel == "edm":
        return rng.random((domain.side + 1, 2)), None
    if cfg.kernel == "ca":
        alive = (rng.random(domain.volume) < 0.35).astype(np.uint8)
        return None, SimplexGridState(domain, alive)
    return None, None


def _oracle(cfg: RunConfig, domain: SimplexSpec, points, state, result) -> Optional[bool]:
    from . import reference

    if cfg.kernel == "edm":
        return bool(np.array_equal(result.to_dense(), reference.edm_dense(points)))
    if cfg.kernel == "ca":
        want = reference.life_dense(state.to_dense(), cfg.steps, periodic=domain.m == 2)
        return bool(np.array_equal(result.to_dense(), want))
    if cfg.kernel == "accum":
        return bool(np.all(result.values == 1))
    return None


def cmd_simulate(cfg: RunConfig, out) -> int:
    kind = MAP_NAMES[cfg.map_kind]
    kernel = KernelKind(cfg.kernel)
    rows = []
    status = EXIT_OK
    for n in cfg.ns:
        grids = grids_for(kind, n, cfg.m, cfg.T, cfg.rho)
        domain = domain_for(grids)
        points, state = _inputs(cfg, domain)
        if kernel is KernelKind.EDM and domain.m != 2:
            raise UsageError("the edm kernel runs on 2-simplices only")
        rep = launch(grids, domain, kernel, state, points=points, steps=cfg.steps)
        row = _accounting_row(kind, n, cfg.m, cfg.rho, cfg.T, rep.blocks_launched, rep.blocks_void,
                              rep.threads_launched, rep.threads_useful)
        row["side"] = domain.side
        row["verdict"] = str(verify_exact_cover(rep))
        row["kernel"] = kernel.value
        row["seed"] = cfg.seed
        if isinstance(rep.kernel_output, SimplexGridState):
            row["state_sha256"] = hashlib.sha256(rep.kernel_output.values.tobytes()).hexdigest()
            ok = _oracle(cfg, domain, points, state, rep.kernel_output)
            row["oracle"] = "match" if ok else "mismatch"
            if not ok:
                status = EXIT_FAIL
        rows.append(row)
    _emit(rows, report.EFFICIENCY_COLUMNS, cfg, out)
    return status


def _selfsimilar_rows(cfg: RunConfig) -> List[dict]:
    p = analysis.SelfSimilarParams(cfg.inv_r, cfg.beta, cfg.m)
    rows = []
    for n in cfg.ns:
        vs = analysis.self_similar_volume(n, p)
        vd = simplex_volume(n - 1, cfg.m)
        alpha = vs / vd - 1
        row = {
            "map": f"selfsimilar(inv_r={p.inv_r};beta={p.beta})", "m": cfg.m, "n": n, "side": n - 1,
            "rho": 1, "blocks_launched": vs, "threads_launched": vs, "threads_useful": vd,
            "overhead_decimal": report.decimal_str(alpha),
        }
        row.update(report.fraction_fields("overhead", alpha))
        row.update(report.fraction_fields("closed", alpha))
        row.update(report.fraction_fields("limit", analysis.extra_fraction_limit(cfg.m, p)))
        rows.append(row)
    return rows


def cmd_analyze(cfg: RunConfig, out) -> int:
    if cfg.map_kind == "selfsimilar":
        rows = _selfsimilar_rows(cfg)
    else:
        kind = MAP_NAMES[cfg.map_kind]
        rows = []
        for n in cfg.ns:
            grids = grids_for(kind, n, cfg.m, cfg.T, cfg.rho)
            domain = domain_for(grids)
            rep = launch(grids, domain, KernelKind.MAP)
            row = _accounting_row(kind, n, cfg.m, cfg.rho, cfg.T, rep.blocks_launched, rep.blocks_void,
                                  rep.threads_launched, rep.threads_useful)
            row["side"] = domain.side
            row["verdict"] = str(verify_exact_cover(rep))
            rows.append(row)
    _emit(rows, report.EFFICIENCY_COLUMNS, cfg, out)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, out) -> int:
    ranked = analysis.optimize_params(cfg.m, cfg.inv_r_max, cfg.beta_max, cfg.n_eval)
    rows = []
    for i, (p, r) in enumerate(ranked, 1):
        row = {
            "rank": i, "m": p.m, "inv_r": p.inv_r, "beta": p.beta, "n_eval": r.n,
            "covers": "yes" if r.alpha >= 0 else "no", "alpha_decimal": report.decimal_str(r.alpha), "n0": r.n0_label,
        }
        row.update(report.fraction_fields("alpha", r.alpha))
        rows.append(row)
    _emit(rows, report.OPTIMIZE_COLUMNS, cfg, out)
    return EXIT_OK


def cmd_render(cfg: RunConfig, out) -> int:
    if len(cfg.ns) != 1:
        raise UsageError("render draws one n at a time; use --n")
    n = cfg.ns[0]
    if n > RENDER_MAX_N:
        raise UsageError(f"n={n} is too large to render (limit {RENDER_MAX_N}); try --n 16 or --n 32")
    kind = MAP_NAMES[cfg.map_kind]
    if kind is MapKind.H3D:
        out.write(report.render_h3d(n))
    elif cfg.m != 2:
        raise UsageError("render draws 3-simplices for h3d only")
    else:
        out.write(report.render_2d(kind, n, grids_for(kind, n, 2, cfg.T), cfg.T))
    return EXIT_OK


def _emit(rows, columns, cfg: RunConfig, out):
    if cfg.fmt == "text":
        out.write(report.to_text(rows, columns))
    else:
        out.write(report.to_csv(rows, columns))


COMMANDS = {
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "render": cmd_render,
}


def run(cfg: RunConfig, out) -> int:
    return COMMANDS[cfg.command](cfg, out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                return run(cfg, fh)
        return run(cfg, sys.stdout)
    except (UsageError, ContractViolation, RangeError) as exc:
        print(f"simplexmap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
