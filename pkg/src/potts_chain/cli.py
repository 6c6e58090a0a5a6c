"""Command-line front end.

Every command prints (or writes with ``--out``) a record that embeds the job
parameters and the library version.  Exit codes: 0 success, 1 usage error,
2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .core_params import DomainError, coupling_from_gamma, coupling_from_k, parse_angle

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
OUT_ENV = "POTTS_CHAIN_OUT"

COMMANDS = ("ybe-check", "bybe-check", "weights", "rep-dump", "hamiltonian", "degeneracies", "xxx-limit",
            "bethe-solve", "bethe-sweep", "fit", "characters", "compare-levels", "reproduce")


class UsageError(ValueError):
    pass


@dataclass
class JobSpec:
    command: str
    params: dict
    output: str | None = None
    fmt: str = "json"
    records: list = field(default_factory=list)


def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def parse_sizes(text: str) -> list:
    """``8,16,32`` or ``8..14`` (step 2 when both ends are even, else 1)."""
    text = text.strip()
    if ".." in text:
        a, b = (int(t) for t in text.split(".."))
        step = 2 if a % 2 == 0 and b % 2 == 0 else 1
        return list(range(a, b + 1, step))
    return [int(t) for t in text.split(",") if t]


def read_config(path: str) -> dict:
    """``key = value`` lines (``#`` comments) or a JSON object."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line without '=': {line!r}")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _coupling(args):
    if getattr(args, "k", None) is not None and args.gamma is None:
        return coupling_from_k(int(args.k))
    return parse_angle(args.gamma if args.gamma is not None else "pi/5")


# commands

def cmd_ybe_check(args, job):
    from .lattice_transfer import ybe_residual

    c = _coupling(args)
    rng = np.random.default_rng(args.seed)
    rows = []
    for _ in range(args.draws):
        u, v = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
        rows.append({"u": complex(u), "v": complex(v), "residual": ybe_residual(c, u, v, args.gauge)})
    ok = all(r["residual"] < args.tol for r in rows)
    return {"gauge": args.gauge, "tol": args.tol, "draws": rows, "pass": ok}, ok


def cmd_bybe_check(args, job):
    from .open_boundary import boundary_ybe_residual, transfer_commutator

    c = _coupling(args)
    rng = np.random.default_rng(args.seed)
    rows = []
    for _ in range(args.draws):
        u, v = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
        rows.append({"u": complex(u), "v": complex(v), "residual": boundary_ybe_residual(c, u, v, args.gauge)})
    comm = transfer_commutator(c, 0.2, 0.5, args.L or 2, args.gauge)
    ok = all(r["residual"] < args.tol for r in rows) and comm < args.tol
    return {"gauge": args.gauge, "draws": rows, "transfer_commutator": comm, "pass": ok}, ok


def cmd_weights(args, job):
    from .lattice_transfer import ASTERISK, VERTICES, compare_gauges, reference_weights, table_deviation, weight_table

    c = _coupling(args)
    wt = weight_table(c, args.u, args.gauge)
    ref = reference_weights(c, args.u, args.gauge)
    dev = table_deviation(wt, c)
    rows = []
    for i in sorted(VERTICES):
        w = wt.weights[i]
        rows.append({"index": i, "vertex": VERTICES[i], "re_weight": w.real, "im_weight": w.imag,
                     "re_table": ref[i].real, "im_table": ref[i].imag, "asterisk": int(i in ASTERISK)})
    ok = dev < 1e-12
    if args.gauge == "d22":
        rep = compare_gauges(wt, c)
        ok = ok and rep.sign_flipped == ASTERISK
    job.fmt = job.fmt if job.fmt != "json" or args.format else "csv"
    return {"rows": rows, "max_relative_deviation": dev, "factor": complex(wt.factor), "pass": ok}, ok


def cmd_rep_dump(args, job):
    from .tl_reps import build_loop_rep, build_rsos_rep, build_tilde_rep, build_vertex_rep, tl_relation_defect

    c = _coupling(args)
    N = args.N or 2 * (args.L or 2)
    if args.rep == "vertex":
        rep = build_vertex_rep(c, N)
    elif args.rep == "tilde":
        rep = build_tilde_rep(c, N)
    elif args.rep == "loop":
        rep = build_loop_rep(c, N, args.sector or 0)
    else:
        hl, hr = (int(t) for t in (args.heights or "1,1").split(","))
        rep = build_rsos_rep(c, N, hl, hr)
    basis = [getattr(b, "heights", None) or (b.ballot() if hasattr(b, "ballot") else b) for b in rep.basis]
    defect = tl_relation_defect(rep) if rep.dim <= 2000 else None
    nnz = [int(np.count_nonzero(np.asarray(g.todense() if hasattr(g, "todense") else g))) for g in rep.generators]
    return {"kind": rep.kind, "N": N, "dim": rep.dim, "basis": basis[:200], "generator_nnz": nnz,
            "relation_defect": defect}, True


def _h_for(args, c):
    from .open_boundary import build_h_open
    from .tl_reps import build_loop_rep, build_rsos_rep, build_vertex_rep

    N = args.N or 2 * (args.L or 2)
    if args.rep == "vertex":
        return build_h_open(build_vertex_rep(c, N, check=False)), N
    if args.rep == "loop":
        return build_h_open(build_loop_rep(c, N, args.sector or 0, check=False)), N
    hl, hr = (int(t) for t in (args.heights or "1,1").split(","))
    return build_h_open(build_rsos_rep(c, N, hl, hr, check=False)), N


def cmd_hamiltonian(args, job):
    from .spectra import diagonalize, sector_eigenvalues, cluster_spectrum

    c = _coupling(args)
    H, N = _h_for(args, c)
    if args.rep == "vertex" and args.sector is not None:
        vals = sector_eigenvalues(H, N)[2 * args.sector]
        rec = cluster_spectrum(vals)
    else:
        rec = diagonalize(H)
    levels = [{"energy": lv.energy, "multiplicity": lv.multiplicity} for lv in rec.levels]
    return {"rep": args.rep, "N": N, "levels": levels, "max_imag": rec.max_imag}, True


def cmd_degeneracies(args, job):
    from .spectra import degeneracy_check

    c = _coupling(args)
    Ls = parse_sizes(args.sizes) if args.sizes else [args.L or 2]
    rows, ok = [], True
    for L in Ls:
        d = degeneracy_check(c, L)
        d.pop("record")
        rows.append(d)
        ok = ok and d["match"] and d["robust"]
    if job.fmt == "json" and not args.format:
        job.fmt = "text"
    return {"rows": rows, "pass": ok}, ok


def cmd_xxx_limit(args, job):
    from .spectra import xxx_decoupling_report

    c = coupling_from_gamma(float(args.gamma) if args.gamma else 1e-6)
    rep = xxx_decoupling_report(c, args.L or 2)
    rows = [{"chain_a": a, "chain_b": b, "eigenvalue": e, "degeneracy": d} for a, b, e, d in rep.bookkeeping]
    return {"L": rep.L, "max_deviation": rep.max_deviation, "ed_pattern": rep.ed_pattern,
            "predicted_pattern": rep.predicted_pattern, "total": sum(r["degeneracy"] for r in rows),
            "table": rows, "pass": rep.ok}, rep.ok


def _state_from_seed(c, L, n, seed):
    from .bethe_solver import polish_complex, solve_state, state_from_roots

    if seed in (None, "ground"):
        return solve_state(c, L, n)
    if seed.startswith("shift:"):
        n0, n1 = (int(t) for t in seed[6:].split(","))
        return solve_state(c, L, n, n0, n1)
    if seed.startswith("file:"):
        with open(seed[5:]) as fh:
            data = json.load(fh)
        roots = np.array([complex(a, b) for a, b in data["roots"]])
        return state_from_roots(c, L, polish_complex(c, L, roots), n)
    raise UsageError(f"unknown seed {seed!r}; use ground, shift:<n0>,<n1> or file:<path>")


def cmd_bethe_solve(args, job):
    from .bethe_solver import ACCEPT_RESIDUAL

    c = _coupling(args)
    st = _state_from_seed(c, args.L or 2, args.sector or 0, args.seed_spec)
    ok = st.residual < ACCEPT_RESIDUAL
    return {"state": st.to_json(), "pass": ok}, ok


def cmd_bethe_sweep(args, job):
    from .bethe_solver import sweep
    from .spectra import scaled_gaps

    c = _coupling(args)
    sizes = parse_sizes(args.sizes or "8,16,32,64")
    n0, n1 = (int(t) for t in (args.shift or "0,0").split(","))
    res = sweep(c, sizes, args.sector or 0, n0, n1, workers=args.threads)
    ground = sweep(c, sizes, 0, workers=args.threads)
    gaps = scaled_gaps(sizes, res.energies, ground.energies, c)
    rows = [{"L": L, "E": s.energy, "gap": g, "residual": s.residual, "classification": s.classification}
            for L, s, g in zip(sizes, res.states, gaps)]
    if job.fmt == "json" and not args.format:
        job.fmt = "csv"
    return {"rows": rows}, True


def cmd_fit(args, job):
    from .bethe_solver import sweep
    from .spectra import central_charge, fit_ceff, fit_exponent, potts_exponent

    c = _coupling(args)
    sizes = parse_sizes(args.sizes or "8,16,32,64")
    if args.source != "bethe":
        raise UsageError("fit currently supports --source bethe; use compare-levels for ED data")
    ground = sweep(c, sizes, 0, workers=args.threads).energies
    if args.observable == "c":
        est = fit_ceff(sizes, ground, c)
        target = central_charge(c.k_int) if c.k_int else None
    else:
        n0, n1 = (int(t) for t in (args.shift or "0,0").split(","))
        en = sweep(c, sizes, args.sector or 1, n0, n1, workers=args.threads).energies
        est = fit_exponent(sizes, en, ground, c)
        target = potts_exponent(c.k_int, args.sector or 1) + n0 + n1 if c.k_int else None
    return {"observable": args.observable, "sizes": sizes, "value": est.value, "uncertainty": est.uncertainty,
            "velocity": est.velocity, "f0": est.f0, "fs": est.fs, "finite_size": est.finite_size,
            "expected": target}, True


def cmd_characters(args, job):
    from .cft_characters import full_trace_series, string_function, z_m_series

    k = int(args.k or 5)
    order = args.order or 10
    if args.series == "zm":
        s = z_m_series(k, args.m or 0, order)
    elif args.series == "trace":
        s = full_trace_series(k, order, args.weighting)
    else:
        s = string_function(k, args.l or 0, args.m or 0, order)
    return s.to_json(), True


def cmd_compare_levels(args, job):
    from .cft_characters import level_count_compare, z_m_series
    from .spectra import loop_sector_gaps

    c = _coupling(args)
    if c.k_int is None:
        raise UsageError("compare-levels needs gamma = pi/k")
    j = args.sector or 0
    sizes = parse_sizes(args.sizes or "8..12")
    fits = loop_sector_gaps(c, sizes, j, args.levels)
    rep = level_count_compare([f[0] for f in fits], z_m_series(c.k_int, j, 6), args.levels,
                              uncertainties=[f[1] for f in fits])
    if job.fmt == "json" and not args.format:
        job.fmt = "text"
    return {"sector": j, "sizes": sizes, "rows": rep.rows, "pass": rep.ok}, rep.ok


# reproduction recipes

def _recipe_weights(table):
    def run(args, job):
        from .lattice_transfer import ASTERISK, VERTICES, compare_gauges, table_deviation, weight_table

        c = parse_angle("pi/5")
        ranges = {"table1": range(1, 19), "table2": range(19, 31), "table3": range(31, 39)}[table]
        wt = weight_table(c, 0.3, "d22")
        rep = compare_gauges(wt, c)
        dev = table_deviation(wt, c)
        rows = [{"index": i, "vertex": VERTICES[i], "re": wt.weights[i].real, "im": wt.weights[i].imag,
                 "asterisk": int(i in ASTERISK)} for i in ranges]
        ok = dev < 1e-12 and rep.sign_flipped == ASTERISK and abs(rep.g - rep.expected_g) < 1e-10 * abs(rep.g)
        return {"id": table, "rows": rows, "max_relative_deviation": dev, "pass": ok}, ok
    return run


def _recipe_table4(args, job):
    from .spectra import degeneracy_check

    rows, ok = [], True
    for L in (2, 3, 4):
        d = degeneracy_check(parse_angle(args.gamma or "pi/5"), L)
        d.pop("record")
        rows.append(d)
        ok = ok and d["match"] and d["robust"]
    return {"id": "table4", "rows": rows, "pass": ok}, ok


def _recipe_xxx(L):
    def run(args, job):
        from .spectra import xxx_decoupling_report

        rep = xxx_decoupling_report(coupling_from_gamma(1e-6), L)
        rows = [{"chain_a": a, "chain_b": b, "eigenvalue": e, "degeneracy": d} for a, b, e, d in rep.bookkeeping]
        ok = rep.ok and sum(r["degeneracy"] for r in rows) == 4 ** L
        return {"id": f"table{5 if L == 2 else 6}", "rows": rows, "max_deviation": rep.max_deviation,
                "pass": ok}, ok
    return run


def _recipe_roots(n, n0=0, n1=0, L=32):
    def run(args, job):
        from .bethe_solver import solve_state

        st = solve_state(parse_angle("pi/5"), L, n, n0, n1)
        rows = [{"re": r.real, "im": r.imag, "line": 0 if r.imag > 0 else 1} for r in st.roots]
        job.fmt = "csv" if not args.format else job.fmt
        ok = st.residual < 1e-10
        return {"rows": rows, "classification": st.classification, "energy": st.energy, "pass": ok}, ok
    return run


RECIPES = {
    "table1": _recipe_weights("table1"),
    "table2": _recipe_weights("table2"),
    "table3": _recipe_weights("table3"),
    "table4": _recipe_table4,
    "table5": _recipe_xxx(2),
    "table6": _recipe_xxx(4),
    "fig-groundm2": _recipe_roots(2),
    "fig-excm2": _recipe_roots(2, 3, 1),
    "fig-groundm1": _recipe_roots(1),
    "fig-groundm0": _recipe_roots(0),
}


def cmd_reproduce(args, job):
    if args.target not in RECIPES:
        raise UsageError(f"unknown recipe {args.target!r}; known: {', '.join(sorted(RECIPES))}")
    return RECIPES[args.target](args, job)


HANDLERS = {
    "ybe-check": cmd_ybe_check, "bybe-check": cmd_bybe_check, "weights": cmd_weights,
    "rep-dump": cmd_rep_dump, "hamiltonian": cmd_hamiltonian, "degeneracies": cmd_degeneracies,
    "xxx-limit": cmd_xxx_limit, "bethe-solve": cmd_bethe_solve, "bethe-sweep": cmd_bethe_sweep,
    "fit": cmd_fit, "characters": cmd_characters, "compare-levels": cmd_compare_levels,
    "reproduce": cmd_reproduce,
}


# output

def _render(job: JobSpec, result: dict) -> str:
    header = {"command": job.command, "params": job.params, "version": __version__}
    if job.fmt == "json":
        return json.dumps(_jsonable({"job": header, "result": result}), indent=2, sort_keys=True) + "\n"
    rows = result.get("rows")
    if job.fmt == "csv":
        if not rows:
            raise UsageError("this command has no tabular output; use --format json")
        buf = io.StringIO()
        flat = [{k: (json.dumps(_jsonable(v)) if isinstance(v, (list, dict)) else _jsonable(v))
                 for k, v in r.items()} for r in rows]
        # complex values go into paired columns
        for r in flat:
            for k in [k for k, v in r.items() if isinstance(v, list) and len(v) == 2]:
                r[f"re_{k}"], r[f"im_{k}"] = r.pop(k)
        buf.write(f"# {json.dumps(_jsonable(header), sort_keys=True)}\n")
        w = csv.DictWriter(buf, fieldnames=list(flat[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(flat)
        return buf.getvalue()
    lines = [f"# {job.command} {json.dumps(_jsonable(job.params), sort_keys=True)} v{__version__}"]
    if rows:
        keys = list(rows[0].keys())
        lines.append("\t".join(keys))
        for r in rows:
            lines.append("\t".join(str(_jsonable(r[k])) for k in keys))
    for k, v in result.items():
        if k != "rows":
            lines.append(f"{k}: {json.dumps(_jsonable(v))}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="potts-chain", description="Open staggered six-vertex / Potts chain toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")

    def common(sp_):
        sp_.add_argument("--gamma", help="angle, e.g. pi/5, 2pi/11 or 0.6")
        sp_.add_argument("--k", type=int, help="integer level with gamma = pi/k")
        sp_.add_argument("--L", type=int)
        sp_.add_argument("--N", type=int, help="number of strands (defaults to 2L)")
        sp_.add_argument("--sector", type=int)
        sp_.add_argument("--sizes")
        sp_.add_argument("--order", type=int)
        sp_.add_argument("--gauge", default="stag", choices=("stag", "d22"))
        sp_.add_argument("--threads", type=int, default=1)
        sp_.add_argument("--out")
        sp_.add_argument("--format", choices=("json", "csv", "text"))
        sp_.add_argument("--config")
        sp_.add_argument("--tol", type=float, default=1e-10)
        sp_.add_argument("--seed", type=int, default=0, help="RNG seed for random draws")
        sp_.add_argument("--draws", type=int, default=5)

    for name in COMMANDS:
        s = sub.add_parser(name)
        common(s)
        if name == "weights":
            s.add_argument("--u", type=float, default=0.3)
        if name in ("rep-dump", "hamiltonian"):
            s.add_argument("--rep", default="vertex", choices=("vertex", "tilde", "loop", "rsos"))
            s.add_argument("--heights", help="RSOS boundary heights 'h_left,h_right'")
        if name == "bethe-solve":
            s.add_argument("--seed-spec", dest="seed_spec", default="ground",
                           help="ground | shift:<n0>,<n1> | file:<path>")
        if name in ("bethe-sweep", "fit"):
            s.add_argument("--shift", help="'n0,n1' Bethe-number shifts")
        if name == "fit":
            s.add_argument("--observable", choices=("c", "h"), default="c")
            s.add_argument("--source", choices=("bethe", "ed"), default="bethe")
        if name == "characters":
            s.add_argument("--series", choices=("zm", "trace", "string"), default="zm")
            s.add_argument("--m", type=int)
            s.add_argument("--l", type=int)
            s.add_argument("--weighting", choices=("vertex", "loop"), default="vertex")
        if name == "compare-levels":
            s.add_argument("--levels", type=int, default=3)
        if name == "reproduce":
            s.add_argument("target")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.config:
        # config entries go right after the command so explicit flags still win
        try:
            extra = []
            for k, v in read_config(args.config).items():
                if not hasattr(args, k):
                    raise UsageError(f"unknown config key {k!r}")
                extra += [f"--{k.replace('_', '-')}", str(v)]
        except (OSError, UsageError, json.JSONDecodeError) as exc:
            print(json.dumps({"error": "usage", "reason": str(exc)}), file=sys.stderr)
            return EXIT_USAGE
        argv = list(argv if argv is not None else sys.argv[1:])
        pos = argv.index(args.command) + 1
        try:
            args = parser.parse_args(argv[:pos] + extra + argv[pos:])
        except SystemExit:
            return EXIT_USAGE
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out", "format", "threads")}
    job = JobSpec(args.command, params, args.out, args.format or "json")
    try:
        result, ok = HANDLERS[args.command](args, job)
    except (UsageError, DomainError, ValueError) as exc:
        print(json.dumps({"error": "usage", "reason": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        # solver non-convergence and similar numerical failures
        print(json.dumps({"error": "verification", "kind": type(exc).__name__, "reason": str(exc)}), file=sys.stderr)
        return EXIT_VERIFY
    text = _render(job, result)
    out = args.out
    if out is None and os.environ.get(OUT_ENV):
        out = os.path.join(os.environ[OUT_ENV], f"{args.command}.{job.fmt}")
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print(json.dumps({"error": "verification", "reason": f"{args.command} check failed"}), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
