"""Command-line surface: seeded, deterministic, machine-readable outputs.

Subcommands
-----------
gen     generate a model graph and write it as graph JSON
cap     capacity between two vertex sets
eig     first nontrivial eigenvalue (steklov or neumann)
isocap  isocapacitary constant (exact enumeration or level-set heuristic)
verify  two-sided bound check for one (p, alpha, mode) instance
sweep   grid of bound checks over p and alpha lists, emitted as CSV
lemma   randomized checker suites for the scalar inequalities

Exit codes: 0 success, 1 operational error (bad flags, bad input,
budget exceeded), 2 a ``violated`` grade from ``verify`` (the offending
instance is dumped alongside the report).  All floating-point output
uses 17 significant digits in JSON and 12 in CSV; with a fixed ``--seed``
every command produces byte-identical output across runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import checks, geometry_io, isocap, spectral
from .capacity import capacity
from .graphs import WeightedGraph, p_energy
from .seeding import SeedRequiredError, spawn_rng


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # operational errors (including bad flags) must exit 1, not argparse's 2
    def error(self, message):
        raise CliUsageError(message)


def parse_gen_spec(spec: str) -> WeightedGraph:
    """Build a model graph from a ``family:params`` string."""
    name, _, rest = spec.partition(":")
    if name == "edge":
        return geometry_io.gen_model("edge", w=float(rest)) if rest else geometry_io.gen_model("edge")
    if name in ("path", "cycle", "star", "complete"):
        return geometry_io.gen_model(name, n=int(rest))
    if name == "grid2d":
        rows, _, cols = rest.partition("x")
        return geometry_io.gen_model("grid2d", rows=int(rows), cols=int(cols))
    if name == "random_gnp":
        n_str, _, p_str = rest.partition(",")
        return geometry_io.gen_model(
            "random_gnp", n=int(n_str), p_edge=float(p_str), seed=_GEN_SEED[0]
        )
    raise CliUsageError(f"unknown generator family {name!r}")


# seed handed to parse_gen_spec (set per invocation before graph loading)
_GEN_SEED: list[int | None] = [None]


def _load_graph(args) -> WeightedGraph:
    _GEN_SEED[0] = args.seed
    if getattr(args, "gen", None):
        return parse_gen_spec(args.gen)
    if getattr(args, "graph", None):
        return geometry_io.load_graph(args.graph)
    raise CliUsageError("a graph source is required (--gen or --graph)")


def _write_output(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _vertex_list(arg: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in arg.split(",") if tok != "")
    except ValueError:
        raise CliUsageError(f"vertex list must be comma-separated integers, got {arg!r}") from None


def _float_list(arg: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in arg.split(",") if tok != "")
    except ValueError:
        raise CliUsageError(f"expected comma-separated numbers, got {arg!r}") from None


def _eigen_payload(res: spectral.EigenResult) -> dict:
    return {
        "value": res.value,
        "recenter_c": res.recenter_c,
        "mode": res.mode,
        "certified": res.certified,
        "starts": res.starts,
        "residual": res.residual,
        "start_values": [h[-1] for h in res.history],
        "iterations_per_start": [len(h) - 1 for h in res.history],
        "extremal": [float(v) for v in res.extremal],
    }


def _report_payload(rep: checks.BoundCheckReport) -> dict:
    return {
        "p": rep.p,
        "alpha": rep.alpha,
        "mode": rep.mode,
        "gamma": rep.gamma,
        "gamma_mode": rep.gamma_mode,
        "middle": rep.middle,
        "middle_cert": rep.middle_cert,
        "lower_const": rep.lower_const,
        "upper_const": rep.upper_const,
        "lower_ok": rep.lower_ok,
        "upper_ok": rep.upper_ok,
        "slack_lower": rep.slack_lower,
        "slack_upper": rep.slack_upper,
    }


def cmd_gen(args) -> int:
    G = _load_graph(args)
    _write_output(geometry_io.dumps_json(geometry_io.graph_to_json_dict(G)), args.out)
    return 0


def cmd_cap(args) -> int:
    G = _load_graph(args)
    if args.a is None or args.b is None:
        raise CliUsageError("cap requires --a and --b vertex lists")
    res = capacity(G, args.a, args.b, args.p, tol=args.tol)
    payload = {
        "value": res.value,
        "iterations": res.iterations,
        "kkt_residual": res.kkt_residual,
        "mode": res.mode,
    }
    _write_output(geometry_io.dumps_json(payload), args.out)
    return 0


def cmd_eig(args) -> int:
    G = _load_graph(args)
    if args.mode == "dirichlet":
        raise CliUsageError("eig supports steklov or neumann mode")
    res = spectral.first_eigenvalue(
        G, args.p, args.mode, starts=args.starts, tol=args.tol, seed=args.seed
    )
    _write_output(geometry_io.dumps_json(_eigen_payload(res)), args.out)
    return 0


def cmd_isocap(args) -> int:
    G = _load_graph(args)
    if args.heuristic:
        if args.mode == "dirichlet":
            seed_fn = np.asarray(G.hop_distances(G.boundary))
        else:
            seed_fn = spectral.first_eigenvalue(
                G, args.p, args.mode, starts=args.starts, tol=args.tol, seed=args.seed
            ).extremal
        res = isocap.isocap_heuristic(G, args.p, args.alpha, args.mode, seed_fn)
    else:
        res = isocap.isocap_exact(G, args.p, args.alpha, args.mode, budget=args.budget)
    payload = {
        "value": res.value,
        "cert_a": list(res.cert_a),
        "cert_b": list(res.cert_b),
        "mode": res.mode,
        "pairs_evaluated": res.pairs_evaluated,
        "alpha": res.alpha,
        "p": res.p,
    }
    _write_output(geometry_io.dumps_json(payload), args.out)
    return 0


def cmd_verify(args) -> int:
    G = _load_graph(args)
    rep = checks.two_sided_bound_check(
        G, args.p, args.alpha, args.mode,
        budget=args.budget, starts=args.starts, seed=args.seed,
        allow_heuristic=args.heuristic,
    )
    payload = _report_payload(rep)
    violated = checks.GRADE_VIOLATED in (rep.lower_ok, rep.upper_ok)
    if violated:
        payload["instance"] = geometry_io.graph_to_json_dict(G)
        payload["seed"] = args.seed
        if args.out:
            _write_output(geometry_io.dumps_json(payload), args.out)
            _write_output(geometry_io.dumps_json(payload), str(args.out) + ".violation.json")
        else:
            _write_output(geometry_io.dumps_json(payload), None)
        return 2
    _write_output(geometry_io.dumps_json(payload), args.out)
    return 0


def _sweep_csv(cells, seed) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([
        "p", "alpha", "mode", "gamma", "gamma_mode", "middle", "middle_cert",
        "lower_const", "upper_const", "lower_ok", "upper_ok",
        "slack_lower", "slack_upper", "seed",
    ])
    f12 = lambda x: geometry_io.format_float(x, 12)
    seed_text = "" if seed is None else str(seed)
    for cell in cells:
        if cell.report is None:
            writer.writerow([
                f12(cell.p), f12(cell.alpha), cell.mode, "nan", "error", "nan",
                cell.error, "nan", "nan", "error", "error", "nan", "nan", seed_text,
            ])
            continue
        r = cell.report
        writer.writerow([
            f12(r.p), f12(r.alpha), r.mode, f12(r.gamma), r.gamma_mode,
            f12(r.middle), r.middle_cert, f12(r.lower_const), f12(r.upper_const),
            r.lower_ok, r.upper_ok, f12(r.slack_lower), f12(r.slack_upper), seed_text,
        ])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    G = _load_graph(args)
    randomized = any(p != 2.0 or a != 1.0 for p in args.p_list for a in args.alpha_list)
    if randomized and args.seed is None:
        raise SeedRequiredError("sweep cells beyond p = 2, alpha = 1 need --seed")
    cells = checks.sweep(
        G, args.p_list, args.alpha_list, args.mode,
        budget=args.budget, starts=args.starts, seed=args.seed,
        allow_heuristic=args.heuristic,
    )
    if args.format == "csv":
        _write_output(_sweep_csv(cells, args.seed), args.out)
    else:
        rows = []
        for cell in cells:
            if cell.report is None:
                rows.append({"p": cell.p, "alpha": cell.alpha, "mode": cell.mode, "error": cell.error})
            else:
                rows.append(_report_payload(cell.report))
        _write_output(geometry_io.dumps_json(rows), args.out)
    return 0


def _lemma_suites(args) -> dict:
    p_list = args.p_list or (1.5, 2.0, 3.0)
    trials = args.trials
    rng = spawn_rng(args.seed, "lemma")

    densities = {
        "one": lambda t: 1.0,
        "linear": lambda t: t + 0.1,
        "four": lambda t: 4.0,
        "exp": lambda t: float(np.exp(t)),
    }
    interval_rows = []
    for gname, g in densities.items():
        for p in p_list:
            rep = checks.interval_capacity_identity(g, p, args.grid)
            interval_rows.append({
                "density": gname, "p": p, "closed_form": rep.closed_form,
                "minimized": rep.minimized, "gap": rep.gap,
            })

    lc_violations = 0
    lc_total = 0
    for _ in range(trials):
        prof = _random_level_profile(rng)
        for p in p_list:
            for alpha in (1.0, 1.5, 2.0):
                lc_total += 1
                if not checks.layer_cake_check(prof, p, alpha).ok:
                    lc_violations += 1
    # survey of the 1/p <= alpha < 1 range: reported, not graded
    lc_survey_violations = 0
    lc_survey_total = 0
    for _ in range(trials):
        prof = _random_level_profile(rng)
        for p in p_list:
            alpha = float(rng.uniform(1.0 / p, 1.0))
            lc_survey_total += 1
            if not checks.layer_cake_check(prof, p, alpha).ok:
                lc_survey_violations += 1

    hardy_violations = 0
    for _ in range(trials):
        prof = _random_monotone_profile(rng)
        for p in p_list:
            if not checks.hardy_check(prof, p).ok:
                hardy_violations += 1

    level_violations = 0
    worst_ratio = 0.0
    for _ in range(trials):
        G, u = _random_graph_function(rng, args.n)
        for p in p_list:
            rep = checks.capacity_levels_check(G, u, p)
            worst_ratio = max(worst_ratio, rep.ratio)
            if not rep.ok:
                level_violations += 1

    return {
        "interval_capacity": interval_rows,
        "layer_cake": {"trials": lc_total, "violations": lc_violations},
        "layer_cake_alpha_below_1_survey": {
            "trials": lc_survey_total, "violations": lc_survey_violations,
        },
        "hardy": {"trials": trials * len(p_list), "violations": hardy_violations},
        "capacity_levels": {
            "trials": trials * len(p_list), "violations": level_violations,
            "worst_ratio": worst_ratio,
        },
    }


def _random_level_profile(rng) -> checks.LevelProfile:
    m = int(rng.integers(1, 6))
    t = np.sort(rng.uniform(0.05, 3.0, size=m))
    t += 0.01 * np.arange(m)  # enforce strict increase
    a = np.sort(rng.uniform(0.0, 2.0, size=m))[::-1]
    return checks.LevelProfile(t, a)


def _random_monotone_profile(rng) -> checks.MonotoneProfile:
    m = int(rng.integers(2, 7))
    grid = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 2.0, size=m))])
    grid += 0.01 * np.arange(m + 1)
    vals = np.concatenate([[0.0], np.cumsum(rng.uniform(0.0, 1.0, size=m))])
    return checks.MonotoneProfile(grid, vals)


def _random_graph_function(rng, n_max: int):
    n = int(rng.integers(2, n_max + 1))
    edges = [(i, int(rng.integers(0, i)), float(rng.uniform(0.5, 2.0))) for i in range(1, n)]
    extra = {(min(a, b), max(a, b)) for a, b in zip(*np.where(rng.random((n, n)) < 0.2)) if a != b}
    present = {(min(x, y), max(x, y)) for x, y, _ in edges}
    for x, y in sorted(extra - present):
        edges.append((int(x), int(y), float(rng.uniform(0.5, 2.0))))
    G = WeightedGraph.build(n, edges, mu=rng.uniform(0.5, 2.0, size=n))
    u = rng.standard_normal(n)
    return G, u


def cmd_lemma(args) -> int:
    _write_output(geometry_io.dumps_json(_lemma_suites(args)), args.out)
    return 0


def _add_common(sub, graph_source=True):
    if graph_source:
        sub.add_argument("--gen", help="generator spec, e.g. path:3, grid2d:3x3, random_gnp:10,0.4")
        sub.add_argument("--graph", help="path to a graph JSON file")
    sub.add_argument("--seed", type=int, default=None, help="global seed for randomized components")
    sub.add_argument("--out", default=None, help="output path (default: stdout)")
    sub.add_argument("--tol", type=float, default=1e-8)
    sub.add_argument("--starts", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plcap", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("gen", help="generate a model graph")
    _add_common(s)
    s.set_defaults(fn=cmd_gen)

    s = subs.add_parser("cap", help="capacity between vertex sets A and B")
    _add_common(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--a", type=_vertex_list, default=None, help="comma vertex list")
    s.add_argument("--b", type=_vertex_list, default=None, help="comma vertex list")
    s.set_defaults(fn=cmd_cap)

    s = subs.add_parser("eig", help="first nontrivial eigenvalue")
    _add_common(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--mode", choices=["steklov", "neumann"], required=True)
    s.set_defaults(fn=cmd_eig)

    s = subs.add_parser("isocap", help="isocapacitary constant")
    _add_common(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--mode", choices=["steklov", "neumann", "dirichlet"], required=True)
    s.add_argument("--budget", type=int, default=isocap.DEFAULT_BUDGET)
    s.add_argument("--heuristic", action="store_true", help="level-set heuristic instead of enumeration")
    s.set_defaults(fn=cmd_isocap)

    s = subs.add_parser("verify", help="two-sided bound check for one instance")
    _add_common(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--mode", choices=["steklov", "neumann"], required=True)
    s.add_argument("--budget", type=int, default=isocap.DEFAULT_BUDGET)
    s.add_argument("--heuristic", action="store_true")
    s.set_defaults(fn=cmd_verify)

    s = subs.add_parser("sweep", help="grid of bound checks over p and alpha")
    _add_common(s)
    s.add_argument("--p", dest="p_list", type=_float_list, required=True, help="comma list")
    s.add_argument("--alpha", dest="alpha_list", type=_float_list, default=(1.0,), help="comma list")
    s.add_argument("--mode", choices=["steklov", "neumann"], required=True)
    s.add_argument("--budget", type=int, default=isocap.DEFAULT_BUDGET)
    s.add_argument("--heuristic", action="store_true")
    s.add_argument("--format", choices=["json", "csv"], default="csv")
    s.set_defaults(fn=cmd_sweep)

    s = subs.add_parser("lemma", help="randomized scalar-inequality checker suites")
    _add_common(s, graph_source=False)
    s.add_argument("--p", dest="p_list", type=_float_list, default=None, help="comma list")
    s.add_argument("--grid", type=int, default=200, help="grid size for the 1-D identity")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--n", type=int, default=8, help="max vertices for level-capacity draws")
    s.set_defaults(fn=cmd_lemma)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "gen", None) and getattr(args, "graph", None):
            raise CliUsageError("use exactly one graph source (--gen or --graph)")
        return args.fn(args)
    except CliUsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        parser.print_usage(sys.stderr)
        return 1
    except SeedRequiredError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
