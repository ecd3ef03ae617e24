"""Command-line front end: ``polyface <subcommand> ...``.

Exit status is 0 on success, 2 on a usage error and 1 when a computation
fails or a checked identity does not hold.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import experiments as ex
from . import geometry, probcalc
from .ensembles import DimensionSpec, EnsembleError, Kind
from .geometry import MARGIN_TOL

DEFAULT_SEED = ex.DEFAULT_SEED


def _header(cmd: str, **params) -> list[str]:
    return [f"polyface {cmd}"] + [f"{k}={v}" for k, v in params.items()]


def _add_seed_trials(p, trials=ex.DEFAULT_TRIALS):
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED, help="64-bit seed (default 0x5EED)")
    p.add_argument("--tol", type=float, default=MARGIN_TOL, help="survival margin tolerance")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: $POLYFACE_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyface", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    shapes = [s.value for s in (probcalc.Shape.ORTHANT, probcalc.Shape.HYPERCUBE)]
    kinds = [k.value for k in Kind]

    p = sub.add_parser("wendel", help="Wendel probability P_{m,M}",
                       description="Wraps probcalc.wendel_probability (and experiments.halfspace_mc with --mc).")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--exact", action="store_true", help="print the exact rational p/q")
    p.add_argument("--json", action="store_true")
    p.add_argument("--mc", type=int, default=0, metavar="TRIALS", help="also estimate by Monte Carlo")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)

    p = sub.add_parser("ratio", help="expected face-survival ratio 1 - P_{N-n,N-k}",
                       description="Wraps probcalc.expected_face_ratio.")
    for f in ("--k", "--n", "--N"):
        p.add_argument(f, type=int, required=True)
    p.add_argument("--shape", choices=shapes, default="Orthant")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("threshold", help="weak / strong threshold curves",
                       description="Wraps probcalc.rho_weak and probcalc.rho_strong.")
    p.add_argument("--which", choices=["weak", "strong"], default="weak")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta", type=float)
    g.add_argument("--sweep", type=int, metavar="STEPS")
    p.add_argument("--out", help="CSV file for --sweep (default stdout)")
    p.add_argument("--plot", help="figure file (.svg/.png/.pdf) of both curves")

    p = sub.add_parser("area", help="area under the weak hypercube threshold",
                       description="Wraps probcalc.curve_area.")
    p.add_argument("--quad-points", type=int, default=200)

    p = sub.add_parser("mc", help="Monte Carlo face-survival frequency",
                       description="Wraps experiments.mc_face_ratio.")
    p.add_argument("--shape", choices=shapes, default="Orthant")
    p.add_argument("--ensemble", choices=kinds, default="GaussianIID")
    for f in ("--k", "--n", "--N"):
        p.add_argument(f, type=int, required=True)
    _add_seed_trials(p)
    p.add_argument("--out", help="CSV output file")

    p = sub.add_parser("universality", help="Monte Carlo sweep over several ensembles",
                       description="Wraps experiments.universality_sweep.")
    p.add_argument("--shape", choices=shapes, default="Orthant")
    p.add_argument("--ensembles", default="GaussianIID,UniformIID,Orthoprojector,RademacherCensored",
                   help="comma-separated ensemble kinds")
    for f in ("--k", "--n", "--N"):
        p.add_argument(f, type=int, required=True)
    _add_seed_trials(p)
    p.add_argument("--out", help="CSV output file")

    p = sub.add_parser("phase", help="phase-diagram table (and SVG heatmap)",
                       description="Wraps experiments.phase_diagram and plotting.emit_svg_heatmap.")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--shape", choices=shapes, default="Hypercube")
    p.add_argument("--ensemble", choices=kinds, default="GaussianIID")
    _add_seed_trials(p, trials=200)
    p.add_argument("--out", help="CSV output file")
    p.add_argument("--svg", help="SVG heatmap output file")

    p = sub.add_parser("fourier", help="neighborliness of the partial Fourier cone",
                       description="Wraps experiments.fourier_neighborliness and geometry.highpass_negativity_check.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k-max", type=int, default=None, help="largest face dimension to test (default (n-1)/2)")
    p.add_argument("--samples", type=int, default=1000, help="highpass spot-check samples")
    p.add_argument("--tol", type=float, default=MARGIN_TOL)

    p = sub.add_parser("bijection", help="adjoined-ones face-count identity",
                       description="Wraps experiments.adjoin_ones_bijection.")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_seed_trials(p, trials=20)
    p.add_argument("--out", help="CSV output file")

    p = sub.add_parser("vertices", help="lost hypercube vertex and exhaustive vertex counts",
                       description="Wraps geometry.lost_vertex and geometry.count_faces_exhaustive.")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--ensemble", choices=kinds, default="GaussianIID")
    _add_seed_trials(p, trials=100)
    p.add_argument("--out", help="CSV output file")

    p = sub.add_parser("recover", help="planted sparse / simple recovery by LP",
                       description="Wraps experiments.recovery_trial.")
    p.add_argument("--kind", choices=[k.value for k in ex.Planted], default="KSparseNonneg")
    p.add_argument("--ensemble", choices=kinds, default="GaussianIID")
    for f in ("--k", "--n", "--N"):
        p.add_argument(f, type=int, required=True)
    _add_seed_trials(p, trials=100)
    p.add_argument("--out", help="CSV output file")
    return ap


def _print_fraction(q, as_json: bool, exact: bool, **extra):
    if as_json:
        print(json.dumps({**extra, "value": probcalc.format_fraction(q), "float": float(q)}, sort_keys=True))
    elif exact:
        print(probcalc.format_fraction(q))
    else:
        print(f"{float(q):.10g}")


def _cmd_wendel(a) -> int:
    w = probcalc.wendel_probability(a.m, a.M)
    if w.value_exact is None:
        print(f"{w.value:.10g}  (log {w.value_log:.12g})")
    else:
        _print_fraction(w.value_exact, a.json, a.exact, m=a.m, M=a.M)
    if a.mc:
        rep = ex.halfspace_mc(a.m, a.M, a.mc, a.seed)
        print(f"monte carlo: {rep['frequency']:.6f} +- {rep['stderr']:.6f} over {rep['conclusive']} trials")
        return 0 if abs(rep["frequency"] - w.value) <= 3 * rep["stderr"] else 1
    return 0


def _cmd_ratio(a) -> int:
    q = probcalc.expected_face_ratio(DimensionSpec(a.k, a.n, a.N), a.shape)
    _print_fraction(q, a.json, not a.json, k=a.k, n=a.n, N=a.N, shape=a.shape)
    return 0


def _cmd_threshold(a) -> int:
    f = (lambda d: probcalc.rho_weak(d)) if a.which == "weak" else probcalc.rho_strong
    if a.delta is not None:
        print(f"{f(a.delta):.10f}")
    else:
        lo = 0.5 if a.which == "strong" else 0.0
        pts = [lo + (1.0 - lo) * (i + 0.5) / a.sweep for i in range(a.sweep)]
        rows = [(f"{d:.17g}", f"{f(d):.17g}") for d in pts]
        fh = open(a.out, "w", newline="", encoding="utf-8") if a.out else sys.stdout
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delta", "rho"])
            w.writerows(rows)
        finally:
            if a.out:
                fh.close()
    if a.plot:
        from .plotting import plot_thresholds
        plot_thresholds(a.plot)
    return 0


def _cmd_area(a) -> int:
    print(f"{probcalc.curve_area('WeakHypercube', a.quad_points):.6f}")
    return 0


def _report_line(r: ex.TrialReport) -> str:
    return (f"{r.shape.value} {r.ensemble.label} (k,n,N)=({r.dims.k},{r.dims.n},{r.dims.N}): "
            f"{r.empirical:.4f} +- {r.stderr:.4f} vs {float(r.predicted):.4f} "
            f"[{r.indeterminate} indeterminate] {'ok' if r.in_band() else 'OUTSIDE 3-sigma band'}")


def _cmd_mc(a) -> int:
    dims = DimensionSpec(a.k, a.n, a.N)
    rep = ex.mc_face_ratio(dims, a.shape, a.ensemble, a.trials, a.seed, a.tol, a.workers)
    print(_report_line(rep))
    if a.out:
        ex.write_trial_csv([rep], a.out, _header("mc", seed=a.seed, trials=a.trials, tol=a.tol,
                                                 ensemble=rep.ensemble.to_json()))
    return 0 if rep.in_band() else 1


def _cmd_universality(a) -> int:
    dims = DimensionSpec(a.k, a.n, a.N)
    kinds = [s.strip() for s in a.ensembles.split(",") if s.strip()]
    reports = ex.universality_sweep(dims, kinds, a.trials, a.seed, a.shape, a.tol, a.workers)
    for r in reports:
        print(_report_line(r))
    if a.out:
        ex.write_trial_csv(reports, a.out, _header("universality", seed=a.seed, trials=a.trials, tol=a.tol))
    return 0 if all(r.in_band() for r in reports) else 1


def _cmd_phase(a) -> int:
    rows = ex.phase_diagram(a.N, a.grid, a.trials, a.shape, a.ensemble, a.seed, a.tol, a.workers)
    comments = _header("phase", seed=a.seed, trials=a.trials, tol=a.tol, shape=a.shape, ensemble=a.ensemble)
    if a.out:
        ex.write_phase_csv(rows, a.out, comments)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(ex.PHASE_COLUMNS)
        for r in rows:
            w.writerow([ex._fmt(r[c]) for c in ex.PHASE_COLUMNS])
    if a.svg:
        from .plotting import emit_svg_heatmap
        emit_svg_heatmap(rows, a.svg, title=f"{a.shape}, {a.ensemble}, N={a.N}")
    return 0


def _cmd_fourier(a) -> int:
    m = (a.n - 1) // 2
    ks = range(1, (a.k_max if a.k_max is not None else m) + 1)
    rep = ex.fourier_neighborliness(a.n, a.N, a.tol, ks)
    for k, (s, t, i) in rep.counts.items():
        tag = "all survive" if s == t else f"{len(rep.failing[k])} lost, e.g. {rep.failing[k][:3]}"
        print(f"k={k}: {s}/{t} survive, {i} indeterminate ({tag})")
    highpass = geometry.highpass_negativity_check(a.n, a.N, a.samples)
    print(f"highpass negativity (>= {m} negative entries) on {a.samples} samples: {'pass' if highpass else 'FAIL'}")
    return 0 if rep.neighborly and highpass else 1


def _cmd_bijection(a) -> int:
    rep = ex.adjoin_ones_bijection(a.N, a.n, a.trials, a.seed, a.tol, a.workers)
    conclusive = rep.conclusive_trials
    print(f"{len(conclusive)}/{a.trials} conclusive trials; identity {'holds' if rep.holds else 'FAILS'}")
    if a.out:
        ex._write_csv(a.out, ["trial", "k", "orthant_faces", "simplex_faces", "indeterminate"], rep.rows,
                      _header("bijection", seed=a.seed, trials=a.trials, tol=a.tol, n=a.n, N=a.N))
    return 0 if rep.holds else 1


def _cmd_vertices(a) -> int:
    rows = ex.lost_vertex_trials(a.n, a.N, a.trials, a.seed, a.ensemble, a.tol, a.workers)
    lost = sum(r[1] == geometry.Status.LOST.value for r in rows)
    below = sum(r[2] < r[3] for r in rows)
    print(f"constructed vertex lost in {lost}/{a.trials} draws; f0 < 2^N in {below}/{a.trials} draws")
    if a.out:
        ex._write_csv(a.out, ["trial", "lost_vertex_status", "vertices_survived", "vertices_total",
                              "indeterminate"], rows,
                      _header("vertices", seed=a.seed, trials=a.trials, tol=a.tol, n=a.n, N=a.N))
    return 0 if lost == a.trials and below == a.trials else 1


def _cmd_recover(a) -> int:
    dims = DimensionSpec(a.k, a.n, a.N)
    rep = ex.recovery_trial(dims, a.ensemble, a.kind, a.trials, a.seed, a.tol, a.workers)
    print(f"{rep.planted_kind.value} {rep.ensemble.label}: {rep.successes}/{a.trials} recovered, "
          f"{rep.uniqueness_certified} certified unique, {rep.lp_failures} LP failures, "
          f"{rep.violations} certified-but-not-recovered")
    if a.out:
        ex.write_recovery_csv([rep], a.out, _header("recover", seed=a.seed, trials=a.trials, tol=a.tol))
    return 0 if rep.violations == 0 else 1


_COMMANDS = {
    "wendel": _cmd_wendel, "ratio": _cmd_ratio, "threshold": _cmd_threshold, "area": _cmd_area,
    "mc": _cmd_mc, "universality": _cmd_universality, "phase": _cmd_phase, "fourier": _cmd_fourier,
    "bijection": _cmd_bijection, "vertices": _cmd_vertices, "recover": _cmd_recover,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return _COMMANDS[args.cmd](args)
    except (ValueError, ArithmeticError, RuntimeError, EnsembleError) as e:
        print(f"polyface {args.cmd}: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
