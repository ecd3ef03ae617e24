"""Monte Carlo and exhaustive experiment harnesses.

Every trial is a pure function of ``(parameters, seed, trial_index)``;
tallies are integer sums, so splitting trials across worker processes never
changes a result.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lp
from .ensembles import DimensionSpec, EnsembleSpec, Kind, make_spec, sample_matrix, trial_rng
from .geometry import (MARGIN_TOL, FaceSpec, RankDeficient, Status, count_faces_exhaustive,
                       face_survives, lost_vertex, max_margin_direction, nullspace_basis)
from .probcalc import Shape, expected_face_ratio

DEFAULT_SEED = 0x5EED
DEFAULT_TRIALS = 10_000
MAX_DEGENERATE_RATE = 0.01
MAX_INDETERMINATE_RATE = 0.001
RECOVERY_TOL = 1e-6

_FACE_STREAM = 1
_PLANT_STREAM = 2
_HALFSPACE_STREAM = 3

TRIAL_COLUMNS = ["shape", "ensemble", "k", "n", "N", "trials", "survived", "lost", "indeterminate",
                 "predicted", "empirical", "stderr"]
PHASE_COLUMNS = ["delta", "rho", "k", "n", "N", "predicted", "empirical", "stderr", "indeterminate"]
RECOVERY_COLUMNS = ["kind", "ensemble", "k", "n", "N", "trials", "successes", "certified", "lp_failures"]


class ExperimentError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Planted(str, enum.Enum):
    SPARSE_NONNEG = "KSparseNonneg"
    SIMPLE_BOX = "KSimpleBox"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("POLYFACE_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _spec_for(ensemble, rows: int, cols: int, seed: int) -> EnsembleSpec:
    if isinstance(ensemble, EnsembleSpec):
        if (ensemble.rows, ensemble.cols) != (rows, cols):
            raise ValueError(f"ensemble is {ensemble.rows} x {ensemble.cols}, expected {rows} x {cols}")
        return ensemble.with_seed(seed)
    return make_spec(ensemble, rows, cols, seed)


def _chunks(trials: int, parts: int):
    bounds = np.linspace(0, trials, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# -- face-survival Monte Carlo ----------------------------------------------------------

@dataclass
class TrialReport:
    dims: DimensionSpec
    shape: Shape
    ensemble: EnsembleSpec
    trials: int
    survived: int
    lost: int
    indeterminate: int
    predicted: Fraction
    degenerate: int = 0

    @property
    def conclusive(self) -> int:
        return self.survived + self.lost

    @property
    def empirical(self) -> float:
        return self.survived / self.conclusive if self.conclusive else float("nan")

    @property
    def stderr(self) -> float:
        p = self.empirical
        return math.sqrt(p * (1 - p) / self.conclusive) if self.conclusive else float("nan")

    def in_band(self, sigmas: float = 3.0, center: float | None = None) -> bool:
        """Whether ``|empirical - center| <= sigmas * stderr`` (center defaults to the prediction).

        A zero standard error (all trials agree) only passes on exact agreement.
        """
        c = float(self.predicted) if center is None else center
        return abs(self.empirical - c) <= sigmas * self.stderr

    def row(self) -> list[str]:
        d = self.dims
        return [self.shape.value, self.ensemble.label, d.k, d.n, d.N, self.trials, self.survived, self.lost,
                self.indeterminate, self.predicted, self.empirical, self.stderr]


def _face_chunk(job):
    dims, shape, spec, seed, start, stop, tol, randomize_upper = job
    k, N = dims.k, dims.N
    survived = lost = indeterminate = degenerate = 0
    support = tuple(range(k))
    rest = np.arange(k, N)
    for t in range(start, stop):
        A = sample_matrix(spec, t)
        try:
            B = nullspace_basis(A)
        except RankDeficient:
            degenerate += 1
            continue
        upper = ()
        if shape is Shape.HYPERCUBE and randomize_upper:
            coins = trial_rng(seed, t, stream=_FACE_STREAM).integers(0, 2, rest.size)
            upper = tuple(rest[coins == 1].tolist())
        status = face_survives(B, FaceSpec(shape, support, upper), tol).status
        if status is Status.SURVIVES:
            survived += 1
        elif status is Status.LOST:
            lost += 1
        else:
            indeterminate += 1
    return survived, lost, indeterminate, degenerate


def mc_face_ratio(dims: DimensionSpec, shape: Shape | str, ensemble, trials: int = DEFAULT_TRIALS,
                  seed: int = DEFAULT_SEED, tol: float = MARGIN_TOL, workers: int | None = None,
                  randomize_upper: bool = True, strict: bool = True) -> TrialReport:
    """Fraction of trials in which the fixed face on coordinates ``0..k-1`` survives.

    Hypercube trials pin the remaining coordinates by a fair coin per trial
    unless ``randomize_upper`` is off (then all sit at 0). Degenerate draws
    (rank-deficient ``A``) are tallied as indeterminate; above 1% of trials
    they abort the run. With ``strict``, more than 0.1% indeterminate
    verdicts also raises.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    shape = Shape(shape)
    if shape is Shape.SIMPLEX:
        raise ValueError("Monte Carlo face ratio is defined for the orthant and hypercube")
    spec = _spec_for(ensemble, dims.n, dims.N, seed)
    workers = default_workers() if workers is None else workers
    jobs = [(dims, shape, spec, seed, a, b, tol, randomize_upper)
            for a, b in _chunks(trials, max(1, workers) * 4 if workers > 1 else 1)]
    tallies = np.array(_map(_face_chunk, jobs, workers)).sum(axis=0)
    survived, lost, indeterminate, degenerate = (int(v) for v in tallies)
    report = TrialReport(dims, shape, spec, trials, survived, lost, indeterminate + degenerate,
                         expected_face_ratio(dims, shape), degenerate)
    if degenerate > MAX_DEGENERATE_RATE * trials:
        raise ExperimentError(f"{degenerate} of {trials} draws from {spec.label} were rank deficient", report)
    if strict and report.indeterminate > MAX_INDETERMINATE_RATE * trials:
        raise ExperimentError(f"{report.indeterminate} of {trials} verdicts indeterminate at tol={tol}", report)
    return report


def universality_sweep(dims: DimensionSpec, ensembles, trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED,
                       shape: Shape | str = Shape.ORTHANT, tol: float = MARGIN_TOL,
                       workers: int | None = None) -> list[TrialReport]:
    return [mc_face_ratio(dims, shape, e, trials, seed, tol, workers) for e in ensembles]


def write_trial_csv(reports, path, comments=()) -> None:
    _write_csv(path, TRIAL_COLUMNS, [r.row() for r in reports], comments)


# -- phase diagram ----------------------------------------------------------------------

def _round(x: float) -> int:
    return int(math.floor(x + 0.5))


def phase_cell(delta: float, rho: float, N: int) -> DimensionSpec:
    n = min(max(_round(delta * N), 1), N - 1)
    return DimensionSpec(min(max(_round(rho * n), 0), n), n, N)


def phase_diagram(N: int, grid: int, trials: int = DEFAULT_TRIALS, shape: Shape | str = Shape.HYPERCUBE,
                  ensemble=Kind.GAUSSIAN, seed: int = DEFAULT_SEED, tol: float = MARGIN_TOL,
                  workers: int | None = None) -> list[dict]:
    """Predicted and empirical face ratios on the cell centers of a ``grid x grid`` lattice.

    Cells where ``k = 0`` or ``k = n`` get the exact value only (empirical left blank).
    Setting ``trials = 0`` skips the Monte Carlo entirely.
    """
    if grid < 4:
        raise ValueError("grid must be >= 4")
    shape = Shape(shape)
    rows = []
    for i in range(grid):
        delta = (i + 0.5) / grid
        for j in range(grid):
            rho = (j + 0.5) / grid
            dims = phase_cell(delta, rho, N)
            row = {"delta": delta, "rho": rho, "k": dims.k, "n": dims.n, "N": N,
                   "predicted": float(expected_face_ratio(dims, shape)),
                   "empirical": None, "stderr": None, "indeterminate": None}
            if trials > 0 and 0 < dims.k < dims.n:
                rep = mc_face_ratio(dims, shape, ensemble, trials, seed, tol, workers, strict=False)
                row.update(empirical=rep.empirical, stderr=rep.stderr, indeterminate=rep.indeterminate)
            rows.append(row)
    return rows


def write_phase_csv(rows, path, comments=()) -> None:
    _write_csv(path, PHASE_COLUMNS, [[r[c] for c in PHASE_COLUMNS] for r in rows], comments)


def read_phase_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("".join(lines)))
    if reader.fieldnames is None or any(c not in reader.fieldnames for c in PHASE_COLUMNS):
        raise ValueError(f"{path}: not a phase-diagram table")
    out = []
    for rec in reader:
        out.append({c: (float(rec[c]) if rec[c] not in ("", None) else None) for c in PHASE_COLUMNS})
    return out


# -- partial Fourier and adjoined ones ---------------------------------------------------

@dataclass
class FourierReport:
    n: int
    N: int
    counts: dict = field(default_factory=dict)  # k -> (survived, total, indeterminate)
    failing: dict = field(default_factory=dict)  # k -> list of lost supports

    @property
    def neighborly(self) -> bool:
        m = (self.n - 1) // 2
        return all(s == t and i == 0 for k, (s, t, i) in self.counts.items() if k <= m)


def fourier_neighborliness(n: int, N: int, tol: float = MARGIN_TOL, ks=None) -> FourierReport:
    from .ensembles import build_partial_fourier
    from .geometry import iter_faces

    B = nullspace_basis(build_partial_fourier(n, N))
    ks = range(1, (n - 1) // 2 + 1) if ks is None else ks
    rep = FourierReport(n, N)
    for k in ks:
        survived = indeterminate = 0
        failing = []
        for face in iter_faces(Shape.ORTHANT, N, k):
            status = face_survives(B, face, tol).status
            if status is Status.SURVIVES:
                survived += 1
            else:
                indeterminate += status is Status.INDETERMINATE
                failing.append(face.support)
        rep.counts[k] = (survived, len(failing) + survived, indeterminate)
        rep.failing[k] = failing
    return rep


@dataclass
class BijectionReport:
    n: int
    N: int
    rows: list = field(default_factory=list)  # (trial, k, orthant_count, simplex_count, indeterminate)

    @property
    def conclusive_trials(self) -> set:
        bad = {r[0] for r in self.rows if r[4] > 0}
        return {r[0] for r in self.rows} - bad

    @property
    def holds(self) -> bool:
        ok = self.conclusive_trials
        return all(r[2] == r[3] for r in self.rows if r[0] in ok)


def _bijection_trial(job):
    n, N, seed, t, tol, perm = job
    inner = EnsembleSpec(Kind.GAUSSIAN, n - 1, N, seed)
    A = np.asarray(sample_matrix(inner, t))
    if perm is not None:
        A = A[:, perm]
    At = np.vstack([np.ones((1, N)), A])
    B_orth = nullspace_basis(At)
    B_simp = nullspace_basis(A)
    out = []
    for k in range(1, n):
        so, _, io_ = count_faces_exhaustive(B_orth, Shape.ORTHANT, k, tol)
        ss, _, is_ = count_faces_exhaustive(B_simp, Shape.SIMPLEX, k, tol)
        out.append((t, k, so, ss, io_ + is_))
    return out


def adjoin_ones_bijection(N: int, n: int, trials: int = 20, seed: int = DEFAULT_SEED,
                          tol: float = MARGIN_TOL, workers: int | None = None, perm=None) -> BijectionReport:
    """Exhaustive counts of orthant ``k``-faces under ``[1; A]`` against simplex ``(k-1)``-faces under ``A``."""
    workers = default_workers() if workers is None else workers
    jobs = [(n, N, seed, t, tol, perm) for t in range(trials)]
    rep = BijectionReport(n, N)
    for rows in _map(_bijection_trial, jobs, workers):
        rep.rows.extend(rows)
    return rep


# -- Wendel halfspace oracle and lost vertices --------------------------------------------

def _halfspace_chunk(job):
    m, M, seed, start, stop, tol = job
    inside = outside = unsure = 0
    for t in range(start, stop):
        pts = trial_rng(seed, t, stream=_HALFSPACE_STREAM).standard_normal((M, m))
        try:
            margin, _ = max_margin_direction(pts, None, tol)
        except lp.LPFailure:
            unsure += 1
            continue
        if margin > tol:
            inside += 1
        elif margin < -tol:
            outside += 1
        else:
            unsure += 1
    return inside, outside, unsure


def halfspace_mc(m: int, M: int, trials: int = DEFAULT_TRIALS, seed: int = DEFAULT_SEED,
                 tol: float = MARGIN_TOL, workers: int | None = None) -> dict:
    """Frequency with which ``M`` standard Gaussian points in ``R^m`` share an open halfspace.

    Decided point set by point set with the max-margin LP, so it estimates
    the Wendel probability without using its formula.
    """
    workers = default_workers() if workers is None else workers
    jobs = [(m, M, seed, a, b, tol) for a, b in _chunks(trials, max(1, workers) * 4 if workers > 1 else 1)]
    inside, outside, unsure = (int(v) for v in np.array(_map(_halfspace_chunk, jobs, workers)).sum(axis=0))
    n = inside + outside
    p = inside / n if n else float("nan")
    return {"m": m, "M": M, "trials": trials, "inside": inside, "outside": outside, "indeterminate": unsure,
            "conclusive": n, "frequency": p, "stderr": math.sqrt(p * (1 - p) / n) if n else float("nan")}


def _vertex_trial(job):
    spec, t, tol = job
    B = nullspace_basis(sample_matrix(spec, t))
    status = face_survives(B, lost_vertex(B), tol).status.value
    survived, total, unsure = count_faces_exhaustive(B, Shape.HYPERCUBE, 0, tol)
    return t, status, survived, total, unsure


def lost_vertex_trials(n: int, N: int, trials: int = 100, seed: int = DEFAULT_SEED, ensemble=Kind.GAUSSIAN,
                       tol: float = MARGIN_TOL, workers: int | None = None) -> list[tuple]:
    """Per draw: verdict on the constructed lost vertex and the exhaustive vertex count.

    Rows are ``(trial, lost_vertex_status, survived, total, indeterminate)``.
    """
    spec = _spec_for(ensemble, n, N, seed)
    workers = default_workers() if workers is None else workers
    return _map(_vertex_trial, [(spec, t, tol) for t in range(trials)], workers)


# -- recovery ---------------------------------------------------------------------------

@dataclass
class RecoveryReport:
    dims: DimensionSpec
    ensemble: EnsembleSpec
    planted_kind: Planted
    trials: int
    successes: int
    uniqueness_certified: int
    lp_failures: int = 0
    violations: int = 0  # certified unique yet not recovered

    def row(self) -> list:
        d = self.dims
        return [self.planted_kind.value, self.ensemble.label, d.k, d.n, d.N, self.trials, self.successes,
                self.uniqueness_certified, self.lp_failures]


def plant(dims: DimensionSpec, kind: Planted, seed: int, t: int) -> tuple[np.ndarray, FaceSpec]:
    """Random ``k``-sparse nonnegative or ``k``-simple box vector, with its face."""
    rng = trial_rng(seed, t, stream=_PLANT_STREAM)
    N, k = dims.N, dims.k
    support = np.sort(rng.choice(N, size=k, replace=False))
    x0 = np.zeros(N)
    if kind is Planted.SIMPLE_BOX:
        x0 = rng.integers(0, 2, N).astype(float)
    x0[support] = rng.uniform(0.0, 1.0, k)
    if kind is Planted.SIMPLE_BOX:
        upper = [i for i in np.flatnonzero(x0 == 1.0) if i not in set(support.tolist())]
        return x0, FaceSpec(Shape.HYPERCUBE, tuple(support.tolist()), tuple(upper))
    return x0, FaceSpec(Shape.ORTHANT, tuple(support.tolist()))


def _recovery_chunk(job):
    dims, spec, kind, seed, start, stop, tol = job
    successes = certified = failures = violations = 0
    for t in range(start, stop):
        A = np.asarray(sample_matrix(spec, t))
        x0, face = plant(dims, kind, seed, t)
        b = A @ x0
        try:
            unique = face_survives(nullspace_basis(A), face, tol).survives
        except RankDeficient:
            unique = False
        certified += unique
        try:
            if kind is Planted.SPARSE_NONNEG:
                sol = lp.min_l1_nonneg(A, b)
                if not sol.ok:
                    raise lp.LPFailure(sol.status.value)
                ok = float(np.abs(sol.x - x0).max()) <= RECOVERY_TOL
            else:
                ok = all(hi - lo <= RECOVERY_TOL for lo, hi in lp.box_ranges(A, b))
        except lp.LPFailure:
            failures += 1
            continue
        successes += ok
        violations += unique and not ok
    return successes, certified, failures, violations


def recovery_trial(dims: DimensionSpec, ensemble, kind: Planted | str, trials: int = 100,
                   seed: int = DEFAULT_SEED, tol: float = MARGIN_TOL, workers: int | None = None) -> RecoveryReport:
    """Plant ``x0``, observe ``b = A x0``, certify uniqueness and try to recover ``x0`` by LP."""
    kind = Planted(kind)
    spec = _spec_for(ensemble, dims.n, dims.N, seed)
    workers = default_workers() if workers is None else workers
    jobs = [(dims, spec, kind, seed, a, b, tol) for a, b in _chunks(trials, max(1, workers) * 4 if workers > 1 else 1)]
    s, c, f, v = (int(x) for x in np.array(_map(_recovery_chunk, jobs, workers)).sum(axis=0))
    return RecoveryReport(dims, spec, kind, trials, s, c, f, v)


def write_recovery_csv(reports, path, comments=()) -> None:
    _write_csv(path, RECOVERY_COLUMNS, [r.row() for r in reports], comments)


def _write_csv(path, columns, rows, comments=()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
