"""Face-survival oracle for projected orthants, hypercubes and simplices.

A face with free coordinates ``S`` survives the projection ``A`` exactly when
no nonzero null-space vector ``B.T @ c`` is a feasible direction at the face.
For the orthant that means the rows ``beta_i`` (``i`` outside ``S``) of
``B.T`` do not all lie in one closed halfspace, which is decided here with a
pair of small LPs: the max-margin primal certifies an open halfspace (lost),
the dual certifies that the rows positively span (survives).
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .ensembles import build_partial_fourier, trial_rng
from .probcalc import Shape

MARGIN_TOL = 1e-8
RESIDUAL_TOL = 1e-9
RANK_TOL = 1e-10
SPAN_TOL = 1e-9
FACE_BUDGET = 1_000_000


class Status(str, enum.Enum):
    SURVIVES = "Survives"
    LOST = "Lost"
    INDETERMINATE = "Indeterminate"


class RankDeficient(ValueError):
    """``A`` lacks full row rank; the draw is degenerate."""


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class NullBasis:
    """Orthonormal rows spanning the null space of an ``n x N`` matrix."""

    B: np.ndarray
    residual: float = 0.0
    rank_certified: bool = True

    @property
    def N(self) -> int:
        return self.B.shape[1]

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    @classmethod
    def from_rows(cls, B) -> "NullBasis":
        """Wrap a hand-built basis (rows need not be orthonormal)."""
        B = np.atleast_2d(np.asarray(B, dtype=float))
        s = np.linalg.svd(B, compute_uv=False)
        ok = bool(s.size and s[-1] > RANK_TOL * s[0])
        return cls(B, 0.0, ok)


def nullspace_basis(A) -> NullBasis:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n, N = A.shape
    if n == 0:
        return NullBasis(np.eye(N), 0.0, True)
    if n >= N:
        raise RankDeficient(f"{n} x {N} matrix has a trivial null space")
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankDeficient(f"rank deficient: sigma_min/sigma_max = {s[-1] / s[0]:.3g}")
    B = Vt[n:].copy()
    residual = float(np.abs(A @ B.T).max() / s[0])
    if residual > RESIDUAL_TOL:
        raise RankDeficient(f"null basis residual {residual:.3g}")
    B.setflags(write=False)
    return NullBasis(B, residual, True)


@dataclass(frozen=True)
class FaceSpec:
    """A face of the orthant, hypercube or simplex, by 0-based coordinate indices.

    ``support`` holds the free coordinates. For the hypercube, ``upper`` lists
    the pinned coordinates sitting at 1; the rest of the complement sits at 0.
    """

    shape: Shape
    support: tuple[int, ...] = ()
    upper: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        object.__setattr__(self, "support", tuple(sorted(int(i) for i in self.support)))
        object.__setattr__(self, "upper", tuple(sorted(int(i) for i in self.upper)))
        if len(set(self.support)) != len(self.support) or len(set(self.upper)) != len(self.upper):
            raise ValueError("repeated index in face")
        if set(self.support) & set(self.upper):
            raise ValueError("support and upper set overlap")
        if self.upper and self.shape is not Shape.HYPERCUBE:
            raise ValueError("only hypercube faces have pinned-at-one coordinates")

    @property
    def k(self) -> int:
        return len(self.support)

    def to_json(self) -> str:
        return json.dumps({"shape": self.shape.value, "support": list(self.support), "upper": list(self.upper)})

    @classmethod
    def from_json(cls, text: str) -> "FaceSpec":
        d = json.loads(text)
        return cls(Shape(d["shape"]), tuple(d.get("support", ())), tuple(d.get("upper", ())))


@dataclass(frozen=True)
class SurvivalVerdict:
    status: Status
    margin: float
    witness: np.ndarray | None = field(default=None, compare=False)

    @property
    def survives(self) -> bool:
        return self.status is Status.SURVIVES


def max_margin_direction(points, equalities=None, tol: float = MARGIN_TOL) -> tuple[float, np.ndarray]:
    """Signed margin of the best common halfspace for ``points``.

    Solves ``max t`` s.t. ``p @ c >= t`` for every point, ``g @ c = 0`` for
    every equality vector, ``|c|_inf <= 1``. A positive optimum certifies an
    open halfspace and is returned with its direction. Since ``c = 0`` is
    feasible that optimum is never negative, so when it is not above ``tol``
    the dual is solved: the largest ``s`` with weights ``lam >= s``,
    ``sum(lam) = 1`` and ``sum(lam_i p_i)`` in the span of the equality
    vectors. If that ``s`` exceeds ``tol`` and the points (projected onto the
    equality-free subspace) span it, no nonzero ``c`` keeps every point on
    its nonnegative side, and ``-s`` is returned. Otherwise the primal
    optimum (about 0) comes back.

    Raises ``lp.LPFailure`` if either LP breaks down numerically.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    M, m = P.shape
    if m < 1 or M < 1:
        raise ValueError("need at least one point in dimension >= 1")
    Geq = np.zeros((0, m)) if equalities is None else np.asarray(equalities, dtype=float).reshape(-1, m)

    prog = lp.LinearProgram(
        np.r_[np.zeros(m), 1.0],
        ineq_lhs=np.hstack([P, -np.ones((M, 1))]), ineq_rhs=np.zeros(M),
        eq_lhs=np.hstack([Geq, np.zeros((Geq.shape[0], 1))]) if Geq.size else None,
        eq_rhs=np.zeros(Geq.shape[0]) if Geq.size else None,
        lower=np.r_[-np.ones(m), -np.inf], upper=np.r_[np.ones(m), np.inf])
    sol = lp.solve(prog)
    if not sol.ok:
        raise lp.LPFailure(f"max-margin LP: {sol.status.value}")
    t_star, c = sol.objective_value, sol.x[:m]
    if t_star > tol:
        return t_star, c

    q = Geq.shape[0]
    nv = M + q + 1
    ineq = np.zeros((M, nv))
    ineq[:, :M] = np.eye(M)
    ineq[:, -1] = -1.0
    eq = np.zeros((m + 1, nv))
    eq[:m, :M] = P.T
    eq[:m, M:M + q] = -Geq.T
    eq[m, :M] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    dual = lp.solve(lp.LinearProgram(
        np.r_[np.zeros(M + q), 1.0], ineq_lhs=ineq, ineq_rhs=np.zeros(M), eq_lhs=eq, eq_rhs=rhs,
        lower=np.r_[np.zeros(M), np.full(q + 1, -np.inf)], upper=np.inf))
    if dual.status is lp.Status.INFEASIBLE:
        return t_star, c
    if not dual.ok:
        raise lp.LPFailure(f"dual margin LP: {dual.status.value}")
    s_star = dual.objective_value
    if s_star > tol and _spans_free_subspace(P, Geq):
        return -s_star, c
    return t_star, c


def _spans_free_subspace(P: np.ndarray, Geq: np.ndarray) -> bool:
    m = P.shape[1]
    if Geq.size:
        _, s, Vt = np.linalg.svd(Geq, full_matrices=True)
        r = int(np.sum(s > SPAN_TOL * max(1.0, s[0])))
        V = Vt[r:].T
    else:
        V = np.eye(m)
    if V.shape[1] == 0:
        return True
    s = np.linalg.svd(P @ V, compute_uv=False)
    return s.size >= V.shape[1] and s[V.shape[1] - 1] > SPAN_TOL * max(s[0], 1e-300)


def constraint_rows(B: NullBasis, face: FaceSpec) -> tuple[np.ndarray, np.ndarray | None]:
    """Rows ``beta_i`` (signed) that must be nonnegative, plus any equality vector."""
    N = B.N
    if face.support and (face.support[0] < 0 or face.support[-1] >= N):
        raise ValueError("face index out of range")
    if face.upper and (face.upper[0] < 0 or face.upper[-1] >= N):
        raise ValueError("face index out of range")
    beta = B.B.T
    mask = np.ones(N, dtype=bool)
    mask[list(face.support)] = False
    signs = np.ones(N)
    if face.upper:
        signs[list(face.upper)] = -1.0
    rows = (beta * signs[:, None])[mask]
    eq = None
    if face.shape is Shape.SIMPLEX:
        g = beta.sum(axis=0)
        if np.abs(g).max() > 1e-12 * math.sqrt(N):
            eq = g[None, :]
    return rows, eq


def face_survives(B: NullBasis, face: FaceSpec, tol: float = MARGIN_TOL) -> SurvivalVerdict:
    rows, eq = constraint_rows(B, face)
    if rows.shape[0] == 0:
        # every null direction is feasible
        return SurvivalVerdict(Status.LOST, math.inf, np.eye(B.dim)[0])
    try:
        t_star, c = max_margin_direction(rows, eq, tol)
    except lp.LPFailure:
        return SurvivalVerdict(Status.INDETERMINATE, float("nan"))
    if t_star > tol:
        return SurvivalVerdict(Status.LOST, t_star, c)
    if t_star < -tol:
        return SurvivalVerdict(Status.SURVIVES, t_star)
    return SurvivalVerdict(Status.INDETERMINATE, t_star)


def lost_vertex(B: NullBasis) -> FaceSpec:
    """Hypercube vertex that a nonzero null vector moves into the cube's interior.

    With ``w`` the first basis row, coordinates where ``w > 0`` sit at 0 and
    the rest (ties included) at 1, so ``w`` is a feasible direction there.
    """
    w = B.B[0]
    if np.abs(w).max() <= RANK_TOL:
        raise ValueError("first null-basis row is numerically zero")
    return FaceSpec(Shape.HYPERCUBE, (), tuple(np.flatnonzero(w <= 0).tolist()))


def face_count(shape: Shape | str, N: int, k: int) -> int:
    """Number of faces enumerated for ``(shape, k)``; simplex ``k`` counts vertices of the face."""
    shape = Shape(shape)
    if shape is Shape.HYPERCUBE:
        return math.comb(N, k) * 2 ** (N - k)
    return math.comb(N, k)


def iter_faces(shape: Shape | str, N: int, k: int):
    shape = Shape(shape)
    for S in itertools.combinations(range(N), k):
        if shape is not Shape.HYPERCUBE:
            yield FaceSpec(shape, S)
            continue
        rest = [i for i in range(N) if i not in S]
        for r in range(len(rest) + 1):
            for O in itertools.combinations(rest, r):
                yield FaceSpec(shape, S, O)


def count_faces_exhaustive(B: NullBasis, shape: Shape | str, k: int, tol: float = MARGIN_TOL,
                           budget: int = FACE_BUDGET) -> tuple[int, int, int]:
    """Test every ``k``-face; returns ``(survived, total, indeterminate)``.

    For the simplex, ``k`` is the number of vertices spanning the face
    (a ``(k-1)``-face). A projected hypercube is centrally symmetric, so a
    face and its mirror (every pinned coordinate flipped) share a verdict;
    only the half with the first pinned coordinate at 0 is tested.
    """
    shape = Shape(shape)
    total = face_count(shape, B.N, k)
    if total > budget:
        raise BudgetExceeded(f"{total} faces exceeds the budget of {budget}")
    mirror = shape is Shape.HYPERCUBE and k < B.N
    survived = indeterminate = 0
    for face in iter_faces(shape, B.N, k):
        weight = 1
        if mirror:
            first_pinned = next(i for i in range(B.N) if i not in face.support)
            if first_pinned in face.upper:
                continue
            weight = 2
        status = face_survives(B, face, tol).status
        if status is Status.SURVIVES:
            survived += weight
        elif status is Status.INDETERMINATE:
            indeterminate += weight
    return survived, total, indeterminate


def highpass_negativity_check(n: int, N: int, samples: int = 1000, seed: int = 0x5EED,
                              zero_tol: float = 1e-12) -> bool:
    """Random null vectors of the partial Fourier matrix have >= (n-1)/2 negative entries.

    Entries within ``zero_tol`` of zero count as nonnegative.
    """
    m = (n - 1) // 2
    if m == 0:
        return True
    B = nullspace_basis(build_partial_fourier(n, N)).B
    rng = trial_rng(seed, 0, stream=0x48)
    V = rng.standard_normal((samples, B.shape[0])) @ B
    return bool(np.all(np.sum(V < -zero_tol, axis=1) >= m))
