"""Random and deterministic matrix families.

Every random draw comes from a Philox stream keyed by ``(seed, trial_index)``
so a trial can be regenerated on its own, in any order, in any process.
"""
from __future__ import annotations

import csv
import enum
import itertools
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

GP_TOL = 1e-10
CENSOR_RETRIES = 64
GP_SUBSET_BUDGET = 20_000

_MASK64 = (1 << 64) - 1


class Kind(str, enum.Enum):
    GAUSSIAN = "GaussianIID"
    UNIFORM = "UniformIID"
    RADEMACHER_CENSORED = "RademacherCensored"
    TERNARY = "TernaryIID"
    ORTHOPROJECTOR = "Orthoprojector"
    SIGN = "SignEnsemble"
    PARTIAL_FOURIER = "PartialFourier"
    ADJOIN_ONES = "AdjoinOnes"


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class DimensionSpec:
    k: int
    n: int
    N: int

    def __post_init__(self):
        if not (0 <= self.k <= self.n < self.N):
            raise ValueError(f"need 0 <= k <= n < N, got (k, n, N) = ({self.k}, {self.n}, {self.N})")


@dataclass(frozen=True)
class EnsembleSpec:
    """A named ensemble of ``rows x cols`` matrices.

    ``inner`` is the wrapped spec for ``AdjoinOnes`` (with ``rows - 1`` rows)
    and the generator spec for ``SignEnsemble`` (same shape; its trial-0
    draw is the fixed generator whose columns get random signs).
    """

    kind: Kind
    rows: int
    cols: int
    seed: int = 0x5EED
    inner: Optional["EnsembleSpec"] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not 0 <= self.seed <= _MASK64:
            raise EnsembleError("seed must be a 64-bit unsigned integer")
        if self.rows < 0 or self.rows >= self.cols:
            raise EnsembleError(f"need rows < cols, got {self.rows} x {self.cols}")
        if self.kind is Kind.PARTIAL_FOURIER and self.rows % 2 == 0:
            raise EnsembleError("PartialFourier needs an odd row count")
        if self.kind is Kind.ADJOIN_ONES:
            if self.inner is None or self.inner.rows != self.rows - 1 or self.inner.cols != self.cols:
                raise EnsembleError("AdjoinOnes wraps an inner spec with rows - 1 rows")
        if self.kind is Kind.SIGN:
            if self.inner is None or (self.inner.rows, self.inner.cols) != (self.rows, self.cols):
                raise EnsembleError("SignEnsemble needs a generator spec of the same shape")

    def with_seed(self, seed: int) -> "EnsembleSpec":
        inner = self.inner.with_seed(seed) if self.inner is not None and self.kind is Kind.ADJOIN_ONES else self.inner
        return replace(self, seed=seed, inner=inner)

    @property
    def label(self) -> str:
        if self.kind is Kind.ADJOIN_ONES:
            return f"AdjoinOnes({self.inner.label})"
        if self.kind is Kind.SIGN:
            return f"SignEnsemble({self.inner.label})"
        return self.kind.value

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "rows": self.rows, "cols": self.cols, "seed": self.seed}
        if self.inner is not None:
            d["inner"] = self.inner.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        inner = d.get("inner")
        return cls(Kind(d["kind"]), int(d["rows"]), int(d["cols"]), int(d.get("seed", 0x5EED)),
                   cls.from_dict(inner) if inner is not None else None)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EnsembleSpec":
        return cls.from_dict(json.loads(text))


def make_spec(kind: str, rows: int, cols: int, seed: int = 0x5EED) -> EnsembleSpec:
    """Convenience constructor that fills in ``inner`` for the wrapper kinds."""
    kind = Kind(kind)
    if kind is Kind.ADJOIN_ONES:
        return EnsembleSpec(kind, rows, cols, seed, EnsembleSpec(Kind.GAUSSIAN, rows - 1, cols, seed))
    if kind is Kind.SIGN:
        return EnsembleSpec(kind, rows, cols, seed, EnsembleSpec(Kind.GAUSSIAN, rows, cols, seed ^ 0xB0))
    return EnsembleSpec(kind, rows, cols, seed)


# per-kind stream ids keep different ensembles with one seed independent
_KIND_STREAM = {kind: 0x10 + i for i, kind in enumerate(Kind)}


def trial_rng(seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one trial; ``stream`` separates independent uses."""
    if trial_index < 0:
        raise ValueError("trial_index must be >= 0")
    bits = np.random.Philox(key=[seed & _MASK64, trial_index & _MASK64],
                            counter=[0, 0, 0, stream & _MASK64])
    return np.random.Generator(bits)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def sample_matrix(spec: EnsembleSpec, trial_index: int) -> np.ndarray:
    """Draw trial ``trial_index`` of ``spec`` as a read-only ``rows x cols`` array."""
    rng = trial_rng(spec.seed, trial_index, stream=_KIND_STREAM[spec.kind])
    n, N = spec.rows, spec.cols
    kind = spec.kind
    if kind is Kind.GAUSSIAN:
        A = rng.standard_normal((n, N))
    elif kind is Kind.UNIFORM:
        A = rng.uniform(-1.0, 1.0, (n, N))
    elif kind is Kind.TERNARY:
        A = rng.integers(-1, 2, (n, N)).astype(float)
    elif kind is Kind.RADEMACHER_CENSORED:
        for _ in range(CENSOR_RETRIES):
            A = rng.choice([-1.0, 1.0], size=(n, N))
            if check_general_position(A):
                break
        else:
            raise EnsembleError(
                f"censoring gave up after {CENSOR_RETRIES} redraws at {n} x {N}; spec is degenerate")
    elif kind is Kind.ORTHOPROJECTOR:
        A = _haar_rows(rng.standard_normal((N, n)))
    elif kind is Kind.SIGN:
        B0 = sample_matrix(spec.inner, 0)
        A = B0 * rng.choice([-1.0, 1.0], size=N)
    elif kind is Kind.PARTIAL_FOURIER:
        A = build_partial_fourier(n, N)
    elif kind is Kind.ADJOIN_ONES:
        A = adjoin_ones(sample_matrix(spec.inner, trial_index))
    else:  # pragma: no cover
        raise EnsembleError(f"unknown ensemble kind {kind!r}")
    return _frozen(A)


def _haar_rows(G: np.ndarray) -> np.ndarray:
    # sign fix on R's diagonal makes Q Haar-distributed
    Q, R = np.linalg.qr(G)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return (Q * d).T


def build_partial_fourier(n: int, N: int) -> np.ndarray:
    """Low-frequency partial Fourier matrix; row 0 is all ones.

    Rows alternate cosine/sine at angles ``pi*j*i/N`` (0-based ``i``, ``j``
    with the sine rows using ``i+1``), so row pairs share the frequencies
    ``2*pi*l*j/N`` for ``l = 1..(n-1)/2``.
    """
    if n % 2 == 0:
        raise EnsembleError("partial Fourier matrix needs odd n")
    if not 0 < n < N:
        raise EnsembleError("need 0 < n < N")
    j = np.arange(N)
    rows = []
    for i in range(1, n + 1):
        if i % 2:
            rows.append(np.cos(np.pi * j * (i - 1) / N))
        else:
            rows.append(np.sin(np.pi * j * i / N))
    return _frozen(np.array(rows))


def adjoin_ones(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(0, A.size) if A.size == 0 else A[None, :]
    return _frozen(np.vstack([np.ones((1, A.shape[1])), A]))


class GeneralPosition:
    """Outcome of a general-position check; truthy iff every tested minor passed."""

    __slots__ = ("ok", "sampled", "checked", "worst")

    def __init__(self, ok: bool, sampled: bool, checked: int, worst: float):
        self.ok, self.sampled, self.checked, self.worst = bool(ok), sampled, checked, float(worst)

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return f"GeneralPosition(ok={self.ok}, sampled={self.sampled}, checked={self.checked}, worst={self.worst:.3g})"


def check_general_position(A, tol: float = GP_TOL, budget: int = GP_SUBSET_BUDGET,
                           seed: int = 0x5EED) -> GeneralPosition:
    """Every ``n x n`` column submatrix of ``A`` well conditioned relative to ``A``.

    Beyond ``budget`` subsets a fixed-seed sample of ``budget`` subsets is
    tested instead and the result is marked ``sampled``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n, N = A.shape
    if n == 0:
        return GeneralPosition(True, False, 0, math.inf)
    scale = np.linalg.norm(A, 2)
    if scale == 0:
        return GeneralPosition(False, False, 0, 0.0)
    total = math.comb(N, n)
    if total <= budget:
        subsets = np.array(list(itertools.combinations(range(N), n)), dtype=np.intp)
        sampled = False
    else:
        rng = np.random.Generator(np.random.Philox(key=[seed, 0x6E6572]))
        subsets = np.sort(np.argsort(rng.random((budget, N)), axis=1)[:, :n], axis=1)
        sampled = True
    worst = math.inf
    for chunk in np.array_split(subsets, max(1, len(subsets) // 4096)):
        sub = A[:, chunk].transpose(1, 0, 2)  # (batch, n, n)
        smin = np.linalg.svd(sub, compute_uv=False)[:, -1]
        worst = min(worst, float(smin.min()) / scale)
        if worst <= tol:
            break
    return GeneralPosition(worst > tol, sampled, len(subsets), worst)


def write_matrix_csv(A, path) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in A:
            w.writerow([f"{v:.17g}" for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[float(v) for v in r] for r in csv.reader(fh) if r]
    return _frozen(np.array(rows))
