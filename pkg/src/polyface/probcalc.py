"""Wendel probabilities, entropy exponents and threshold curves."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .ensembles import DimensionSpec

EXACT_LIMIT = 10_000
LOG2 = math.log(2.0)


class Shape(str, enum.Enum):
    ORTHANT = "Orthant"
    HYPERCUBE = "Hypercube"
    SIMPLEX = "Simplex"


class Regime(str, enum.Enum):
    LOWER_TAIL = "LowerTail"
    MIDDLE = "Middle"
    UPPER_TAIL = "UpperTail"


@dataclass(frozen=True)
class PhaseParams:
    delta: float
    rho: float

    def __post_init__(self):
        if not (0 < self.delta < 1 and 0 < self.rho < 1):
            raise ValueError(f"need delta, rho in (0, 1), got ({self.delta}, {self.rho})")


@dataclass(frozen=True)
class WendelProb:
    """``P_{m,M}``: chance that ``M`` symmetric points in ``R^m`` share a halfspace.

    ``value_exact`` is ``None`` when ``M`` exceeds the exact-arithmetic limit.
    """

    m: int
    M: int
    value_exact: Fraction | None
    value_log: float

    @property
    def value(self) -> float:
        if self.value_exact is not None:
            return float(self.value_exact)
        return math.exp(self.value_log)


@lru_cache(maxsize=4096)
def _binomial_row_prefix(m: int, M: int) -> int:
    return sum(math.comb(M - 1, l) for l in range(min(m, M)))


def _fraction_log(q: Fraction) -> float:
    if q == 0:
        return -math.inf
    return math.log(q.numerator) - math.log(q.denominator)


def _log_int(x: int) -> float:
    shift = max(0, x.bit_length() - 960)
    return math.log(x >> shift) + shift * LOG2


def _log_prefix(m: int, M: int) -> float:
    # log of 2^{-(M-1)} sum_{l<m} C(M-1, l) for 1 <= m <= ceil(M/2): the top term
    # C(M-1, m-1) is the largest and is taken exactly, the rest by term ratios
    top = m - 1
    r = np.empty(m)
    r[top] = 1.0
    for l in range(top, 0, -1):
        r[l - 1] = r[l] * l / (M - l)
    return _log_int(math.comb(M - 1, top)) + math.log(math.fsum(r.tolist())) - (M - 1) * LOG2


def wendel_log(m: int, M: int) -> float:
    """Natural log of ``P_{m,M}`` in floating point.

    Past the middle of the binomial row the complement ``1 - P_{M-m,M}`` is
    used so the summed terms always decrease away from the largest one.
    """
    if m < 0 or M < 1:
        raise ValueError("need m >= 0 and M >= 1")
    if m >= M:
        return 0.0
    if m == 0:
        return -math.inf
    if 2 * m <= M:
        return _log_prefix(m, M)
    return math.log1p(-math.exp(_log_prefix(M - m, M)))


def wendel_probability(m: int, M: int) -> WendelProb:
    if m < 0 or M < 1:
        raise ValueError("need m >= 0 and M >= 1")
    if m >= M:
        return WendelProb(m, M, Fraction(1), 0.0)
    if M > EXACT_LIMIT:
        return WendelProb(m, M, None, wendel_log(m, M))
    q = Fraction(_binomial_row_prefix(m, M), 1 << (M - 1))
    return WendelProb(m, M, q, _fraction_log(q))


def binomial_symmetry_check(m: int, M: int) -> bool:
    """``P_{m,M} + P_{M-m,M} == 1`` in exact rational arithmetic."""
    if not 0 <= m <= M:
        raise ValueError("need 0 <= m <= M")
    return wendel_probability(m, M).value_exact + wendel_probability(M - m, M).value_exact == 1


def expected_face_ratio(dims: DimensionSpec, shape: Shape | str = Shape.ORTHANT) -> Fraction:
    """Expected fraction of ``k``-faces that survive projection: ``1 - P_{N-n, N-k}``.

    The same value holds for orthant and hypercube faces.
    """
    shape = Shape(shape)
    if shape is Shape.SIMPLEX:
        raise ValueError("no exact face ratio for the simplex")
    p = wendel_probability(dims.N - dims.n, dims.N - dims.k)
    if p.value_exact is None:
        raise ValueError("exact ratio unavailable beyond N - k = %d" % EXACT_LIMIT)
    return 1 - p.value_exact


def shannon_entropy(gamma: float) -> float:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"entropy argument {gamma} outside [0, 1]")
    if gamma == 0.0 or gamma == 1.0:
        return 0.0
    return -gamma * math.log(gamma) - (1.0 - gamma) * math.log1p(-gamma)


def psi_weak(p: PhaseParams) -> float:
    d, r = p.delta, p.rho
    H = shannon_entropy
    return H(d) + d * H(r) - H(r * d) - (1.0 - r * d) * LOG2


def psi_strong(delta: float, rho: float) -> float:
    """Strong exponent; ``delta = 1`` and ``rho = 0`` are admitted as limits."""
    if not (0 < delta <= 1 and 0 <= rho < 1):
        raise ValueError(f"need delta in (0, 1] and rho in [0, 1), got ({delta}, {rho})")
    H = shannon_entropy
    return H(delta) + delta * H(rho) - (1.0 - rho * delta) * LOG2


def rho_weak(delta: float, shape: Shape | str = Shape.HYPERCUBE) -> float:
    if Shape(shape) is Shape.SIMPLEX:
        raise ValueError("simplex weak threshold is not computed here")
    if not 0 < delta < 1:
        raise ValueError("need 0 < delta < 1")
    return max(0.0, 2.0 - 1.0 / delta)


def rho_strong(delta: float, tol: float = 1e-12, scan_step: float = 1e-3) -> float:
    """Smallest zero of ``psi_strong(delta, .)`` on ``[0, 1)``.

    Linear scan for the first sign change, then bisection to ``tol``.
    """
    if not 0.5 <= delta <= 1.0:
        raise ValueError("strong threshold defined for 1/2 <= delta (< 1, or the delta = 1 limit)")
    f = lambda r: psi_strong(delta, r)
    if f(0.0) >= 0.0:
        return 0.0
    lo = 0.0
    r = scan_step
    while r < 1.0:
        if f(r) >= 0.0:
            hi = r
            break
        lo = r
        r += scan_step
    else:
        raise ArithmeticError(f"no sign change of the strong exponent at delta={delta}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def curve_area(curve: str = "WeakHypercube", quad_points: int = 200) -> float:
    """Area under the weak hypercube threshold over ``delta`` in (0, 1).

    The integrand vanishes on (0, 1/2]; the smooth part is done by
    Gauss-Legendre with ``quad_points`` nodes.
    """
    if curve != "WeakHypercube":
        raise ValueError(f"unknown curve {curve!r}")
    if quad_points < 100:
        raise ValueError("quad_points must be >= 100")
    x, w = np.polynomial.legendre.leggauss(quad_points)
    d = 0.75 + 0.25 * x
    vals = np.array([rho_weak(v) for v in d])
    return float(0.25 * np.dot(w, vals))


def regime_classify(dims: DimensionSpec) -> Regime:
    m, M = dims.N - dims.n, dims.N - dims.k
    half, width = M / 2.0, math.sqrt(M / 4.0)
    if m < half - width:
        return Regime.LOWER_TAIL
    if m > half + width:
        return Regime.UPPER_TAIL
    return Regime.MIDDLE


def lemma_bound(dims: DimensionSpec) -> float:
    """Large-deviation bound ``n^{3/2} exp(N psi_weak(n/N, k/n))`` on ``P_{N-n,N-k}``."""
    k, n, N = dims.k, dims.n, dims.N
    return n ** 1.5 * math.exp(N * psi_weak(PhaseParams(n / N, k / n)))


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"
