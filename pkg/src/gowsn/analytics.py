"""Closed-form density, connectivity and coverage quantities.

Density is the expected neighbor count ``N*pi*R^2/A``. The connectivity
probability ``(1 - exp(-density))**N`` is the chance that no node is isolated.
A test point's coverage count is Binomial(N-1, P_R) with ``P_R = pi*R^2/L^2``,
and its Poisson limit has rate ``(N-1)*P_R``.

Probability mass functions are evaluated in log space with the saddle-point
form (Stirling error plus deviance terms). This keeps relative error near
machine precision for N in the thousands, where ``lgamma`` differences lose
about three digits to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gowsn.errors import (
    DiscExceedsField,
    InvalidParams,
    NegativeMass,
    NonSquareField,
    NoSolutionWithinBound,
    NOutOfRange,
)
from gowsn.field_model import FieldSpec

_LN_2PI = math.log(2.0 * math.pi)

# stirlerr(n) = lgamma(n+1) - (n+1/2)ln(n) + n - ln(sqrt(2 pi)), exact for n = 1..15
_STIRLERR_SMALL = (
    0.0,
    0.08106146679532725822,
    0.041340695955409294094,
    0.027677925684998339149,
    0.020790672103765093112,
    0.016644691189821192163,
    0.013876128823070747999,
    0.011896709945891770095,
    0.010411265261972096497,
    0.0092554621827127329177,
    0.0083305634333628712565,
    0.007573675487951840795,
    0.0069428401072095298657,
    0.0064089941880042070684,
    0.0059513701127588477356,
    0.005554733551962801371,
)


def _stirlerr(n: int) -> float:
    if n <= 15:
        return _STIRLERR_SMALL[n]
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    nn = float(n) * n
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, mean: float) -> float:
    """Deviance term x*ln(x/mean) + mean - x, series-evaluated near x == mean."""
    if abs(x - mean) < 0.1 * (x + mean):
        v = (x - mean) / (x + mean)
        s = (x - mean) * v
        ej = 2 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / mean) + mean - x


def _log1mexp(a: float) -> float:
    """ln(1 - exp(-a)) for a > 0."""
    if a <= math.log(2.0):
        return math.log(-math.expm1(-a))
    return math.log1p(-math.exp(-a))


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class DensityParams:
    n_nodes: int
    range_m: float
    area_m2: float

    def __post_init__(self):
        if self.n_nodes < 0:
            raise InvalidParams(f"n_nodes must be non-negative, got {self.n_nodes}")
        if not self.range_m > 0:
            raise InvalidParams(f"range_m must be positive, got {self.range_m}")
        if not self.area_m2 > 0:
            raise InvalidParams(f"area_m2 must be positive, got {self.area_m2}")

    @classmethod
    def for_field(cls, field: FieldSpec, n_nodes: int) -> DensityParams:
        return cls(n_nodes, field.range_m, field.area())


def density(params: DensityParams) -> float:
    return params.n_nodes * math.pi * params.range_m**2 / params.area_m2


def connectivity_probability(lam: float, n_nodes: int) -> float:
    """Probability that none of ``n_nodes`` nodes is isolated at density ``lam``."""
    if not lam >= 0 or not math.isfinite(lam):
        raise InvalidParams(f"lambda must be a finite non-negative number, got {lam!r}")
    if n_nodes < 1:
        raise InvalidParams(f"n_nodes must be >= 1, got {n_nodes}")
    if lam == 0:
        return 0.0
    return _clamp01(math.exp(n_nodes * _log1mexp(lam)))


def p_r(range_m: float, side_m: float) -> float:
    """Chance that a uniform point falls in one node's disc on an L x L field."""
    if not range_m > 0 or not side_m > 0:
        raise InvalidParams(f"range_m and side_m must be positive, got {range_m}, {side_m}")
    value = math.pi * range_m**2 / side_m**2
    if value >= 1.0:
        raise DiscExceedsField(f"pi*R^2 = {math.pi * range_m**2:g} is not below L^2 = {side_m**2:g}")
    return value


def p_r_for_field(field: FieldSpec) -> float:
    if not field.is_square:
        raise NonSquareField(f"field is {field.length_m} x {field.width_m}; P_R needs a square field")
    return p_r(field.range_m, field.length_m)


@dataclass(frozen=True)
class CoverageModel:
    """Coverage count of a uniform test point against N-1 other nodes."""

    n_nodes: int
    range_m: float
    side_m: float
    p_r: float
    lambda_s: float

    def __post_init__(self):
        if self.n_nodes < 1:
            raise InvalidParams(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not 0 < self.p_r < 1:
            raise InvalidParams(f"p_r must lie in (0, 1), got {self.p_r}")
        expected = math.pi * self.range_m**2 / self.side_m**2
        if not math.isclose(self.p_r, expected, rel_tol=1e-12):
            raise InvalidParams("p_r does not match pi*R^2/L^2")
        if not math.isclose(self.lambda_s, (self.n_nodes - 1) * self.p_r, rel_tol=1e-15, abs_tol=0):
            raise InvalidParams("lambda_s must equal (n_nodes - 1) * p_r")

    @classmethod
    def build(cls, n_nodes: int, range_m: float, side_m: float) -> CoverageModel:
        pr = p_r(range_m, side_m)
        return cls(n_nodes, range_m, side_m, pr, (n_nodes - 1) * pr)

    @classmethod
    def for_field(cls, field: FieldSpec, n_nodes: int) -> CoverageModel:
        p_r_for_field(field)
        return cls.build(n_nodes, field.range_m, field.length_m)

    @classmethod
    def from_p_r(cls, n_nodes: int, pr: float) -> CoverageModel:
        """Model on a unit square with the disc radius chosen to give ``pr``."""
        if not 0 < pr < 1:
            raise InvalidParams(f"p_r must lie in (0, 1), got {pr}")
        return cls(n_nodes, math.sqrt(pr / math.pi), 1.0, pr, (n_nodes - 1) * pr)

    @property
    def trials(self) -> int:
        return self.n_nodes - 1


def _binomial_pmf(x: int, n: int, p: float) -> float:
    q = 1.0 - p
    if x == 0:
        if n == 0:
            return 1.0
        return math.exp(n * math.log1p(-p))
    if x == n:
        return math.exp(n * math.log(p))
    lc = _stirlerr(n) - _stirlerr(x) - _stirlerr(n - x) - _bd0(x, n * p) - _bd0(n - x, n * q)
    lf = _LN_2PI + math.log(x) + math.log1p(-x / n)
    return math.exp(lc - 0.5 * lf)


def coverage_binomial(n: int, model: CoverageModel) -> float:
    """P(a uniform test point lies within range of exactly ``n`` of the N-1 other nodes)."""
    if not 0 <= n <= model.trials:
        raise NOutOfRange(f"n must lie in [0, {model.trials}], got {n}")
    return _clamp01(_binomial_pmf(n, model.trials, model.p_r))


def coverage_poisson(n: int, lambda_s: float) -> float:
    if n < 0:
        raise InvalidParams(f"n must be non-negative, got {n}")
    if not lambda_s >= 0 or not math.isfinite(lambda_s):
        raise InvalidParams(f"lambda_s must be finite and non-negative, got {lambda_s!r}")
    if lambda_s == 0:
        return 1.0 if n == 0 else 0.0
    if n == 0:
        return math.exp(-lambda_s)
    return _clamp01(math.exp(-_stirlerr(n) - _bd0(n, lambda_s)) / math.sqrt(2 * math.pi * n))


def binomial_pmf(model: CoverageModel) -> np.ndarray:
    """Whole coverage distribution, index n = 0..N-1."""
    return np.array([coverage_binomial(n, model) for n in range(model.n_nodes)])


def poisson_truncation(lambda_s: float) -> int:
    return math.ceil(lambda_s + 12 * math.sqrt(lambda_s + 1))


def poisson_pmf(lambda_s: float, k_max: int | None = None) -> np.ndarray:
    if k_max is None:
        k_max = poisson_truncation(lambda_s)
    return np.array([coverage_poisson(n, lambda_s) for n in range(k_max + 1)])


def tv_distance(dist_a: Sequence[float], dist_b: Sequence[float]) -> float:
    a = np.asarray(dist_a, dtype=float).ravel()
    b = np.asarray(dist_b, dtype=float).ravel()
    if (a < 0).any() or (b < 0).any():
        raise NegativeMass("distributions must be non-negative")
    size = max(len(a), len(b))
    a = np.pad(a, (0, size - len(a)))
    b = np.pad(b, (0, size - len(b)))
    return _clamp01(0.5 * math.fsum(np.abs(a - b)))


def shaping(n_nodes: int, range_m: float, side_m: float) -> float:
    """Probability that a test point is covered by at least one node: 1 - exp(-lambda_s).

    Rises with N and tends to 1. This is our reading of the shaping curve;
    pass a different function to :func:`shaping_curve` for alternatives.
    """
    model = CoverageModel.build(n_nodes, range_m, side_m)
    return -math.expm1(-model.lambda_s)


def shaping_curve(n_values, range_m: float, side_m: float, form=shaping) -> list[float]:
    return [form(n, range_m, side_m) for n in n_values]


RULE_KINDS = ("paper_literal", "error_complement")


@dataclass(frozen=True)
class StoppingRule:
    """When the placement loop may stop.

    ``paper_literal`` stops once p >= value. ``error_complement`` treats value
    as a tolerable error and stops once p >= 1 - value.
    """

    kind: str = "error_complement"
    value: float = 0.1

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise InvalidParams(f"stopping rule must be one of {RULE_KINDS}, got {self.kind!r}")
        if not 0 < self.value < 1:
            raise InvalidParams(f"threshold must lie strictly between 0 and 1, got {self.value}")

    @classmethod
    def paper_literal(cls, threshold: float) -> StoppingRule:
        return cls("paper_literal", threshold)

    @classmethod
    def error_complement(cls, epsilon: float) -> StoppingRule:
        return cls("error_complement", epsilon)

    @property
    def target(self) -> float:
        return self.value if self.kind == "paper_literal" else 1.0 - self.value

    def satisfied(self, p: float) -> bool:
        return p >= self.target


def loop_state(field: FieldSpec, n_nodes: int) -> tuple[float, float]:
    """(density, connectivity probability) for N nodes in the field."""
    lam = density(DensityParams.for_field(field, n_nodes))
    return lam, connectivity_probability(lam, n_nodes)


def default_cap(field: FieldSpec) -> int:
    return math.ceil(10 * field.area() / (math.pi * field.range_m**2))


def stopping_n(field: FieldSpec, rule: StoppingRule, cap: int | None = None) -> int:
    """Smallest N whose connectivity probability meets ``rule``.

    p(N) dips before it rises, so this scans upward from N = 1.
    """
    cap = default_cap(field) if cap is None else cap
    for n in range(1, cap + 1):
        if rule.satisfied(loop_state(field, n)[1]):
            return n
    raise NoSolutionWithinBound(f"no N <= {cap} satisfies {rule}")
