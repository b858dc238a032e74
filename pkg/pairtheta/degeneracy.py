"""degeneracy.py

Exact counts of degenerate pairs m != n with |m - alpha| = |n - alpha|.

For a fully rational alpha = p/q the integer key q^2 |m - alpha|^2 decides
equality. For a critical alpha whose first k - 2 coordinates span a number
field with 1, equality forces m_j = n_j on that block, so pairs are bucketed
by (m_1..m_{k-2}, key of the rational block). Counts are ordered pairs,
sum over buckets of size * (size - 1).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .defaults import Defaults
from .errors import DomainError, InsufficientDataError, ResourceBudgetError
from .spectrum import KEY_SNAP_TOL, enumerate_points, key_bound
from .torus import TorusSpec
from .types import FloatArray, IntArray, float64, int64

logger = logging.getLogger(__name__)


def rescaled_to_cutoff(X: float64, k: int64) -> float64:
    """Lambda with Lambda^(k/2) = X."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    return X ** (2.0 / k)


@dataclass(frozen=True)
class Buckets:
    """Equal-value classes sorted by value: representative lambda and size."""

    values: FloatArray
    sizes: IntArray
    keys: IntArray | None = None

    def ordered_pairs(self) -> IntArray:
        return self.sizes * (self.sizes - 1)


def _rational_buckets(spec: TorusSpec, cutoff: float64, **kwargs) -> Buckets:
    q = spec.denominator
    K = key_bound(cutoff, q)
    _, keys, _ = enumerate_points(spec, cutoff, **kwargs)
    if keys is None:
        raise ResourceBudgetError(f"exact keys for q={q} up to {cutoff} are not available")
    keys = keys[keys <= K]
    unique, sizes = np.unique(keys, return_counts=True)
    return Buckets(unique / float(q * q), sizes.astype(np.int64), unique)


def _critical_buckets(spec: TorusSpec, cutoff: float64, **kwargs) -> Buckets:
    exact = spec.exact_indices
    free = tuple(j for j in range(spec.k) if j not in exact)
    q = spec.denominator
    if q * q * cutoff * len(exact) >= kwargs.get("key_limit", Defaults.EXACT_KEY_LIMIT):
        raise ResourceBudgetError(f"block keys q^2 Lambda overflow at q={q}, Lambda={cutoff}")
    values, _, points = enumerate_points(spec, cutoff * (1.0 + KEY_SNAP_TOL), with_points=True,
                                         **kwargs)
    key = np.zeros(values.size, dtype=np.int64)
    for j, p in zip(exact, spec.numerators):
        t = q * points[:, j] - p
        key += t * t
    rows = np.column_stack([points[:, list(free)], key])
    unique, first, sizes = np.unique(rows, axis=0, return_index=True, return_counts=True)
    reps = values[first]
    keep = reps <= cutoff * (1.0 + KEY_SNAP_TOL)
    order = np.argsort(reps[keep], kind="stable")
    return Buckets(reps[keep][order], sizes[keep][order].astype(np.int64))


def equal_value_buckets(spec: TorusSpec, cutoff: float64, *,
                        memory_budget: int = Defaults.MEMORY_BUDGET,
                        key_limit: int = Defaults.EXACT_KEY_LIMIT,
                        workers: int = Defaults.WORKERS) -> Buckets:
    """Bucket the spectrum up to cutoff into exactly-equal value classes."""
    if not spec.exact_indices:
        raise DomainError("equal pairs need exact rational coordinates in alpha")
    kwargs = dict(memory_budget=memory_budget, key_limit=key_limit, workers=workers)
    if spec.is_rational:
        buckets = _rational_buckets(spec, cutoff, **kwargs)
    else:
        buckets = _critical_buckets(spec, cutoff, **kwargs)
    logger.debug("%d equal-value classes up to lambda=%g", buckets.sizes.size, cutoff)
    return buckets


def count_equal_pairs(spec: TorusSpec, X: float64, **kwargs) -> int64:
    """#{(m, n) ordered, m != n, equal values, |m - alpha|^k <= X}"""
    buckets = equal_value_buckets(spec, rescaled_to_cutoff(X, spec.k), **kwargs)
    return int(np.sum(buckets.ordered_pairs()))


def count_equal_pairs_in(spec: TorusSpec, lo: float64, hi: float64, **kwargs) -> int64:
    """Equal ordered pairs whose common rescaled value lies in [lo, hi]."""
    if not 0 <= lo <= hi:
        raise DomainError(f"need 0 <= lo <= hi, got [{lo}, {hi}]")
    buckets = equal_value_buckets(spec, rescaled_to_cutoff(hi, spec.k), **kwargs)
    rescaled = buckets.values ** (0.5 * spec.k)
    inside = rescaled >= lo
    return int(np.sum(buckets.ordered_pairs()[inside]))


@dataclass(frozen=True)
class DegeneracyCurve:
    """Normalized equal-pair counts (1/X) #pairs at increasing X."""

    spec: TorusSpec
    samples: tuple[tuple[float64, int64, float64], ...]
    fitted_exponent: float64 = math.nan
    fitted_log_coefficient: float64 = math.nan
    r_squared: float64 = math.nan
    model: str = "power"
    diagnostics: dict = field(default_factory=dict)

    @property
    def X(self) -> FloatArray:
        return np.array([s[0] for s in self.samples])

    @property
    def normalized(self) -> FloatArray:
        return np.array([s[2] for s in self.samples])


def degeneracy_samples(spec: TorusSpec, X_values, **kwargs) -> tuple:
    """(X, count, count / X) for every X, from one enumeration at the largest X."""
    X_values = [float(X) for X in X_values]
    if any(b <= a for a, b in zip(X_values[:-1], X_values[1:])):
        raise DomainError("X values must be strictly increasing")
    buckets = equal_value_buckets(spec, rescaled_to_cutoff(X_values[-1], spec.k), **kwargs)
    cumulative = np.cumsum(buckets.ordered_pairs())
    samples = []
    for X in X_values:
        cutoff = rescaled_to_cutoff(X, spec.k)
        if buckets.keys is not None:
            n = int(np.searchsorted(buckets.keys, key_bound(cutoff, spec.denominator), side="right"))
        else:
            n = int(np.searchsorted(buckets.values, cutoff * (1.0 + KEY_SNAP_TOL), side="right"))
        count = int(cumulative[n - 1]) if n else 0
        samples.append((X, count, count / X))
    return tuple(samples)


def _fit(x: FloatArray, y: FloatArray) -> tuple[float64, float64, float64]:
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - np.mean(y)) ** 2)
    r_squared = 1.0 - float(np.sum(residual ** 2)) / float(total) if total > 0 else 1.0
    return float(slope), float(intercept), r_squared


def _usable(curve: DegeneracyCurve) -> tuple[FloatArray, FloatArray]:
    X, y = curve.X, curve.normalized
    mask = y > 0
    X, y = X[mask], y[mask]
    if X.size < 5 or math.log10(X[-1] / X[0]) < 2.0:
        raise InsufficientDataError(
            f"fit needs >= 5 nonzero samples over >= 2 decades, got {X.size}"
            + (f" over {math.log10(X[-1] / X[0]):.2f} decades" if X.size else ""))
    return X, y


def growth_fit(curve: DegeneracyCurve) -> tuple[float64, float64]:
    """Least-squares slope of log(count / X) against log X, and its r^2."""
    X, y = _usable(curve)
    slope, _, r_squared = _fit(np.log(X), np.log(y))
    return slope, r_squared


def log_growth_fit(curve: DegeneracyCurve) -> tuple[float64, float64]:
    """Slope of log(count / X) against log log X, and its r^2."""
    X, y = _usable(curve)
    if X[0] <= math.e:
        raise InsufficientDataError("log-growth fits need X > e")
    slope, _, r_squared = _fit(np.log(np.log(X)), np.log(y))
    return slope, r_squared


def degeneracy_curve(spec: TorusSpec, X_values, model: str = "power", **kwargs) -> DegeneracyCurve:
    """Count, normalize and fit; model is 'power' or 'log'."""
    if model not in ("power", "log"):
        raise DomainError(f"unknown growth model {model!r}")
    samples = degeneracy_samples(spec, X_values, **kwargs)
    curve = DegeneracyCurve(spec, samples, model=model)
    X, y = _usable(curve)
    if model == "power":
        slope, intercept, r_squared = _fit(np.log(X), np.log(y))
    else:
        slope, intercept, r_squared = _fit(np.log(np.log(X)), np.log(y))
    power_slope = _fit(np.log(X), np.log(y))[0]
    logger.info("degeneracy %s fit for k=%d: exponent %.4f (r^2 %.4f)", model, spec.k, slope,
                r_squared)
    return DegeneracyCurve(spec, samples, slope, intercept, r_squared, model,
                           {"power_slope": power_slope})
