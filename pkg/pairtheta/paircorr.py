"""paircorr.py

Lattice-side pair-correlation estimators of a spectrum slice:

* r2_windowed: ordered pairs of rescaled values X_i != X_j index-wise, both
  in [X, 2X], with X_i - X_j in a closed window [a, b], normalized by B_k X;
* r2_smoothed_direct: the smoothed double sum
  (1 / B_k lam^(k/2)) sum_ij psi1(l_i/lam) psi2(l_j/lam) h_hat(lam^(k/2-1)(l_i-l_j));
* r2_generalized / r2_rescaled_smoothed for arbitrary compactly supported
  test functions;

and the limits these statistics converge to for generic shifts.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .defaults import Defaults
from .errors import DomainError, InsufficientDataError
from .spectrum import SpectrumSlice
from .torus import TestPsi, WeightH, Window, unit_ball_volume
from .types import FloatArray, float64, int64
from .workers import ordered_map, split_range

logger = logging.getLogger(__name__)

ROW_CHUNK = 512
COL_CHUNK = 8192


@dataclass(frozen=True)
class CorrEstimate:
    """One pair-correlation value together with what it should converge to."""

    kind: str
    value: float64
    X_or_lambda: float64
    params: dict = field(default_factory=dict)
    pair_count: int64 | None = None
    theoretical_limit: float64 = math.nan
    error_budget: float64 = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_row(self, k: int64, alpha_digest: str) -> dict:
        """Cells of one CSV row, keyed by CORR_COLUMNS."""
        params = ";".join(f"{key}={value}" for key, value in sorted(self.params.items()))
        return {
            "kind": self.kind,
            "k": int(k),
            "alpha": alpha_digest,
            "X_or_lambda": float(self.X_or_lambda),
            "params": params,
            "value": float(self.value),
            "theoretical_limit": float(self.theoretical_limit),
            "pair_count": "" if self.pair_count is None else int(self.pair_count),
            "error_budget": float(self.error_budget),
        }


CORR_COLUMNS = ["kind", "k", "alpha", "X_or_lambda", "params", "value", "theoretical_limit",
                "pair_count", "error_budget"]
CORR_UNITS = ["-", "1", "sha256", "lambda^(k/2)", "-", "1", "1", "1", "1"]


# -------------------------------------------------------------- windowed pairs

def _first_index(values: FloatArray, rows: FloatArray, predicate) -> np.ndarray:
    """For every row value x, the first j with predicate(x - values[j]).

    x - values[j] is nonincreasing in j, and predicate must be False then True
    along that sequence. Bisection on the exact float difference keeps window
    boundaries exact.
    """
    n = values.size
    lo = np.zeros(rows.size, dtype=np.int64)
    hi = np.full(rows.size, n, dtype=np.int64)
    active = lo < hi
    while active.any():
        mid = (lo + hi) // 2
        ok = predicate(rows - values[np.minimum(mid, n - 1)])
        hi = np.where(active & ok, mid, hi)
        lo = np.where(active & ~ok, mid + 1, lo)
        active = lo < hi
    return lo


def _count_closed(values: FloatArray, rows: FloatArray, a: float64, b: float64) -> int:
    start = _first_index(values, rows, lambda d: d <= b)
    stop = _first_index(values, rows, lambda d: d < a)
    return int(np.sum(np.maximum(stop - start, 0)))


def pair_count(values: FloatArray,
               a: float64,
               b: float64,
               *,
               workers: int = Defaults.WORKERS) -> int64:
    """Ordered pairs i != j of a sorted array with values[i] - values[j] in [a, b]."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n == 0 or a > b:
        return 0
    ranges = split_range(0, n, max(1, workers) * 4) if workers > 1 else [(0, n)]
    counts = ordered_map(lambda r: _count_closed(values, values[r[0]:r[1]], a, b),
                         ranges, workers)
    total = sum(counts)
    if a <= 0.0 <= b:
        total -= n
    return total


def pair_count_half_open(values: FloatArray, b: float64, c: float64) -> int64:
    """Ordered pairs with values[i] - values[j] in (b, c]; pairs with [a, b] to [a, c]."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0 or c <= b:
        return 0
    start = _first_index(values, values, lambda d: d <= c)
    stop = _first_index(values, values, lambda d: d <= b)
    total = int(np.sum(np.maximum(stop - start, 0)))
    if b < 0.0 <= c:
        total -= values.size
    return total


def pair_count_naive(values: FloatArray, a: float64, b: float64) -> int64:
    """O(N^2) double loop kept as the reference for pair_count."""
    values = np.asarray(values, dtype=np.float64)
    diff = values[:, None] - values[None, :]
    inside = (diff >= a) & (diff <= b)
    np.fill_diagonal(inside, False)
    return int(inside.sum())


def near_ties(values: FloatArray, tol: float64 = Defaults.NEAR_TIE_TOL) -> int64:
    """Adjacent sorted values closer than tol (exact duplicates included)."""
    gaps = np.diff(np.asarray(values, dtype=np.float64))
    return int(np.count_nonzero(gaps < tol))


def windowed_points(values: FloatArray, X: float64) -> FloatArray:
    """The sorted values lying in [X, 2X]."""
    lo = np.searchsorted(values, X, side="left")
    hi = np.searchsorted(values, 2.0 * X, side="right")
    return values[lo:hi]


def r2_windowed_points(values: FloatArray,
                       X: float64,
                       w: Window,
                       k: int64,
                       *,
                       workers: int = Defaults.WORKERS) -> CorrEstimate:
    """r2_windowed on an explicit sorted list of rescaled values, D = B_k."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    D = unit_ball_volume(k)
    sub = windowed_points(np.asarray(values, dtype=np.float64), X)
    count = pair_count(sub, w.a, w.b, workers=workers)
    return CorrEstimate(
        kind="windowed",
        value=count / (D * X),
        X_or_lambda=X,
        params={"a": w.a, "b": w.b},
        pair_count=count,
        theoretical_limit=D * w.width,
        diagnostics={"points": int(sub.size)},
    )


def r2_windowed(slice: SpectrumSlice,
                X: float64,
                w: Window,
                *,
                near_tie_tol: float64 = Defaults.NEAR_TIE_TOL,
                workers: int = Defaults.WORKERS) -> CorrEstimate:
    """R2[a,b](X) = (1/B_k X) #{i != j : X_i, X_j in [X, 2X], X_i - X_j in [a, b]}."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    if 2.0 * X > slice.rescaled_cutoff:
        raise InsufficientDataError(
            f"slice covers X_j <= {slice.rescaled_cutoff:.6g}, window [X, 2X] needs {2.0 * X:.6g}")
    estimate = r2_windowed_points(slice.rescaled, X, w, slice.k, workers=workers)
    diagnostics = dict(estimate.diagnostics)
    if slice.exact_keys is None:
        ties = near_ties(windowed_points(slice.rescaled, X), near_tie_tol)
        diagnostics["near_ties"] = ties
        if ties:
            logger.warning("%d near-ties closer than %g in [%g, %g] (not merged)",
                           ties, near_tie_tol, X, 2.0 * X)
    logger.info("R2[%g,%g](%g) = %.6g from %d pairs", w.a, w.b, X, estimate.value,
                estimate.pair_count)
    return CorrEstimate(estimate.kind, estimate.value, X, estimate.params, estimate.pair_count,
                        estimate.theoretical_limit, 0.0, diagnostics)


def poisson_points(density: float64, length: float64, seed: int) -> FloatArray:
    """Sorted Poisson process of the given density on [0, length]."""
    rng = np.random.default_rng(seed)
    expected = density * length
    gaps = rng.exponential(1.0 / density, size=int(expected + 10.0 * math.sqrt(expected) + 10))
    points = np.cumsum(gaps)
    while points[-1] < length:
        more = np.cumsum(rng.exponential(1.0 / density, size=points.size)) + points[-1]
        points = np.concatenate([points, more])
    return points[points <= length]


# ---------------------------------------------------------------- smoothed sums

def rho_factor(r1, r2, k: int64):
    """(r1^(k/2) - r2^(k/2)) / (r1 - r2), evaluated as a sum of positive terms."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if np.any(r1 <= 0) or np.any(r2 <= 0):
        raise DomainError("rho_factor needs positive arguments")
    if k < 1:
        raise DomainError(f"dimension must be positive, got k={k}")
    if k % 2 == 0:
        half = k // 2
        total = sum(r1 ** (half - nu) * r2 ** (nu - 1) for nu in range(1, half + 1))
    else:
        s1, s2 = np.sqrt(r1), np.sqrt(r2)
        total = sum(s1 ** (k - nu) * s2 ** (nu - 1) for nu in range(1, k + 1)) / (s1 + s2)
    diagonal = 0.5 * k * r1 ** (0.5 * k - 1)
    result = np.where(r1 == r2, diagonal, total)
    return result if result.ndim else float(result)


def psi_window(slice: SpectrumSlice,
               psi1: TestPsi,
               psi2: TestPsi,
               lam: float64,
               tail_tol: float64 = Defaults.PSI_TAIL_TOL) -> FloatArray:
    """Eigenvalues on which psi1(l/lam), psi2(l/lam) exceed tail_tol.

    Both the direct sum and the theta integral use exactly this list, so
    the two computations are of the same finite sum.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    r_cut = max(psi1.tail_radius(tail_tol), psi2.tail_radius(tail_tol))
    needed = r_cut * lam
    if slice.cutoff < needed:
        raise InsufficientDataError(
            f"psi tails need eigenvalues up to {needed:.6g}, slice stops at {slice.cutoff:.6g}")
    n = int(np.searchsorted(slice.lambdas, needed, side="right"))
    return slice.lambdas[:n]


def _smoothed_rows(lambdas, a, b, h, scale, delta, s_cut, rows):
    r0, r1 = rows
    col_end = int(np.searchsorted(lambdas, lambdas[r1 - 1] + delta, side="right"))
    partials = []
    row_idx = np.arange(r0, r1)
    for c0 in range(r0, col_end, COL_CHUNK):
        c1 = min(c0 + COL_CHUNK, col_end)
        col_idx = np.arange(c0, c1)
        s = scale * (lambdas[r0:r1, None] - lambdas[None, c0:c1])
        keep = (col_idx[None, :] > row_idx[:, None]) & (np.abs(s) <= s_cut)
        weight = a[r0:r1, None] * b[None, c0:c1] + b[r0:r1, None] * a[None, c0:c1]
        partials.append(float(np.sum(np.where(keep, h.hat(s) * weight, 0.0))))
    return math.fsum(partials)


def r2_smoothed_direct(slice: SpectrumSlice,
                       psi1: TestPsi,
                       psi2: TestPsi,
                       h: WeightH,
                       lam: float64,
                       *,
                       tail_tol: float64 = Defaults.PSI_TAIL_TOL,
                       hhat_tol: float64 = Defaults.HHAT_TRUNC_TOL,
                       workers: int = Defaults.WORKERS) -> CorrEstimate:
    """Smoothed pair correlation R2(psi1, psi2, h, lam), diagonal included."""
    lambdas = psi_window(slice, psi1, psi2, lam, tail_tol)
    k = slice.k
    x = lambdas / lam
    a = psi1(x)
    b = psi2(x)
    scale = lam ** (0.5 * k - 1)
    s_cut = h.hat_cutoff(hhat_tol)
    delta = s_cut / scale
    norm = unit_ball_volume(k) * lam ** (0.5 * k)

    diagonal = math.fsum(a * b) * float(h.hat(0.0))
    n = lambdas.size
    row_ranges = [(r, min(r + ROW_CHUNK, n)) for r in range(0, n, ROW_CHUNK)]
    logger.debug("smoothed direct sum: %d values, %d row blocks, |ds| <= %g",
                 n, len(row_ranges), delta)
    off_diagonal = math.fsum(ordered_map(
        lambda rows: _smoothed_rows(lambdas, a, b, h, scale, delta, s_cut, rows),
        row_ranges, workers))

    total = (diagonal + off_diagonal) / norm
    abs_a, abs_b = float(np.sum(np.abs(a))), float(np.sum(np.abs(b)))
    error_budget = (hhat_tol * 2.0 * abs_a * abs_b
                    + tail_tol * (abs_a + abs_b) * abs(h.integral())) / norm
    limit = limit_smoothed(psi1, psi2, h, k)
    logger.info("direct R2(psi1, psi2, h, %g) = %.12g (limit %.6g, %d values)",
                lam, total, limit, n)
    return CorrEstimate(
        kind="smoothed",
        value=total,
        X_or_lambda=lam,
        params={"h_shape": h.shape, "h_half_width": h.half_width, "h_amplitude": h.amplitude},
        theoretical_limit=limit,
        error_budget=error_budget,
        diagnostics={"diagonal": diagonal / norm, "values": int(n)},
    )


def limit_smoothed(psi1: TestPsi, psi2: TestPsi, h: WeightH, k: int64) -> float64:
    """(k/2) h_hat(0) int psi1 psi2 r^(k/2-1) dr + (k^2/4) B_k 2 h(0) int psi1 psi2 r^(k-2) dr."""
    if k < 2:
        raise DomainError(f"torus dimension must be >= 2, got k={k}")
    diagonal = 0.5 * k * h.integral() * psi1.product_moment(psi2, 0.5 * k - 1)
    pairs = 0.25 * k * k * unit_ball_volume(k) * 2.0 * h.at_zero() * psi1.product_moment(psi2, k - 2)
    return diagonal + pairs


# ----------------------------------------------------- generalized correlations

Psi3 = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def r2_generalized(slice: SpectrumSlice,
                   psi: Psi3,
                   lam: float64,
                   r_max: float64,
                   s_max: float64 | None = None,
                   *,
                   workers: int = Defaults.WORKERS) -> CorrEstimate:
    """(1/B_k lam^(k/2)) sum_ij psi(l_i/lam, l_j/lam, lam^(k/2-1)(l_i - l_j)).

    psi must vanish outside r1, r2 <= r_max and, if s_max is given,
    outside |s| <= s_max; it is called on broadcast numpy arrays.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if slice.cutoff < r_max * lam:
        raise InsufficientDataError(
            f"support needs eigenvalues up to {r_max * lam:.6g}, slice stops at {slice.cutoff:.6g}")
    k = slice.k
    n = int(np.searchsorted(slice.lambdas, r_max * lam, side="right"))
    lambdas = slice.lambdas[:n]
    x = lambdas / lam
    scale = lam ** (0.5 * k - 1)
    delta = math.inf if s_max is None else s_max / scale

    def rows_sum(rows):
        r0, r1 = rows
        lo = 0 if s_max is None else int(np.searchsorted(lambdas, lambdas[r0] - delta, "left"))
        hi = n if s_max is None else int(np.searchsorted(lambdas, lambdas[r1 - 1] + delta, "right"))
        partials = []
        for c0 in range(lo, hi, COL_CHUNK):
            c1 = min(c0 + COL_CHUNK, hi)
            s = scale * (lambdas[r0:r1, None] - lambdas[None, c0:c1])
            values = psi(x[r0:r1, None], x[None, c0:c1], s)
            partials.append(float(np.sum(values)))
        return math.fsum(partials)

    row_ranges = [(r, min(r + ROW_CHUNK, n)) for r in range(0, n, ROW_CHUNK)]
    total = math.fsum(ordered_map(rows_sum, row_ranges, workers))
    value = total / (unit_ball_volume(k) * lam ** (0.5 * k))
    limit = limit_generalized(psi, k, r_max, s_max) if s_max is not None else math.nan
    return CorrEstimate(kind="generalized", value=value, X_or_lambda=lam,
                        params={"r_max": r_max, "s_max": s_max}, theoretical_limit=limit)


def limit_generalized(psi: Psi3, k: int64, r_max: float64, s_max: float64 | None) -> float64:
    """(k/2) int psi(r,r,0) r^(k/2-1) dr + (k^2/4) B_k int int psi(r,r,s) r^(k-2) dr ds."""
    if s_max is None:
        raise DomainError("the limit needs a finite s-support")

    def scalar(r, s):
        return float(psi(np.asarray(r), np.asarray(r), np.asarray(s)))

    diagonal, _ = integrate.quad(lambda r: scalar(r, 0.0) * r ** (0.5 * k - 1), 0.0, r_max,
                                 limit=200)
    pairs, _ = integrate.dblquad(lambda r, s: scalar(r, s) * r ** (k - 2),
                                 -s_max, s_max, 0.0, r_max)
    return 0.5 * k * diagonal + 0.25 * k * k * unit_ball_volume(k) * pairs


def r2_rescaled_smoothed(slice: SpectrumSlice,
                         psi1: Callable,
                         psi2: Callable,
                         sigma: Callable,
                         X: float64,
                         x_max: float64,
                         s_max: float64,
                         *,
                         workers: int = Defaults.WORKERS) -> CorrEstimate:
    """(1/B_k X) sum_{i != j} psi1(X_i/X) psi2(X_j/X) sigma(X_i - X_j).

    psi1, psi2 vanish outside [0, x_max] and sigma outside [-s_max, s_max].
    Evaluated as the generalized correlation of
    psi(r1, r2, s) = psi1(r1^(k/2)) psi2(r2^(k/2)) sigma(rho(r1, r2) s)
    at lam = X^(2/k), minus the diagonal.
    """
    k = slice.k
    lam = X ** (2.0 / k)
    half = 0.5 * k

    def psi(r1, r2, s):
        r1, r2 = np.broadcast_arrays(r1, r2)
        positive = (r1 > 0) & (r2 > 0)
        rho = rho_factor(np.where(positive, r1, 1.0), np.where(positive, r2, 1.0), k)
        # r1 = 0 or r2 = 0 only for the bottom eigenvalue; rho from the power difference
        with np.errstate(divide="ignore", invalid="ignore"):
            fallback = np.where(r1 != r2, (r1 ** half - r2 ** half) / (r1 - r2), 0.0)
        rho = np.where(positive, rho, fallback)
        return psi1(r1 ** half) * psi2(r2 ** half) * sigma(rho * s)

    generalized = r2_generalized(slice, psi, lam, x_max ** (1.0 / half), None, workers=workers)
    n = int(np.searchsorted(slice.rescaled, x_max * X, side="right"))
    t = slice.rescaled[:n] / X
    diagonal = math.fsum(psi1(t) * psi2(t)) * float(sigma(0.0))
    value = generalized.value - diagonal / (unit_ball_volume(k) * X)

    sigma_mass, _ = integrate.quad(sigma, -s_max, s_max, limit=200)
    overlap, _ = integrate.quad(lambda u: psi1(u) * psi2(u), 0.0, x_max, limit=200)
    return CorrEstimate(kind="rescaled-smoothed", value=value, X_or_lambda=X,
                        params={"x_max": x_max, "s_max": s_max},
                        theoretical_limit=unit_ball_volume(k) * sigma_mass * overlap)
