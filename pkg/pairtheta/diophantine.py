"""diophantine.py

Finite-scan estimates of the diophantine type of a shift vector,

    max_j |alpha_j - m_j / q| > C / q^kappa    for all q,

and the algebraic and critical test vectors the experiments run on.

The scan computes e(q) = max_j ||q alpha_j|| for every q <= Q_max. Rational
coordinates p/d are scanned exactly as (q p mod d) / d. Irrational
coordinates are held in 64-bit fixed point, frac(alpha_j) * 2^64 rounded
down with mpmath, so q * alpha_j mod 1 is an exact wrapping uint64 product
and only the final distance is rounded to a double.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .defaults import Defaults
from .errors import DomainError
from .torus import TorusSpec
from .types import FloatArray, IntArray, float64, int64

logger = logging.getLogger(__name__)

# digits carried through algebraic constructions and fixed-point conversion
WORKING_DPS = 80

FIXED_POINT_SCALE = 2.0 ** -64

SCAN_CHUNK = 1 << 20

# points of the geometric Q grid the type is fitted on, and its start
FIT_POINTS = 64
FIT_Q_START = 8


@dataclass(frozen=True)
class DiophReport:
    """Result of a q-scan up to q_max.

    kappa_hat is 1 + the slope of log(1/min_{q <= Q} e(q)) against log Q on a
    geometric grid of Q, floored at the Dirichlet value 1 + 1/k; it is
    inf for rational vectors. kappa_sup is the raw
    1 + max_q log(1/e(q)) / log q, which only grows with q_max.
    """

    alpha: tuple
    q_max: int64
    kappa_hat: float64
    worst_q: int64
    worst_error: float64
    rational_flag: bool
    C_hat: float64
    kappa_sup: float64 = math.nan
    dirichlet_ok: bool = True
    records: tuple[tuple[int64, float64], ...] = field(default_factory=tuple)


def _as_exact(a):
    """Fraction for exactly rational inputs, None otherwise."""
    if isinstance(a, (int, Fraction)):
        return Fraction(a)
    if isinstance(a, str) and "/" in a:
        return Fraction(a)
    return None


def _fixed_point(a) -> np.uint64:
    """floor(frac(a) * 2^64) as an unsigned 64-bit integer."""
    with mpmath.workdps(WORKING_DPS):
        value = mpmath.mpf(a) if not isinstance(a, str) else mpmath.mpf(a.strip())
        frac = value - mpmath.floor(value)
        return np.uint64(int(mpmath.floor(frac * mpmath.mpf(2) ** 64)) % (1 << 64))


def _distances(coordinate, q: np.ndarray) -> FloatArray:
    """||q a|| for one coordinate over an array of q (uint64)."""
    exact = _as_exact(coordinate)
    if exact is not None:
        p, d = exact.numerator % exact.denominator, exact.denominator
        r = (q.astype(np.int64) % d) * p % d
        return np.minimum(r, d - r) / d
    A = _fixed_point(coordinate)
    t = q * A
    t = np.minimum(t, np.uint64(0) - t)
    return t.astype(np.float64) * FIXED_POINT_SCALE


def approximation_errors(alpha, q_lo: int64, q_hi: int64) -> FloatArray:
    """e(q) = max_j ||q alpha_j|| for q in [q_lo, q_hi)."""
    q = np.arange(q_lo, q_hi, dtype=np.uint64)
    e = np.zeros(q.size)
    for a in alpha:
        np.maximum(e, _distances(a, q), out=e)
    return e


def scan(alpha, q_max: int64) -> FloatArray:
    """e(q) for q = 1..q_max; entry i holds e(i + 1)."""
    parts = [approximation_errors(alpha, lo, min(lo + SCAN_CHUNK, q_max + 1))
             for lo in range(1, q_max + 1, SCAN_CHUNK)]
    return np.concatenate(parts)


def best_approximations(errors: FloatArray) -> tuple[IntArray, FloatArray]:
    """q where e(q) sets a new strict minimum, with those minima."""
    running = np.minimum.accumulate(errors)
    is_record = np.empty(errors.size, dtype=bool)
    is_record[0] = True
    is_record[1:] = running[1:] < running[:-1]
    q = np.flatnonzero(is_record) + 1
    return q, errors[q - 1]


def running_min_slope(errors: FloatArray) -> float64:
    """Slope of log(1 / min_{q <= Q} e(q)) against log Q.

    Q runs over a geometric grid from FIT_Q_START to the scan bound, so each
    scale weighs the same however the records cluster.
    """
    q_max = errors.size
    start = min(FIT_Q_START, max(2, q_max // 2))
    grid = np.unique(np.geomspace(start, q_max, FIT_POINTS).astype(np.int64))
    if grid.size < 2:
        return math.nan
    running = np.minimum.accumulate(errors)
    return float(np.polyfit(np.log(grid), np.log(1.0 / running[grid - 1]), 1)[0])


def dirichlet_holds(errors: FloatArray, k: int64) -> bool:
    """min_{q <= Q} e(q) < 1/floor(Q^(1/k)) at every power of two Q."""
    running = np.minimum.accumulate(errors)
    Q = 1
    while Q <= errors.size:
        N = int(math.floor(Q ** (1.0 / k) + 1e-9))
        if N >= 1 and not running[Q - 1] <= 1.0 / N:
            return False
        Q *= 2
    return True


def estimate_type(alpha, q_max: int64, *, scan_limit: int64 = Defaults.SCAN_QMAX_LIMIT) -> DiophReport:
    """Scan q = 1..q_max and estimate the type of alpha.

    Input:  alpha - floats, Fractions, 'p/q' strings or mpmath numbers
            q_max - scan bound, 2 <= q_max <= scan_limit
    Output: DiophReport
    """
    if q_max < 2:
        raise DomainError(f"the scan needs q_max >= 2, got {q_max}")
    if q_max > scan_limit:
        raise DomainError(f"q_max={q_max} exceeds the scan limit {scan_limit}")
    k = len(alpha)
    errors = scan(alpha, q_max)
    q_rec, e_rec = best_approximations(errors)
    dirichlet_ok = dirichlet_holds(errors, k)
    if not dirichlet_ok:
        logger.error("scan of %s violates the Dirichlet bound", alpha)

    zeros = np.flatnonzero(errors == 0.0)
    if zeros.size:
        q0 = int(zeros[0]) + 1
        logger.warning("alpha is rational: q=%d gives an exact approximation", q0)
        return DiophReport(tuple(alpha), q_max, math.inf, q0, 0.0, True, 0.0, math.inf,
                           dirichlet_ok, tuple(zip(q_rec.tolist(), e_rec.tolist())))

    q = np.arange(2, q_max + 1, dtype=np.float64)
    ratios = np.log(1.0 / errors[1:]) / np.log(q)
    worst = int(np.argmax(ratios))
    kappa_sup = 1.0 + float(ratios[worst])

    floor = 1.0 + 1.0 / k
    slope = running_min_slope(errors)
    kappa_hat = floor if math.isnan(slope) else max(floor, 1.0 + slope)
    C_hat = float(np.min(errors[1:] * q ** (kappa_hat - 1.0)))
    logger.info("type scan to q=%d: kappa_hat=%.4f kappa_sup=%.4f C_hat=%.4g (%d records)",
                q_max, kappa_hat, kappa_sup, C_hat, q_rec.size)
    return DiophReport(tuple(alpha), q_max, kappa_hat, worst + 2, float(errors[worst + 1]),
                       False, C_hat, kappa_sup, dirichlet_ok,
                       tuple(zip(q_rec.tolist(), e_rec.tolist())))


def approximation_trace(report: DiophReport) -> list[tuple[int64, float64]]:
    """(q, e(q)) rows of the best-approximation records."""
    return list(report.records)


# ------------------------------------------------------------- constructors

def is_perfect_power(n: int64) -> bool:
    if n < 2:
        return False
    for e in range(2, n.bit_length() + 1):
        root = round(n ** (1.0 / e))
        if any((root + delta) ** e == n for delta in (-1, 0, 1) if root + delta >= 2):
            return True
    return False


def algebraic_vector(k: int64, base: int64 = 2, *, precise: bool = False) -> tuple:
    """alpha_j = frac(theta^j), j = 1..k, theta = base^(1/(k+1)).

    (alpha, 1) is a basis of Q(theta), of degree k + 1 since base is not a
    perfect power. With precise=True the entries are mpmath numbers at
    WORKING_DPS digits.
    """
    if k < 1:
        raise DomainError(f"algebraic vectors need k >= 1, got {k}")
    if base < 2 or is_perfect_power(base):
        raise DomainError(f"base {base} is not an integer >= 2 that is not a perfect power")
    with mpmath.workdps(WORKING_DPS):
        theta = mpmath.root(base, k + 1)
        values = [mpmath.frac(theta ** j) for j in range(1, k + 1)]
        if precise:
            return tuple(+v for v in values)
        return tuple(float(v) for v in values)


def critical_vector(k: int64, rationals=(Fraction(0), Fraction(1, 2)), base: int64 = 2,
                    *, precise: bool = False) -> tuple:
    """(algebraic_vector(k - 2, base), r1, r2): type exactly (k - 1)/(k - 2)."""
    if k < 3:
        raise DomainError(f"critical vectors need k >= 3, got {k}")
    r1, r2 = (Fraction(r) % 1 for r in rationals)
    return algebraic_vector(k - 2, base, precise=precise) + (r1, r2)


def critical_spec(k: int64, rationals=(Fraction(0), Fraction(1, 2)), base: int64 = 2) -> TorusSpec:
    """TorusSpec of a critical vector with its last two coordinates exact."""
    vector = critical_vector(k, rationals, base)
    exact = (None,) * (k - 2) + vector[k - 2:]
    return TorusSpec(k, tuple(float(a) for a in vector), exact)
