"""spectrum.py

Enumeration of the quasi-periodic flat-torus spectrum

    lambda_j = |m - alpha|^2,   m in Z^k,   lambda_j <= cutoff,

and its unit-density rescaling X_j = lambda_j^(k/2).

The ball is enumerated one coordinate at a time: every partial point carries
its partial sum of squares, and the next coordinate only ranges over the
integers that keep the sum inside the ball. The first coordinate is split into
slabs that can be handed to worker threads; slabs are concatenated in slab
order, so the output never depends on the worker count.
"""

import logging
import math
import time
from fractions import Fraction

import numpy as np

from .DataInputStream import DataInputStream
from .DataOutputStream import DataOutputStream
from .defaults import Defaults
from .errors import DomainError, InsufficientDataError, ResourceBudgetError
from .torus import TorusSpec, unit_ball_volume
from .types import FloatArray, IntArray, float64, int64
from .workers import ordered_map, split_range

logger = logging.getLogger(__name__)

MAGIC = b"PTSPEC"
CACHE_VERSION = 2

# relative distance at which a float cutoff q^2 Lambda is snapped to an integer key
KEY_SNAP_TOL = 1e-9


def key_bound(cutoff: float64, q: int64) -> int64:
    """Largest integer key q^2 lambda allowed under lambda <= cutoff.

    X^(2/k) is rarely exact in floating point (27^(2/3) = 8.999999999999998),
    so values within KEY_SNAP_TOL of an integer are snapped to it.
    """
    scaled = cutoff * q * q
    nearest = round(scaled)
    if abs(scaled - nearest) <= KEY_SNAP_TOL * max(1.0, abs(scaled)):
        return int(nearest)
    return int(math.floor(scaled))


class SpectrumSlice:
    """Sorted eigenvalues lambda_j <= cutoff of one torus, with rescalings."""

    def __init__(self,
                 spec: TorusSpec,
                 cutoff: float64,
                 lambdas: FloatArray,
                 exact_keys: IntArray | None = None):
        self.spec = spec
        """the torus instance the values belong to"""
        self.cutoff = float(cutoff)
        """every |m - alpha|^2 <= cutoff is present, with multiplicity"""
        self.lambdas = np.asarray(lambdas, dtype=np.float64)
        """nondecreasing eigenvalues"""
        self.rescaled = self.lambdas ** (0.5 * spec.k)
        """X_j = lambda_j^(k/2), same order"""
        self.exact_keys = None if exact_keys is None else np.asarray(exact_keys, dtype=np.int64)
        """q^2 lambda_j as integers, when alpha is fully rational"""
        self.lambdas.setflags(write=False)
        self.rescaled.setflags(write=False)
        if self.exact_keys is not None:
            self.exact_keys.setflags(write=False)

    def __len__(self) -> int:
        return self.lambdas.size

    @property
    def k(self) -> int64:
        return self.spec.k

    @property
    def denominator(self) -> int64:
        return self.spec.denominator

    @property
    def rescaled_cutoff(self) -> float64:
        """Largest X for which the rescaled list is complete."""
        return self.cutoff ** (0.5 * self.spec.k)

    def restrict(self, cutoff: float64) -> "SpectrumSlice":
        """The sub-slice of values <= cutoff (cutoff must not exceed ours)."""
        if cutoff > self.cutoff:
            raise InsufficientDataError(
                f"cannot restrict a slice with cutoff {self.cutoff} to {cutoff}")
        if self.exact_keys is None:
            n = int(np.searchsorted(self.lambdas, cutoff, side="right"))
            keys = None
        else:
            bound = key_bound(cutoff, self.denominator)
            n = int(np.searchsorted(self.exact_keys, bound, side="right"))
            keys = self.exact_keys[:n]
        return SpectrumSlice(self.spec, cutoff, self.lambdas[:n], keys)

    def serialize(self, outputStream: DataOutputStream) -> None:
        """Write the slice in the current cache version."""
        spec = self.spec
        outputStream.write_bytes(MAGIC)
        outputStream.write_unsigned_short(CACHE_VERSION)
        outputStream.write_int(spec.k)
        for a in spec.alpha:
            outputStream.write_double(a)
        outputStream.write_double(self.cutoff)
        outputStream.write_unsigned_long(len(self))
        outputStream.write_double_array(self.lambdas)
        # version 2 exact section
        exact = spec.alpha_exact or (None,) * spec.k
        for e in exact:
            outputStream.write_utf("" if e is None else str(e))
        outputStream.write_boolean(self.exact_keys is not None)
        if self.exact_keys is not None:
            outputStream.write_long(self.denominator)
            outputStream.write_long_array(self.exact_keys)

    @classmethod
    def parse_v1(cls, inputStream: DataInputStream) -> "SpectrumSlice":
        """Body of a version 1 cache: float data only."""
        k = inputStream.read_int()
        alpha = tuple(inputStream.read_double() for _ in range(k))
        cutoff = inputStream.read_double()
        count = inputStream.read_unsigned_long()
        lambdas = inputStream.read_double_array(count)
        return cls(TorusSpec(k, alpha), cutoff, lambdas)

    @classmethod
    def parse_v2(cls, inputStream: DataInputStream) -> "SpectrumSlice":
        """Body of a version 2 cache: version 1 plus alpha_exact and keys."""
        base = cls.parse_v1(inputStream)
        k = base.spec.k
        texts = [inputStream.read_utf() for _ in range(k)]
        exact = tuple(None if t == "" else Fraction(t) for t in texts)
        spec = TorusSpec(k, base.spec.alpha, exact if any(e is not None for e in exact) else None)
        keys = None
        if inputStream.read_boolean():
            inputStream.read_long()  # denominator, recomputable from spec
            keys = inputStream.read_long_array(len(base))
        return cls(spec, base.cutoff, base.lambdas, keys)


def _extend_coordinate(acc: FloatArray,
                       keys: IntArray | None,
                       alpha_j: float64,
                       qm_offset: tuple[int, int] | None,
                       cutoff: float64):
    """Append one coordinate to every partial point that stays inside the ball.

    Returns the new partial sums, keys and the chosen integer coordinate;
    children of a partial point appear in increasing m_j, parents keep order.
    """
    root = np.sqrt(np.maximum(cutoff - acc, 0.0))
    # one extra integer on each side absorbs sqrt rounding; the filter is exact
    lo = np.ceil(alpha_j - root).astype(np.int64) - 1
    hi = np.floor(alpha_j + root).astype(np.int64) + 1
    counts = hi - lo + 1
    parent = np.repeat(np.arange(acc.size), counts)
    starts = np.cumsum(counts) - counts
    m = lo[parent] + (np.arange(parent.size, dtype=np.int64) - starts[parent])
    diff = m - alpha_j
    new_acc = acc[parent] + diff * diff
    keep = new_acc <= cutoff
    new_keys = None
    if keys is not None:
        q, p = qm_offset
        qm = q * m - p
        new_keys = keys[parent][keep] + qm[keep] * qm[keep]
    return new_acc[keep], new_keys, parent[keep], m[keep]


def _enumerate_slab(spec: TorusSpec,
                    cutoff: float64,
                    m_first: IntArray,
                    with_keys: bool,
                    with_points: bool):
    alpha = spec.alpha
    q = spec.denominator
    numerators = spec.numerators if with_keys else ()
    diff = m_first - alpha[0]
    acc = diff * diff
    keep = acc <= cutoff
    acc = acc[keep]
    m_first = m_first[keep]
    keys = None
    if with_keys:
        qm = q * m_first - numerators[0]
        keys = qm * qm
    points = [m_first] if with_points else None
    for j in range(1, spec.k):
        offset = (q, numerators[j]) if with_keys else None
        acc, keys, parent, m = _extend_coordinate(acc, keys, alpha[j], offset, cutoff)
        if with_points:
            points = [column[parent] for column in points] + [m]
    stacked = np.stack(points, axis=1) if with_points else None
    return acc, keys, stacked


def _check_budget(spec: TorusSpec, cutoff: float64, memory_budget: int) -> float64:
    predicted = unit_ball_volume(spec.k) * cutoff ** (0.5 * spec.k)
    if predicted > memory_budget:
        raise ResourceBudgetError(
            f"enumeration of k={spec.k} up to {cutoff} predicts {predicted:.3g} entries, "
            f"over the budget of {memory_budget}",
            predicted=predicted, budget=memory_budget)
    return predicted


def _exact_keys_available(spec: TorusSpec, cutoff: float64, key_limit: int) -> bool:
    if not spec.is_rational:
        return False
    q = spec.denominator
    if q * q * cutoff >= key_limit:
        raise ResourceBudgetError(
            f"exact keys q^2 * cutoff = {q * q * cutoff:.3g} overflow the key limit {key_limit}",
            predicted=q * q * cutoff, budget=key_limit)
    return True


def enumerate_points(spec: TorusSpec,
                     cutoff: float64,
                     *,
                     memory_budget: int = Defaults.MEMORY_BUDGET,
                     key_limit: int = Defaults.EXACT_KEY_LIMIT,
                     workers: int = Defaults.WORKERS,
                     with_points: bool = False):
    """Unsorted ball enumeration in lexicographic order of m.

    Returns (values, keys, points): float sums |m - alpha|^2, integer keys
    sum (q m_j - p_j)^2 or None, and the lattice points as an (N, k) array
    when requested. For rational alpha the cutoff is snapped to an integer
    key by key_bound and membership is decided on the keys.
    """
    if not cutoff > 0:
        raise DomainError(f"spectrum cutoff must be positive, got {cutoff}")
    _check_budget(spec, cutoff, memory_budget)
    with_keys = _exact_keys_available(spec, cutoff, key_limit)
    if with_keys:
        # half a key of slack for the float pruning; the integer keys decide membership
        q = spec.denominator
        cutoff = (key_bound(cutoff, q) + 0.5) / (q * q)

    root = math.sqrt(cutoff)
    first_lo = math.ceil(spec.alpha[0] - root) - 1
    first_hi = math.floor(spec.alpha[0] + root) + 1
    ranges = split_range(first_lo, first_hi + 1, max(1, 4 * workers))
    logger.debug("enumerating k=%d up to %g in %d slabs", spec.k, cutoff, len(ranges))

    def run(bounds):
        start, stop = bounds
        return _enumerate_slab(spec, cutoff, np.arange(start, stop, dtype=np.int64),
                               with_keys, with_points)

    runs = ordered_map(run, ranges, workers)
    values = np.concatenate([r[0] for r in runs])
    keys = np.concatenate([r[1] for r in runs]) if with_keys else None
    points = np.concatenate([r[2] for r in runs]) if with_points else None
    return values, keys, points


def enumerate_spectrum(spec: TorusSpec,
                       cutoff: float64,
                       *,
                       memory_budget: int = Defaults.MEMORY_BUDGET,
                       key_limit: int = Defaults.EXACT_KEY_LIMIT,
                       workers: int = Defaults.WORKERS) -> SpectrumSlice:
    """Every |m - alpha|^2 <= cutoff with multiplicity, sorted."""
    started = time.perf_counter()
    values, keys, _ = enumerate_points(spec, cutoff, memory_budget=memory_budget,
                                       key_limit=key_limit, workers=workers)
    if keys is not None:
        q = spec.denominator
        inside = keys <= key_bound(cutoff, q)
        keys = keys[inside]
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        lambdas = keys.astype(np.float64) / float(q * q)
    else:
        order = np.argsort(values, kind="stable")
        lambdas = values[order]
    logger.info("spectrum k=%d alpha=%s cutoff=%g: %d values in %.2fs",
                spec.k, spec.digest(), cutoff, lambdas.size, time.perf_counter() - started)
    return SpectrumSlice(spec, cutoff, lambdas, keys)


def counting_function(slice: SpectrumSlice, X: float64) -> int64:
    """#{j : X_j <= X}"""
    if X > slice.rescaled_cutoff:
        raise InsufficientDataError(
            f"X={X} exceeds the rescaled cutoff {slice.rescaled_cutoff} of the slice")
    return int(np.searchsorted(slice.rescaled, X, side="right"))


def counting_ratio(slice: SpectrumSlice, X: float64) -> float64:
    """(1/X) #{j : X_j <= X}, which tends to B_k."""
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    return counting_function(slice, X) / X
