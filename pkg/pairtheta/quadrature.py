"""Panel-wise Gauss-Legendre quadrature for oscillatory integrands.

An interval is cut at the given breakpoints, every segment is split into
equal panels no wider than the requested width, and every panel gets the
same fixed-order Gauss-Legendre rule. Because panels inside a segment share
one width, the node offsets inside a panel are common to all of them; the
theta integrals use this to factor the phase e(lambda (u_p + delta_n) / 2).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .defaults import Defaults
from .errors import DomainError, ResourceBudgetError
from .types import FloatArray, float64

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def gauss_legendre(order: int) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights on [0, 1]."""
    nodes, weights = leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@dataclass(frozen=True)
class Segment:
    """count equal panels of the given width starting at start"""

    start: float64
    width: float64
    count: int

    @property
    def panel_starts(self) -> FloatArray:
        return self.start + self.width * np.arange(self.count)


def segments(lo: float64,
             hi: float64,
             breakpoints=(),
             max_width: float64 = Defaults.MAX_PANEL_WIDTH) -> list[Segment]:
    """Split [lo, hi] at the breakpoints into equal-width panel runs."""
    if not hi > lo:
        raise DomainError(f"empty integration interval [{lo}, {hi}]")
    if not max_width > 0:
        raise DomainError(f"panel width must be positive, got {max_width}")
    cuts = sorted({lo, hi, *(b for b in breakpoints if lo < b < hi)})
    runs = []
    for left, right in zip(cuts[:-1], cuts[1:]):
        count = max(1, math.ceil((right - left) / max_width - 1e-12))
        runs.append(Segment(left, (right - left) / count, count))
    return runs


def panel_count(runs: list[Segment]) -> int:
    return sum(run.count for run in runs)


def check_panel_budget(runs: list[Segment], budget: int = Defaults.PANEL_BUDGET) -> None:
    count = panel_count(runs)
    if count > budget:
        raise ResourceBudgetError(f"{count} quadrature panels exceed the budget of {budget}",
                                  predicted=count, budget=budget)


def integrate(fn,
              lo: float64,
              hi: float64,
              breakpoints=(),
              max_width: float64 = Defaults.MAX_PANEL_WIDTH,
              order: int = Defaults.GL_ORDER,
              budget: int = Defaults.PANEL_BUDGET):
    """int_lo^hi fn(u) du for a vectorized fn, real or complex."""
    runs = segments(lo, hi, breakpoints, max_width)
    check_panel_budget(runs, budget)
    nodes, weights = gauss_legendre(order)
    partials = []
    for run in runs:
        u = run.panel_starts[:, None] + run.width * nodes[None, :]
        values = np.asarray(fn(u)) * weights[None, :] * run.width
        partials.append(np.sum(values, axis=1))
    stacked = np.concatenate(partials)
    if np.iscomplexobj(stacked):
        return complex(math.fsum(stacked.real), math.fsum(stacked.imag))
    return math.fsum(stacked)


def richardson(integral_at_width, width: float64) -> tuple[float64, float64]:
    """Evaluate at width and width/2; the finer value and |difference|."""
    coarse = integral_at_width(width)
    fine = integral_at_width(0.5 * width)
    error = abs(fine - coarse)
    logger.debug("panel halving: coarse=%r fine=%r diff=%.3g", coarse, fine, error)
    return fine, error
