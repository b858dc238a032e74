# Coordinates on the Jacobi group G^k = SL(2,R) x| R^{2k}. A group element
# (M; xi) is stored in Iwasawa form
#
#     M = [[1, u], [0, 1]] [[v^1/2, 0], [0, v^-1/2]] [[cos phi, -sin phi], [sin phi, cos phi]]
#
# with tau = u + iv in the upper half plane, phi in [0, 2 pi) and
# xi = (x, y) in R^k x R^k. Multiplication is (M; xi)(M'; xi') = (MM'; xi + M xi')
# where M acts on xi = (x, y) as (a x + b y, c x + d y).

"""
Container for group-coordinate functions and classes

Functions:
    group_mul
    group_inverse
    reduce_to_fundamental
    apply_word
    identity_point

Classes:
    GroupPoint - one element (tau, phi; xi) of G^k
    ReductionWord - generators that reduce a point into the fundamental domain
    Generators - the generators S, T and lattice translations of Gamma^k
"""
import logging
from dataclasses import dataclass, field
from math import atan2, cos, floor, pi, sin, sqrt

import numpy as np
from numpy import array, dot

from .defaults import Defaults
from .errors import DomainError
from .types import Fiber, float64, int64

logger = logging.getLogger(__name__)

TWO_PI = 2 * pi


@dataclass(frozen=True)
class GroupPoint:
    """(tau, phi; xi) with tau = u + iv, v > 0 and phi reduced to [0, 2 pi)"""

    u: float64
    v: float64
    phi: float64
    xi: Fiber

    def __post_init__(self):
        if not self.v > 0:
            raise DomainError(f"group point needs v > 0, got v={self.v}")
        xi = np.array(self.xi, dtype=np.float64).reshape(-1)
        if xi.size % 2:
            raise DomainError(f"xi must have even length 2k, got {xi.size}")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @classmethod
    def at(cls, tau: complex, phi: float64 = 0.0, x=None, y=None, k: int64 | None = None):
        """Build a point from tau and the two halves of xi."""
        if x is None and y is None:
            if k is None:
                raise DomainError("need k when x and y are omitted")
            x = y = np.zeros(k)
        x = np.zeros(len(y)) if x is None else np.asarray(x, dtype=float)
        y = np.zeros(len(x)) if y is None else np.asarray(y, dtype=float)
        return cls(tau.real, tau.imag, phi, np.concatenate([x, y]))

    @property
    def k(self) -> int64:
        return self.xi.size // 2

    @property
    def tau(self) -> complex:
        return complex(self.u, self.v)

    @property
    def x(self) -> Fiber:
        return self.xi[:self.k]

    @property
    def y(self) -> Fiber:
        return self.xi[self.k:]

    def matrix(self):
        """The SL(2,R) part as a 2x2 array."""
        n = array([[1.0, self.u], [0.0, 1.0]])
        a = array([[sqrt(self.v), 0.0], [0.0, 1.0 / sqrt(self.v)]])
        k = array([[cos(self.phi), -sin(self.phi)], [sin(self.phi), cos(self.phi)]])
        return dot(dot(n, a), k)

    @classmethod
    def from_matrix(cls, M, xi) -> "GroupPoint":
        """Iwasawa decomposition of M; tau = M(i), phi = arg(d + ic)."""
        a, b = M[0]
        c, d = M[1]
        denominator = c * c + d * d
        u = (a * c + b * d) / denominator
        v = 1.0 / denominator
        phi = atan2(c, d) % TWO_PI
        return cls(u, v, phi, xi)


def act(M, xi) -> Fiber:
    """Linear action (x, y) -> (a x + b y, c x + d y) of SL(2,R) on R^{2k}."""
    xi = np.asarray(xi, dtype=np.float64)
    k = xi.size // 2
    x, y = xi[:k], xi[k:]
    return np.concatenate([M[0][0] * x + M[0][1] * y, M[1][0] * x + M[1][1] * y])


def group_mul(g: GroupPoint, h: GroupPoint) -> GroupPoint:
    """(M; xi)(M'; xi') = (MM'; xi + M xi')"""
    if g.k != h.k:
        raise DomainError(f"cannot multiply points of dimensions {g.k} and {h.k}")
    M = g.matrix()
    return GroupPoint.from_matrix(dot(M, h.matrix()), g.xi + act(M, h.xi))


def group_inverse(g: GroupPoint) -> GroupPoint:
    """(M; xi)^-1 = (M^-1; -M^-1 xi)"""
    M = g.matrix()
    inverse = array([[M[1][1], -M[0][1]], [-M[1][0], M[0][0]]])
    return GroupPoint.from_matrix(inverse, -act(inverse, g.xi))


def identity_point(k: int64) -> GroupPoint:
    return GroupPoint(0.0, 1.0, 0.0, np.zeros(2 * k))


class Generators:
    """Generators of Gamma^k: S = (rot(pi/2); 0), T = ([[1,1],[0,1]]; (s, 0)) with
    s = (1/2, ..., 1/2), and the lattice translations (I; m), m in Z^{2k}"""

    S = array([[0.0, -1.0], [1.0, 0.0]])

    MINUS_I = array([[-1.0, 0.0], [0.0, -1.0]])

    @staticmethod
    def T(n: int64) -> np.ndarray:
        return array([[1.0, float(n)], [0.0, 1.0]])

    @staticmethod
    def half_shift(k: int64) -> Fiber:
        return np.full(k, 0.5)

    def point(self, token, k: int64) -> GroupPoint:
        """The group element named by a reduction token."""
        kind, value = token
        if kind == "S":
            M = self.S if value % 4 == 1 else np.linalg.matrix_power(self.S, value % 4)
            return GroupPoint.from_matrix(M, np.zeros(2 * k))
        if kind == "T":
            xi = np.concatenate([value * self.half_shift(k), np.zeros(k)])
            return GroupPoint.from_matrix(self.T(value), xi)
        if kind == "L":
            return GroupPoint(0.0, 1.0, 0.0, np.asarray(value, dtype=np.float64))
        raise DomainError(f"unknown generator token {token!r}")

    def inverse_token(self, token):
        kind, value = token
        if kind == "S":
            return ("S", (-value) % 4)
        if kind == "T":
            return ("T", -value)
        return ("L", tuple(-int(m) for m in value))

    def apply(self, token, g: GroupPoint) -> GroupPoint:
        """Left action of one generator. Translations keep phi and v exact."""
        kind, value = token
        if kind == "T":
            n = value
            shift = np.concatenate([n * self.half_shift(g.k) + n * g.y, np.zeros(g.k)])
            return GroupPoint(g.u + n, g.v, g.phi, g.xi + shift)
        if kind == "L":
            return GroupPoint(g.u, g.v, g.phi, g.xi + np.asarray(value, dtype=np.float64))
        if value % 4 == 2:
            # -I = k(pi)
            return GroupPoint(g.u, g.v, g.phi + pi, -g.xi)
        return group_mul(self.point(token, g.k), g)


generators = Generators()


@dataclass(frozen=True)
class ReductionWord:
    """Tokens applied on the left, in order, to move a point into the
    fundamental domain, together with the reduced point."""

    tokens: tuple = field(default_factory=tuple)
    reduced: GroupPoint | None = None


def reduce_to_fundamental(g: GroupPoint,
                          underflow_v: float64 = Defaults.UNDERFLOW_V,
                          max_steps: int = 10_000) -> ReductionWord:
    """Reduce g to u in [-1/2, 1/2), |tau| >= 1, phi in [0, pi), xi in [-1/2, 1/2)^{2k}.

    Input:  g - any group point with v >= underflow_v
    Output: ReductionWord whose tokens are ("T", n), ("S", 1), ("S", 2) or
            ("L", m); points on the arc |tau| = 1 are left there.
    """
    if g.v < underflow_v:
        raise DomainError(f"v={g.v} is below the underflow threshold {underflow_v}")
    tokens = []
    point = g
    for _ in range(max_steps):
        n = -floor(point.u + 0.5)
        if n:
            token = ("T", n)
            point = generators.apply(token, point)
            tokens.append(token)
        if point.u * point.u + point.v * point.v < 1.0:
            token = ("S", 1)
            point = generators.apply(token, point)
            tokens.append(token)
        else:
            break
    else:
        raise DomainError(f"reduction did not terminate within {max_steps} steps")

    if point.phi >= pi:
        token = ("S", 2)
        point = generators.apply(token, point)
        tokens.append(token)

    m = tuple(-int(t) for t in np.floor(point.xi + 0.5))
    if any(m):
        token = ("L", m)
        point = generators.apply(token, point)
        tokens.append(token)
    logger.debug("reduced tau=%s in %d generator steps", g.tau, len(tokens))
    return ReductionWord(tuple(tokens), point)


def apply_word(word: ReductionWord, point: GroupPoint | None = None) -> GroupPoint:
    """Undo a reduction: apply the inverse generators in reverse order."""
    point = word.reduced if point is None else point
    for token in reversed(word.tokens):
        point = generators.apply(generators.inverse_token(token), point)
    return point
