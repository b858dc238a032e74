"""Shared domain records.

TorusSpec is the physical problem instance (dimension and shift vector),
Window is a closed difference window [a, b], TestPsi is the
exponential-polynomial family psi(r) = sum_i c_i r^p_i exp(-pi s_i r) and
WeightH is the compactly supported weight h together with its transform

    h_hat(s) = int h(u) e(us/2) du,      e(z) = exp(2 pi i z).

All records are frozen and safe to share between worker threads.
"""

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .types import FloatArray, Vector, float64, int64


def unit_ball_volume(k: int) -> float64:
    """Volume B_k = pi^(k/2) / Gamma(k/2 + 1) of the k-dimensional unit ball."""
    if k <= 0:
        raise DomainError(f"dimension must be positive, got k={k}")
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def _mod_one(a) -> float64:
    # works for float, Fraction and mpmath.mpf
    reduced = float(a % 1)
    return 0.0 if reduced >= 1.0 else reduced


@dataclass(frozen=True)
class TorusSpec:
    """Dimension k >= 2 and shift vector alpha in [0, 1)^k.

    alpha_exact holds the rational value of each coordinate when it is
    known exactly (None for irrational coordinates). If every coordinate is
    given as an int or Fraction, alpha_exact is filled in automatically.
    """

    k: int64
    alpha: Vector
    alpha_exact: tuple[Fraction | None, ...] | None = None

    def __post_init__(self):
        if self.k < 2:
            raise DomainError(f"torus dimension must be >= 2, got k={self.k}")
        if len(self.alpha) != self.k:
            raise DomainError(f"alpha has {len(self.alpha)} components, expected {self.k}")

        exact = self.alpha_exact
        if exact is None and all(isinstance(a, (int, Fraction)) for a in self.alpha):
            exact = tuple(Fraction(a) for a in self.alpha)

        if exact is not None:
            if len(exact) != self.k:
                raise DomainError(f"alpha_exact has {len(exact)} components, expected {self.k}")
            exact = tuple(None if e is None else Fraction(e) % 1 for e in exact)
            alpha = tuple(_mod_one(a) if e is None else float(e)
                          for a, e in zip(self.alpha, exact))
            if all(e is None for e in exact):
                exact = None
        else:
            alpha = tuple(_mod_one(a) for a in self.alpha)

        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alpha_exact", exact)

    @classmethod
    def rational(cls, values) -> "TorusSpec":
        """Build a fully rational torus from ints, Fractions or 'p/q' strings."""
        exact = tuple(Fraction(v) for v in values)
        return cls(len(exact), tuple(float(e) for e in exact), exact)

    @property
    def ball_volume(self) -> float64:
        """B_k, the limiting density of the rescaled spectrum"""
        return unit_ball_volume(self.k)

    @property
    def is_rational(self) -> bool:
        return self.alpha_exact is not None and all(e is not None for e in self.alpha_exact)

    @property
    def exact_indices(self) -> tuple[int, ...]:
        """Coordinates whose value is known as an exact rational."""
        if self.alpha_exact is None:
            return ()
        return tuple(j for j, e in enumerate(self.alpha_exact) if e is not None)

    @property
    def denominator(self) -> int64:
        """Common denominator q of the exact coordinates (1 if there are none)."""
        q = 1
        for j in self.exact_indices:
            q = math.lcm(q, self.alpha_exact[j].denominator)
        return q

    @property
    def numerators(self) -> tuple[int64, ...]:
        """p_j with alpha_j = p_j / q for the exact coordinates."""
        q = self.denominator
        return tuple(int(self.alpha_exact[j] * q) for j in self.exact_indices)

    def digest(self) -> str:
        """Short stable identifier of (k, alpha) used in CSV rows."""
        text = f"{self.k}:" + ",".join(a.hex() for a in self.alpha)
        if self.alpha_exact is not None:
            text += ":" + ",".join(str(e) for e in self.alpha_exact)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Window:
    """Closed difference window [a, b]"""

    a: float64
    b: float64

    def __post_init__(self):
        if not self.a <= self.b:
            raise DomainError(f"window needs a <= b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float64:
        return self.b - self.a


@dataclass(frozen=True)
class TestPsi:
    """psi(r) = sum_i c_i r^p_i exp(-pi s_i r) on r >= 0.

    terms is a tuple of (c_i, s_i, p_i) with s_i > 0 and integer p_i >= 0.
    The radial function it induces on R^k is f(w) = psi(|w|^2).
    """

    __test__ = False  # keep unittest/pytest collectors away from the name

    terms: tuple[tuple[float64, float64, int64], ...]

    def __post_init__(self):
        normalized = []
        for term in self.terms:
            c, s, p = term
            if not s > 0:
                raise DomainError(f"decay rate must be positive, got s={s}")
            if int(p) != p or p < 0:
                raise DomainError(f"power must be a nonnegative integer, got p={p}")
            normalized.append((float(c), float(s), int(p)))
        object.__setattr__(self, "terms", tuple(normalized))

    @classmethod
    def gaussian(cls, s: float64 = 1.0, c: float64 = 1.0) -> "TestPsi":
        """c * exp(-pi s r), i.e. the Gaussian f(w) = c exp(-pi s |w|^2)."""
        return cls(((c, s, 0),))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for c, s, p in self.terms:
            total = total + c * r ** p * np.exp(-math.pi * s * r)
        return total

    def __add__(self, other: "TestPsi") -> "TestPsi":
        return TestPsi(self.terms + other.terms)

    def scaled(self, factor: float64) -> "TestPsi":
        return TestPsi(tuple((c * factor, s, p) for c, s, p in self.terms))

    @property
    def is_gaussian(self) -> bool:
        """True when every term is a pure Gaussian (p = 0)."""
        return all(p == 0 for _, _, p in self.terms)

    @property
    def min_rate(self) -> float64:
        return min(s for _, s, _ in self.terms)

    def envelope(self, r):
        """Upper bound sum_i |c_i| r^p_i exp(-pi s_i r) for |psi(r)|."""
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for c, s, p in self.terms:
            total = total + abs(c) * r ** p * np.exp(-math.pi * s * r)
        return total

    def tail_radius(self, tol: float64) -> float64:
        """Smallest r0 with envelope(r) <= tol for every r >= r0."""
        # each term decreases beyond its peak at p / (pi s)
        start = max(p / (math.pi * s) for _, s, p in self.terms)
        if self.envelope(start) <= tol:
            return start
        hi = max(start, 1.0)
        while self.envelope(hi) > tol:
            hi *= 2.0
        return brentq(lambda r: math.log(self.envelope(r)) - math.log(tol), start, hi,
                      xtol=1e-12)

    def moment(self, a: float64) -> float64:
        """int_0^inf psi(r) r^a dr in closed form (a > -1)."""
        return sum(c * math.gamma(p + a + 1) / (math.pi * s) ** (p + a + 1)
                   for c, s, p in self.terms)

    def product_moment(self, other: "TestPsi", a: float64) -> float64:
        """int_0^inf psi(r) other(r) r^a dr in closed form (a > -1)."""
        total = 0.0
        for c1, s1, p1 in self.terms:
            for c2, s2, p2 in other.terms:
                n = p1 + p2 + a
                total += c1 * c2 * math.gamma(n + 1) / (math.pi * (s1 + s2)) ** (n + 1)
        return total

    def radial_integral(self, k: int64) -> float64:
        """int_{R^k} psi(|w|^2) dw = (k/2) B_k int psi(r) r^(k/2-1) dr."""
        return 0.5 * k * unit_ball_volume(k) * self.moment(0.5 * k - 1)


Shape = Literal["triangle", "raised-cosine"]


@dataclass(frozen=True)
class WeightH:
    """Even, compactly supported weight h on [-half_width, half_width].

    triangle:       h(u) = A (1 - |u|/a)
    raised-cosine:  h(u) = A (1 + cos(pi u / a)) / 2
    """

    half_width: float64
    shape: Shape = "triangle"
    amplitude: float64 = 1.0

    def __post_init__(self):
        if not self.half_width > 0:
            raise DomainError(f"support half-width must be positive, got {self.half_width}")
        if self.shape not in ("triangle", "raised-cosine"):
            raise DomainError(f"unknown weight shape {self.shape!r}")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        a, amp = self.half_width, self.amplitude
        inside = np.abs(u) <= a
        if self.shape == "triangle":
            values = amp * (1.0 - np.abs(u) / a)
        else:
            values = 0.5 * amp * (1.0 + np.cos(math.pi * u / a))
        return np.where(inside, values, 0.0)

    def integral(self) -> float64:
        """int h = h_hat(0); A a for both shapes."""
        return self.amplitude * self.half_width

    def at_zero(self) -> float64:
        return self.amplitude

    def kinks(self) -> list[float64]:
        """Points where h is not smooth; quadrature panels must break there."""
        a = self.half_width
        return [-a, 0.0, a] if self.shape == "triangle" else [-a, a]

    def hat(self, s):
        return h_hat(self, s)

    def hat_bound(self, s):
        """Envelope of |h_hat(s)| used to justify truncating pair sums."""
        s = np.abs(np.asarray(s, dtype=float))
        a, amp = self.half_width, abs(self.amplitude)
        if self.shape == "triangle":
            with np.errstate(divide="ignore"):
                tail = 4.0 / (math.pi * a * s) ** 2
            return amp * a * np.minimum(1.0, tail)
        y = s * a
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = 1.0 / (0.75 * math.pi * y ** 3)
        return amp * a * np.where(y >= 2.0, np.minimum(1.0, tail), 1.0)

    def hat_cutoff(self, tol: float64) -> float64:
        """|s| beyond which hat_bound(s) <= tol."""
        a, amp = self.half_width, abs(self.amplitude)
        if amp == 0.0:
            return 0.0
        if self.shape == "triangle":
            return 2.0 / (math.pi * a) * math.sqrt(amp * a / tol)
        y = (amp * a / (0.75 * math.pi * tol)) ** (1.0 / 3.0)
        return max(2.0, y) / a


def h_hat(h: WeightH, s):
    """Closed-form h_hat(s) = int h(u) e(us/2) du (real and even in s)."""
    s = np.asarray(s, dtype=float)
    a, amp = h.half_width, h.amplitude
    if h.shape == "triangle":
        # a * sinc(a s / 2)^2 with numpy's normalized sinc
        return amp * a * np.sinc(0.5 * a * s) ** 2
    # raised cosine: a * sinc(y) / (1 - y^2), y = a s; removable at |y| = 1
    y = np.abs(a * s)
    near_one = np.abs(y - 1.0) < 0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        generic = np.sinc(y) / (1.0 - y * y)
        # sin(pi y) = sin(pi (1 - y))
        close = np.sinc(1.0 - y) / (y * (1.0 + y))
    return amp * a * np.where(near_one, close, generic)


def as_float_array(values) -> FloatArray:
    return np.ascontiguousarray(np.asarray(values, dtype=np.float64))
