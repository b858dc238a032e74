"""equidist.py

Averages along the closed horocycle u -> (u + iv, 0; (0, alpha)) and the
dominating function

    F_R(tau; xi) = sum_{gamma in Gamma_inf \\ SL(2,Z)} sum_m f((y_gamma + m) v_gamma^1/2) v_gamma^beta chi_R(v_gamma)

with v_gamma = v / |c tau + d|^2 and y_gamma = c x + d y. Only cosets with
v_gamma >= R contribute, so every evaluation is a finite sum: the two cosets
(0, +-1), the cosets (+-1, 0) and the coprime pairs with c, d != 0 and
|c| <= (vR)^(-1/2).
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .IwasawaCoordinates import GroupPoint
from .defaults import Defaults
from .errors import DomainError
from .paircorr import limit_smoothed, psi_window
from .quadrature import integrate
from .spectrum import enumerate_spectrum
from .theta import horocycle_theta_pair, theta_sum
from .torus import TestPsi, TorusSpec, WeightH, unit_ball_volume
from .types import FloatArray, float64, int64
from .workers import ordered_map

logger = logging.getLogger(__name__)

Target = Literal["constant", "theta-pair", "F_R"]


@dataclass(frozen=True)
class DominatingFn:
    """F_R for the radial function f(w) = psi(|w|^2); beta None means k/2."""

    R: float64
    f: TestPsi
    beta: float64 | None = None

    def __post_init__(self):
        if not self.R > 1:
            raise DomainError(f"F_R needs R > 1, got R={self.R}")

    def exponent(self, k: int64) -> float64:
        return 0.5 * k if self.beta is None else self.beta


@dataclass(frozen=True)
class HorocycleProbe:
    """v^sigma int F(u + iv, 0; (0, alpha)) h(v^sigma u) du"""

    v: float64
    sigma: float64
    h: WeightH
    target: Target = "constant"
    dominating: DominatingFn | None = None

    def __post_init__(self):
        if not self.v > 0:
            raise DomainError(f"horocycle height must be positive, got v={self.v}")
        if not self.sigma >= 0:
            raise DomainError(f"stretch exponent must be >= 0, got sigma={self.sigma}")
        if self.target not in ("constant", "theta-pair", "F_R"):
            raise DomainError(f"unknown horocycle target {self.target!r}")
        if self.target == "F_R" and self.dominating is None:
            raise DomainError("target F_R needs a DominatingFn")


# ------------------------------------------------------------- lattice sums

def _box(radius: int, k: int64) -> FloatArray:
    axis = np.arange(-radius, radius + 1)
    return np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k).astype(float)


def lattice_sums(psi: TestPsi,
                 shifts,
                 scales,
                 tol: float64 = Defaults.THETA_TRUNC_TOL) -> FloatArray:
    """sum_m psi(|shift + m|^2 scale^2) for every (shift, scale) row."""
    shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
    scales = np.broadcast_to(np.asarray(scales, dtype=float), (shifts.shape[0],))
    if shifts.shape[0] == 0:
        return np.zeros(0)
    k = shifts.shape[1]
    reach = math.sqrt(psi.tail_radius(tol)) / float(np.min(scales))
    # within reach < 1/2 only the nearest lattice point can contribute
    radius = 0 if reach < 0.5 else int(math.ceil(reach))
    nearest = shifts - np.round(shifts)
    z = nearest[:, None, :] + _box(radius, k)[None, :, :]
    norms = np.sum(z * z, axis=2) * (scales * scales)[:, None]
    return np.sum(psi(norms), axis=1)


def coprime_cosets(tau: complex, R: float64):
    """Coprime (c, d), c != 0, with v / |c tau + d|^2 >= R."""
    u, v = tau.real, tau.imag
    c_max = int(math.floor(1.0 / math.sqrt(v * R)))
    for c in range(-c_max, c_max + 1):
        if c == 0:
            continue
        slack = v / R - c * c * v * v
        if slack < 0:
            continue
        rad = math.sqrt(slack)
        for d in range(math.ceil(-c * u - rad), math.floor(-c * u + rad) + 1):
            if math.gcd(c, d) == 1:
                yield c, d


def dominating_fn_eval(dom: DominatingFn, tau: complex, xi, *, tol=Defaults.THETA_TRUNC_TOL) -> float64:
    """F_R(tau; xi) from the three-part coset expansion."""
    xi = np.asarray(xi, dtype=float)
    k = xi.size // 2
    x, y = xi[:k], xi[k:]
    beta = dom.exponent(k)
    u, v = tau.real, tau.imag
    if not v > 0:
        raise DomainError(f"tau must lie in the upper half plane, got {tau}")
    total = []
    if v >= dom.R:
        total.append(float(np.sum(lattice_sums(dom.f, [y, -y], math.sqrt(v), tol))) * v ** beta)
    for c, d in coprime_cosets(tau, dom.R):
        v_gamma = v / ((c * u + d) ** 2 + (c * v) ** 2)
        shift = c * x + d * y
        total.append(float(lattice_sums(dom.f, [shift], math.sqrt(v_gamma), tol)[0]) * v_gamma ** beta)
    return math.fsum(total)


def dominating_fn_fundamental(dom: DominatingFn, tau: complex, xi,
                              *, tol=Defaults.THETA_TRUNC_TOL) -> float64:
    """F_R for tau in the fundamental domain: only (0, +-1) can reach height R."""
    xi = np.asarray(xi, dtype=float)
    k = xi.size // 2
    v = tau.imag
    if v < dom.R:
        return 0.0
    y = xi[k:]
    return float(np.sum(lattice_sums(dom.f, [y, -y], math.sqrt(v), tol))) * v ** dom.exponent(k)


def dominating_fn_hat(dom: DominatingFn, tau: complex, xi, **kwargs) -> float64:
    """F_R(tau; 2 xi), the majorant adapted to the half-integer shifts."""
    return dominating_fn_eval(dom, tau, 2.0 * np.asarray(xi, dtype=float), **kwargs)


def cusp_indicator(tau: complex, R: float64) -> int64:
    """X_R(tau): number of cosets up to sign with v / |c tau + d|^2 >= R."""
    count = 1 if tau.imag >= R else 0
    count += sum(1 for c, _ in coprime_cosets(tau, R) if c > 0)
    return count


def l1_mean_dominating(dom: DominatingFn, k: int64) -> float64:
    """mu(F_R) = 2 pi R^-(k/2+1-beta) / (k/2+1-beta) int f."""
    gap = 0.5 * k + 1.0 - dom.exponent(k)
    if gap <= 0:
        raise DomainError(f"mu(F_R) is infinite for beta >= k/2 + 1 (beta={dom.exponent(k)})")
    return 2.0 * math.pi * dom.R ** (-gap) / gap * dom.f.radial_integral(k)


def l1_mean_monte_carlo(dom: DominatingFn,
                        k: int64,
                        samples: int = Defaults.MC_SAMPLES,
                        seed: int = Defaults.MC_SEED) -> tuple[float64, float64]:
    """Monte-Carlo mu(F_R) over the fundamental domain.

    Points (u + iv; xi) are drawn with u and xi uniform and v of density
    R / v^2 on [R, inf), which cancels the Haar factor dv / v^2. F_R is
    evaluated by dominating_fn_eval; below height R it vanishes on the
    fundamental domain. Returns (estimate, standard error).
    """
    rng = np.random.default_rng(seed)
    u = rng.random(samples) - 0.5
    v = dom.R / (1.0 - rng.random(samples))
    xis = rng.random((samples, 2 * k)) - 0.5
    values = np.array([dominating_fn_eval(dom, complex(a, b), xi) for a, b, xi in zip(u, v, xis)])
    # measure: pi (phi in [0, pi)) * int_R^inf dv / v^2 = pi / R
    factor = math.pi / dom.R
    return factor * float(np.mean(values)), factor * float(np.std(values)) / math.sqrt(samples)


# ------------------------------------------------------------ domination

def fundamental_samples(k: int64, count: int, v_max: float64, seed: int = Defaults.MC_SEED):
    """Random points of the fundamental domain with v log-uniform up to v_max."""
    rng = np.random.default_rng(seed)
    points = []
    while len(points) < count:
        u = rng.random() - 0.5
        v_min = math.sqrt(1.0 - u * u)
        v = v_min * (v_max / v_min) ** rng.random()
        phi = math.pi * rng.random()
        xi = rng.random(2 * k) - 0.5
        points.append(GroupPoint(u, v, phi, xi))
    return points


def domination_excess(psi1: TestPsi, psi2: TestPsi, dom: DominatingFn, points) -> FloatArray:
    """|Theta_f conj(Theta_g)| X_R - F_R(tau; 2 xi) at every point."""
    excess = np.empty(len(points))
    for i, g in enumerate(points):
        pair = abs(theta_sum(psi1, g) * np.conj(theta_sum(psi2, g)))
        excess[i] = pair * cusp_indicator(g.tau, dom.R) - dominating_fn_hat(dom, g.tau, g.xi)
    return excess


def calibrate_domination(psi1: TestPsi, psi2: TestPsi, dom: DominatingFn, points) -> float64:
    """Smallest L >= 0 with |Theta_f conj(Theta_g)| X_R <= F_R-hat + L on the points."""
    excess = domination_excess(psi1, psi2, dom, points)
    L = max(0.0, float(np.max(excess))) if excess.size else 0.0
    logger.info("domination constant over %d points at R=%g: L=%.4g", len(points), dom.R, L)
    return L


# ------------------------------------------------------------ horocycles

def _coset_intervals(v: float64, R: float64, A: float64):
    """Coprime cosets with c != 0 and the u-interval on which v_gamma >= R."""
    c_max = int(math.floor(1.0 / math.sqrt(v * R)))
    for c in range(-c_max, c_max + 1):
        if c == 0:
            continue
        slack = v / R - c * c * v * v
        if slack < 0:
            continue
        rad = math.sqrt(slack)
        reach = abs(c) * A + rad
        for d in range(math.ceil(-reach), math.floor(reach) + 1):
            if math.gcd(c, d) != 1:
                continue
            lo, hi = sorted(((-d - rad) / c, (-d + rad) / c))
            if hi < -A or lo > A:
                continue
            yield c, d, max(lo, -A), min(hi, A)


def horocycle_dominating_integral(dom: DominatingFn,
                                  alpha,
                                  v: float64,
                                  sigma: float64,
                                  h: WeightH,
                                  u_min: float64 = 0.0,
                                  *,
                                  order: int = 32,
                                  tol: float64 = Defaults.THETA_TRUNC_TOL,
                                  workers: int = Defaults.WORKERS) -> float64:
    """v^sigma int_{|u| >= u_min} F_R(u + iv; (0, alpha)) h(v^sigma u) du.

    Integrated coset by coset over the exact u-interval where the coset
    reaches height R, so the jumps of chi_R never fall inside a panel.
    """
    y = np.asarray(alpha, dtype=float)
    k = y.size
    beta = dom.exponent(k)
    scale = v ** sigma
    A = h.half_width / scale
    kinks = [kink / scale for kink in h.kinks()]

    def piece(lo, hi, fn):
        # restrict to |u| >= u_min
        parts = []
        for a, b in ((lo, min(hi, -u_min)), (max(lo, u_min), hi)):
            if b > a:
                parts.append(integrate(lambda u: fn(u) * h(scale * u), a, b, kinks,
                                       max_width=(b - a) / 2.0, order=order))
        return math.fsum(parts)

    contributions = []
    if v >= dom.R:
        constant = float(np.sum(lattice_sums(dom.f, [y, -y], math.sqrt(v), tol))) * v ** beta
        contributions.append(constant * piece(-A, A, lambda u: np.ones_like(u)))

    def coset_integral(item):
        c, d, lo, hi = item
        shift = d * y

        def fn(u):
            flat = np.ravel(u)
            v_gamma = v / ((c * flat + d) ** 2 + (c * v) ** 2)
            sums = lattice_sums(dom.f, np.broadcast_to(shift, (flat.size, k)), np.sqrt(v_gamma), tol)
            return (sums * v_gamma ** beta).reshape(np.shape(u))

        return piece(lo, hi, fn)

    cosets = list(_coset_intervals(v, dom.R, A))
    logger.debug("F_R horocycle integral at v=%g: %d cosets reach height %g", v, len(cosets), dom.R)
    contributions.extend(ordered_map(coset_integral, cosets, workers))
    return scale * math.fsum(contributions)


def horocycle_limit(psi1: TestPsi, psi2: TestPsi, h: WeightH, k: int64) -> float64:
    """Two-term limit of the theta-pair horocycle average: B_k times the smoothed limit."""
    return unit_ball_volume(k) * limit_smoothed(psi1, psi2, h, k)


def horocycle_average(probe: HorocycleProbe,
                      spec: TorusSpec,
                      psi1: TestPsi | None = None,
                      psi2: TestPsi | None = None,
                      *,
                      tail_tol: float64 = Defaults.PSI_TAIL_TOL,
                      workers: int = Defaults.WORKERS) -> float64:
    """v^sigma int F(u + iv, 0; (0, alpha)) h(v^sigma u) du for the probe's target."""
    v, sigma, h = probe.v, probe.sigma, probe.h
    scale = v ** sigma
    if probe.target == "constant":
        A = h.half_width / scale
        kinks = [kink / scale for kink in h.kinks()]
        return scale * integrate(lambda u: h(scale * u), -A, A, kinks)
    if probe.target == "F_R":
        return horocycle_dominating_integral(probe.dominating, spec.alpha, v, sigma, h,
                                             workers=workers)
    if psi1 is None or psi2 is None:
        raise DomainError("the theta-pair target needs psi1 and psi2")
    if abs(sigma - (0.5 * spec.k - 1)) > 1e-12:
        raise DomainError(f"the theta-pair target needs sigma = k/2 - 1, got {sigma}")
    lam = 1.0 / v
    r_cut = max(psi1.tail_radius(tail_tol), psi2.tail_radius(tail_tol))
    slice = enumerate_spectrum(spec, r_cut * lam, workers=workers)
    lambdas = psi_window(slice, psi1, psi2, lam, tail_tol)
    result = horocycle_theta_pair(lambdas, psi1, psi2, h, v, sigma, spec.k, workers=workers)
    logger.info("horocycle average at v=%g: %.10g (limit %.6g)", v, result.value,
                horocycle_limit(psi1, psi2, h, spec.k))
    return result.value


def cusp_contribution(dom: DominatingFn,
                      alpha,
                      v: float64,
                      h: WeightH,
                      eps: float64 = Defaults.CUSP_EPS,
                      *,
                      workers: int = Defaults.WORKERS) -> float64:
    """v^(k/2-1) int_{|u| > v^(1-eps)} F_R(u + iv; (0, alpha)) h(v^(k/2-1) u) du"""
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    k = len(alpha)
    return horocycle_dominating_integral(dom, alpha, v, 0.5 * k - 1, h, v ** (1.0 - eps),
                                         workers=workers)


# ------------------------------------------------------------- block sums

BLOCK_CHUNK = 1 << 18


def block_sum(alpha,
              D: int64,
              T: float64,
              f: TestPsi,
              *,
              tol: float64 = Defaults.THETA_TRUNC_TOL,
              workers: int = Defaults.WORKERS) -> float64:
    """sum_{d=1}^{D} sum_m f(T (d alpha + m)) for f(w) = psi(|w|^2)."""
    if D < 1:
        raise DomainError(f"block sums need D >= 1, got {D}")
    if not T > 1:
        raise DomainError(f"block sums need T > 1, got {T}")
    alpha = np.asarray(alpha, dtype=float)

    def chunk(bounds):
        start, stop = bounds
        d = np.arange(start, stop, dtype=float)
        shifts = d[:, None] * alpha[None, :]
        return float(np.sum(lattice_sums(f, shifts, T, tol)))

    ranges = [(s, min(s + BLOCK_CHUNK, D + 1)) for s in range(1, D + 1, BLOCK_CHUNK)]
    return math.fsum(ordered_map(chunk, ranges, workers))


def block_regime(D: int64, T: float64, kappa: float64, eps: float64) -> str:
    """Which of the three block-sum bounds applies to (D, T)."""
    threshold = T ** (1.0 / (kappa - 1.0))
    if D <= T ** eps:
        return "decay"
    if D <= threshold:
        return "bounded"
    return "linear"
