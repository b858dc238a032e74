"""theta.py

Jacobi theta sums on G^k and the theta-integral form of the smoothed pair
correlation.

For f(w) = psi(|w|^2) the theta sum is

    Theta_f(tau, phi; xi) = v^(k/4) sum_m f_phi((m - y) v^1/2) e(|m - y|^2 u / 2 + m.x)

where f_phi = U^phi f is the metaplectic image of f. For the exponential
polynomial family f_phi has a closed form (Gaussians go to Gaussians, powers
of r become s-derivatives), which is what the theta sums use; the Bessel
quadrature of the radial kernel integral is kept as an independent path.

Along the horocycle (u + i/lam, 0; (0, alpha)) the theta sum is an exponential
sum over the spectrum, and

    R2(psi1, psi2, h, lam) = (1/B_k) lam^-(k/2-1) int Theta_f conj(Theta_g) h(lam^-(k/2-1) u) du

exactly. r2_theta_integral evaluates the right-hand side by panel quadrature.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .IwasawaCoordinates import GroupPoint
from .defaults import Defaults
from .errors import DomainError
from .paircorr import psi_window
from .quadrature import check_panel_budget, gauss_legendre, richardson, segments
from .spectrum import SpectrumSlice, enumerate_points, enumerate_spectrum
from .torus import TestPsi, TorusSpec, WeightH, unit_ball_volume
from .types import ComplexArray, FloatArray, float64, int64
from .workers import ordered_map

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
# complex entries per panel chunk in the theta-integral matmul
CHUNK_ENTRIES = 1 << 22


def e(z):
    """e(z) = exp(2 pi i z)"""
    return np.exp(2j * math.pi * np.asarray(z))


def maslov_index(phi: float64) -> int64:
    """sigma_phi = 2 nu + 1 for nu pi < phi < (nu + 1) pi"""
    return 2 * math.floor(phi / math.pi) + 1


def _sin_cos(phi: float64) -> tuple[float64, float64]:
    # exact values on the quarter turns
    quarter = phi / HALF_PI
    if quarter == round(quarter):
        n = int(round(quarter)) % 4
        return [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)][n]
    return math.sin(phi), math.cos(phi)


def _check_phi(phi: float64, singular_tol: float64) -> None:
    if phi == 0.0:
        return
    distance = abs(phi - math.pi * round(phi / math.pi))
    if distance < singular_tol:
        raise DomainError(
            f"phi={phi} is within {singular_tol} of the kernel singularity at a multiple of pi")


def u_phi_closed_form(psi: TestPsi,
                      phi: float64,
                      w_norm,
                      k: int64,
                      *,
                      singular_tol: float64 = Defaults.KERNEL_SINGULAR_TOL):
    """f_phi(w) for f(w) = psi(|w|^2), as a function of |w| (vectorized).

    For the term exp(-pi s r) the kernel integral is Gaussian:
        e(-k sigma/8) |sin phi|^(-k/2) e(|w|^2 cot phi / 2) A^(-k/2) exp(-beta / A)
    with A = s - i cot phi and beta = pi |w|^2 / sin^2 phi. Powers r^p are
    (-1/pi)^p d^p/ds^p of it.
    """
    w = np.asarray(w_norm, dtype=float)
    if phi == 0.0:
        return psi(w * w).astype(complex)
    _check_phi(phi, singular_tol)
    sin, cos = _sin_cos(phi)
    cot = cos / sin
    nu = 0.5 * k
    beta = math.pi * w * w / (sin * sin)
    prefactor = (np.exp(-2j * math.pi * k * maslov_index(phi) / 8.0)
                 * abs(sin) ** (-nu) * np.exp(1j * math.pi * w * w * cot))

    total = np.zeros(w.shape, dtype=complex)
    for c, s, p in psi.terms:
        t = 1.0 / complex(s, -cot)
        base = t ** nu * np.exp(-beta * t)
        # d/dA = -t^2 d/dt acting on sum_j a_j t^(nu + j) exp(-beta t)
        coeffs = [np.ones(w.shape, dtype=complex)]
        for _ in range(p):
            new = [np.zeros(w.shape, dtype=complex) for _ in range(len(coeffs) + 2)]
            for j, a in enumerate(coeffs):
                new[j + 1] += -(nu + j) * a
                new[j + 2] += beta * a
            coeffs = new
        series = sum(a * t ** j for j, a in enumerate(coeffs))
        total += c * (-1.0 / math.pi) ** p * series * base
    return prefactor * total


def u_phi_transform(psi: TestPsi,
                    phi: float64,
                    w_norm: float64,
                    k: int64,
                    *,
                    singular_tol: float64 = Defaults.KERNEL_SINGULAR_TOL,
                    epsabs: float64 = 1e-13) -> complex:
    """f_phi at radius w_norm by quadrature of the radial kernel integral.

    phi = 0 is the identity and phi = pi/2 (mod 2 pi) uses the exact Fourier
    branch; otherwise the angular integral becomes a Bessel J_(k/2-1) kernel
    and the remaining radial integral is done adaptively.
    """
    if phi == 0.0:
        return complex(psi(w_norm * w_norm))
    _check_phi(phi, singular_tol)
    sin, cos = _sin_cos(phi)
    if cos == 0.0:
        return complex(u_phi_closed_form(psi, phi, w_norm, k))
    cot = cos / sin
    nu = 0.5 * k
    rho = abs(w_norm) / abs(sin)
    r_max = math.sqrt(psi.tail_radius(1e-17))

    if rho == 0.0:
        sphere = 2.0 * math.pi ** nu / math.gamma(nu)

        def radial(r):
            return psi(r * r) * np.exp(1j * math.pi * r * r * cot) * r ** (k - 1)
    else:
        sphere = 2.0 * math.pi * rho ** (1.0 - nu)

        def radial(r):
            return (psi(r * r) * np.exp(1j * math.pi * r * r * cot)
                    * special.jv(nu - 1.0, 2.0 * math.pi * rho * r) * r ** nu)

    real, _ = integrate.quad(lambda r: float(np.real(radial(r))), 0.0, r_max,
                             limit=500, epsabs=epsabs, epsrel=1e-12)
    imag, _ = integrate.quad(lambda r: float(np.imag(radial(r))), 0.0, r_max,
                             limit=500, epsabs=epsabs, epsrel=1e-12)
    prefactor = (np.exp(-2j * math.pi * k * maslov_index(phi) / 8.0)
                 * abs(sin) ** (-nu) * np.exp(1j * math.pi * w_norm * w_norm * cot))
    return complex(prefactor * sphere * complex(real, imag))


def l2_norm_squared(fn, k: int64, r_max: float64) -> float64:
    """int_{R^k} |F(|w|)|^2 dw = k B_k int_0^r_max |F(r)|^2 r^(k-1) dr"""
    value, _ = integrate.quad(lambda r: abs(fn(r)) ** 2 * r ** (k - 1), 0.0, r_max,
                              limit=200, epsabs=1e-14)
    return k * unit_ball_volume(k) * value


def truncation_radius(psi: TestPsi,
                      phi: float64,
                      k: int64,
                      tol: float64 = Defaults.THETA_TRUNC_TOL) -> float64:
    """Radius W beyond which |f_phi(w)| <= tol.

    Each Gaussian term of f_phi decays like exp(-pi s_phi |w|^2) with
    s_phi = s / (s^2 sin^2 phi + cos^2 phi); the radius is located on a
    radial grid of the closed form.
    """
    if phi == 0.0:
        return math.sqrt(psi.tail_radius(tol))
    sin, cos = _sin_cos(phi)
    rate = min(s / (s * s * sin * sin + cos * cos) for _, s, _ in psi.terms)
    scale = sum(abs(c) for c, _, _ in psi.terms) + 1.0
    r_max = 2.0 * math.sqrt(math.log(scale / tol) / (math.pi * rate)) + 2.0
    while True:
        r = np.linspace(0.0, r_max, 4097)
        above = np.nonzero(np.abs(u_phi_closed_form(psi, phi, r, k)) > tol)[0]
        if above.size == 0:
            return 0.0
        last = above[-1]
        if last < r.size - 64:
            return float(r[min(last + 1, r.size - 1)])
        r_max *= 2.0


# ------------------------------------------------------------------ theta sums

@dataclass(frozen=True)
class ThetaSum:
    value: complex
    truncation_error: float64
    terms: int64
    radius: float64


def theta_sum_report(psi: TestPsi,
                     g: GroupPoint,
                     k: int64 | None = None,
                     *,
                     tol: float64 = Defaults.THETA_TRUNC_TOL,
                     memory_budget: int = Defaults.MEMORY_BUDGET) -> ThetaSum:
    """Theta_f(g) over the lattice points with |(m - y) v^1/2| <= W."""
    k = g.k if k is None else k
    if g.k != k:
        raise DomainError(f"group point has dimension {g.k}, expected {k}")
    v = g.v
    W = truncation_radius(psi, g.phi, k, tol)
    if W == 0.0:
        return ThetaSum(0j, 0.0, 0, 0.0)
    y = np.asarray(g.y, dtype=float)
    y0 = np.floor(y)
    shifted = TorusSpec(k, tuple(y - y0))
    values, _, points = enumerate_points(shifted, W * W / v, with_points=True,
                                         memory_budget=memory_budget)
    m = points + y0.astype(np.int64)
    f = u_phi_closed_form(psi, g.phi, np.sqrt(values * v), k)
    phase = e(0.5 * values * g.u + m.astype(float) @ np.asarray(g.x, dtype=float))
    value = v ** (0.25 * k) * np.sum(f * phase)
    # boundary terms are <= tol each; count them as the error estimate
    error = v ** (0.25 * k) * tol * max(1, values.size)
    return ThetaSum(complex(value), error, int(values.size), W)


def theta_sum(psi: TestPsi, g: GroupPoint, k: int64 | None = None, **kwargs) -> complex:
    """Theta_f(tau, phi; xi) for f(w) = psi(|w|^2)."""
    if not g.v > 0:
        raise DomainError(f"theta sum needs v > 0, got {g.v}")
    return theta_sum_report(psi, g, k, **kwargs).value


def theta_values(psi: TestPsi,
                 tau: complex,
                 phi: float64,
                 xis,
                 k: int64,
                 *,
                 tol: float64 = Defaults.THETA_TRUNC_TOL) -> ComplexArray:
    """Theta_f(tau, phi; xi) for every row of xis (shape (P, 2k))."""
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    u, v = tau.real, tau.imag
    if not v > 0:
        raise DomainError(f"theta sum needs v > 0, got {v}")
    W = truncation_radius(psi, phi, k, tol)
    reach = int(math.ceil(W / math.sqrt(v))) + 1
    axis = np.arange(-reach, reach + 2)
    box = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
    x, y = xis[:, :k], xis[:, k:]
    y0 = np.floor(y)
    d = box[None, :, :] - (y - y0)[:, None, :]
    norms = np.sum(d * d, axis=2)
    inside = norms * v <= W * W
    f = u_phi_closed_form(psi, phi, np.sqrt(norms * v), k)
    m = box[None, :, :] + y0[:, None, :]
    phase = e(0.5 * norms * u + np.einsum("pmk,pk->pm", m, x))
    return v ** (0.25 * k) * np.sum(np.where(inside, f * phase, 0.0), axis=1)


def mean_square_haar(psi1: TestPsi, psi2: TestPsi, k: int64) -> float64:
    """int f g dw = (k/2) B_k int psi1 psi2 r^(k/2-1) dr"""
    return 0.5 * k * unit_ball_volume(k) * psi1.product_moment(psi2, 0.5 * k - 1)


def torus_average_theta_pair(psi1: TestPsi,
                             psi2: TestPsi,
                             tau: complex,
                             phi: float64,
                             k: int64,
                             y_points: int = 8,
                             *,
                             tol: float64 = Defaults.THETA_TRUNC_TOL) -> complex:
    """Average of Theta_f conj(Theta_g) over xi in the torus T^{2k}.

    x is sampled on a grid fine enough to be exact for the trigonometric
    polynomial in x; y uses the periodic trapezoid rule.
    """
    v = tau.imag
    W = max(truncation_radius(psi1, phi, k, tol), truncation_radius(psi2, phi, k, tol))
    reach = int(math.ceil(W / math.sqrt(v))) + 2
    x_points = 2 * reach + 3
    x_axis = np.arange(x_points) / x_points
    y_axis = np.arange(y_points) / y_points
    grids = np.meshgrid(*([x_axis] * k + [y_axis] * k), indexing="ij")
    xis = np.stack(grids, axis=-1).reshape(-1, 2 * k)
    products = []
    for start in range(0, xis.shape[0], 4096):
        rows = xis[start:start + 4096]
        products.append(theta_values(psi1, tau, phi, rows, k, tol=tol)
                        * np.conj(theta_values(psi2, tau, phi, rows, k, tol=tol)))
    return complex(np.mean(np.concatenate(products)))


def cusp_asymptotic(psi1: TestPsi,
                    psi2: TestPsi,
                    g: GroupPoint,
                    *,
                    nearest: bool = False,
                    tol: float64 = Defaults.THETA_TRUNC_TOL) -> complex:
    """v^(k/2) sum_m f_phi((m - y) v^1/2) conj(g_phi(...)), the cusp form of
    Theta_f conj(Theta_g); with nearest=True only the lattice point nearest y."""
    k, v = g.k, g.v
    y = np.asarray(g.y, dtype=float)
    if nearest:
        d = np.round(y) - y
        r = math.sqrt(float(d @ d) * v)
        f = u_phi_closed_form(psi1, g.phi, r, k)
        h = u_phi_closed_form(psi2, g.phi, r, k)
        return complex(v ** (0.5 * k) * f * np.conj(h))
    W = max(truncation_radius(psi1, g.phi, k, tol), truncation_radius(psi2, g.phi, k, tol))
    y0 = np.floor(y)
    values, _, _ = enumerate_points(TorusSpec(k, tuple(y - y0)), W * W / v)
    r = np.sqrt(values * v)
    products = u_phi_closed_form(psi1, g.phi, r, k) * np.conj(u_phi_closed_form(psi2, g.phi, r, k))
    return complex(v ** (0.5 * k) * np.sum(products))


def spectral_theta(slice: SpectrumSlice, psi: TestPsi, lam: float64, u: float64) -> complex:
    """sum_j psi(lambda_j / lam) e(lambda_j u / 2) over the slice."""
    return complex(np.sum(psi(slice.lambdas / lam) * e(0.5 * slice.lambdas * u)))


# ------------------------------------------------------- theta-integral of R2

@dataclass(frozen=True)
class ThetaIntegral:
    value: float64
    error_estimate: float64
    panels: int
    terms: int


def _panel_chunk(lambdas, F, starts, offsets_h, order):
    # Theta at u_p + delta_n = sum_j e(lambda_j u_p / 2) F[j, n]
    E = np.exp(1j * math.pi * starts[:, None] * lambdas[None, :])
    T = E @ F
    theta_f, theta_g = T[:, :order], T[:, order:]
    return math.fsum(np.real(theta_f * np.conj(theta_g) * offsets_h).ravel())


def horocycle_theta_pair(lambdas: FloatArray,
                         psi1: TestPsi,
                         psi2: TestPsi,
                         h: WeightH,
                         v: float64,
                         sigma: float64,
                         k: int64,
                         *,
                         order: int = Defaults.GL_ORDER,
                         max_width: float64 = Defaults.MAX_PANEL_WIDTH,
                         panel_budget: int = Defaults.PANEL_BUDGET,
                         workers: int = Defaults.WORKERS) -> ThetaIntegral:
    """v^sigma int Theta_f conj(Theta_g)(u + iv, 0; (0, alpha)) h(v^sigma u) du.

    lambdas are the eigenvalues |m - alpha|^2 carried by the sum. The
    integrand is conjugate-symmetric in u and h is even, so the integral is
    2 Re int_0^A.
    """
    if h.amplitude == 0.0 or lambdas.size == 0:
        return ThetaIntegral(0.0, 0.0, 0, int(lambdas.size))
    scale = v ** sigma
    A = h.half_width / scale
    weight = v ** (0.25 * k)
    w1 = weight * psi1(lambdas * v)
    w2 = weight * psi2(lambdas * v)
    width = min(max_width, 1.0 / max(float(lambdas[-1]), 1e-300))
    nodes, gl_weights = gauss_legendre(order)
    rows = max(1, CHUNK_ENTRIES // lambdas.size)

    def at_width(panel_width):
        runs = segments(0.0, A, (), panel_width)
        check_panel_budget(runs, panel_budget)
        total = []
        for run in runs:
            offsets = run.width * nodes
            phase = np.exp(1j * math.pi * lambdas[:, None] * offsets[None, :])
            F = np.concatenate([w1[:, None] * phase, w2[:, None] * phase], axis=1)
            starts = run.panel_starts
            chunks = [starts[i:i + rows] for i in range(0, starts.size, rows)]

            def chunk_sum(chunk):
                u = chunk[:, None] + offsets[None, :]
                weights = h(scale * u) * gl_weights[None, :] * run.width
                return _panel_chunk(lambdas, F, chunk, weights, order)

            total.extend(ordered_map(chunk_sum, chunks, workers))
        return 2.0 * scale * math.fsum(total)

    value, error = richardson(at_width, width)
    panels = sum(run.count for run in segments(0.0, A, (), 0.5 * width))
    logger.debug("horocycle theta integral: %d terms, %d panels, halving diff %.3g",
                 lambdas.size, panels, error)
    return ThetaIntegral(value, error, panels, int(lambdas.size))


def r2_theta_integral(psi1: TestPsi,
                      psi2: TestPsi,
                      h: WeightH,
                      lam: float64,
                      spec: TorusSpec,
                      *,
                      slice: SpectrumSlice | None = None,
                      tail_tol: float64 = Defaults.PSI_TAIL_TOL,
                      order: int = Defaults.GL_ORDER,
                      max_width: float64 = Defaults.MAX_PANEL_WIDTH,
                      panel_budget: int = Defaults.PANEL_BUDGET,
                      workers: int = Defaults.WORKERS) -> ThetaIntegral:
    """R2(psi1, psi2, h, lam) from the theta integral at v = 1/lam."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if slice is None:
        r_cut = max(psi1.tail_radius(tail_tol), psi2.tail_radius(tail_tol))
        slice = enumerate_spectrum(spec, r_cut * lam, workers=workers)
    lambdas = psi_window(slice, psi1, psi2, lam, tail_tol)
    k = spec.k
    raw = horocycle_theta_pair(lambdas, psi1, psi2, h, 1.0 / lam, 0.5 * k - 1, k,
                               order=order, max_width=max_width,
                               panel_budget=panel_budget, workers=workers)
    norm = unit_ball_volume(k)
    result = ThetaIntegral(raw.value / norm, raw.error_estimate / norm, raw.panels, raw.terms)
    logger.info("theta-integral R2(psi1, psi2, h, %g) = %.12g (+- %.2g, %d panels)",
                lam, result.value, result.error_estimate, result.panels)
    return result
