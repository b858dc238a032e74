"""Numeric tolerances and resource budgets used across the package.

Every knob that a computation exposes as a keyword argument takes its default
from here, and RunConfig surfaces all of them so a persisted run records the
values it used.
"""


class Defaults:
    """Default tolerances and budgets"""

    # Largest predicted spectrum size (entries) before enumeration refuses
    MEMORY_BUDGET = 200_000_000

    # Tail tolerance for the test functions psi beyond the spectrum cutoff
    PSI_TAIL_TOL = 1e-12

    # Envelope tolerance for truncating lattice sums in theta sums and F_R
    THETA_TRUNC_TOL = 1e-14

    # |h_hat| below which the inner pair sum may be cut
    HHAT_TRUNC_TOL = 1e-14

    # Spacing below which irrational spectra report a near-tie
    NEAR_TIE_TOL = 1e-9

    # Gauss-Legendre order per panel
    GL_ORDER = 16

    # Widest panel allowed regardless of the phase frequency
    MAX_PANEL_WIDTH = 0.25

    # Most panels a single theta integral may use
    PANEL_BUDGET = 2_000_000

    # Distance from pi*Z (phi != 0) at which the U^phi kernel is refused
    KERNEL_SINGULAR_TOL = 1e-6

    # Smallest cusp height accepted by the fundamental-domain reduction
    UNDERFLOW_V = 1e-300

    # Exact spectrum keys q^2 * lambda must stay below this
    EXACT_KEY_LIMIT = 2 ** 62

    # Largest exhaustive diophantine scan
    SCAN_QMAX_LIMIT = 1_000_000

    # Monte-Carlo check of the L1 mean of F_R
    MC_SEED = 20021231
    MC_SAMPLES = 200_000

    # Horocycle cutoff exponent for the cusp-contribution diagnostic
    CUSP_EPS = 0.5

    # Worker threads (1 = serial)
    WORKERS = 1

    @classmethod
    def as_dict(cls) -> dict:
        """All defaults by lower-case name, for config echo."""
        return {name.lower(): value for name, value in vars(cls).items()
                if name.isupper()}
