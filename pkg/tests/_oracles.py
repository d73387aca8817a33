"""Independent reference computations used by the tests.

Everything here deliberately avoids the production code paths: Gaussian
quantities come from closed forms and scipy.quad, the Wigner reference
from direct numerical integration of the defining double integral in the
coherent-state representation.
"""

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

VAC_SIGMA = 0.5  # vacuum quadrature standard deviation, z1 = (a + a^dag)/2


def gauss_pdf(z, mu, sigma=VAC_SIGMA):
    return np.exp(-((z - mu) ** 2) / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))


def gauss_cdf(z, mu, sigma=VAC_SIGMA):
    return 0.5 * (1 + erf((z - mu) / (sigma * np.sqrt(2))))


def coherent_pi(z_c, alpha):
    """Post-selection efficiency of the +/- alpha coherent mixture."""
    lo = gauss_cdf(-z_c, alpha) + gauss_cdf(-z_c, -alpha)
    hi = (1 - gauss_cdf(z_c, alpha)) + (1 - gauss_cdf(z_c, -alpha))
    return 0.5 * (lo + hi)


def coherent_theta(z_c, alpha):
    return gauss_cdf(-z_c, alpha) / coherent_pi(z_c, alpha)


def binary_entropy(q):
    q = np.clip(q, 1e-300, 1 - 1e-16)
    return -(q * np.log2(q) + (1 - q) * np.log2(1 - q))


def coherent_mutual_information(z_c, alpha):
    """Post-selected information of the Gaussian pair via scipy.quad."""

    def integrand(z):
        p = gauss_pdf(z, alpha)
        m = gauss_pdf(z, -alpha)
        s = p + m
        if s <= 0:
            return 0.0
        return s * (1 - binary_entropy(p / s))

    upper, _ = quad(integrand, z_c, 12, limit=200)
    lower, _ = quad(integrand, -12, -z_c, limit=200)
    return (upper + lower) / (2 * coherent_pi(z_c, alpha))


def coherent_collision(alpha):
    def integrand(z):
        p = gauss_pdf(z, alpha)
        m = gauss_pdf(z, -alpha)
        s = p + m
        if s <= 0:
            return 0.0
        return (p * p + m * m) / s

    val, _ = quad(integrand, -14, 14, limit=400)
    return 0.5 * val


def coherent_wedge_e0(alpha_half):
    """Mass of the product Gaussian pair in the wedge z1 >= |z2|."""

    def integrand(z):
        return gauss_pdf(z, alpha_half) * (gauss_cdf(z, 0) - gauss_cdf(-z, 0))

    val, _ = quad(integrand, 0, 12, limit=200)
    return val


def coherent_wedge_flip(alpha_half):
    def integrand(z):
        return gauss_pdf(-z, alpha_half) * (gauss_cdf(z, 0) - gauss_cdf(-z, 0))

    val, _ = quad(integrand, 0, 12, limit=200)
    return val


def wigner_direct(amps, beta, half_width=6.5, step=0.05):
    """Wigner value from the defining coherent-representation integral.

    Numerically integrates e^{2|b|^2} Int d^2z/pi^2 <-z|rho|z>
    e^{-2(b* z - b z*)} on a square grid and rescales by the fixed factor
    2 that normalizes the unit-integral convention.
    """
    amps = np.asarray(amps, dtype=complex)
    pts = np.arange(-half_width, half_width + step / 2, step)
    zr, zi = np.meshgrid(pts, pts, indexing="ij")
    z = zr + 1j * zi
    flat = z.ravel()

    fact = 1.0
    bra = np.zeros(flat.size, dtype=complex)   # <-z|psi> without the Gaussian
    ket = np.zeros(flat.size, dtype=complex)   # <psi|z> without the Gaussian
    minus_conj = -np.conj(flat)
    conj = np.conj(flat)
    pow_m = np.ones(flat.size, dtype=complex)
    pow_k = np.ones(flat.size, dtype=complex)
    for n, c in enumerate(amps):
        if n > 0:
            fact *= n
            pow_m = pow_m * minus_conj
            pow_k = pow_k * conj
        bra += c * pow_m / np.sqrt(fact)
        ket += np.conj(c) * np.conj(pow_k) / np.sqrt(fact)
    gauss = np.exp(-np.abs(flat) ** 2)
    kernel = np.exp(-2 * (np.conj(beta) * flat - beta * np.conj(flat)))
    integrand = (bra * ket * gauss * kernel).reshape(z.shape)
    inner = np.trapezoid(integrand, pts, axis=1)
    total = np.trapezoid(inner, pts)
    return 2.0 * float(np.real(np.exp(2 * abs(beta) ** 2) * total / np.pi**2))


def spasscs_norm_constant(alpha, r):
    """<(n+1)^2> of the amplitude-squeezed coherent state, closed form.

    Fourth-moment bookkeeping for the Gaussian state with z1 variance
    e^{-2r}/4 and mean alpha*e^{-r} (the family construction squeezes the
    displaced vacuum).
    """
    c, s = np.cosh(r), np.sinh(r)
    e2, e4 = np.exp(-2 * r), np.exp(-4 * r)
    mean_n = s**2 + alpha**2 * e2
    mean_n2 = (e4 * alpha**4 + (e4 + 2 * s**2 * e2) * alpha**2
               + 2 * c**2 * s**2 + s**4)
    return mean_n2 + 2 * mean_n + 1
