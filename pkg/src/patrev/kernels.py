"""Imaging kernels of the spectral time-reversal functional.

The time-reversal image of an initial pressure phi is diagonal in k:
I_hat = M(k) phi_hat with the dimensionless multiplier

    M(k) = 2 sum_j (A_j lambda_j)^2
         + 4 sum_{j<l} A_j A_l lambda_j lambda_l cosh((lambda_j - lambda_l) T).

For a real conjugate pair (water-like media) M splits into real pieces,
stored here with the d-dimensional convolution normalization (2 pi)^{d/2}:

    zeta1_hat = (2 sum_j (A_j l_j)^2 + 4 |A_1 l_1|^2) / (2 pi)^{d/2}
    zeta2_hat = 8 |A_1 l_1|^2 sin^2(theta T) / (2 pi)^{d/2}
    zeta3_hat = relaxation-oscillation cross terms, carrying the factor
                cosh(Re(lambda0 - lambda1) T)

Re(lambda0 - lambda1) T reaches ~1e6 at physical tissue scale, far beyond
double range, so zeta3 is computed exclusively in a mantissa/log-scale
representation (ScaledComplex) and converting it to a plain float is an
explicit, fallible step.  The default imaging path excludes zeta3; the
small-wavenumber kernel eta0_hat = 2 sum_j (A_j l_j)^2 / (2 pi)^{d/2} with DC
gain (2 pi)^{d/2} eta0_hat(0) = 2 (1 - tau1/tau0)^2 + 1 describes the image on
the reconstruction region.

At wavenumbers below the root-degeneracy threshold the amplitude products are
replaced by their analytic limits A0 l0 -> 1 - tau1/tau0 and
A1 l1, A2 l2 -> -1/2, with theta ~ c0 k kept k-dependent for the oscillatory
factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .medium import Medium
from . import spectral

__all__ = [
    "EXP_REAL_LIMIT",
    "ScaledComplex",
    "KernelSample",
    "ModeProducts",
    "ComplexRegimeError",
    "ScaleOverflowError",
    "mode_products",
    "zeta_hats",
    "zeta_arrays",
    "image_multiplier",
    "multiplier_grid",
    "eta0_hat",
    "eta0_grid",
    "dc_constant",
    "eta12_hats",
    "small_k_multiplier",
    "kernel_table",
]

#: largest exponent exp() can take before overflowing a double
EXP_REAL_LIMIT = 700.0


class ComplexRegimeError(ValueError):
    """The Cardano intermediate C is complex at some requested wavenumber.

    The real-valued zeta/eta decomposition (and with it the imaging path)
    is only defined for media whose conjugate-pair structure is real.
    """


class ScaleOverflowError(OverflowError):
    """A ScaledComplex value does not fit a plain double.

    For the imaging multiplier this signals that the zeta3 term is not
    representable at the requested physical scale and the small-wavenumber
    kernel path must be used instead.
    """


@dataclass(frozen=True)
class ScaledComplex:
    """A complex number stored as mantissa * exp(log_scale).

    Arithmetic results and ``normalized()`` keep ``0.5 <= |mantissa| <= 2``
    (zero is stored as mantissa 0, log_scale 0).  Kernel constructors return
    raw values whose log_scale carries exactly Re(lambda0 - lambda1) * T with
    the bounded prefactor as mantissa; normalize explicitly when the
    magnitude contract matters.
    """

    mantissa: complex
    log_scale: float

    @classmethod
    def zero(cls) -> "ScaledComplex":
        return cls(0j, 0.0)

    @classmethod
    def from_complex(cls, value: complex) -> "ScaledComplex":
        return cls(complex(value), 0.0).normalized()

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def normalized(self) -> "ScaledComplex":
        if self.mantissa == 0:
            return ScaledComplex(0j, 0.0)
        mag = abs(self.mantissa)
        return ScaledComplex(self.mantissa / mag, self.log_scale + math.log(mag))

    def log_magnitude(self) -> float:
        """log|value|; -inf for zero."""
        if self.mantissa == 0:
            return -math.inf
        return self.log_scale + math.log(abs(self.mantissa))

    def to_complex(self) -> complex:
        """Plain complex value; raises ScaleOverflowError if unrepresentable."""
        if self.mantissa == 0:
            return 0j
        lm = self.log_magnitude()
        if lm > EXP_REAL_LIMIT:
            raise ScaleOverflowError(
                f"log magnitude {lm:.3g} exceeds double range; keep the value "
                "in scaled form or switch to the small-wavenumber kernel path"
            )
        phase = self.mantissa / abs(self.mantissa)
        return phase * math.exp(lm)

    def to_real(self, imag_tol: float = 1e-9) -> float:
        z = self.to_complex()
        if abs(z.imag) > imag_tol * max(abs(z), 1e-300):
            raise ValueError(f"value {z!r} is not real to {imag_tol:g} relative")
        return z.real

    def __mul__(self, other) -> "ScaledComplex":
        if isinstance(other, ScaledComplex):
            return ScaledComplex(
                self.mantissa * other.mantissa, self.log_scale + other.log_scale
            ).normalized()
        return ScaledComplex(self.mantissa * complex(other), self.log_scale).normalized()

    __rmul__ = __mul__

    def __add__(self, other: "ScaledComplex") -> "ScaledComplex":
        if not isinstance(other, ScaledComplex):
            other = ScaledComplex.from_complex(other)
        if self.mantissa == 0:
            return other.normalized()
        if other.mantissa == 0:
            return self.normalized()
        # align on the larger scale so the shifted mantissa can only underflow
        base = max(self.log_scale, other.log_scale)
        m = self.mantissa * math.exp(self.log_scale - base) + other.mantissa * math.exp(
            other.log_scale - base
        )
        return ScaledComplex(m, base).normalized()

    def __neg__(self) -> "ScaledComplex":
        return ScaledComplex(-self.mantissa, self.log_scale)


@dataclass(frozen=True)
class KernelSample:
    """All kernel values at one wavenumber (normalization (2 pi)^{d/2}).

    ``multiplier`` is the zeta3-excluded real multiplier
    (2 pi)^{d/2} (zeta1_hat - zeta2_hat); the full multiplier adds the scaled
    zeta3 term through ``image_multiplier``.
    """

    k: float
    zeta1_hat: float
    zeta2_hat: float
    zeta3_hat: ScaledComplex
    eta0_hat: float
    eta1_hat: ScaledComplex
    eta2_hat: ScaledComplex
    multiplier: float


@dataclass(frozen=True)
class ModeProducts:
    """Per-k roots and amplitude products with the small-k limit patch applied.

    p_j = A_j lambda_j; below the degeneracy threshold the products carry
    their analytic limits and lambda/theta their leading-order forms, so every
    array is usable down to k = 0.
    """

    k: np.ndarray
    lambda0: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    theta: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    real_c_regime: np.ndarray
    limit_patched: np.ndarray

    def require_real_regime(self):
        if not bool(np.all(self.real_c_regime)):
            bad = self.k[~self.real_c_regime]
            raise ComplexRegimeError(
                f"complex Cardano C at {bad.size} wavenumber(s), e.g. "
                f"k = {bad.flat[0]:.6g}; the real-valued kernel decomposition "
                "is undefined for this medium"
            )


def mode_products(medium: Medium, k) -> ModeProducts:
    """Roots and A_j lambda_j products over a k grid, limit-patched near k = 0."""
    k = np.asarray(k, dtype=float)
    grid = spectral.roots_grid(medium, k)
    a0, a1, a2, degen = spectral.amplitudes_grid(medium, grid)
    lam0, lam1, lam2 = grid.lambda0, grid.lambda1, grid.lambda2
    theta = grid.theta
    p0 = a0 * lam0
    p1 = a1 * lam1
    p2 = a2 * lam2
    if np.any(degen):
        r = medium.tau_ratio
        c0, t0, t1 = medium.c0, medium.tau0, medium.tau1
        # analytic limits: A0 l0 -> 1 - r, A1 l1 = A2 l2 -> -1/2; roots keep
        # their leading k dependence so oscillatory factors stay correct
        lam0_lim = 1.0 / t0 - c0 * c0 * t1 * k * k + 0j
        mu_lim = 0.5 * c0 * c0 * (t1 - t0) * k * k
        th_lim = c0 * k
        p0 = np.where(degen, (1.0 - r) + 0j, p0)
        p1 = np.where(degen, -0.5 + 0j, p1)
        p2 = np.where(degen, -0.5 + 0j, p2)
        lam0 = np.where(degen, lam0_lim, lam0)
        lam1 = np.where(degen, mu_lim + 1j * th_lim, lam1)
        lam2 = np.where(degen, mu_lim - 1j * th_lim, lam2)
        theta = np.where(degen, th_lim + 0j, theta)
    return ModeProducts(
        k=k,
        lambda0=lam0,
        lambda1=lam1,
        lambda2=lam2,
        theta=theta,
        p0=p0,
        p1=p1,
        p2=p2,
        real_c_regime=grid.real_c_regime,
        limit_patched=degen,
    )


def _norm(d: int) -> float:
    if d not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    return (2.0 * math.pi) ** (d / 2.0)


def zeta_arrays(medium: Medium, k, T: float, d: int = 3):
    """(zeta1_hat, zeta2_hat, zeta3_mantissa, zeta3_log_scale) over a k grid.

    zeta3 value = mantissa * exp(log_scale) with log_scale =
    |Re(lambda0 - lambda1)| * T (equal to Re(lambda0 - lambda1) T for media
    where the relaxation root dominates).  Requires the real-C regime and
    T > 0.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    norm = _norm(d)
    mp = mode_products(medium, k)
    mp.require_real_regime()
    p0 = mp.p0.real
    p1 = mp.p1
    th = mp.theta.real
    sum_sq = p0 * p0 + 2.0 * (p1 * p1).real  # sum_j (A_j l_j)^2, real
    abs_p1_sq = (p1 * np.conj(p1)).real
    z1 = (2.0 * sum_sq + 4.0 * abs_p1_sq) / norm
    z2 = 8.0 * abs_p1_sq * np.sin(th * T) ** 2 / norm
    dlam = mp.lambda0 - mp.lambda1
    x = dlam.real * T
    y = dlam.imag * T
    ax = np.abs(x)
    decay = np.exp(-2.0 * ax)
    cosh_m = 0.5 * (1.0 + decay)                 # cosh(x) = e^{|x|} cosh_m
    sinh_m = 0.5 * (1.0 - decay) * np.sign(x)    # sinh(x) = e^{|x|} sinh_m
    z3_m = (
        8.0
        * p0
        * (p1.real * np.cos(y) * cosh_m - p1.imag * np.sin(y) * sinh_m)
        / norm
    )
    return z1, z2, z3_m, ax


def zeta_hats(medium: Medium, k: float, T: float, d: int = 3) -> KernelSample:
    """All kernel values at one wavenumber (real-C regime only)."""
    karr = np.asarray([float(k)])
    z1, z2, z3_m, z3_ls = zeta_arrays(medium, karr, T, d)
    e0 = eta0_grid(medium, karr, d)
    e1, e2 = eta12_hats(medium, k, T, d)
    norm = _norm(d)
    return KernelSample(
        k=float(k),
        zeta1_hat=float(z1[0]),
        zeta2_hat=float(z2[0]),
        zeta3_hat=ScaledComplex(complex(z3_m[0]), float(z3_ls[0])),
        eta0_hat=float(e0[0]),
        eta1_hat=e1,
        eta2_hat=e2,
        multiplier=float(norm * (z1[0] - z2[0])),
    )


def eta0_grid(medium: Medium, k, d: int = 3) -> np.ndarray:
    """Small-wavenumber kernel eta0_hat = 2 sum_j (A_j l_j)^2 / (2 pi)^{d/2}."""
    mp = mode_products(medium, k)
    mp.require_real_regime()
    sum_sq = mp.p0.real ** 2 + 2.0 * (mp.p1 * mp.p1).real
    return 2.0 * sum_sq / _norm(d)


def eta0_hat(medium: Medium, k: float, d: int = 3) -> float:
    """eta0_hat at one wavenumber; uses the analytic limit below the
    degeneracy threshold (in particular at k = 0)."""
    return float(eta0_grid(medium, np.asarray([float(k)]), d)[0])


def dc_constant(medium: Medium) -> float:
    """DC gain (2 pi)^{d/2} eta0_hat(0) = 2 (1 - tau1/tau0)^2 + 1.

    This is the factor by which the zeta3-excluded image scales a
    band-limited phantom on the reconstruction region; it tends to 1 as
    kappa1 -> 0.
    """
    r = medium.tau_ratio
    return 2.0 * (1.0 - r) ** 2 + 1.0


def eta12_hats(medium: Medium, k: float, T: float, d: int = 3):
    """Auxiliary kernels eta1_hat, eta2_hat as ScaledComplex.

    eta1_hat = (4 A0 l0 / (2 pi)^{d/2}) e^{Re(l0 - l1) T} Im(A1 l1) and
    eta2_hat the same with Re(A1 l1); both returned with log_scale carrying
    exactly Re(lambda0 - lambda1) T.  Under cosh ~ sinh ~ e^x/2 they satisfy
    zeta3_hat ~ eta1_hat sin(c0 k T) + eta2_hat cos(c0 k T) for k << k_c
    (sign as follows from the lambda1 = mu + i theta labelling).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    mp = mode_products(medium, np.asarray([float(k)]))
    mp.require_real_regime()
    pref = 4.0 * mp.p0.real[0] / _norm(d)
    x = float((mp.lambda0 - mp.lambda1).real[0] * T)
    e1 = ScaledComplex(complex(pref * mp.p1.imag[0]), x)
    e2 = ScaledComplex(complex(pref * mp.p1.real[0]), x)
    return e1, e2


def small_k_multiplier(medium: Medium, k: float) -> float:
    """Multiplier of the small-wavenumber image I0 = eta0 * phi:
    (2 pi)^{d/2} eta0_hat(k), dimension independent."""
    mp = mode_products(medium, np.asarray([float(k)]))
    mp.require_real_regime()
    return float(2.0 * (mp.p0.real[0] ** 2 + 2.0 * (mp.p1[0] ** 2).real))


def multiplier_grid(medium: Medium, k, T: float, include_zeta3: bool = False) -> np.ndarray:
    """Dimensionless image multiplier M(k) over a k grid.

    With include_zeta3 the scaled zeta3 term is converted to plain doubles,
    raising ScaleOverflowError where exp(log_scale) does not fit (physical
    tissue scale); the zeta3-excluded multiplier is always finite and real.
    """
    z1, z2, z3_m, z3_ls = zeta_arrays(medium, k, T, d=3)
    norm = _norm(3)
    m = norm * (z1 - z2)
    if include_zeta3:
        nonzero = z3_m != 0
        logmag = np.where(
            nonzero, z3_ls + np.log(np.abs(np.where(nonzero, z3_m, 1.0))), -np.inf
        )
        if np.any(logmag > EXP_REAL_LIMIT):
            raise ScaleOverflowError(
                "zeta3 exceeds double range on this grid "
                f"(max log magnitude {np.max(logmag):.3g}); use the "
                "small-wavenumber kernel path instead"
            )
        # reassemble as sign * exp(log magnitude): exp(z3_ls) alone may
        # overflow even when the product is representable
        z3 = np.where(nonzero, np.sign(z3_m) * np.exp(logmag), 0.0)
        m = m + norm * z3
    return m


def image_multiplier(medium: Medium, k: float, T: float, include_zeta3: bool = False) -> float:
    """M(k) at one wavenumber; see multiplier_grid."""
    return float(multiplier_grid(medium, np.asarray([float(k)]), T, include_zeta3)[0])


def kernel_table(medium: Medium, k, T: float, d: int = 3):
    """Column dict for CSV export of the kernel curves over a k grid."""
    k = np.asarray(k, dtype=float)
    z1, z2, z3_m, z3_ls = zeta_arrays(medium, k, T, d)
    e0 = eta0_grid(medium, k, d)
    m = multiplier_grid(medium, k, T, include_zeta3=False)
    return {
        "k": k,
        "zeta1": z1,
        "zeta2": z2,
        "zeta3_mantissa": z3_m,
        "zeta3_logscale": z3_ls,
        "eta0": e0,
        "multiplier_no_zeta3": m,
    }
