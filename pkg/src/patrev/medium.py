"""Physical parameters of a one-relaxation dissipative acoustic medium.

The model is parametrized by a relaxation time ``tau1``, a compressibility
``kappa1``, a density ``rho`` and one of the two sound speeds: the
low-frequency (equilibrium) speed ``c0`` or the high-frequency limit
``c_inf``.  Everything else is derived:

    tau0  = (1 - c0^2 rho kappa1) tau1 = tau1 / (1 + c_inf^2 rho kappa1)
    c_inf = sqrt(tau1/tau0) c0
    k_c   = 2 / (c0 tau1)      (threshold between weakly and strongly
                                dispersed wavenumbers)

``tau0 in (0, tau1]`` is required for a finite wavefront speed; equality
holds only in the dissipation-free case ``kappa1 = 0``.  All quantities are
SI.  ``Medium`` is immutable and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

__all__ = [
    "SPEED_KINDS",
    "RawParams",
    "Medium",
    "UnphysicalMediumError",
    "derive_medium",
    "nondimensional_medium",
    "water_params",
    "raw_params_from_mapping",
    "read_key_value_file",
]

SPEED_KINDS = ("c_infinity", "c_zero")

#: relative tolerance of the internal consistency relations between stored fields
_REL_TOL = 1e-12


class UnphysicalMediumError(ValueError):
    """Raised when the parameters admit no finite wavefront speed (tau0 <= 0)."""


@dataclass(frozen=True)
class RawParams:
    """User-supplied medium parameters.

    ``speed`` is tagged by ``speed_kind``: ``"c_infinity"`` if the
    high-frequency speed is given (the usual tabulated sound speed),
    ``"c_zero"`` for the equilibrium speed appearing in the wave operator.
    """

    tau1: float        # relaxation time [s]
    kappa1: float      # compressibility [m^2/N]
    rho: float         # density [kg/m^3]
    speed: float       # [m/s], meaning set by speed_kind
    speed_kind: str = "c_infinity"

    def __post_init__(self):
        if not self.tau1 > 0:
            raise ValueError(f"tau1 must be positive, got {self.tau1}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.kappa1 < 0:
            raise ValueError(f"kappa1 must be non-negative, got {self.kappa1}")
        if not self.speed > 0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        if self.speed_kind not in SPEED_KINDS:
            raise ValueError(
                f"speed_kind must be one of {SPEED_KINDS}, got {self.speed_kind!r}"
            )


@dataclass(frozen=True)
class Medium:
    """Validated medium with all derived constants.

    Invariants (checked on construction):
      * 0 < tau0 <= tau1, equality only for kappa1 = 0
      * c_inf = sqrt(tau1/tau0) c0        (to 1e-12 relative)
      * tau0 = (1 - c0^2 rho kappa1) tau1 (to 1e-12 relative)
      * k_c = 2/(c0 tau1) exactly as computed from the stored fields
    """

    tau1: float    # relaxation time [s]
    tau0: float    # relaxed time [s]
    c0: float      # equilibrium sound speed [m/s]
    c_inf: float   # high-frequency sound speed [m/s]
    kappa1: float  # compressibility [m^2/N]
    rho: float     # density [kg/m^3]
    k_c: float     # critical wavenumber [1/m]

    def __post_init__(self):
        if not 0 < self.tau0 <= self.tau1:
            raise UnphysicalMediumError(
                f"tau0 must lie in (0, tau1], got tau0={self.tau0}, tau1={self.tau1}"
            )
        if self.kappa1 == 0 and self.tau0 != self.tau1:
            raise ValueError("kappa1 = 0 requires tau0 = tau1 exactly")
        if not math.isclose(
            self.c_inf, math.sqrt(self.tau1 / self.tau0) * self.c0, rel_tol=_REL_TOL
        ):
            raise ValueError("c_inf and c0 are inconsistent with tau1/tau0")
        if not math.isclose(
            self.tau0, (1.0 - self.c0**2 * self.rho * self.kappa1) * self.tau1,
            rel_tol=_REL_TOL,
        ):
            raise ValueError("tau0 inconsistent with c0^2 rho kappa1")
        if self.k_c != 2.0 / (self.c0 * self.tau1):
            raise ValueError("k_c must equal 2/(c0 tau1) exactly")

    @property
    def tau_ratio(self) -> float:
        """tau1/tau0, the dissipation strength entering the moment data."""
        return self.tau1 / self.tau0


def derive_medium(raw: RawParams) -> Medium:
    """Derive the full constant set from raw parameters.

    With ``speed_kind == "c_infinity"``::

        tau0 = tau1 / (1 + c_inf^2 rho kappa1),  c0 = c_inf sqrt(tau0/tau1)

    with ``speed_kind == "c_zero"``::

        tau0 = (1 - c0^2 rho kappa1) tau1,  c_inf = sqrt(tau1/tau0) c0

    The two branches are algebraically equivalent and round-trip to 1e-12.

    Raises
    ------
    UnphysicalMediumError
        If the derived tau0 is not positive (c0^2 rho kappa1 >= 1), which
        would mean an infinite wavefront speed.
    """
    if raw.speed_kind == "c_infinity":
        c_inf = raw.speed
        if raw.kappa1 == 0.0:
            tau0, c0 = raw.tau1, c_inf
        else:
            tau0 = raw.tau1 / (1.0 + c_inf**2 * raw.rho * raw.kappa1)
            c0 = c_inf * math.sqrt(tau0 / raw.tau1)
    else:
        c0 = raw.speed
        if raw.kappa1 == 0.0:
            tau0, c_inf = raw.tau1, c0
        else:
            tau0 = (1.0 - c0**2 * raw.rho * raw.kappa1) * raw.tau1
            if tau0 <= 0.0:
                raise UnphysicalMediumError(
                    f"c0^2 rho kappa1 = {c0**2 * raw.rho * raw.kappa1:.6g} >= 1: "
                    "no finite wavefront speed"
                )
            c_inf = math.sqrt(raw.tau1 / tau0) * c0
    return Medium(
        tau1=raw.tau1,
        tau0=tau0,
        c0=c0,
        c_inf=c_inf,
        kappa1=raw.kappa1,
        rho=raw.rho,
        k_c=2.0 / (c0 * raw.tau1),
    )


def nondimensional_medium(tau0_over_tau1: float) -> Medium:
    """Medium with tau1 = 1, c0 = 1, rho = 1 and the given time ratio.

    Useful for tests of the relaxation-mode terms: with physical parameters
    the factor exp(Re(lambda0 - lambda1) T) is not representable in double
    precision, while at these scales every quantity is.
    """
    if not 0 < tau0_over_tau1 <= 1:
        raise ValueError("tau0/tau1 must lie in (0, 1]")
    kappa1 = 1.0 - tau0_over_tau1  # from tau0 = (1 - c0^2 rho kappa1) tau1
    return derive_medium(
        RawParams(tau1=1.0, kappa1=kappa1, rho=1.0, speed=1.0, speed_kind="c_zero")
    )


def water_params() -> RawParams:
    """Standard parameter set for tissue similar to water at normal temperature."""
    return RawParams(
        tau1=1e-9, kappa1=5e-10, rho=1e3, speed=1500.0, speed_kind="c_infinity"
    )


# -- key/value config files ---------------------------------------------------
#
# Format: one "key = value" pair per line, '#' starts a comment.  The medium
# keys are fixed: tau1_s, kappa1_m2_per_N, rho_kg_per_m3, speed_m_per_s,
# speed_kind (c_infinity | c_zero).

_RAW_KEYS = {
    "tau1_s": "tau1",
    "kappa1_m2_per_N": "kappa1",
    "rho_kg_per_m3": "rho",
    "speed_m_per_s": "speed",
}


def read_key_value_file(path) -> dict[str, str]:
    """Parse a flat key=value text file into a string mapping."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = stripped.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def raw_params_from_mapping(mapping: Mapping[str, str]) -> RawParams:
    """Build RawParams from a key/value mapping using the fixed field names."""
    missing = [k for k in (*_RAW_KEYS, "speed_kind") if k not in mapping]
    if missing:
        raise ValueError(f"missing medium keys: {', '.join(missing)}")
    kwargs = {attr: float(mapping[key]) for key, attr in _RAW_KEYS.items()}
    return RawParams(speed_kind=mapping["speed_kind"], **kwargs)
