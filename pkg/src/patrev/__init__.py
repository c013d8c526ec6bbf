"""patrev: spectral-domain time reversal for photoacoustic tomography in
relaxing dissipative acoustic media.

The package derives medium constants, solves the dispersion cubic in closed
form, assembles the exact and small-wavenumber imaging kernels (with
overflow-safe scaled arithmetic for the relaxation cross terms), and runs
gridded reconstruction experiments against declared tolerances.
"""

from .medium import (
    Medium,
    RawParams,
    UnphysicalMediumError,
    derive_medium,
    nondimensional_medium,
    water_params,
)
from .spectral import (
    Amplitudes,
    CardanoDiagnostics,
    DegenerateRootsError,
    SpectralRoots,
    amplitudes,
    asymptotic_limits,
    cardano_roots,
    dissipation_free_roots,
    small_k_roots,
    solve_vandermonde,
)
from .kernels import (
    ComplexRegimeError,
    KernelSample,
    ScaleOverflowError,
    ScaledComplex,
    dc_constant,
    eta0_hat,
    eta12_hats,
    image_multiplier,
    small_k_multiplier,
    zeta_hats,
)
from .transform import (
    Field,
    GridSpec,
    InteriorRegion,
    apply_multiplier,
    forward_pressure_hat,
    gaussian_phantom,
    propdelta_check,
    time_reversal_image,
)

__version__ = "0.1.0"

__all__ = [
    "Medium", "RawParams", "UnphysicalMediumError", "derive_medium",
    "nondimensional_medium", "water_params",
    "Amplitudes", "CardanoDiagnostics", "DegenerateRootsError", "SpectralRoots",
    "amplitudes", "asymptotic_limits", "cardano_roots",
    "dissipation_free_roots", "small_k_roots", "solve_vandermonde",
    "ComplexRegimeError", "KernelSample", "ScaleOverflowError", "ScaledComplex",
    "dc_constant", "eta0_hat", "eta12_hats", "image_multiplier",
    "small_k_multiplier", "zeta_hats",
    "Field", "GridSpec", "InteriorRegion", "apply_multiplier",
    "forward_pressure_hat", "gaussian_phantom", "propdelta_check",
    "time_reversal_image",
]
