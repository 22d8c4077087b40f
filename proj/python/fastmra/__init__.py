"""Fast low-SNR maximum-likelihood estimation for multi-reference alignment over SO(2).

Spectra are one-sided complex arrays ``f[0..L]``; observation sets are
``(n, L+1)`` complex arrays of Fourier coefficients.
"""

from ._core import (
    CSV_HEADER,
    DegeneratePhaseError,
    align_and_mse,
    em_run,
    estimate_dc,
    estimate_magnitudes,
    fast_mle,
    generate_observations,
    random_signal,
    read_observations,
    rotate_spectrum,
    write_observations,
)

__all__ = [
    "CSV_HEADER",
    "DegeneratePhaseError",
    "align_and_mse",
    "em_run",
    "estimate_dc",
    "estimate_magnitudes",
    "fast_mle",
    "generate_observations",
    "random_signal",
    "read_observations",
    "rotate_spectrum",
    "write_observations",
]
