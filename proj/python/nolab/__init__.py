"""Neural-operator numerics on periodic grids: spectral kernels, Lipschitz
certificates, fixed-point iteration, and training utilities."""

try:
    from ._nolab import (
        Operator,
        apply_target,
        fit,
        hs_norm,
        l2_norm,
        linf_norm,
        resample,
        sample_grf,
    )
except ImportError:  # in-tree builds keep the extension outside the package
    from _nolab import (
        Operator,
        apply_target,
        fit,
        hs_norm,
        l2_norm,
        linf_norm,
        resample,
        sample_grf,
    )

__all__ = [
    "Operator",
    "apply_target",
    "fit",
    "hs_norm",
    "l2_norm",
    "linf_norm",
    "resample",
    "sample_grf",
]

__version__ = "0.1.0"
