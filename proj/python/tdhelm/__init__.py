"""Time-domain wave-run preconditioning for indefinite complex symmetric systems."""

from ._core import (
    __version__,
    alpha_beta,
    selfcheck,
    solve_dense,
    solve_model,
    window_value,
)

__all__ = [
    "__version__",
    "alpha_beta",
    "selfcheck",
    "solve_dense",
    "solve_model",
    "window_value",
]
