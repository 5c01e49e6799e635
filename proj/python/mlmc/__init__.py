"""Monte Carlo action of the Mittag-Leffler matrix function, E_alpha(A t^alpha) u."""

from ._core import (
    DimensionError,
    DomainError,
    Error,
    OracleUnavailable,
    ParseError,
    SparseMatrix,
    ValidationError,
    dense_oracle,
    diffusion_2d,
    diffusion_solution,
    gamma,
    mittag_leffler,
    read_matrix_market,
    read_vector,
    sample_ml,
    solve,
    write_matrix_market,
    write_vector,
)

__all__ = [
    "DimensionError",
    "DomainError",
    "Error",
    "OracleUnavailable",
    "ParseError",
    "SparseMatrix",
    "ValidationError",
    "dense_oracle",
    "diffusion_2d",
    "diffusion_solution",
    "gamma",
    "mittag_leffler",
    "read_matrix_market",
    "read_vector",
    "sample_ml",
    "solve",
    "write_matrix_market",
    "write_vector",
]
__version__ = "0.1.0"
