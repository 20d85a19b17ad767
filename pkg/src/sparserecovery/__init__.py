"""Sparse recovery of high-dimensional functions from random samples.

Submodules
----------
index_sets
    Hyperbolic crosses and cubes of multi-indices.
dictionaries
    Fourier, Chebyshev and preconditioned Legendre systems.
operator
    Matrix-free sampling operator, Gram compression, spectral norm.
least_squares
    Incremental Cholesky and warm-started LSQR.
decoders
    Restarted PDHGM (square-root Lasso), OMP and CoSaMP.
test_functions
    Ground-truth functions with exact coefficients.
analysis
    Error metrics, Monte-Carlo norms and rate fits.
theory
    RIP/NSP checks and sample-complexity / lower-bound formulas.
cli
    Experiment runner (``python -m sparserecovery``).
"""

__version__ = "0.1.0"
