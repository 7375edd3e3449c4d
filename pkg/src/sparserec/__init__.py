"""Sparse recovery through l_p-constrained basis pursuit.

Submodules: :mod:`core` (norms and cone geometry), :mod:`prox` (projections),
:mod:`solvers` (PDHG solver), :mod:`ensembles` (random matrices),
:mod:`analysis` (certificates and estimators), :mod:`quantize` and
:mod:`harness` (experiments and CLI).
"""

from .core import InvalidParameterError

__version__ = "0.1.0"

__all__ = ["InvalidParameterError", "__version__"]
