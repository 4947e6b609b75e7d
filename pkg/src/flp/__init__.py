"""Ground-state phases of the correlated-hopping Hubbard chain with imbalanced species.

Two solvers share one set of coupling conventions:

* :mod:`flp.exact` -- thermodynamic-limit two-fluid solution at the point ``g = 0``.
* :mod:`flp.ed` -- matrix-free Lanczos exact diagonalization on periodic rings.

:mod:`flp.observables` turns ED ground states into pair densities and charge
structure factors; :mod:`flp.cli` writes CSV/JSON artifacts.
"""

from flp.errors import FLPError
from flp.model import FillingSpec, ModelParams, Sector, derive_couplings, sector_for

__version__ = "0.1.0"

__all__ = [
    "FLPError",
    "FillingSpec",
    "ModelParams",
    "Sector",
    "derive_couplings",
    "sector_for",
    "__version__",
]
