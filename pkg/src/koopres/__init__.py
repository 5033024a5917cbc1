"""Koopman and Liouville spectra of polynomial dynamical systems.

Exact polynomial algebra (``symbolic``), Hamiltonian lifts (``lift``),
Liouville generators and their spectra (``liouville``), quantum
counterparts (``quantum``), numerical flows (``flow``) and data-driven
estimates (``estimate``).
"""

from .errors import KoopresError
from .symbolic import (
    ComplexChartMap,
    CoordinateChart,
    ExpPoly,
    MultiPolynomial,
    gaussian_moment,
    poisson_bracket,
    substitute_linear,
    weighted_inner,
)
from .grammar import parse_polynomial
from .lift import HamiltonianSystem, VectorField, lift_vector_field
from .presets import get_preset
from .liouville import (
    GradedBasis,
    SpectrumReport,
    analytic_spectrum,
    build_liouville,
    complex_scale,
    spectrum,
)

__version__ = "0.1.0"
