"""Cuntz isometry families implementing Koopman endomorphisms of L^infty(X, mu).

Modules: :mod:`dynamics` (systems and branch decompositions),
:mod:`discretize` (bases and operator matrices), :mod:`cuntz` (families,
transfer operators, module bases, pairings), :mod:`verify` (identity checks),
:mod:`symbolic` (exact word calculus in O_N) and :mod:`cli` (batch runner).
"""

from .cuntz import CuntzFamily, Route, cuntz_from_sections, lift_to_cuntz, module_basis_from_sections, pairing_matrix, transfer, twist_family
from .discretize import CylinderBasis, FourierBasis, TensorBasis, composition_operator, fourier_basis, polar_decompose
from .dynamics import (
    SystemDescriptor,
    SystemKind,
    TrigDensity,
    blaschke_cover,
    circle_monomial,
    decompose,
    full_shift,
    product_shift_rotation,
    weighted_circle_monomial,
)
from .symbolic import CuntzElement, ModuleMatrix, module_unitary_check, normalize, verify_basis
from .verify import CheckRecord, VerificationReport

__version__ = "0.1.0"
