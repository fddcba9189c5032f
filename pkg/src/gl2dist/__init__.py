"""Numerics for hyper-Kloosterman sums twisted by GL(2) Hecke eigenvalues."""
from .arith import SquarefreeModulus, as_modulus
from .errors import (Gl2DistError, NotCoprime, NotSquarefree, QuadratureNotConverged, TableTooSmall,
                     ValidationError)
from .expsum import PeriodicTable, hyper_kloosterman_crt, hyper_kloosterman_direct, kl_table
from .hecke import HeckeTable, build_hecke_table
from .weights import SmoothWeight, TransformConfig, bessel_transform, bump, fourier_weight

__version__ = "0.1.0"
