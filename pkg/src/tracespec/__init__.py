"""Spectral estimates for trace-class integral operators with polynomial-Gaussian kernels.

The pipeline runs moments ``M_l = Tr K^l`` -> elementary symmetric functions
``e_k`` -> roots of truncated generating functions, at extended precision
(``gmpy2``, 256 bits by default).  Factorization bounds on the trace norm and
a Nystrom oracle complete the toolkit.

Importing the package raises the calling thread's ``gmpy2`` context to the
default working precision, so arithmetic on returned values does not silently
drop to 53 bits.
"""

import gmpy2 as _gmpy2

from .precision import DEFAULT_PRECISION, precision, get_precision, fmt
from .errors import (
    TraceSpecError,
    ValidationError,
    NumericalError,
    BoundViolated,
    DegreeCap,
    DisallowedW,
    Divergent,
    DomainError,
    EmptySet,
    InsufficientMoments,
    NegativeRadicand,
    NonHermitianResidual,
    SingularForm,
    SingularSystem,
    ZeroPolynomial,
)
from .numerics import UniPoly, eval_unipoly, real_roots, min_positive_root, minimize_scalar
from .multipoly import MultiPoly
from .kernels import GaussianKernel, PolyGaussianKernel, FactorKernel, eval_kernel, trace, validate, to_factor
from .gauss import GaussianIntegrand, integrate, compose, l2_norm_sq, quad_form
from .moments import MomentSequence, gaussian_beta, gaussian_moment, polygauss_moment, polygauss_moment_wick, moment_sequence
from .elemsym import ElemSymSequence, ek_newton, ek_determinant, ek_gaussian_closed, check_ek_bound
from .spectrum import (
    SpectrumEstimate,
    LowerBoundSeries,
    RateReport,
    lambda_n,
    hausdorff,
    q_n0,
    h_nc,
    q_nc,
    q_series,
    rate_report,
)
from .normbound import (
    Decomposition,
    NormBoundResult,
    allowed_w,
    decompose_gaussian,
    decompose_polygauss,
    gaussian_product_R,
    product_R,
    w_min_gaussian,
    minimize_R,
)
from .oracle import (
    ExactGaussianSpectrum,
    NystromModel,
    exact_gaussian_spectrum,
    gauss_hermite,
    nystrom_spectrum,
    oracle_quantities,
)

__version__ = "0.1.0"

if _gmpy2.get_context().precision < DEFAULT_PRECISION:
    _gmpy2.get_context().precision = DEFAULT_PRECISION
