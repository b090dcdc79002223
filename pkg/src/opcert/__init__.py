"""Positivity certification for self-adjoint trace-class integral operators.

Moments M_k = Tr(rho^k) are converted to elementary symmetric polynomials
e_k via Newton's identities; all e_k >= 0 is necessary and sufficient for
positive semidefiniteness, and any e_k < 0 is a machine-checkable
non-positivity witness.
"""

from importlib import metadata

from .band import BandCoeffs, BandMatrix, band_coeffs, band_matrix_for_spec, \
    build_band_matrix, default_dimension, moments_band
from .certify import (Certificate, DiagonalPoint, EngineDisagreement, LinearWitness,
                      NegativeEk, OracleEig, RSReport, certify, diagonal_check,
                      linear_witness, pi_value, rs_uncertainty)
from .gauss import GaussSpectrum, derive_spectrum, eigenfunction, eigenfunctions, \
    gaussian_moment
from .kernels import (EvaluationDomainError, GaussianParams, GaussPolyKernel,
                      GenericKernel, KernelError, KernelSpec, NormalizationSingular,
                      PolyCoeffs, TraceQuadratureFailure, eval_kernel, normalization_N,
                      trace)
from .newton import (MomentVector, SymPolyVector, ThetaProfile, ek_bound_check,
                     linear_entropy, newton_ek, newton_ek_determinant, theta_profile)
from .nystrom import (DiscretizedOperator, QuadratureGrid, discretize, make_grid,
                      moments_nystrom, oracle_eigenvalues)
from .sweep import SweepResult, SweepRow, SweepSpec, run_sweep
from .wigner import (KernelSlices, PhaseSpaceGrid, WindowTooSmall, wigner_forward,
                     wigner_inverse)

try:
    __version__ = metadata.version("opcert")
except metadata.PackageNotFoundError:  # source tree without install
    __version__ = "0.0.dev"
