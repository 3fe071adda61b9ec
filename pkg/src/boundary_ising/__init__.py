"""Local magnetization of the massive boundary Ising model in a boundary field."""

from .boundary import (MagnetizationProfile, full_ode_residual, highT_rate, magnetization,
                       magnetization_derivs, massless_reference, metastable_amplitude,
                       sigma_fixed_highT, sigma_free_highT, solve_fixed_highT,
                       solve_metastable, solve_u)
from .correlators import (CorrelatorBundle, ln2_identity, pair_correlators, sigma_fixed,
                          sigma_fixed_derivs, sigma_free, sigma_free_derivs, tail_J)
from .errors import (BoundaryIsingError, DomainError, QuadratureError, RangeError,
                     SolverError)
from .formfactor import FormFactorEstimate, ff_magnetization, ff_term, ff_term_tensor
from .painleve import PainleveTable, SolverConfig, eta, eval_phi, small_r_reference, solve_phi
from .specfun import (DimensionlessPoint, PhysicalInputs, bessel_k, bessel_k_scaled,
                      gamma_fn, sigma0, to_dimensionless, tricomi_psi)

__version__ = "0.1.0"
