"""Coagulation with solvable kernels in self-similar variables.

Transform-space flows and weighted sup distances for the solvable kernels
(K = 2, x + y, xy), with a finite-volume solver in original variables as
an independent check.
"""

from .density import (GammaLaw, GriddedDensity, MomentVector, catalog_density, compute_moments,
                      exact_profile, load_density, normalize_to_class, read_density,
                      write_density)
from .errors import (CharacteristicCrossingError, CoagError, ConfigError, DegenerateDensityError,
                     MomentDivergenceError, MomentMismatchError, NonAdmissibleTransformError,
                     PositivityLossError, StabilityError, SupNotBracketedError)
from .flow import (FlowState, characteristic_foot, duhamel_residual_const, evolve, evolve_add,
                   evolve_const, evolve_mult)
from .harness import ExperimentConfig, make_config, run_contraction, run_crossval
from .kernels import AdmissibleClass, KernelKind
from .metrics import ContractionReport, KappaNorm, distance, fit_rate, weighted_sup
from .physical import SolverConfig, solve, step
from .scaling import ScalingMap, from_selfsimilar, make_scaling, to_selfsimilar
from .transforms import (TransformCurve, bernstein, closed_form, kernel_transform, laplace,
                         mult_bernstein)

__version__ = "0.1.0"
