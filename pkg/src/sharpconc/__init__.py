"""Grid-based verification of sharp quantitative concentration inequalities."""

from .asymmetry import (AsymmetryResult, alpha_convex, alpha_gauss, alpha_pair, beta_strong,
                        equivalent_offset)
from .errors import (ConfigError, DegenerateMassError, DomainError, GenerationError,
                     GridSpecError, InvalidArgumentError, SharpConcError, VolumeMismatchError,
                     WindowOverflowError)
from .families import Scenario, ScenarioFamily, generate_family
from .gauss1d import density, phi, phi_inv
from .grid import GridSet, GridSpec, rasterize
from .measures import (Barycenter, MeasureEstimate, anisotropic_perimeter, gauss_barycenter,
                       gaussian_measure, gaussian_perimeter, sym_diff_measure, volume)
from .morphology import DistanceField, enlarge_ball, enlarge_convex
from .regions import ConvexBody, HalfSpace, Slab
from .verify import (Constants, DeficitReport, bm_report, covering_lemma_check,
                     euclid_deficit_report, gauss_deficit_report, layercake_check,
                     monotone_cover_check, sharpness_fit)

__version__ = "0.1.0"
