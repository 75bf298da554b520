"""Numerical toolkit for moduli spaces of flat connections on surfaces with boundary.

Lie group numerics, alcove geometry, surface group words and Fox calculus,
twisted cohomology, the extended moduli space with its closed 2-form and
momentum maps, and the Poisson bracket of invariant functions on
representation spaces.
"""
from .cartan_alcove import (OrbitFiber, StabilizerType, TorusPoint, alcove_table,
                            chamber_representative, class_dim, exp_orbit_fiber, in_P_tilde,
                            stabilizer_type)
from .errors import (BoundaryAmbiguous, ConfigError, DimensionMismatch, IllConditioned,
                     MissingGenerator, NewtonDiverged, NotACocycle, NotInB, NotSmoothPoint,
                     OrbitMismatch, QuadratureFailure, RejectionExhausted, SingularOmega)
from .lie_core import LieGroup
from .moduli_forms import ExtendedModuli, ExtendedPoint, OrbitTuple, TangentVector
from .poisson_moduli import (InvariantFunction, RepPoint, flow_bracket, jacobi_check,
                             poisson_bracket, project_to_leaf, sample_rep)
from .surface_words import (BarChain2, Presentation, SurfaceData, Word, build_chain_c,
                            build_chain_c_tilde, group_presentation, groupoid_presentation)
from .twisted_cohomology import TwistedComplex, build_complex, cohomology_dims

__version__ = "0.1.0"
