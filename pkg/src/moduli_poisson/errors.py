"""Exception types shared across the package."""


class BoundaryAmbiguous(ValueError):
    """A regularity or multiplicity decision falls inside a tolerance band."""


class NotInB(ValueError):
    """A group element has no logarithm in the regular neighbourhood O."""


class MissingGenerator(KeyError):
    """An assignment does not define a generator that a word uses."""


class IllConditioned(ArithmeticError):
    """Singular values cluster at the rank threshold."""


class NotACocycle(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class QuadratureFailure(ArithmeticError):
    pass


class OrbitMismatch(ValueError):
    """A momentum value does not lie on the requested adjoint orbit."""


class RejectionExhausted(RuntimeError):
    pass


class NewtonDiverged(RuntimeError):
    pass


class NotSmoothPoint(ValueError):
    """The point is on a singular stratum (nontrivial stabiliser or degenerate form)."""


class SingularOmega(ArithmeticError):
    pass


class ConfigError(ValueError):
    pass
