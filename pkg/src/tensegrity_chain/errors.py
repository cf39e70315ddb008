"""Exception hierarchy shared by all modules."""


class TensegrityError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(TensegrityError):
    pass


class RankDeficient(TensegrityError):
    """The 2xn Jacobian lost row rank (kinematic singularity)."""


class ComplexSpectrum(TensegrityError):
    pass


class NoConvergence(TensegrityError):
    pass


class SingularJacobian(TensegrityError):
    pass


class DegenerateConfiguration(TensegrityError):
    """A spring length reached zero (joint angle outside the admissible range)."""


class DegenerateMode(TensegrityError):
    """A mode shape produces no axial deflection."""


class SingularB(TensegrityError):
    pass


class SpectrumCountMismatch(TensegrityError):
    pass


class NoEquilibriumFound(TensegrityError):
    pass


class Indeterminate(TensegrityError):
    """Projected Hessian has an eigenvalue too close to zero to classify."""


class SpecError(TensegrityError):
    """Invalid model description; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message
