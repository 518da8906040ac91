"""Exception types shared across the toolkit."""


class InvalidConfigError(ValueError):
    """A configuration record violates its invariants."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GenerationError(RuntimeError):
    """Stochastic geometry generation exhausted its attempt budget."""


class PerturbationError(RuntimeError):
    """No admissible concavity perturbation candidate remains."""


class EmptyModelError(ValueError):
    """A finite-element model was requested for an empty geometry."""


class SingularElementError(ValueError):
    """An element is degenerate (zero length or zero section)."""


class MechanismError(RuntimeError):
    """The reduced stiffness is singular (floating substructure)."""


class SolverError(RuntimeError):
    """The linear solve failed or returned a non-finite solution."""


class ConditioningError(RuntimeError):
    """The Ritz system is numerically singular."""


class DatasetBuildError(RuntimeError):
    """One or more dataset samples failed after bounded retries."""

    def __init__(self, failed_ids, message=None):
        self.failed_ids = list(failed_ids)
        super().__init__(
            message or f"dataset samples failed after retries: {self.failed_ids}"
        )
