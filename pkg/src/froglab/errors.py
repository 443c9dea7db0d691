"""Exception types shared across the package."""


class FroglabError(Exception):
    """Base class for package errors."""


class GroupMismatchError(FroglabError):
    """Operands belong to different group specifications."""


class BudgetExceededError(FroglabError):
    """A computation would exceed the configured memory budget."""


class DegenerateQuotientError(FroglabError):
    """Induced generators fail to generate the torsion-free quotient."""


class OutOfHorizonError(FroglabError):
    """Query beyond the horizon of a recorded simulation."""


class EmptyCloudError(FroglabError):
    """A point-cloud operation received an empty set."""


class InapplicableSymmetryError(FroglabError):
    """The generator set is not invariant under the requested symmetries."""


class ConfigError(FroglabError):
    """Experiment configuration is invalid.

    Carries a list of (location, message) pairs where location is a line
    number or field name.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in self.problems))
