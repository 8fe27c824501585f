"""Exception hierarchy shared across the engine."""


class ParacycError(Exception):
    """Base class for all engine errors."""


class InvalidInput(ParacycError):
    """Raised for malformed user input (maps to CLI exit code 2)."""


class NotAssociative(InvalidInput):
    pass


class NoIdentity(InvalidInput):
    pass


class NoInverse(InvalidInput):
    pass


class GroupMismatch(InvalidInput):
    pass


class ShapeMismatch(ParacycError):
    pass


class NotAComplex(ParacycError):
    """The supplied boundaries do not square to zero."""


class DegreeOverflow(ParacycError):
    """An operator was requested at a degree beyond the truncation level."""


class LevelTooHigh(ParacycError):
    pass


class NotUnital(InvalidInput):
    pass


class NotBalanced(ParacycError):
    pass


class NoWitness(ParacycError):
    pass


class ContractViolation(ParacycError):
    pass


class NotNilpotent(ParacycError):
    pass


class Mismatch(ParacycError):
    pass


class IdentityViolation(ParacycError):
    """An exact operator identity failed; carries a witness."""

    def __init__(self, name, witness=None):
        super().__init__(f"{name}: {witness}")
        self.name = name
        self.witness = witness
