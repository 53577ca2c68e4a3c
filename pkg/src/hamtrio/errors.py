"""Exception hierarchy shared by every hamtrio module."""


class HamtrioError(Exception):
    """Base class for all toolkit errors."""


class JetOrderExceeded(HamtrioError):
    pass


class NotHomogeneous(HamtrioError):
    pass


class PoleAtPoint(HamtrioError):
    pass


class NegativeRadicand(HamtrioError):
    pass


class DimensionMismatch(HamtrioError):
    pass


class NotGraded(HamtrioError):
    pass


class SingularJacobian(HamtrioError):
    pass


class DegenerateMetric(HamtrioError):
    pass


class DegeneratePencil(HamtrioError):
    pass


class NotSkewAdjoint(HamtrioError):
    pass


class NotOnVariety(HamtrioError):
    pass


class AnsatzTooSmall(HamtrioError):
    pass


class NoMatch(HamtrioError):
    pass


class NotACasimir(HamtrioError):
    pass


class Undecided(HamtrioError):
    """The bounded search could neither prove nor refute the claim."""


class SemisimplicityFailure(HamtrioError):
    pass


class ParseError(HamtrioError):
    """Syntax or resolution error in a definition file, with a source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)
