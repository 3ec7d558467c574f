"""Exception hierarchy for seqsum."""


class SeqSumError(ValueError):
    """Base class for every error raised by seqsum."""


class SpaceMismatchError(SeqSumError):
    """Two objects that must live in related spaces do not."""


class EnumerationCapError(SeqSumError):
    """An exact enumeration backend would exceed its configured size cap."""


class UnsupportedError(SeqSumError):
    """The requested class/backend/space combination is not implemented."""


class ZeroDenominatorError(SeqSumError):
    """A ratio was requested whose denominator vanishes."""


class ParseError(SeqSumError):
    """A textual literal (space, class spec, file) could not be parsed."""
