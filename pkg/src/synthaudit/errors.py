"""Exception hierarchy for the audit engine."""


class SynthAuditError(Exception):
    """Base class for all errors raised by this package."""


# --- dataset loading / schema ---

class MissingColumn(SynthAuditError):
    pass


class DuplicateColumn(SynthAuditError):
    pass


class ParseError(SynthAuditError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {column!r})" if column else ")")
        super().__init__(message + where)


class SchemaMismatch(SynthAuditError):
    pass


# --- binning ---

class NotNumeric(SynthAuditError):
    pass


class NotCategorical(SynthAuditError):
    pass


class AllMissing(SynthAuditError):
    pass


class TooFewDistinct(SynthAuditError):
    pass


# --- distance / nearest neighbor ---

class BinningMismatch(SynthAuditError):
    pass


class EmptyTarget(SynthAuditError):
    pass


# --- models ---

class SingleClass(SynthAuditError):
    pass


class FeatureMismatch(SynthAuditError):
    pass


# --- multivariate ---

class TooFewColumns(SynthAuditError):
    pass


class ShapeMismatch(SynthAuditError):
    pass


class TargetInPredictors(SynthAuditError):
    pass


class NegativeTime(SynthAuditError):
    pass


class NoEvents(SynthAuditError):
    pass


# --- rule language ---

class RuleSyntaxError(SynthAuditError):
    """Bad rule text. Carries the 1-based character position and, when the
    parser knows them, the token kinds it would have accepted."""

    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at position {position}"
        if self.expected:
            detail += " (expected " + " or ".join(self.expected) + ")"
        super().__init__(detail)


class UnknownColumn(SynthAuditError):
    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"unknown column {name!r}{where}")


class TypeMismatch(SynthAuditError):
    def __init__(self, message, position=None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(message + where)


# --- privacy attacks ---

class EmptySplit(SynthAuditError):
    pass


class EmptySynthetic(SynthAuditError):
    pass


class EmptyInput(SynthAuditError):
    pass


class NoTrials(SynthAuditError):
    pass


class TargetIsQuasi(SynthAuditError):
    pass


class EmptyQuasi(SynthAuditError):
    pass


class RankOutOfRange(SynthAuditError):
    pass


class AdapterNoScore(SynthAuditError):
    pass


# --- configuration / orchestration ---

class ConfigInvalid(SynthAuditError):
    pass
