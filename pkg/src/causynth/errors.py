"""Exception types shared across the pipeline."""


class CausynthError(Exception):
    """Base class for all pipeline errors."""


# --- cohort loading / preprocessing ---

class MalformedCsv(CausynthError):
    def __init__(self, row, detail=""):
        self.row = row
        super().__init__(f"malformed csv row {row}: {detail}")


class MissingColumn(CausynthError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing column: {name}")


class NonMonotoneTime(CausynthError):
    def __init__(self, subject):
        self.subject = subject
        super().__init__(f"non-monotone session times for subject {subject}")


class DomainViolation(CausynthError):
    def __init__(self, variable, row=None, detail=""):
        self.variable = variable
        self.row = row
        super().__init__(f"domain violation for {variable}"
                         + (f" at row {row}" if row is not None else "")
                         + (f": {detail}" if detail else ""))


class DegenerateVariable(CausynthError):
    def __init__(self, variable):
        self.variable = variable
        super().__init__(f"degenerate (constant) variable: {variable}")


class EmptyCohort(CausynthError):
    pass


class InvalidRange(CausynthError):
    pass


class UnknownSubject(CausynthError):
    pass


# --- discovery / statistics ---

class SingularDesign(CausynthError):
    pass


class InsufficientSamples(CausynthError):
    pass


class NodeSetMismatch(CausynthError):
    pass


# --- model fitting ---

class RankDeficient(CausynthError):
    pass


class TooFewSamples(CausynthError):
    pass


class NonFiniteLoss(CausynthError):
    pass


class LayoutMismatch(CausynthError):
    pass


class TooFewPairs(CausynthError):
    pass


# --- phantom / images ---

class InvalidLatent(CausynthError):
    pass


class InvalidImage(CausynthError):
    pass


class NotConverged(CausynthError):
    pass


class AmbiguousIntensities(CausynthError):
    pass


class ShapeMismatch(CausynthError):
    pass


# --- metrics / classification ---

class ZeroRange(CausynthError):
    pass


class LengthMismatch(CausynthError):
    pass


class SingleClassTruth(CausynthError):
    pass


class ClassMissing(CausynthError):
    pass


class UnknownVariable(CausynthError):
    pass


# --- persistence / gateway ---

class BundleCorrupt(CausynthError):
    pass


class VersionMismatch(CausynthError):
    pass


class UnknownConfigKey(CausynthError):
    pass


class UnknownImage(CausynthError):
    pass
