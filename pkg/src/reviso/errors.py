"""Exception hierarchy. Each class carries the short error code used in reports."""


class RevisoError(Exception):
    code = "error"


class InvalidInput(RevisoError, ValueError):
    code = "invalid-input"


class InvalidDimension(InvalidInput):
    code = "invalid-dimension"


class DegenerateInput(RevisoError, ValueError):
    code = "degenerate-input"


class UnboundedPolytope(RevisoError, ValueError):
    code = "unbounded-polytope"


class SingularTransform(RevisoError, ValueError):
    code = "singular-transform"


class NoConvergence(RevisoError, RuntimeError):
    code = "no-convergence"

    def __init__(self, msg, best=None, gap=None):
        super().__init__(msg)
        self.best = best
        self.gap = gap


class NotJohnPosition(RevisoError, ValueError):
    code = "not-john-position"


class DecompositionFailed(RevisoError, RuntimeError):
    code = "decomposition-failed"


class InvalidMeasure(InvalidInput):
    code = "invalid-measure"


class InvalidSimplex(InvalidInput):
    code = "invalid-simplex"


class ReductionStalled(RevisoError, RuntimeError):
    code = "reduction-stalled"

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class CapsNotCovering(RevisoError, ValueError):
    code = "caps-not-covering"

    def __init__(self, msg, outside=()):
        super().__init__(msg)
        self.outside = list(outside)


class GeneratorFailed(RevisoError, RuntimeError):
    code = "generator-failed"


class OriginOutside(RevisoError, ValueError):
    code = "origin-outside"


class InvalidFrame(InvalidInput):
    code = "invalid-frame"


class InvalidCardinality(InvalidInput):
    code = "invalid-cardinality"


class HypothesisViolated(RevisoError, ValueError):
    code = "hypothesis-violated"

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class NotApplicable(RevisoError, ValueError):
    code = "not-applicable"


class OutOfDomain(RevisoError, ValueError):
    code = "out-of-domain"


class OutOfCone(RevisoError, ValueError):
    code = "out-of-cone"


class NormalizationFailed(RevisoError, RuntimeError):
    code = "normalization-failed"


class LemmaViolation(RevisoError, AssertionError):
    """An inequality that must hold under verified preconditions did not."""

    code = "lemma-violation"


class InvalidParameter(InvalidInput):
    code = "invalid-parameter"


class InsufficientData(RevisoError, ValueError):
    code = "insufficient-data"
