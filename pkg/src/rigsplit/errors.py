"""Exception types raised across the package."""


class RigsplitError(Exception):
    """Base class for all errors raised by rigsplit."""


class ParseError(RigsplitError):
    pass


class ValidationError(RigsplitError, ValueError):
    pass


class DimensionError(RigsplitError, ValueError):
    pass


class InvalidK(RigsplitError, ValueError):
    pass


class DegenerateInput(RigsplitError, ValueError):
    pass


class ConstantInput(RigsplitError, ValueError):
    """Raised when a 1-D two-means split is requested on fewer than two distinct values."""


class SingularGram(RigsplitError):
    """The regularized Gram matrix could not be Cholesky-factored; raise the noise level."""


class EmptyTrainingSet(RigsplitError, ValueError):
    pass


class AllClustersEmpty(RigsplitError, ValueError):
    pass


class SpecError(RigsplitError, ValueError):
    pass
