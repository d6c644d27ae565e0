"""Exception types shared across the package."""


class RuelleKitError(Exception):
    """Base class for all library errors."""


class RankMismatchError(RuelleKitError, ValueError):
    pass


class DepthError(RuelleKitError, ValueError):
    """A cylinder depth is too small to determine the requested quantity."""


class InvalidSpaceError(RuelleKitError, ValueError):
    pass


class InvalidMapError(RuelleKitError, ValueError):
    pass


class CocycleConditionError(RuelleKitError, ValueError):
    pass


class NotPrimitiveError(RuelleKitError):
    """No positive power of a transfer or counting matrix was found."""


class ConvergenceError(RuelleKitError):
    """An iterative solver did not reach its tolerance."""


class CertificateError(RuelleKitError):
    """A map lacks the expansivity/exactness certificate a solver needs."""


class VerificationError(RuelleKitError):
    """A computed solution failed its a-posteriori check."""


class BracketError(RuelleKitError, ValueError):
    pass


class DegenerateSpaceError(RuelleKitError):
    """Refusal for spaces with a single admissible word at every depth."""


class RefinementError(RuelleKitError, ValueError):
    pass


class GraphError(RuelleKitError, ValueError):
    """Malformed or unsupported higher-rank graph data."""


class SchemaError(RuelleKitError, ValueError):
    """A JSON document does not match the documented schema."""
