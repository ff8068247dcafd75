class CatsimError(Exception):
    """Base class for all package errors."""


class ValidationError(CatsimError, ValueError):
    """Input data violates a documented invariant."""


class ParseError(CatsimError, ValueError):
    """A file could not be parsed."""


class TraceValidationError(ValidationError):
    pass


class TraceParseError(ParseError):
    pass


class MapValidationError(ValidationError):
    pass


class MapParseError(ParseError):
    pass


class ConfigError(CatsimError, ValueError):
    """Inconsistent or incomplete configuration."""


class NoTransmissionsError(CatsimError, ValueError):
    pass
