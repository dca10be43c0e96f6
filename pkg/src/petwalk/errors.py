"""Exception types shared across the engine."""


class DomainError(ValueError):
    """Input violates an operation's domain (negative, non-finite, out of range)."""


class ParseError(ValueError):
    """A document or trace line could not be parsed; message names the offending field/line."""


class UnsupportedTypeError(ParseError):
    """Entity type is syntactically valid but not one we ingest."""


class TraceOrderError(ParseError):
    """Trace timestamps regressed."""


class NotFoundError(KeyError):
    """Unknown user / notification / resource id."""


class ExpiredDialogError(RuntimeError):
    """The pending dialog outlived its TTL."""


class SuppressedError(RuntimeError):
    """The interaction is suppressed while the user travels at vehicle speed."""


class DegenerateSampleError(ValueError):
    """All paired differences are zero; the signed-rank test is undefined."""


class TemplateError(KeyError):
    """Unknown template id or unbound placeholder."""
