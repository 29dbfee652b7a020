"""Exception types shared across the toolkit."""


class GenolinkError(Exception):
    """Base class for every validation or domain failure raised by genolink."""


class DomainError(GenolinkError):
    """An argument or precondition violation (bad rate, unknown rsid, ...)."""


class InputFormatError(GenolinkError):
    """Malformed input data (bad alphabet, unparseable value, ...)."""


class IngestionError(InputFormatError):
    """A delimited file failed validation; the message names the offending row/column."""


class ModelFormatError(InputFormatError):
    """A trait-model file failed schema or probability validation."""


class SaltStateError(GenolinkError):
    """Salt applied to an already-salted database, or removed from an unsalted one."""


class KeyMismatchError(GenolinkError):
    """The supplied salt key does not match the fingerprint of the database."""


class ExperimentError(GenolinkError):
    """A failure inside an experiment run, annotated with grid-cell coordinates."""
