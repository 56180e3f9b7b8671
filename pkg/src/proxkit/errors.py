"""Exception hierarchy shared across the library.

Everything derives from :class:`ProxkitError` so callers can catch library
failures with a single except clause.  Transport/protocol errors form their
own branch because the benchmark driver maps them to a distinct exit code.
"""


class ProxkitError(Exception):
    """Base class for all proxkit errors."""


class DimensionMismatch(ProxkitError):
    """A vector argument does not match the configured dimension."""


class IncompatiblePolicies(ProxkitError):
    """The requested policy combination cannot run on the chosen executor."""


class DivergenceDetected(ProxkitError):
    """A non-finite loss value or iterate entry was produced."""


class UnknownOrigin(ProxkitError):
    """A gradient-table origin id is outside the configured slot range."""


class InvalidBatch(ProxkitError):
    """Batch size is not realizable for the sampler configuration."""


class WorkerPanic(ProxkitError):
    """A concurrent worker raised; the run is aborted."""


class ConfigError(ProxkitError):
    """Invalid run configuration detected before execution."""


class UsageError(ProxkitError):
    """Command-line arguments are inconsistent or incomplete."""


class InvalidSpectrum(ProxkitError):
    """Requested eigenvalue bounds are not an admissible spectrum."""


class IndexOutOfRange(ProxkitError):
    """A component or coordinate index lies outside the valid range."""


class ParseError(ProxkitError):
    """A data file is malformed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EmptyDataset(ProxkitError):
    """A dataset file contained no samples."""


class TransportError(ProxkitError):
    """Networking failure in the parameter-server executor."""


class BindFailure(TransportError):
    """A role could not bind its listening port(s)."""


class SchedulerUnreachable(TransportError):
    """The scheduler did not answer within the retry budget."""


class MasterTimeout(TransportError):
    """A master did not answer a pull/push within the timeout."""


class ProtocolError(ProxkitError):
    """Malformed or unexpected wire traffic."""


class TruncatedFrame(ProtocolError):
    """A frame ended before its declared payload length."""


class UnknownTag(ProtocolError):
    """A frame carried a tag outside the protocol's tag set."""


class LengthMismatch(ProtocolError):
    """Declared payload length disagrees with the decoded field layout."""


class DuplicateMasterId(ProtocolError):
    """Two masters attempted to register under the same id."""


class RangeViolation(ProtocolError):
    """A pushed coordinate index lies outside the master's shard."""


class StaleProtocol(ProtocolError):
    """A node received a message tag it cannot handle in its current state."""
