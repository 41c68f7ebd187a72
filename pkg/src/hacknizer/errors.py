"""Error types shared across the chassis, services, and harness."""


class HacknizerError(Exception):
    """Base for every error raised by this package."""


class VersionConflict(HacknizerError):
    """Stream moved past the caller's expected version; reload and retry."""

    def __init__(self, stream_id: str, expected: int, actual: int):
        super().__init__(
            f"stream {stream_id!r}: expected version {expected}, at {actual}"
        )
        self.stream_id = stream_id
        self.expected = expected
        self.actual = actual


class EmptyAppend(HacknizerError):
    pass


class TypeMismatch(HacknizerError):
    pass


class StoreTypeGuard(HacknizerError):
    """Data directory holds streams of a type this service does not own."""


class BrokerUnavailable(HacknizerError):
    pass


class PortInUse(HacknizerError):
    pass


class DuplicateService(HacknizerError):
    pass


class UnsupportedInWallClockMode(HacknizerError):
    pass


class DrainTimeout(HacknizerError):
    """Livelock detected: the scheduler did not quiesce within its step budget."""


class InvalidFaultSpec(HacknizerError):
    pass


class CommandRejected(HacknizerError):
    """Business-rule rejection of a command.

    Carries a stable machine-readable code (e.g. "TeamFull") which is also
    what travels in failure replies on the bus.
    """

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message or code


def rejected(code: str, message: str = "") -> CommandRejected:
    return CommandRejected(code, message)
