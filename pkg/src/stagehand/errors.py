"""Exception types shared across the engine.

Validation errors subclass ValueError so callers that don't care about the
precise failure can catch broadly; wire decode errors get their own hierarchy
because the transport counts and drops them instead of propagating.
"""


class StagehandError(Exception):
    """Base class for all engine errors."""


# --- hand stream ----------------------------------------------------------

class MalformedRecord(StagehandError, ValueError):
    """Trace line is not valid JSON or misses a required field."""


class BadLandmarkCount(StagehandError, ValueError):
    """A frame did not carry exactly 21 landmarks."""


class OutOfRange(StagehandError, ValueError):
    """A landmark coordinate is non-finite or outside the accepted range."""


class NonMonotonicTime(StagehandError, ValueError):
    """Frame timestamps must strictly increase within a stream."""


# --- gesture engine --------------------------------------------------------

class DegenerateGeometry(StagehandError, ValueError):
    """A geometric primitive received coincident or zero-length input."""


# --- roles -----------------------------------------------------------------

class ConfigurationError(StagehandError, ValueError):
    """Engine or role configuration is inconsistent or incomplete."""


class DuplicateRobotAssignment(ConfigurationError):
    """Two fingers were mapped to the same robot."""


# --- stage -----------------------------------------------------------------

class UnknownRobot(StagehandError, KeyError):
    """A singly-addressed command referenced a robot id not on stage."""


# --- cue files -------------------------------------------------------------

class MalformedCueFile(StagehandError, ValueError):
    """Cue file is not valid JSON or violates the cue schema."""


class NegativeOffset(MalformedCueFile):
    """A cue offset was negative."""


class UnknownAction(MalformedCueFile):
    """A cue carried an unrecognized action object."""


class TargetOutOfBounds(StagehandError, ValueError):
    """A choreography mark lies outside the drivable stage area."""


# --- wire protocol ---------------------------------------------------------

class WireError(StagehandError, ValueError):
    """Base for datagram encode/decode failures."""


class UnrepresentableValue(WireError):
    """A command field does not fit its fixed-point wire representation."""


class DecodeError(WireError):
    """Base for datagram decode failures; counted and dropped by transports."""


class BadMagic(DecodeError):
    pass


class BadVersion(DecodeError):
    pass


class BadLength(DecodeError):
    pass


class BadChecksum(DecodeError):
    pass


class UnknownCmd(DecodeError):
    pass
