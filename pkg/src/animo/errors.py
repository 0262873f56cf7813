"""Typed error hierarchy.

Every failure mode a caller is expected to handle gets its own class so
call sites can catch precisely. All of them derive from AnimoError; the
CLI maps any AnimoError to a nonzero exit with the message on stderr.
"""


class AnimoError(Exception):
    """Base class for all typed errors raised by this package."""


# --- engine ---------------------------------------------------------------

class ImplausibleSample(AnimoError):
    """A heart-rate value outside the physiological plausibility gate."""


class EmptyTask(AnimoError):
    """A calibration task produced no samples."""


class CalibrationDegenerate(AnimoError):
    """Calibration yielded high_bpm <= low_bpm; tasks must be re-run."""


class EmptyBand(AnimoError):
    """The catalog has no entry for the requested energy band."""


class CatalogInvalid(AnimoError):
    """A catalog file failed structural validation at load."""


# --- protocol -------------------------------------------------------------

class ProtocolError(AnimoError):
    """Base for wire-format rejections."""


class MalformedFrame(ProtocolError):
    """Frame is not a syntactically valid envelope."""


class UnknownKind(ProtocolError):
    """Envelope kind is not part of the protocol."""


class UnsupportedVersion(ProtocolError):
    """Envelope version is not spoken by this peer."""


class InvariantViolation(ProtocolError):
    """Envelope parsed but its payload breaks a domain invariant."""


# --- relay ----------------------------------------------------------------

class AlreadyPaired(AnimoError):
    """A user in the pairing request is already a member of a dyad."""


class SelfPair(AnimoError):
    """A user cannot be paired with themselves."""


class NotPaired(AnimoError):
    """Sender has no partner to route to."""


class InvalidState(AnimoError):
    """An animo state failed validation against the loaded catalog."""


class UnknownMessage(AnimoError):
    """msg_id does not exist."""


class NotRecipient(AnimoError):
    """The acting user is not the recorded receiver of the message."""


class AlreadyTerminal(AnimoError):
    """The message is not in a readable state."""


class ExpiredMessage(AnimoError):
    """The read arrived after the ephemerality window closed."""


# --- simulator / analytics / cli -------------------------------------------

class InvalidModel(AnimoError):
    """Behavior model parameters out of range."""


class CorruptLog(AnimoError):
    """Event log replay hit an illegal record or transition."""


class ConfigError(AnimoError):
    """Configuration file or flag value out of range."""
