"""Exception hierarchy shared across the package."""


class AudioscopeError(Exception):
    """Base class for all errors raised by this package."""


# -- audio_io ----------------------------------------------------------------

class AudioError(AudioscopeError):
    pass


class MalformedWav(AudioError):
    """Byte stream is not a well-formed RIFF/WAVE container."""


class UnsupportedEncoding(AudioError):
    """WAV container is valid but the codec/bit depth is not supported."""


# -- dsp ---------------------------------------------------------------------

class ClipTooShort(AudioscopeError):
    """Clip shorter than one analysis frame."""


# -- edits -------------------------------------------------------------------

class EditError(AudioscopeError):
    """Base for edit-operation failures.

    ``op_index`` is filled in when the failure happened inside
    :func:`audioscope.edits.apply`, so callers can report which op of a
    pipeline failed.
    """

    op_index: int | None = None


class InvalidRange(EditError):
    pass


class RateMismatch(EditError):
    pass


class OverlapTooLong(EditError):
    pass


class FadeTooLong(EditError):
    pass


class UnknownEditOp(EditError):
    pass


# -- nn ----------------------------------------------------------------------

class ShapeMismatch(AudioscopeError):
    pass


class CheckpointError(AudioscopeError):
    pass


class BadMagic(CheckpointError):
    pass


class VersionMismatch(CheckpointError):
    pass


class Truncated(CheckpointError):
    pass


# -- dataset / training ------------------------------------------------------

class DatasetNotFound(AudioscopeError):
    pass


class EmptyClass(AudioscopeError):
    """A digit class directory exists but contains no WAV files."""


class ConfigError(AudioscopeError):
    pass


class EmptyEvalSet(AudioscopeError):
    pass


# -- introspect --------------------------------------------------------------

class NoParameters(AudioscopeError):
    """Requested layer has no trainable parameters."""
