"""Exception and warning taxonomy shared by all pmct modules."""


class PmctError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedFormatError(PmctError):
    """Audio file uses a codec or bit depth the toolkit does not read."""


class SampleRateMismatchError(PmctError):
    """File sample rate differs from the required rate in strict mode."""


class MalformedHeaderError(PmctError):
    """Binary feature/attention file header is invalid or truncated."""


class EmptyInputError(PmctError):
    """A signal that must be nonempty has zero samples."""


class EmptyImpulseError(PmctError):
    """Impulse response has no taps or only zero taps."""


class SilentNoiseError(PmctError):
    """Noise segment has zero power; an SNR gain cannot be computed."""


class TooShortError(PmctError):
    """Signal shorter than one analysis frame."""


class ManifestParseError(PmctError):
    """Manifest line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateIdError(PmctError):
    """Manifest contains the same utterance id twice."""

    def __init__(self, line_no: int, entry_id: str):
        super().__init__(f"line {line_no}: duplicate id {entry_id!r}")
        self.line_no = line_no
        self.entry_id = entry_id


class EmptyPoolError(PmctError):
    """Resource pool is empty but the corresponding augmentation is enabled."""


class NonFiniteError(PmctError):
    """Input contains NaN or Inf."""


class EigenFailureError(PmctError):
    """Eigenvalue iteration did not converge."""


class DegenerateVectorError(PmctError):
    """Vector has zero variance; skewness is undefined."""


class InconsistentShapeError(PmctError):
    """Attention tensor sets disagree on layer/head counts."""


class ConfigError(PmctError):
    """Invalid run configuration (maps to CLI exit code 2)."""


class MismatchFoundError(PmctError):
    """Verification found outputs that do not match recomputation."""

    def __init__(self, ids):
        super().__init__(f"{len(ids)} mismatched utterance(s): {', '.join(ids)}")
        self.ids = list(ids)


class ClippingWarning(UserWarning):
    """Samples outside [-1, 1] were hard-clipped during PCM16 encoding."""


class SilentSignalWarning(UserWarning):
    """Signal power is zero; noise addition was skipped."""
