"""Exception hierarchy shared by the codec, file I/O and the CLI."""


class WatermarkError(Exception):
    """Base class for every error raised by this package."""


class SequenceTooShort(WatermarkError):
    pass


class EmptyLogo(WatermarkError):
    pass


class DimensionMismatch(WatermarkError):
    pass


class CapacityError(WatermarkError):
    """Payload does not fit; CLI exit status 2."""


class FrameCapacityExceeded(CapacityError):
    def __init__(self, frame, t, payload_left, flags_left):
        super().__init__(
            f"frame {frame}: capacity exceeded at t={t} "
            f"({payload_left} payload bits and {flags_left} flags pending)"
        )
        self.frame = frame
        self.t = t
        self.payload_left = payload_left
        self.flags_left = flags_left


class CapacityExceeded(CapacityError):
    def __init__(self, frame, t_max):
        super().__init__(f"frame {frame}: logo does not fit even at t={t_max}")
        self.frame = frame
        self.t_max = t_max


class CorruptionError(WatermarkError):
    """Watermarked data or side information is inconsistent; CLI exit status 3."""


class MissingFlag(CorruptionError):
    pass


class CorruptStream(CorruptionError):
    pass


class RecordOutOfBounds(CorruptionError):
    pass


class MalformedRecord(CorruptionError):
    pass


class MalformedSidecar(CorruptionError):
    pass


class HeaderMismatch(CorruptionError):
    pass


class PayloadDisagreement(CorruptionError):
    pass


class FormatError(WatermarkError):
    """Unreadable or inconsistent input file."""


class MalformedPGM(FormatError):
    pass


class MalformedPBM(FormatError):
    pass


class MixedDimensions(FormatError):
    pass


class SizeMismatch(FormatError):
    pass


class InvalidSpec(WatermarkError):
    pass
