class PinyinTypoError(Exception):
    """Base class for all errors raised by this package."""


class LexiconError(PinyinTypoError):
    """Invalid syllable inventory or malformed lexicon file."""


class SegmentationError(PinyinTypoError):
    """No valid segmentation exists for the requested split."""


class FileFormatError(PinyinTypoError):
    """Malformed data file; carries the offending line number when known."""

    def __init__(self, message, path=None, line=None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)
        self.path = path
        self.line = line


class CheckpointError(PinyinTypoError):
    """Unreadable, truncated, or inconsistent checkpoint file."""


class ConfigError(PinyinTypoError):
    """Invalid run configuration; message lists every offending key."""


class TrainingDiverged(PinyinTypoError):
    """Loss became non-finite during training."""

    def __init__(self, iteration):
        super().__init__(f"loss became non-finite at iteration {iteration}")
        self.iteration = iteration
