"""Pinyin typo correction: keyboard-aware attention-supervised transduction.

Turns a raw, unsegmented, possibly misspelled or abbreviated letter string
into K-best sequences of valid pinyin syllables. The attention of the
character-to-syllable encoder-decoder is supervised with alignment targets
derived from per-letter mistype statistics.
"""

__version__ = "0.1.0"

from .alignment import AlignmentMatrix, attention_distance, build_alignment, normalize_alignment
from .beam import Hypothesis, beam_search
from .checkpoint import load_checkpoint, save_checkpoint
from .keystrokes import KeystrokeLog, TransitionModel, estimate_transitions
from .lexicon import Lexicon, acronym_of, default_lexicon, load_lexicon
from .model import ModelConfig, Parameters
from .noise import InputType, NoiseSpec, Sample, classify_input_type, corrupt_sentence, generate_corpus
from .segmentation import Segmentation, best_segmentation, edit_distance, segmentation_score
from .training import Checkpoint, TrainSpec, train

__all__ = [
    "AlignmentMatrix",
    "Checkpoint",
    "Hypothesis",
    "InputType",
    "KeystrokeLog",
    "Lexicon",
    "ModelConfig",
    "NoiseSpec",
    "Parameters",
    "Sample",
    "Segmentation",
    "TrainSpec",
    "TransitionModel",
    "acronym_of",
    "attention_distance",
    "beam_search",
    "best_segmentation",
    "build_alignment",
    "classify_input_type",
    "corrupt_sentence",
    "default_lexicon",
    "edit_distance",
    "estimate_transitions",
    "generate_corpus",
    "load_checkpoint",
    "load_lexicon",
    "normalize_alignment",
    "save_checkpoint",
    "segmentation_score",
    "train",
]
