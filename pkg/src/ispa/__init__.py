"""Transcribe animal and general audio into discrete, human-readable tokens.

Two pipelines share a Viterbi segmentation engine: an acoustics-based one
built on pitch and spectral bandwidth, and a feature-based one built on a
k-means codebook over frame features (MFCC by default, or imported
embeddings).
"""

from .acoustic import (
    AcousticConfig,
    IspaAToken,
    PitchSegmentModel,
    REST,
    acoustic_segment_cost,
    classify_bandwidth,
    encode_tokens,
    hz_to_octave,
    octave_center_hz,
    parse_tokens,
    quantize_length,
    synthesize,
    TokenSyntaxError,
    transcribe_a,
)
from .audio import AudioError, Waveform, load_audio, resample, save_wav
from .evaluate import (
    DatasetManifest,
    TokenDocument,
    ngram_featurize,
    read_manifest,
    run_eval,
    tokens_per_second,
    train_eval_classifier,
)
from .feature_tokens import (
    Codebook,
    PhoneTable,
    assign_frames,
    encode_length_punct,
    feature_segment_cost,
    load_codebook,
    map_phones,
    phone_mean_vectors,
    save_codebook,
    solve_assignment,
    train_codebook,
    transcribe_f,
)
from .features import (
    FeatureSequence,
    FormatError,
    PitchConfig,
    PitchTrack,
    compute_mfcc,
    estimate_pitch,
    import_features,
    import_pitch,
    spectral_bandwidth,
    write_features,
    write_pitch,
)
from .segmenter import Segment, SegmentationConfig, length_penalty, viterbi_segment

__version__ = "0.1.0"

__all__ = [
    "AcousticConfig",
    "AudioError",
    "Codebook",
    "DatasetManifest",
    "FeatureSequence",
    "FormatError",
    "IspaAToken",
    "PhoneTable",
    "PitchConfig",
    "PitchSegmentModel",
    "PitchTrack",
    "REST",
    "Segment",
    "SegmentationConfig",
    "TokenDocument",
    "TokenSyntaxError",
    "Waveform",
    "acoustic_segment_cost",
    "assign_frames",
    "classify_bandwidth",
    "compute_mfcc",
    "encode_length_punct",
    "encode_tokens",
    "estimate_pitch",
    "feature_segment_cost",
    "hz_to_octave",
    "import_features",
    "import_pitch",
    "length_penalty",
    "load_audio",
    "load_codebook",
    "map_phones",
    "ngram_featurize",
    "octave_center_hz",
    "parse_tokens",
    "phone_mean_vectors",
    "quantize_length",
    "read_manifest",
    "resample",
    "run_eval",
    "save_codebook",
    "save_wav",
    "solve_assignment",
    "spectral_bandwidth",
    "synthesize",
    "tokens_per_second",
    "train_codebook",
    "train_eval_classifier",
    "transcribe_a",
    "transcribe_f",
    "viterbi_segment",
    "write_features",
    "write_pitch",
]
