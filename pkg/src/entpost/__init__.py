"""Simulator for a three-party messaging protocol built on anti-correlated
pair sequences: permutation-pair codebooks, alternating public reveals,
elimination decoding, and adversary experiments."""

from .codebook import (
    BIT_PAIR_ORDER,
    CapacityError,
    Codebook,
    CodebookEntry,
    CodebookError,
    Defect,
    Pairing,
    SequenceCode,
    effective_distance,
    generate_codebook,
    load_codebook,
    mismatch_set,
    reference_codebook,
    relative_pairing,
    repair_sequence,
    save_codebook,
    survival_probability,
    validate_codebook,
    validate_sequence,
)
from .epr import NOISELESS, NoiseModel, PairBlock, PairOutcomes, SpinOutcome, sample_block
from .montecarlo import (
    ExperimentSpec,
    StatsReport,
    aggregate_rows,
    run_experiment,
    run_trial,
)
from .netsim import (
    BatchDump,
    FairnessPolicy,
    Honest,
    LieWithProb,
    WithholdAfter,
    enforce_fairness,
    fairness_gap,
    parse_strategy,
)
from .protocol import (
    AbortReason,
    DecodeResult,
    DecodeStatus,
    Party,
    ProtocolConfig,
    ProtocolViolationError,
    Receiver,
    RevealEvent,
    SessionOutcome,
    TerminalRecord,
    Transcript,
    alice_prepare,
    decode_message,
    decode_transcript,
    encode_message,
    measure_all,
    run_message,
    run_session,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BIT_PAIR_ORDER",
    "CapacityError",
    "Codebook",
    "CodebookEntry",
    "CodebookError",
    "Defect",
    "Pairing",
    "SequenceCode",
    "effective_distance",
    "generate_codebook",
    "load_codebook",
    "mismatch_set",
    "reference_codebook",
    "relative_pairing",
    "repair_sequence",
    "save_codebook",
    "survival_probability",
    "validate_codebook",
    "validate_sequence",
    "NOISELESS",
    "NoiseModel",
    "PairBlock",
    "PairOutcomes",
    "SpinOutcome",
    "sample_block",
    "ExperimentSpec",
    "StatsReport",
    "aggregate_rows",
    "run_experiment",
    "run_trial",
    "BatchDump",
    "FairnessPolicy",
    "Honest",
    "LieWithProb",
    "WithholdAfter",
    "enforce_fairness",
    "fairness_gap",
    "parse_strategy",
    "AbortReason",
    "DecodeResult",
    "DecodeStatus",
    "Party",
    "ProtocolConfig",
    "ProtocolViolationError",
    "Receiver",
    "RevealEvent",
    "SessionOutcome",
    "TerminalRecord",
    "Transcript",
    "alice_prepare",
    "decode_message",
    "decode_transcript",
    "encode_message",
    "measure_all",
    "run_message",
    "run_session",
]
