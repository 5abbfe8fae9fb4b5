"""Three-party session logic: prepare, measure, reveal, decode.

The sender encodes one double bit by choosing a codebook entry; each
receiver then holds n predetermined z-outcomes whose anti-correlation
structure follows that entry's pairing. Receivers take turns publishing
single outcomes. Every published outcome lets the counterpart complete one
consistency check per codebook entry against its own private outcomes; an
entry whose violation fraction exceeds the tolerance is eliminated. A
receiver decodes once exactly one entry stays alive with enough residual
confidence, and aborts when none does.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from . import rng as rng_mod
from .codebook import (
    BIT_PAIR_ORDER,
    Codebook,
    CodebookEntry,
    Pairing,
    effective_distance,
    generate_codebook,
)
from .epr import NOISELESS, NoiseModel, SpinOutcome, flip_outcomes, sample_block

__all__ = [
    "Party",
    "ProtocolConfig",
    "ProtocolViolationError",
    "PreparedBlock",
    "RevealEvent",
    "TerminalRecord",
    "Transcript",
    "CandidateState",
    "Receiver",
    "DecodeStatus",
    "AbortReason",
    "DecodeResult",
    "SessionOutcome",
    "MessageFrame",
    "alice_prepare",
    "prepared_block_from_signs",
    "measure_all",
    "decode_transcript",
    "run_session",
    "encode_message",
    "decode_message",
    "run_message",
]


class Party(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    SONAI = "sonai"

    def counterpart(self) -> "Party":
        if self is Party.BOB:
            return Party.SONAI
        if self is Party.SONAI:
            return Party.BOB
        raise ValueError("only receivers have a counterpart")


class ProtocolViolationError(Exception):
    """A reveal that breaks the public rules (duplicate position, bad round)."""


class DecodeStatus(str, Enum):
    DECODED = "decoded"
    UNDECIDED = "undecided"
    ABORT = "abort"


class AbortReason(str, Enum):
    NO_CONSISTENT_ENTRY = "no_consistent_entry"
    TIMEOUT = "timeout"
    FAIRNESS_VIOLATION = "fairness_violation"


@dataclass(frozen=True)
class ProtocolConfig:
    """Session parameters.

    delta is the per-entry violation fraction tolerated before elimination.
    Keep it well below the midpoint between the honest check-violation rate
    2*eps*(1-eps) and the wrong-entry rate 1/2, otherwise the two outcome
    populations overlap. reveal_first names the receiver who opens.
    """

    n: int = 64
    lam: int = 16
    noise: NoiseModel = NOISELESS
    delta: float = 0.0
    confidence_target: float = 0.999
    reveal_first: Party = Party.BOB
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.noise, (int, float)) and not isinstance(self.noise, bool):
            object.__setattr__(self, "noise", NoiseModel(float(self.noise)))
        if isinstance(self.reveal_first, str):
            object.__setattr__(self, "reveal_first", Party(self.reveal_first))
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if self.lam < 1:
            raise ValueError(f"lam must be at least 1, got {self.lam}")
        if not (0.0 <= self.delta < 0.5):
            raise ValueError(f"delta must lie in [0, 0.5), got {self.delta}")
        if not (0.0 < self.confidence_target < 1.0):
            raise ValueError(
                f"confidence target must lie in (0, 1), got {self.confidence_target}"
            )
        if self.reveal_first not in (Party.BOB, Party.SONAI):
            raise ValueError("reveal_first must be a receiver")


@dataclass(eq=False)
class PreparedBlock:
    """Delivered outcomes for one session, arranged by each party's ordering.

    Noiseless, bob_sequence[k] == -sonai_sequence[map(k)] for the entry's
    pairing map at every position.
    """

    entry: CodebookEntry
    bob_sequence: np.ndarray
    sonai_sequence: np.ndarray

    def sequence_for(self, party: Party) -> np.ndarray:
        if party is Party.BOB:
            return self.bob_sequence
        if party is Party.SONAI:
            return self.sonai_sequence
        raise ValueError("only receivers hold outcome sequences")


def prepared_block_from_signs(entry: CodebookEntry, signs: Sequence[int]) -> PreparedBlock:
    """Noiseless block with sender-side orientations forced to ``signs``
    (one +/-1 per pair label, in label order). Used for exhaustive studies."""
    if entry.pairing is None:
        raise ValueError("entry has no valid pairing")
    i_side = np.asarray(signs, dtype=np.int8)
    j_side = -i_side
    bob = i_side.copy()  # sender ordering is the identity
    sonai = j_side[[label - 1 for label in entry.s_j.order]]
    return PreparedBlock(entry=entry, bob_sequence=bob, sonai_sequence=sonai.copy())


def alice_prepare(
    bits: tuple[int, int],
    cb: Codebook,
    noise: NoiseModel,
    rng: np.random.Generator,
    noise_rng_bob: np.random.Generator | None = None,
    noise_rng_sonai: np.random.Generator | None = None,
) -> PreparedBlock:
    """Pick the entry for ``bits``, draw a fresh block, arrange both sides,
    then corrupt each delivered side independently per the noise model."""
    entry = cb.entry_for_bits(*bits)
    block = sample_block(cb.n, NOISELESS, rng)
    prepared = prepared_block_from_signs(entry, block.i_side)
    if not noise.noiseless:
        rng_b = noise_rng_bob if noise_rng_bob is not None else rng
        rng_s = noise_rng_sonai if noise_rng_sonai is not None else rng
        prepared.bob_sequence = flip_outcomes(prepared.bob_sequence, noise, rng_b)
        prepared.sonai_sequence = flip_outcomes(prepared.sonai_sequence, noise, rng_s)
    return prepared


def measure_all(party: Party, block: PreparedBlock) -> np.ndarray:
    """The party's outcomes in its own position order. Outcomes are
    predetermined at preparation, so measuring is a read-out and repeating it
    changes nothing."""
    return block.sequence_for(party).copy()


@dataclass(frozen=True)
class RevealEvent:
    """One published outcome: ``position`` is 1-based in the revealer's own
    ordering; ``round`` numbers reveals globally from 1."""

    round: int
    party: Party
    position: int
    outcome: SpinOutcome

    def to_json_obj(self) -> dict:
        return {
            "round": self.round,
            "party": self.party.value,
            "position": self.position,
            "outcome": self.outcome.symbol,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RevealEvent":
        return cls(
            round=int(obj["round"]),
            party=Party(obj["party"]),
            position=int(obj["position"]),
            outcome=SpinOutcome.from_symbol(obj["outcome"]),
        )


@dataclass(frozen=True)
class TerminalRecord:
    """Session outcome line appended after the reveal events."""

    status: DecodeStatus
    bob_bit: int | None
    sonai_bit: int | None
    confidence: float
    abort_reason: AbortReason | None

    def to_json_obj(self) -> dict:
        return {
            "status": self.status.value,
            "bob_bit": self.bob_bit,
            "sonai_bit": self.sonai_bit,
            "confidence": self.confidence,
            "abort_reason": self.abort_reason.value if self.abort_reason else None,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TerminalRecord":
        return cls(
            status=DecodeStatus(obj["status"]),
            bob_bit=obj["bob_bit"],
            sonai_bit=obj["sonai_bit"],
            confidence=float(obj["confidence"]),
            abort_reason=AbortReason(obj["abort_reason"]) if obj["abort_reason"] else None,
        )


class Transcript:
    """Append-only public record of a session: reveals plus a terminal line."""

    def __init__(self) -> None:
        self.events: list[RevealEvent] = []
        self.terminal: TerminalRecord | None = None
        self._seen: set[tuple[Party, int]] = set()

    def append(self, event: RevealEvent) -> None:
        if self.terminal is not None:
            raise ProtocolViolationError("transcript already closed by a terminal record")
        if event.round != len(self.events) + 1:
            raise ProtocolViolationError(
                f"round numbers must increase by one: expected {len(self.events) + 1}, "
                f"got {event.round}"
            )
        key = (event.party, event.position)
        if key in self._seen:
            raise ProtocolViolationError(
                f"duplicate reveal of {event.party.value} position {event.position}"
            )
        self._seen.add(key)
        self.events.append(event)

    def close(self, terminal: TerminalRecord) -> None:
        if self.terminal is not None:
            raise ProtocolViolationError("transcript already closed")
        self.terminal = terminal

    def reveal_counts(self) -> dict[Party, int]:
        counts = {Party.BOB: 0, Party.SONAI: 0}
        for event in self.events:
            counts[event.party] += 1
        return counts

    def to_jsonl(self, fp: IO[str] | None = None) -> str:
        lines = [json.dumps(e.to_json_obj(), separators=(",", ":")) for e in self.events]
        if self.terminal is not None:
            lines.append(json.dumps(self.terminal.to_json_obj(), separators=(",", ":")))
        text = "\n".join(lines) + ("\n" if lines else "")
        if fp is not None:
            fp.write(text)
        return text

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        """Parse a recorded transcript; raises ProtocolViolationError with the
        offending line number on malformed or rule-breaking lines."""
        transcript = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProtocolViolationError(f"line {lineno}: not valid JSON: {exc}") from exc
            try:
                if "status" in obj:
                    transcript.close(TerminalRecord.from_json_obj(obj))
                else:
                    transcript.append(RevealEvent.from_json_obj(obj))
            except ProtocolViolationError as exc:
                raise ProtocolViolationError(f"line {lineno}: {exc}") from exc
            except (KeyError, ValueError, TypeError) as exc:
                raise ProtocolViolationError(f"line {lineno}: malformed record: {exc}") from exc
        return transcript


class CandidateState:
    """Check tally for one codebook entry as seen by one receiver."""

    __slots__ = (
        "entry",
        "to_counterpart",
        "from_counterpart",
        "checks_completed",
        "violations",
        "alive",
        "checked_positions",
        "check_passed",
    )

    def __init__(self, entry: CodebookEntry, to_counterpart: list[int], from_counterpart: list[int]):
        self.entry = entry
        # Own 0-based position -> counterpart 0-based position, and back.
        self.to_counterpart = to_counterpart
        self.from_counterpart = from_counterpart
        self.checks_completed = 0
        self.violations = 0
        self.alive = True
        self.checked_positions: list[int] = []
        self.check_passed: list[bool] = []


class Receiver:
    """One receiver's private view: own outcomes plus per-entry check state.

    Each counterpart reveal completes exactly one check per entry: the
    revealed outcome is compared with the own outcome at the entry's paired
    position, expecting opposite signs. ``alive`` is recomputed after every
    check as violations <= delta * checks_completed.
    """

    def __init__(self, party: Party, cb: Codebook, own_outcomes: np.ndarray, config: ProtocolConfig):
        if party not in (Party.BOB, Party.SONAI):
            raise ValueError("only receivers decode")
        self.party = party
        self.codebook = cb
        self.config = config
        self.own = [int(v) for v in own_outcomes]
        self.candidates: list[CandidateState] = []
        for entry in cb.entries:
            if entry.pairing is None:
                raise ValueError(f"entry {entry.bits} has no valid pairing")
            fwd = entry.pairing.zero_based()
            inv = entry.pairing.inverse().zero_based()
            if party is Party.BOB:
                to_cp, from_cp = fwd, inv
            else:
                to_cp, from_cp = inv, fwd
            self.candidates.append(CandidateState(entry, to_cp, from_cp))
        self._received = bytearray(cb.n)
        self.received_count = 0
        self.next_position = 0  # 0-based pointer into own reveal order

    # -- reveal side ------------------------------------------------------

    def next_reveal(self) -> tuple[int, int] | None:
        """(1-based position, own outcome) for the lowest unrevealed own
        position, or None when everything is out."""
        if self.next_position >= len(self.own):
            return None
        pos = self.next_position
        self.next_position += 1
        return pos + 1, self.own[pos]

    @property
    def sent_count(self) -> int:
        return self.next_position

    # -- observation side --------------------------------------------------

    def observe_reveal(self, position: int, outcome: int) -> None:
        """Fold one counterpart reveal into every entry's check state."""
        q = position - 1
        if not 0 <= q < len(self.own):
            raise ProtocolViolationError(f"reveal position out of range: {position}")
        if self._received[q]:
            raise ProtocolViolationError(
                f"duplicate reveal of {self.party.counterpart().value} position {position}"
            )
        self._received[q] = 1
        self.received_count += 1
        delta = self.config.delta
        own = self.own
        for cand in self.candidates:
            own_pos = cand.from_counterpart[q]
            passed = own[own_pos] != outcome  # partners must be opposite
            cand.checks_completed += 1
            if not passed:
                cand.violations += 1
            cand.alive = cand.violations <= delta * cand.checks_completed
            cand.checked_positions.append(own_pos)
            cand.check_passed.append(passed)

    def observe_all(self, outcomes: Sequence[int] | np.ndarray) -> None:
        """Fold the counterpart's complete outcome sequence at once.

        End state matches n observe_reveal calls in ascending position order;
        kept vectorized because measurement campaigns run this per trial.
        """
        n = self.codebook.n
        if self.received_count:
            raise ProtocolViolationError("bulk observation only applies to a fresh receiver")
        if len(outcomes) != n:
            raise ProtocolViolationError(
                f"expected {n} outcomes, got {len(outcomes)}"
            )
        values = np.asarray(outcomes, dtype=np.int8)
        own_arr = np.asarray(self.own, dtype=np.int8)
        delta = self.config.delta
        for cand in self.candidates:
            passed = own_arr[cand.from_counterpart] != values
            cand.checks_completed = n
            cand.violations = int(n - passed.sum())
            cand.alive = cand.violations <= delta * n
            cand.checked_positions = cand.from_counterpart
            cand.check_passed = passed.tolist()
        self._received = bytearray(b"\x01" * n)
        self.received_count = n

    @property
    def received_all(self) -> bool:
        return self.received_count >= self.codebook.n

    # -- decoding ----------------------------------------------------------

    def alive_candidates(self) -> list[CandidateState]:
        return [c for c in self.candidates if c.alive]

    def survival_log2(self, candidate: CandidateState, reference: CandidateState) -> int:
        """log2 of the chance a wrong ``candidate`` would have passed its
        completed checks, were ``reference`` the true entry.

        Noiseless only: each passed check on a position whose pairing differs
        from the reference's ties two own positions to the same underlying
        orientation; the rank of that constraint graph (vertices touched
        minus connected components) counts the independent coin flips the
        candidate survived.
        """
        if not self.config.noise.noiseless:
            raise ValueError("exact survival rank applies only to noiseless sessions")
        ref_from = reference.from_counterpart
        cand_to = candidate.to_counterpart
        parent: dict[int, int] = {}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        rank = 0
        for own_pos, passed in zip(candidate.checked_positions, candidate.check_passed):
            if not passed:
                continue
            partner = ref_from[cand_to[own_pos]]
            if partner == own_pos:
                continue  # matching pairings: the check carries no evidence
            for v in (own_pos, partner):
                if v not in parent:
                    parent[v] = v
            ra, rb = find(own_pos), find(partner)
            if ra != rb:
                parent[ra] = rb
                rank += 1
        return -rank

    def decode(self) -> "DecodeResult":
        return _decode_candidates(self.candidates, self.config, self.survival_log2)

    def check_count_for(self, bits: tuple[int, int]) -> tuple[int, int]:
        for cand in self.candidates:
            if cand.entry.bits == bits:
                return cand.checks_completed, cand.violations
        raise KeyError(bits)

    def candidate_for(self, bits: tuple[int, int]) -> CandidateState:
        for cand in self.candidates:
            if cand.entry.bits == bits:
                return cand
        raise KeyError(bits)


@dataclass(frozen=True)
class DecodeResult:
    status: DecodeStatus
    bob_bit: int | None
    sonai_bit: int | None
    confidence: float
    abort_reason: AbortReason | None = None
    exact_confidence: bool = True

    @classmethod
    def aborted(cls, reason: AbortReason) -> "DecodeResult":
        return cls(DecodeStatus.ABORT, None, None, 0.0, reason)


def _decode_candidates(candidates, config, survival_log2) -> DecodeResult:
    """Shared decode rule for private receivers and transcript replays."""
    alive = [c for c in candidates if c.alive]
    if not alive:
        return DecodeResult.aborted(AbortReason.NO_CONSISTENT_ENTRY)
    noiseless = config.noise.noiseless
    if noiseless:
        lead = alive[0]  # candidates stay in the fixed bit-pair order
        residual = sum(2.0 ** survival_log2(c, lead) for c in alive[1:])
        confidence = max(0.0, 1.0 - residual)
        exact = True
    else:
        # Violation counts are binomial: rate 2*eps*(1-eps) for the true
        # entry, 1/2 for wrong ones. Report a normalized likelihood weight;
        # it is a heuristic score, not an exact probability.
        eps = config.noise.flip_probability
        q = 2.0 * eps * (1.0 - eps)
        loglik = [
            c.violations * math.log(q) + (c.checks_completed - c.violations) * math.log1p(-q)
            if c.checks_completed
            else 0.0
            for c in candidates
        ]
        alive_idx = [i for i, c in enumerate(candidates) if c.alive]
        lead_idx = min(alive_idx, key=lambda i: (candidates[i].violations, i))
        lead = candidates[lead_idx]
        peak = max(loglik)
        total = sum(math.exp(v - peak) for v in loglik)
        confidence = math.exp(loglik[lead_idx] - peak) / total
        exact = False
    if len(alive) == 1 and confidence >= config.confidence_target:
        return DecodeResult(
            DecodeStatus.DECODED,
            lead.entry.bits[0],
            lead.entry.bits[1],
            confidence,
            None,
            exact,
        )
    return DecodeResult(DecodeStatus.UNDECIDED, None, None, confidence, None, exact)


def decode_transcript(cb: Codebook, transcript: Transcript, config: ProtocolConfig) -> DecodeResult:
    """Decode from the public record alone.

    A check completes once both of its positions have been revealed, so a
    complete transcript reaches exactly the per-party end state, while a
    truncated one yields a partial, usually undecided, view.
    """
    n = cb.n
    bob_vals: list[int | None] = [None] * n
    sonai_vals: list[int | None] = [None] * n
    states: list[CandidateState] = []
    for entry in cb.entries:
        if entry.pairing is None:
            raise ValueError(f"entry {entry.bits} has no valid pairing")
        states.append(
            CandidateState(entry, entry.pairing.zero_based(), entry.pairing.inverse().zero_based())
        )
    delta = config.delta
    seen: set[tuple[Party, int]] = set()
    for event in transcript.events:
        key = (event.party, event.position)
        if key in seen:
            raise ProtocolViolationError(
                f"duplicate reveal of {event.party.value} position {event.position}"
            )
        seen.add(key)
        value = int(event.outcome.value)
        pos = event.position - 1
        if not 0 <= pos < n:
            raise ProtocolViolationError(f"reveal position out of range: {event.position}")
        if event.party is Party.BOB:
            bob_vals[pos] = value
            for cand in states:
                partner = cand.to_counterpart[pos]
                other = sonai_vals[partner]
                if other is None:
                    continue
                _complete_check(cand, pos, value != other, delta)
        else:
            sonai_vals[pos] = value
            for cand in states:
                partner = cand.from_counterpart[pos]
                other = bob_vals[partner]
                if other is None:
                    continue
                _complete_check(cand, partner, other != value, delta)

    def survival(candidate: CandidateState, reference: CandidateState) -> int:
        ref_inv = reference.from_counterpart
        parent: dict[int, int] = {}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        rank = 0
        for own_pos, passed in zip(candidate.checked_positions, candidate.check_passed):
            if not passed:
                continue
            partner = ref_inv[candidate.to_counterpart[own_pos]]
            if partner == own_pos:
                continue
            for v in (own_pos, partner):
                parent.setdefault(v, v)
            ra, rb = find(own_pos), find(partner)
            if ra != rb:
                parent[ra] = rb
                rank += 1
        return -rank

    return _decode_candidates(states, config, survival)


def _complete_check(cand: CandidateState, bob_pos: int, passed: bool, delta: float) -> None:
    cand.checks_completed += 1
    if not passed:
        cand.violations += 1
    cand.alive = cand.violations <= delta * cand.checks_completed
    cand.checked_positions.append(bob_pos)
    cand.check_passed.append(passed)


@dataclass(eq=False)
class SessionOutcome:
    """Everything a finished session leaves behind."""

    transcript: Transcript
    results: dict[Party, DecodeResult]
    receivers: dict[Party, Receiver]
    event_log: list[dict]
    ticks: int
    codebook: Codebook

    @property
    def terminal(self) -> TerminalRecord:
        assert self.transcript.terminal is not None
        return self.transcript.terminal


def run_session(
    config: ProtocolConfig,
    bits: tuple[int, int],
    strategies: dict[Party, object] | None = None,
    cb: Codebook | None = None,
    policy: object | None = None,
) -> SessionOutcome:
    """Run one complete session on the deterministic network simulator.

    A fresh codebook is generated from the session seed unless one is passed
    in. Strategies default to honest conduct for both receivers.
    """
    from . import netsim  # session runner sits on top of the simulator

    if cb is None:
        cb = generate_codebook(
            config.n, config.lam, rng_mod.substream(config.seed, rng_mod.KEY_CODEBOOK)
        )
    world = netsim.build_world(config, bits, cb=cb, strategies=strategies, policy=policy)
    return netsim.run_world(world)


@dataclass(frozen=True)
class MessageFrame:
    """A multi-bit payload for each receiver, one prepared session per index."""

    bob_bits: tuple[int, ...]
    sonai_bits: tuple[int, ...]
    codebooks: tuple[Codebook, ...]

    def __len__(self) -> int:
        return len(self.bob_bits)


def _parse_bits(text: str) -> tuple[int, ...]:
    if not text or any(ch not in "01" for ch in text):
        raise ValueError(f"bit string must be non-empty over 0/1, got {text!r}")
    return tuple(int(ch) for ch in text)


def encode_message(bob_msg: str, sonai_msg: str, config: ProtocolConfig) -> MessageFrame:
    """Frame two equal-length bit strings: one session (and one fresh
    codebook) per bit-pair index."""
    bob_bits = _parse_bits(bob_msg)
    sonai_bits = _parse_bits(sonai_msg)
    if len(bob_bits) != len(sonai_bits):
        raise ValueError(
            f"message lengths differ: {len(bob_bits)} vs {len(sonai_bits)}"
        )
    codebooks = tuple(
        generate_codebook(
            config.n,
            config.lam,
            rng_mod.substream(config.seed, rng_mod.KEY_BLOCK, index, rng_mod.KEY_CODEBOOK),
        )
        for index in range(len(bob_bits))
    )
    return MessageFrame(bob_bits=bob_bits, sonai_bits=sonai_bits, codebooks=codebooks)


def decode_message(outcomes: Sequence[SessionOutcome]) -> tuple[str, str]:
    """Concatenate per-session decodes; any non-decoded session fails the
    whole message."""
    bob: list[str] = []
    sonai: list[str] = []
    for index, outcome in enumerate(outcomes):
        result = outcome.results[Party.BOB]
        other = outcome.results[Party.SONAI]
        for res in (result, other):
            if res.status is not DecodeStatus.DECODED:
                reason = res.abort_reason.value if res.abort_reason else res.status.value
                raise ProtocolViolationError(f"message block {index} did not decode: {reason}")
        if (result.bob_bit, result.sonai_bit) != (other.bob_bit, other.sonai_bit):
            raise ProtocolViolationError(f"message block {index}: receivers disagree")
        bob.append(str(result.bob_bit))
        sonai.append(str(result.sonai_bit))
    return "".join(bob), "".join(sonai)


def run_message(
    bob_msg: str,
    sonai_msg: str,
    config: ProtocolConfig,
    strategies: dict[Party, object] | None = None,
    policy: object | None = None,
) -> tuple[list[SessionOutcome], tuple[str, str]]:
    """Encode, run one session per bit pair, decode. Raises on any block
    that fails to decode, mirroring decode_message."""
    frame = encode_message(bob_msg, sonai_msg, config)
    outcomes: list[SessionOutcome] = []
    for index in range(len(frame)):
        block_config = replace(config, seed=rng_mod.derive_seed(config.seed, rng_mod.KEY_BLOCK, index))
        outcomes.append(
            run_session(
                block_config,
                (frame.bob_bits[index], frame.sonai_bits[index]),
                strategies=strategies,
                cb=frame.codebooks[index],
                policy=policy,
            )
        )
    return outcomes, decode_message(outcomes)
