"""Permutation-pair codebooks.

A sequence code is an ordering of the pair labels 1..n. The sender keeps her
own ordering fixed to the identity; the two receivers' orderings induce a
relative pairing: position k on Bob's side is anti-correlated with position
map(k) on Sonai's side. A codebook holds one (bits, ordering) entry per
double-bit value. Decoding security rests on the entries being far apart
under the effective distance defined below: a wrong entry passes a full
noiseless consistency check with probability exactly 2**(-distance).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BIT_PAIR_ORDER",
    "CodebookError",
    "CapacityError",
    "Defect",
    "SequenceCode",
    "Pairing",
    "CodebookEntry",
    "Codebook",
    "relative_pairing",
    "validate_sequence",
    "repair_sequence",
    "mismatch_set",
    "effective_distance",
    "survival_probability",
    "generate_codebook",
    "validate_codebook",
    "make_entry",
    "reference_codebook",
    "codebook_to_document",
    "codebook_from_document",
    "save_codebook",
    "load_codebook",
    "sequence_from_letters",
    "sequence_to_letters",
]

# Double bits in the order the entries are listed and tie-broken everywhere:
# (bob_bit, sonai_bit).
BIT_PAIR_ORDER: tuple[tuple[int, int], ...] = ((0, 0), (1, 1), (0, 1), (1, 0))

CODEBOOK_FORMAT_VERSION = 1


class CodebookError(Exception):
    """Invalid sequence, entry or codebook document."""


class CapacityError(CodebookError):
    """Rejection sampling could not fit four entries at the requested distance."""


@dataclass(frozen=True)
class Defect:
    """One validation finding; ``kind`` is stable, ``message`` is for humans."""

    kind: str  # duplicate-label | missing-label | bad-label | length | bits | pairing | distance
    message: str
    labels: tuple[int, ...] = ()


@dataclass(frozen=True)
class SequenceCode:
    """An ordering of the pair labels 1..n (a permutation when valid)."""

    order: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.order)

    @classmethod
    def identity(cls, n: int) -> "SequenceCode":
        return cls(tuple(range(1, n + 1)))


@dataclass(frozen=True)
class Pairing:
    """Relative pairing map: ``position(k)`` is the counterpart position
    holding the partner of the pair at own position k. A bijection on 1..n."""

    mapping: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.mapping)

    def position(self, k: int) -> int:
        return self.mapping[k - 1]

    def inverse(self) -> "Pairing":
        inv = [0] * len(self.mapping)
        for k, p in enumerate(self.mapping, start=1):
            inv[p - 1] = k
        return Pairing(tuple(inv))

    def zero_based(self) -> list[int]:
        return [p - 1 for p in self.mapping]

    @classmethod
    def identity(cls, n: int) -> "Pairing":
        return cls(tuple(range(1, n + 1)))


def validate_sequence(order: Sequence[int], n: int) -> list[Defect]:
    """Defects that keep ``order`` from being a permutation of 1..n."""
    defects: list[Defect] = []
    if len(order) != n:
        defects.append(Defect("length", f"expected {n} labels, got {len(order)}"))
    seen: dict[int, int] = {}
    bad: list[int] = []
    for label in order:
        if not isinstance(label, int) or isinstance(label, bool) or not 1 <= label <= n:
            bad.append(label)
            continue
        seen[label] = seen.get(label, 0) + 1
    duplicates = tuple(sorted(l for l, c in seen.items() if c > 1))
    missing = tuple(sorted(set(range(1, n + 1)) - seen.keys()))
    if bad:
        defects.append(Defect("bad-label", f"labels outside 1..{n}: {bad}", tuple(bad)))
    if duplicates:
        defects.append(
            Defect("duplicate-label", f"labels appear more than once: {list(duplicates)}", duplicates)
        )
    if missing:
        defects.append(Defect("missing-label", f"labels never appear: {list(missing)}", missing))
    return defects


def repair_sequence(order: Sequence[int], n: int) -> SequenceCode:
    """Minimal fix of a defective ordering: every repeated or out-of-range
    slot after a label's first appearance is refilled with the missing labels
    in ascending order. Valid orderings pass through unchanged."""
    if len(order) != n:
        raise CodebookError(f"cannot repair a length-{len(order)} ordering to n={n}")
    seen: set[int] = set()
    keep: list[int | None] = []
    for label in order:
        if isinstance(label, int) and 1 <= label <= n and label not in seen:
            seen.add(label)
            keep.append(label)
        else:
            keep.append(None)
    missing = iter(sorted(set(range(1, n + 1)) - seen))
    repaired = tuple(label if label is not None else next(missing) for label in keep)
    return SequenceCode(repaired)


def _as_code(seq: "SequenceCode | Sequence[int]") -> SequenceCode:
    if isinstance(seq, SequenceCode):
        return seq
    return SequenceCode(tuple(int(x) for x in seq))


def relative_pairing(s_i: "SequenceCode | Sequence[int]", s_j: "SequenceCode | Sequence[int]") -> Pairing:
    """Pairing induced by two orderings of the same labels.

    map(k) is the position of label s_i[k] inside s_j: the two positions hold
    the halves of one pair and are therefore anti-correlated.
    """
    s_i = _as_code(s_i)
    s_j = _as_code(s_j)
    n = len(s_i)
    if len(s_j) != n:
        raise CodebookError(f"sequence lengths differ: {n} vs {len(s_j)}")
    for name, seq in (("s_i", s_i), ("s_j", s_j)):
        defects = validate_sequence(seq.order, n)
        if defects:
            raise CodebookError(f"{name} is not a permutation: " + "; ".join(d.message for d in defects))
    pos_in_j = {label: p for p, label in enumerate(s_j.order, start=1)}
    return Pairing(tuple(pos_in_j[label] for label in s_i.order))


def mismatch_set(a: Pairing, b: Pairing) -> frozenset[int]:
    """Positions whose partners differ between the two pairings."""
    if len(a) != len(b):
        raise CodebookError(f"pairing lengths differ: {len(a)} vs {len(b)}")
    return frozenset(k for k, (pa, pb) in enumerate(zip(a.mapping, b.mapping), start=1) if pa != pb)


def effective_distance(candidate: Pairing, truth: Pairing) -> int:
    """Number of independent binary constraints a wrong candidate must luck
    through on a full noiseless transcript.

    With sigma = truth^-1 o candidate, the candidate's checks force the
    sender-side outcomes to be constant on each sigma-cycle inside the
    mismatch set; each cycle of length L contributes L - 1 constraints, so
    the distance is |mismatch| - (#cycles on the mismatch set) and the
    survive-by-chance probability is exactly 2**(-distance).
    """
    if len(candidate) != len(truth):
        raise CodebookError(f"pairing lengths differ: {len(candidate)} vs {len(truth)}")
    inv_truth = truth.inverse().zero_based()
    cand = candidate.zero_based()
    sigma = [inv_truth[c] for c in cand]
    mismatched = [k for k in range(len(sigma)) if sigma[k] != k]
    unvisited = set(mismatched)
    cycles = 0
    while unvisited:
        cycles += 1
        k = unvisited.pop()
        step = sigma[k]
        while step != k:
            unvisited.remove(step)
            step = sigma[step]
    return len(mismatched) - cycles


def survival_probability(candidate: Pairing, truth: Pairing) -> float:
    """Chance a wrong candidate passes every noiseless consistency check."""
    return 2.0 ** -effective_distance(candidate, truth)


@dataclass(frozen=True)
class CodebookEntry:
    """One double-bit value with its receiver-side ordering.

    The sender-side ordering is always the identity (canonical form), so the
    pairing is just the inverse of ``s_j`` read as position -> label. The
    pairing is cached; it is ``None`` only for entries parsed from defective
    documents, which never validate.
    """

    bits: tuple[int, int]
    s_i: SequenceCode
    s_j: SequenceCode
    pairing: Pairing | None = field(default=None, compare=False)


def make_entry(bits: tuple[int, int], s_j: Sequence[int], n: int) -> CodebookEntry:
    if tuple(bits) not in BIT_PAIR_ORDER:
        raise ValueError(f"bits must be a pair over 0/1, got {bits!r}")
    s_i = SequenceCode.identity(n)
    code_j = _as_code(s_j)
    pairing = None
    if not validate_sequence(code_j.order, n):
        pairing = relative_pairing(s_i, code_j)
    return CodebookEntry(bits=(int(bits[0]), int(bits[1])), s_i=s_i, s_j=code_j, pairing=pairing)


@dataclass(frozen=True)
class Codebook:
    """Four entries, one per double-bit value, pairwise separated by ``lam``."""

    n: int
    lam: int
    entries: tuple[CodebookEntry, ...]

    def entry_for_bits(self, bob_bit: int, sonai_bit: int) -> CodebookEntry:
        for entry in self.entries:
            if entry.bits == (bob_bit, sonai_bit):
                return entry
        raise CodebookError(f"no entry for bits ({bob_bit}, {sonai_bit})")

    def pairwise_distances(self) -> dict[tuple[tuple[int, int], tuple[int, int]], int]:
        out: dict[tuple[tuple[int, int], tuple[int, int]], int] = {}
        for x in range(len(self.entries)):
            for y in range(x + 1, len(self.entries)):
                a, b = self.entries[x], self.entries[y]
                if a.pairing is not None and b.pairing is not None:
                    out[(a.bits, b.bits)] = effective_distance(a.pairing, b.pairing)
        return out


def generate_codebook(
    n: int,
    lam: int,
    rng: np.random.Generator,
    max_attempts: int = 10_000,
) -> Codebook:
    """Draw four receiver-side orderings by rejection until all six pairwise
    effective distances reach ``lam``.

    Raises CapacityError once ``max_attempts`` candidate orderings have been
    rejected, which is how impossible requests (small n, large lam) surface.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if lam < 1:
        raise ValueError(f"lam must be at least 1, got {lam}")
    if lam > n - 1:
        # d = |mismatch| - cycles caps at n - 1, so the request can never be met
        raise CapacityError(
            f"distance {lam} is impossible at n={n}: the effective distance "
            f"between two orderings of {n} labels never exceeds {n - 1}; "
            f"raise n or lower the distance floor"
        )
    entries: list[CodebookEntry] = []
    pairings: list[Pairing] = []
    rejections = 0
    for bits in BIT_PAIR_ORDER:
        while True:
            order = tuple(int(x) for x in rng.permutation(n) + 1)
            entry = make_entry(bits, order, n)
            assert entry.pairing is not None
            if all(effective_distance(entry.pairing, q) >= lam for q in pairings):
                entries.append(entry)
                pairings.append(entry.pairing)
                break
            rejections += 1
            if rejections >= max_attempts:
                raise CapacityError(
                    f"gave up after {rejections} rejections: n={n} cannot hold four "
                    f"orderings at pairwise distance >= {lam}"
                )
    return Codebook(n=n, lam=lam, entries=tuple(entries))


def validate_codebook(cb: Codebook) -> list[Defect]:
    """All defects that keep ``cb`` from being usable; empty means valid."""
    defects: list[Defect] = []
    bits_seen = [entry.bits for entry in cb.entries]
    if sorted(bits_seen) != sorted(BIT_PAIR_ORDER):
        defects.append(
            Defect("bits", f"entries must cover exactly {list(BIT_PAIR_ORDER)}, got {bits_seen}")
        )
    for idx, entry in enumerate(cb.entries):
        for name, seq in (("s_i", entry.s_i), ("s_j", entry.s_j)):
            for d in validate_sequence(seq.order, cb.n):
                defects.append(
                    Defect(d.kind, f"entry {entry.bits} {name}: {d.message}", d.labels)
                )
        if entry.pairing is None:
            continue
        if not validate_sequence(entry.s_j.order, cb.n):
            expected = relative_pairing(entry.s_i, entry.s_j)
            if entry.pairing != expected:
                defects.append(
                    Defect("pairing", f"entry {entry.bits}: cached pairing disagrees with sequences")
                )
    valid = [e for e in cb.entries if e.pairing is not None and not validate_sequence(e.s_j.order, cb.n)]
    for x in range(len(valid)):
        for y in range(x + 1, len(valid)):
            a, b = valid[x], valid[y]
            d = effective_distance(a.pairing, b.pairing)  # type: ignore[arg-type]
            if d < cb.lam:
                defects.append(
                    Defect(
                        "distance",
                        f"entries {a.bits} and {b.bits} are at effective distance {d} < {cb.lam}",
                    )
                )
    return defects


# The classic 8-pair worked example used throughout the tests and demos.
# The fourth ordering as displayed in its source is defective (labels 5 and 3
# appear twice, 6 and 7 never); reference_codebook() carries the repaired
# form, which is what repair_sequence() produces from the raw display.
REFERENCE_RAW_FOURTH: tuple[int, ...] = (5, 3, 8, 2, 5, 1, 3, 4)

_REFERENCE_DOCUMENT = {
    "version": CODEBOOK_FORMAT_VERSION,
    "n": 8,
    "lambda": 4,
    "entries": [
        {"bits": [0, 0], "s_j": [2, 6, 7, 1, 5, 8, 4, 3]},
        {"bits": [1, 1], "s_j": [1, 3, 7, 5, 2, 4, 8, 6]},
        {"bits": [0, 1], "s_j": [6, 1, 2, 4, 3, 7, 5, 8]},
        {"bits": [1, 0], "s_j": [5, 3, 8, 2, 6, 1, 7, 4]},
    ],
}


def reference_codebook() -> Codebook:
    """Small built-in codebook (n=8, min pairwise distance 4)."""
    return codebook_from_document(_REFERENCE_DOCUMENT)


def codebook_to_document(cb: Codebook) -> dict:
    """JSON-ready document; the identity sender ordering stays implicit."""
    return {
        "version": CODEBOOK_FORMAT_VERSION,
        "n": cb.n,
        "lambda": cb.lam,
        "entries": [
            {"bits": list(entry.bits), "s_j": list(entry.s_j.order)} for entry in cb.entries
        ],
    }


def codebook_from_document(doc: dict, validate: bool = True) -> Codebook:
    """Parse a codebook document; with ``validate`` (the default) any defect
    raises. Pass ``validate=False`` to inspect defective books."""
    try:
        version = doc["version"]
        if version != CODEBOOK_FORMAT_VERSION:
            raise CodebookError(f"unsupported codebook version: {version}")
        n = int(doc["n"])
        lam = int(doc["lambda"])
        entries = tuple(
            make_entry((e["bits"][0], e["bits"][1]), [int(x) for x in e["s_j"]], n)
            for e in doc["entries"]
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise CodebookError(f"malformed codebook document: {exc}") from exc
    cb = Codebook(n=n, lam=lam, entries=entries)
    if validate:
        defects = validate_codebook(cb)
        if defects:
            raise CodebookError(
                "codebook has defects: " + "; ".join(d.message for d in defects)
            )
    return cb


def save_codebook(cb: Codebook, path: str | Path) -> None:
    Path(path).write_text(json.dumps(codebook_to_document(cb), indent=2, sort_keys=True) + "\n")


def load_codebook(path: str | Path, validate: bool = True) -> Codebook:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CodebookError(f"codebook file is not valid JSON: {exc}") from exc
    return codebook_from_document(doc, validate=validate)


_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def sequence_from_letters(text: str) -> SequenceCode:
    """Letter display form to labels: A=1, B=2, ... (n <= 26)."""
    cleaned = text.replace(",", " ").split()
    letters = cleaned if len(cleaned) > 1 else list(text.strip())
    order = []
    for ch in letters:
        ch = ch.strip().upper()
        if len(ch) != 1 or ch not in _LETTERS:
            raise CodebookError(f"not a label letter: {ch!r}")
        order.append(_LETTERS.index(ch) + 1)
    return SequenceCode(tuple(order))


def sequence_to_letters(seq: SequenceCode | Iterable[int]) -> str:
    order = seq.order if isinstance(seq, SequenceCode) else tuple(seq)
    if any(not 1 <= x <= 26 for x in order):
        raise CodebookError("letter display form needs labels within 1..26")
    return "".join(_LETTERS[x - 1] for x in order)
