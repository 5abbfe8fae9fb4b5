"""Batch measurement of decode reliability, soundness, and fairness.

Every trial draws its randomness from a substream addressed by (base seed,
trial index), so results never depend on how trials are sliced across
workers. Reports are produced by one aggregation function over the per-trial
rows; there is no second bookkeeping path to drift out of sync.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Sequence

from . import rng as rng_mod
from .codebook import (
    BIT_PAIR_ORDER,
    Codebook,
    generate_codebook,
    load_codebook,
    reference_codebook,
)
from .epr import NOISELESS, NoiseModel
from .netsim import FairnessPolicy, Honest, Strategy, fairness_gap
from .protocol import (
    DecodeStatus,
    Party,
    ProtocolConfig,
    Receiver,
    alice_prepare,
    measure_all,
    run_session,
)

__all__ = [
    "ExperimentSpec",
    "StatsReport",
    "run_trial",
    "run_experiment",
    "aggregate_rows",
    "write_rows_csv",
    "read_rows_csv",
    "write_report_json",
]

MODES = ("honest", "session", "soundness")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce a batch bit for bit.

    mode picks the driver: "honest" runs both receivers truthfully without
    the tick machinery (same end state, far cheaper), "session" runs the
    full simulator with the given strategies and policy, and "soundness"
    runs honest sessions and records which wrong entries survived the whole
    exchange in the opener's view.
    """

    mode: str = "honest"
    n: int = 64
    lam: int = 16
    noise: NoiseModel = NOISELESS
    delta: float = 0.0
    confidence_target: float = 0.999
    reveal_first: Party = Party.BOB
    seed: int = 0
    trials: int = 100
    bits: tuple[int, int] | None = None
    strategy_bob: Strategy = field(default_factory=Honest)
    strategy_sonai: Strategy = field(default_factory=Honest)
    policy: FairnessPolicy = field(default_factory=FairnessPolicy)
    codebook: str | None = None  # None: generate from seed; "reference"; else a JSON path

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if isinstance(self.noise, (int, float)) and not isinstance(self.noise, bool):
            object.__setattr__(self, "noise", NoiseModel(float(self.noise)))
        if isinstance(self.reveal_first, str):
            object.__setattr__(self, "reveal_first", Party(self.reveal_first))
        self.config(seed=self.seed)  # validate the protocol parameters early

    def config(self, seed: int) -> ProtocolConfig:
        return ProtocolConfig(
            n=self.n,
            lam=self.lam,
            noise=self.noise,
            delta=self.delta,
            confidence_target=self.confidence_target,
            reveal_first=self.reveal_first,
            seed=seed,
        )

    def trial_bits(self, trial: int) -> tuple[int, int]:
        if self.bits is not None:
            return self.bits
        return BIT_PAIR_ORDER[trial % len(BIT_PAIR_ORDER)]

    def shared_codebook(self) -> Codebook:
        """One public codebook per experiment. Generated from the base seed
        unless the experiment pins the built-in reference book or a JSON file."""
        if self.codebook is None:
            return generate_codebook(
                self.n, self.lam, rng_mod.substream(self.seed, rng_mod.KEY_CODEBOOK)
            )
        if self.codebook == "reference":
            cb = reference_codebook()
        else:
            cb = load_codebook(self.codebook)
        if cb.n != self.n or cb.lam != self.lam:
            raise ValueError(
                f"codebook (n={cb.n}, lambda={cb.lam}) does not match the "
                f"experiment (n={self.n}, lambda={self.lam})"
            )
        return cb


def _drive_honest(config: ProtocolConfig, bits: tuple[int, int], cb: Codebook):
    """Both receivers, truthful and complete, without the tick loop.

    Reproduces exactly what the simulator's honest run leaves behind: same
    substream addressing, same check sets, same decode results.
    """
    block = alice_prepare(
        bits,
        cb,
        config.noise,
        rng_mod.substream(config.seed, rng_mod.KEY_PREPARE),
        noise_rng_bob=rng_mod.substream(config.seed, rng_mod.KEY_NOISE_BOB),
        noise_rng_sonai=rng_mod.substream(config.seed, rng_mod.KEY_NOISE_SONAI),
    )
    receivers = {}
    for party in (Party.BOB, Party.SONAI):
        receivers[party] = Receiver(party, cb, measure_all(party, block), config)
    receivers[Party.BOB].observe_all(block.sonai_sequence)
    receivers[Party.SONAI].observe_all(block.bob_sequence)
    return receivers


def _terminal_fields(res_bob, res_sonai) -> tuple[str, int | None, int | None, float, str | None]:
    """Session-level summary from the two private results, mirroring the
    simulator's terminal rules."""
    for res in (res_bob, res_sonai):
        if res.status is DecodeStatus.ABORT:
            return "abort", None, None, 0.0, res.abort_reason.value
    agreed = (
        res_bob.status is DecodeStatus.DECODED
        and res_sonai.status is DecodeStatus.DECODED
        and (res_bob.bob_bit, res_bob.sonai_bit) == (res_sonai.bob_bit, res_sonai.sonai_bit)
    )
    confidence = min(res_bob.confidence, res_sonai.confidence)
    if agreed:
        return "decoded", res_bob.bob_bit, res_bob.sonai_bit, confidence, None
    return "undecided", None, None, confidence, None


def run_trial(spec: ExperimentSpec, cb: Codebook, trial: int) -> dict:
    """One self-contained trial; the row carries everything reports need."""
    seed = rng_mod.derive_seed(spec.seed, rng_mod.KEY_TRIAL, trial)
    bits = spec.trial_bits(trial)
    config = spec.config(seed=seed)
    row: dict = {
        "trial": trial,
        "seed": seed,
        "truth_bob": bits[0],
        "truth_sonai": bits[1],
    }
    if spec.mode == "session":
        outcome = run_session(
            config,
            bits,
            strategies={Party.BOB: spec.strategy_bob, Party.SONAI: spec.strategy_sonai},
            cb=cb,
            policy=spec.policy,
        )
        terminal = outcome.terminal
        row.update(
            status=terminal.status.value,
            bob_bit=terminal.bob_bit,
            sonai_bit=terminal.sonai_bit,
            confidence=terminal.confidence,
            abort_reason=terminal.abort_reason.value if terminal.abort_reason else None,
            ticks=outcome.ticks,
            fairness_gap=fairness_gap(outcome.transcript),
        )
        return row

    receivers = _drive_honest(config, bits, cb)
    res_bob = receivers[Party.BOB].decode()
    res_sonai = receivers[Party.SONAI].decode()
    status, bob_bit, sonai_bit, confidence, abort_reason = _terminal_fields(res_bob, res_sonai)
    row.update(
        status=status,
        bob_bit=bob_bit,
        sonai_bit=sonai_bit,
        confidence=confidence,
        abort_reason=abort_reason,
        ticks=2 * spec.n + 1,
        fairness_gap=1,
    )
    if spec.mode == "soundness":
        opener = receivers[spec.reveal_first]
        for cand in opener.candidates:
            if cand.entry.bits == bits:
                continue
            key = f"survived_{cand.entry.bits[0]}{cand.entry.bits[1]}"
            row[key] = cand.alive
    return row


def _run_chunk(spec: ExperimentSpec, start: int, stop: int) -> list[dict]:
    cb = spec.shared_codebook()
    return [run_trial(spec, cb, t) for t in range(start, stop)]


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> tuple[list[dict], "StatsReport"]:
    """Run all trials and aggregate. The report is identical for any worker
    count because trial seeds depend only on the trial index."""
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    if workers == 1:
        rows = _run_chunk(spec, 0, spec.trials)
    else:
        bounds = [spec.trials * i // workers for i in range(workers + 1)]
        spans = [
            (bounds[i], bounds[i + 1])
            for i in range(workers)
            if bounds[i] < bounds[i + 1]
        ]
        with ProcessPoolExecutor(max_workers=len(spans)) as pool:
            futures = [pool.submit(_run_chunk, spec, a, b) for a, b in spans]
            rows = [row for fut in futures for row in fut.result()]
    return rows, aggregate_rows(spec, rows)


@dataclass(frozen=True)
class StatsReport:
    """Aggregate view of one experiment; serializes straight to JSON."""

    mode: str
    trials: int
    seed: int
    n: int
    lam: int
    flip_probability: float
    delta: float
    confidence_target: float
    status_counts: dict
    abort_counts: dict
    decode_success_rate: float
    correct_rate: float
    mean_confidence: float | None
    mean_ticks: float
    fairness_gap_hist: dict
    max_fairness_gap: int
    survival_rates: dict
    survival_by_distance: dict
    strategy_bob: str
    strategy_sonai: str

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode,
            "trials": self.trials,
            "seed": self.seed,
            "n": self.n,
            "lam": self.lam,
            "flip_probability": self.flip_probability,
            "delta": self.delta,
            "confidence_target": self.confidence_target,
            "status_counts": self.status_counts,
            "abort_counts": self.abort_counts,
            "decode_success_rate": self.decode_success_rate,
            "correct_rate": self.correct_rate,
            "mean_confidence": self.mean_confidence,
            "mean_ticks": self.mean_ticks,
            "fairness_gap_hist": self.fairness_gap_hist,
            "max_fairness_gap": self.max_fairness_gap,
            "survival_rates": self.survival_rates,
            "survival_by_distance": self.survival_by_distance,
            "strategy_bob": self.strategy_bob,
            "strategy_sonai": self.strategy_sonai,
        }


def _survival_by_distance(spec: ExperimentSpec, rows: Sequence[dict]) -> dict:
    """Tally wrong-candidate survival events, grouped by effective distance.

    The distance between the true entry and each surviving wrong candidate is
    looked up in the experiment's codebook, so a report regenerated from the
    raw CSV lands on the same numbers.
    """
    cb = spec.shared_codebook()
    lookup: dict[tuple, int] = {}
    for (a, b), d in cb.pairwise_distances().items():
        lookup[(a, b)] = d
        lookup[(b, a)] = d
    counts: dict[int, int] = {}
    for row in rows:
        truth = (row["truth_bob"], row["truth_sonai"])
        for key, value in row.items():
            if not key.startswith("survived_") or not value:
                continue
            suffix = key.removeprefix("survived_")
            cand = (int(suffix[0]), int(suffix[1]))
            d = lookup[(truth, cand)]
            counts[d] = counts.get(d, 0) + 1
    return {str(d): counts[d] for d in sorted(counts)}


def aggregate_rows(spec: ExperimentSpec, rows: Sequence[dict]) -> StatsReport:
    """The only path from rows to a report."""
    status_counts: dict[str, int] = {}
    abort_counts: dict[str, int] = {}
    gap_hist: dict[str, int] = {}
    decoded = 0
    correct = 0
    conf_sum = 0.0
    conf_count = 0
    tick_sum = 0
    survival_tallies: dict[str, int] = {}
    for row in rows:
        status = row["status"]
        status_counts[status] = status_counts.get(status, 0) + 1
        if row.get("abort_reason"):
            reason = row["abort_reason"]
            abort_counts[reason] = abort_counts.get(reason, 0) + 1
        if status == "decoded":
            decoded += 1
            conf_sum += row["confidence"]
            conf_count += 1
            if (row["bob_bit"], row["sonai_bit"]) == (row["truth_bob"], row["truth_sonai"]):
                correct += 1
        gap = str(row["fairness_gap"])
        gap_hist[gap] = gap_hist.get(gap, 0) + 1
        tick_sum += row["ticks"]
        for key, value in row.items():
            if key.startswith("survived_"):
                survival_tallies.setdefault(key, 0)
                survival_tallies[key] += 1 if value else 0
    total = len(rows)
    survival_rates = {
        key.removeprefix("survived_"): count / total
        for key, count in sorted(survival_tallies.items())
    }
    survival_by_distance = _survival_by_distance(spec, rows) if survival_tallies else {}
    return StatsReport(
        mode=spec.mode,
        trials=total,
        seed=spec.seed,
        n=spec.n,
        lam=spec.lam,
        flip_probability=spec.noise.flip_probability,
        delta=spec.delta,
        confidence_target=spec.confidence_target,
        status_counts=dict(sorted(status_counts.items())),
        abort_counts=dict(sorted(abort_counts.items())),
        decode_success_rate=decoded / total,
        correct_rate=correct / total,
        mean_confidence=(conf_sum / conf_count) if conf_count else None,
        mean_ticks=tick_sum / total,
        fairness_gap_hist=dict(sorted(gap_hist.items(), key=lambda kv: int(kv[0]))),
        max_fairness_gap=max((int(k) for k in gap_hist), default=0),
        survival_rates=survival_rates,
        survival_by_distance=survival_by_distance,
        strategy_bob=spec.strategy_bob.describe(),
        strategy_sonai=spec.strategy_sonai.describe(),
    )


def write_rows_csv(rows: Sequence[dict], fp: IO[str]) -> None:
    if not rows:
        return
    fieldnames = list(rows[0].keys())
    writer = csv.DictWriter(fp, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def _coerce_cell(text: str):
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_rows_csv(fp: IO[str]) -> list[dict]:
    return [
        {key: _coerce_cell(value) for key, value in row.items()}
        for row in csv.DictReader(fp)
    ]


def write_report_json(report: StatsReport, fp: IO[str]) -> None:
    json.dump(report.to_json_obj(), fp, indent=2, sort_keys=True)
    fp.write("\n")
