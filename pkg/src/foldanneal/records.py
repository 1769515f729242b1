"""Run configuration and append-only experiment records.

Records are line-delimited JSON with a schema id, the producing config's
hash, an instance id, a stage tag, a timestamp, and a payload.  Files are
append-only; stages skip work already recorded under the same config hash,
which makes long runs resumable after interruption.

Timestamps honor the SOURCE_DATE_EPOCH convention so that a fixed-seed
rerun can be byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = "v1"

# Fields that do not change results; excluded from the config hash.
NON_SEMANTIC_FIELDS = ("outdir", "workers")


@dataclass
class ExperimentConfig:
    seed: int = 0
    dim: int = 2
    lengths: tuple = (6,)
    count: int = 10
    schedule: str = "linear"
    catalyst: str = "none"
    lam_low: float = -2.0
    lam_high: float = 2.0
    baseline_time: float = 1000.0
    tune_budget: int = 50
    catalyst_budget: int = 500
    sa_budget: int = 500
    sa_runs: int = 25
    sa_max_moves: int = 200000
    probe_time: float = 10.0
    probe_slowdown: float = 3.0
    rscore_weight: str = "cbrt"
    mj_path: str = ""  # empty = bundled table
    outdir: str = "runs"
    workers: int = 1

    def __post_init__(self):
        self.lengths = tuple(int(x) for x in self.lengths)
        if not self.lengths:
            raise ValueError("config needs at least one length")
        for name in ("count", "tune_budget", "catalyst_budget", "sa_budget",
                     "sa_runs", "sa_max_moves", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.mj_path and not os.path.exists(self.mj_path):
            raise FileNotFoundError(f"mj_path does not exist: {self.mj_path}")

    def semantic_dict(self) -> dict:
        d = asdict(self)
        for k in NON_SEMANTIC_FIELDS:
            d.pop(k)
        d["lengths"] = list(self.lengths)
        return d

    def config_hash(self) -> str:
        canon = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def to_json(self) -> str:
        d = asdict(self)
        d["lengths"] = list(self.lengths)
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_json(fh.read())


def timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def make_record(stage: str, config_hash: str, rec_id: str, payload: dict) -> dict:
    return {
        "schema": f"foldanneal/{stage}/{SCHEMA_VERSION}",
        "stage": stage,
        "config": config_hash,
        "id": rec_id,
        "ts": timestamp(),
        "payload": payload,
    }


def append_records(path, records) -> None:
    with open(path, "a", encoding="ascii") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def iter_records(path, config_hash: str | None = None, stage: str | None = None):
    if not os.path.exists(path):
        return
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if config_hash and rec.get("config") != config_hash:
                continue
            if stage and rec.get("stage") != stage:
                continue
            yield rec


def completed_ids(path, config_hash: str, stage: str) -> set:
    return {rec["id"] for rec in iter_records(path, config_hash, stage)}


def fmt_energy(value: float) -> float:
    """Energies are persisted with 12 significant digits."""
    return float(f"{value:.12g}")
