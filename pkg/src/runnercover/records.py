"""Persisted run records: one structured-text file per verification run.

Records are append-only; every re-run writes a new file.  The content hash
covers every other field, so a certificate can pin the exact runs it cites
and tampered or re-parameterized records are rejected on load.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .errors import UsageError

TOOL_VERSION = "0.1.0"

VERDICTS = ("Verified", "CounterexampleFound", "Aborted")


@dataclass(frozen=True)
class RunRecord:
    k: int
    d: int
    c: int
    profile: str
    verdict: str
    witness: tuple[int, ...] | None
    nodes: int
    prune_hits: int
    exclusions: int
    wall_seconds: float
    worker_count: int
    tool_version: str
    table_checksum: str
    abort_reason: str | None
    content_hash: str


@dataclass(frozen=True)
class JobConfig:
    jobs: tuple[tuple[int, int, int, str], ...]  # (k, d, c, profile)
    worker_count: int = 1
    memory_budget: int = 2 ** 31
    timeout_seconds: float | None = None
    out_dir: str = "records"

    def __post_init__(self):
        if not self.jobs:
            raise UsageError("job list is empty")
        if self.worker_count < 1:
            raise UsageError("worker_count must be >= 1")


def record_payload(record: RunRecord) -> dict:
    payload = asdict(record)
    del payload["content_hash"]
    if payload["witness"] is not None:
        payload["witness"] = list(payload["witness"])
    return payload


def compute_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("ascii")).hexdigest()


def make_record(k: int, d: int, c: int, profile: str, verdict: str,
                witness: tuple[int, ...] | None, nodes: int, prune_hits: int,
                exclusions: int, wall_seconds: float, worker_count: int,
                table_checksum: str, abort_reason: str | None = None) -> RunRecord:
    if verdict not in VERDICTS:
        raise UsageError(f"unknown verdict {verdict!r}")
    record = RunRecord(
        k=k, d=d, c=c, profile=profile, verdict=verdict,
        witness=tuple(witness) if witness is not None else None,
        nodes=nodes, prune_hits=prune_hits, exclusions=exclusions,
        wall_seconds=wall_seconds, worker_count=worker_count,
        tool_version=TOOL_VERSION, table_checksum=table_checksum,
        abort_reason=abort_reason, content_hash="")
    return replace(record, content_hash=compute_hash(record_payload(record)))


def verify_record(record: RunRecord) -> bool:
    return record.content_hash == compute_hash(record_payload(record))


def record_to_json(record: RunRecord) -> str:
    payload = record_payload(record)
    payload["content_hash"] = record.content_hash
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def record_from_json(text: str) -> RunRecord:
    payload = json.loads(text)
    try:
        witness = payload["witness"]
        record = RunRecord(
            k=payload["k"], d=payload["d"], c=payload["c"],
            profile=payload["profile"], verdict=payload["verdict"],
            witness=tuple(witness) if witness is not None else None,
            nodes=payload["nodes"], prune_hits=payload["prune_hits"],
            exclusions=payload["exclusions"],
            wall_seconds=payload["wall_seconds"],
            worker_count=payload["worker_count"],
            tool_version=payload["tool_version"],
            table_checksum=payload["table_checksum"],
            abort_reason=payload.get("abort_reason"),
            content_hash=payload["content_hash"])
    except KeyError as exc:
        raise UsageError(f"record is missing field {exc}") from exc
    return record


def save_record(record: RunRecord, out_dir) -> Path:
    """Atomic write: a record file is either complete and hashed, or absent."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
    name = (f"run_k{record.k}_d{record.d}_c{record.c}_{record.profile}"
            f"_{stamp}_{record.content_hash[:12]}.json")
    path = out / name
    fd, tmp = tempfile.mkstemp(dir=out, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(record_to_json(record))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_records(records_dir) -> list[RunRecord]:
    """All parseable records in a directory, hash-verified ones only."""
    out = []
    root = Path(records_dir)
    if not root.is_dir():
        return out
    for path in sorted(root.glob("*.json")):
        try:
            record = record_from_json(path.read_text())
        except (UsageError, json.JSONDecodeError, OSError):
            continue
        if verify_record(record):
            out.append(record)
    return out
