"""Assemble the final contradiction from certified divisor runs.

Each certified entry (d, c) cites a Verified run record by content hash.
The certified divisors are powers of distinct primes, so their lcm is
their product; the proof is complete when that lcm strictly exceeds the
product bound, since the speed product of a minimal counterexample would
have to be a positive multiple of the lcm while staying below the bound.

All comparisons are exact: lcm * k^k against binom(k+1, 2)^((k-1)*k),
cross-multiplied in integers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import UsageError
from .numtheory import product_bound
from .records import RunRecord, verify_record

PROOF_COMPLETE = "ProofComplete"
INSUFFICIENT = "Insufficient"

# Divisor set certifying the nine-runner case: a power of every prime up
# to 191 except 7, with the smallest workable multiplier c for each.
NINE_RUNNER_SET: tuple[tuple[int, int], ...] = tuple(
    (d, {25: 5, 17: 3, 19: 3, 64: 2, 23: 2, 29: 2, 41: 2}.get(d, 1))
    for d in (64, 81, 25, 121, 169, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
              59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
              127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191)
)


@dataclass(frozen=True)
class CertifiedEntry:
    d: int
    c: int
    record_ref: str  # content hash of the run record proving (k, d, c)


@dataclass(frozen=True)
class Certificate:
    k: int
    bound: Fraction
    entries: tuple[CertifiedEntry, ...]
    lcm_value: int
    verdict: str
    margin_lhs: int  # lcm * k^k
    margin_rhs: int  # binom(k+1, 2)^((k-1)*k)

    @property
    def deficit_factor(self) -> Fraction | None:
        """How far short the lcm falls, exactly; None when the proof closes."""
        if self.verdict == PROOF_COMPLETE:
            return None
        return Fraction(self.margin_rhs, self.margin_lhs)


def assemble_certificate(entries: list[CertifiedEntry], k: int,
                         records: Mapping[str, RunRecord]) -> Certificate:
    """Audit the cited records and compare the divisor lcm to the bound.

    Hard errors (missing or mismatched records, entries sharing a prime)
    raise; an lcm that merely fails to exceed the bound yields the
    Insufficient verdict.  Equality is inconclusive and also Insufficient.
    """
    for entry in entries:
        record = records.get(entry.record_ref)
        if record is None:
            raise UsageError(
                f"entry (d={entry.d}, c={entry.c}) cites unknown record "
                f"{entry.record_ref[:16]}...")
        if not verify_record(record):
            raise UsageError(
                f"record {entry.record_ref[:16]}... fails its content hash")
        if record.verdict != "Verified":
            raise UsageError(
                f"record for (d={entry.d}, c={entry.c}) has verdict "
                f"{record.verdict}, need Verified")
        if (record.k, record.d, record.c) != (k, entry.d, entry.c):
            raise UsageError(
                f"entry (d={entry.d}, c={entry.c}, k={k}) mismatches record "
                f"(d={record.d}, c={record.c}, k={record.k})")
    for i, first in enumerate(entries):
        for second in entries[i + 1:]:
            if math.gcd(first.d, second.d) != 1:
                raise UsageError(
                    f"divisors {first.d} and {second.d} are not coprime")

    lcm_value = math.prod(entry.d for entry in entries) if entries else 1
    bound = product_bound(k)
    lhs = lcm_value * k ** k
    rhs = math.comb(k + 1, 2) ** ((k - 1) * k)
    verdict = PROOF_COMPLETE if lhs > rhs else INSUFFICIENT
    return Certificate(k=k, bound=bound, entries=tuple(entries),
                       lcm_value=lcm_value, verdict=verdict,
                       margin_lhs=lhs, margin_rhs=rhs)


def format_certificate(cert: Certificate) -> str:
    """Deterministic serialization; exact integers in decimal."""
    payload = {
        "k": cert.k,
        "bound_numerator": str(cert.bound.numerator),
        "bound_denominator": str(cert.bound.denominator),
        "entries": [
            {"d": e.d, "c": e.c, "record_ref": e.record_ref}
            for e in cert.entries
        ],
        "lcm": str(cert.lcm_value),
        "verdict": cert.verdict,
        "comparison": {
            "lcm_times_k_pow_k": str(cert.margin_lhs),
            "binom_pow": str(cert.margin_rhs),
        },
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def parse_certificate(text: str) -> Certificate:
    payload = json.loads(text)
    try:
        entries = tuple(CertifiedEntry(d=e["d"], c=e["c"], record_ref=e["record_ref"])
                        for e in payload["entries"])
        cert = Certificate(
            k=payload["k"],
            bound=Fraction(int(payload["bound_numerator"]),
                           int(payload["bound_denominator"])),
            entries=entries,
            lcm_value=int(payload["lcm"]),
            verdict=payload["verdict"],
            margin_lhs=int(payload["comparison"]["lcm_times_k_pow_k"]),
            margin_rhs=int(payload["comparison"]["binom_pow"]),
        )
    except KeyError as exc:
        raise UsageError(f"certificate is missing field {exc}") from exc
    return cert
