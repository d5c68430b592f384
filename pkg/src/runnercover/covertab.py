"""Coverage tables: which residues rule out which candidate lonely times.

For an instance with modulus M = (k+1)*c*d, residue v covers time index j
when the folded product residue v*j mod M lies within c*d of 0, i.e. when
||v*j/M|| < 1/(k+1).  The symmetries j <-> M-j and v <-> M-v let both the
candidate range and the target range fold to {1, ..., floor(M/2)}.

Rows are plain Python integers used as bit vectors: bit j-1 of row(v) is
target j.  The hot search loop lives on bitwise AND/OR and popcounts over
these integers.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, UsageError
from .numtheory import prime_factors, prime_power_decompose

DEFAULT_MEMORY_BUDGET = 2 ** 31  # bytes

_MAGIC = b"LRCOVTAB"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class InstanceParams:
    """One verification instance (k, d, c) and its derived constants."""

    k: int
    d: int
    c: int
    M: int          # modulus (k+1) * c * d
    cd: int         # coverage threshold c * d
    p: int          # prime base of d
    a: int          # exponent: d = p**a
    half: int       # floor(M / 2); candidates and targets live in 1..half
    m_primes: tuple[int, ...]  # distinct primes dividing M, ascending

    @property
    def dc(self) -> int:
        return self.d * self.c


def make_params(k: int, d: int, c: int) -> InstanceParams:
    if k < 3:
        raise UsageError(f"k must be >= 3, got {k}")
    if c < 1:
        raise UsageError(f"c must be >= 1, got {c}")
    if d < 2:
        raise UsageError(f"d must be >= 2, got {d}")
    pp = prime_power_decompose(d)
    if pp is None:
        raise UsageError(f"d must be a prime power, got {d}")
    M = (k + 1) * c * d
    half = M // 2
    if half < k:
        raise UsageError(f"instance too small: floor(M/2) = {half} < k = {k}")
    return InstanceParams(
        k=k, d=d, c=c, M=M, cd=c * d, p=pp.p, a=pp.a, half=half,
        m_primes=prime_factors(M),
    )


@dataclass(frozen=True)
class Candidate:
    """A folded residue with its divisibility attributes."""

    v: int
    div3: bool
    div9: bool
    valp: int                 # min(valuation(v, p), a)
    shares: frozenset[int]    # primes q | M with q | v


def covers(v: int, j: int, params: InstanceParams) -> bool:
    """True iff ||v*j/M|| < 1/(k+1), evaluated exactly in integers."""
    if not 0 <= v < params.M or not 0 <= j < params.M:
        raise UsageError(f"residues must lie in [0, {params.M}), got v={v} j={j}")
    r = (v * j) % params.M
    return r < params.cd or r > params.M - params.cd


@dataclass(frozen=True)
class CoverTable:
    params: InstanceParams
    rows: tuple[int, ...]  # rows[v-1] is the bit vector for residue v

    @property
    def full_mask(self) -> int:
        return (1 << self.params.half) - 1

    def row(self, v: int) -> int:
        if not 1 <= v <= self.params.half:
            raise UsageError(f"row index must be in 1..{self.params.half}, got {v}")
        return self.rows[v - 1]

    def covers_target(self, v: int, j: int) -> bool:
        return bool(self.row(v) >> (j - 1) & 1)

    def serialize(self) -> bytes:
        """Binary image: header, rows as little-endian 64-bit words, checksum."""
        p = self.params
        words = (p.half + 63) // 64
        out = [_MAGIC, struct.pack("<5Q", _FORMAT_VERSION, p.k, p.d, p.c, p.M)]
        for r in self.rows:
            out.append(r.to_bytes(words * 8, "little"))
        body = b"".join(out)
        return body + hashlib.sha256(body).digest()

    def checksum(self) -> str:
        return hashlib.sha256(self.serialize()).hexdigest()


def table_memory_estimate(params: InstanceParams) -> int:
    """Bytes of bit storage for the folded table (used for the budget check)."""
    words = (params.half + 63) // 64
    return params.half * words * 8


def build_table(params: InstanceParams,
                memory_budget: int = DEFAULT_MEMORY_BUDGET) -> CoverTable:
    """Precompute the coverage bit vector of every residue v in 1..half.

    Only the folded half-range is materialized: v covers j iff it covers
    M - j, so bits for targets above floor(M/2) would be redundant.
    """
    need = table_memory_estimate(params)
    if need > memory_budget:
        raise ResourceLimitError(
            f"cover table for M={params.M} needs {need} bytes of bit storage, "
            f"budget is {memory_budget}")
    M, cd, half = params.M, params.cd, params.half
    targets = np.arange(1, half + 1, dtype=np.int64)
    rows: list[int] = []
    # chunked so the int64 workspace stays small relative to the table itself
    chunk = max(1, min(half, (1 << 22) // max(half, 1)))
    for start in range(1, half + 1, chunk):
        vs = np.arange(start, min(start + chunk, half + 1), dtype=np.int64)
        r = (vs[:, None] * targets[None, :]) % M
        mask = (r < cd) | (r > M - cd)
        packed = np.packbits(mask, axis=1, bitorder="little")
        for row_bytes in packed:
            rows.append(int.from_bytes(row_bytes.tobytes(), "little"))
    return CoverTable(params=params, rows=tuple(rows))


def admissible_candidates(params: InstanceParams, profile) -> list[Candidate]:
    """All residues in 1..half not individually excluded by the profile.

    The only per-residue exclusion is the valuation cap: a residue whose
    p-adic valuation already exceeds a-1 (equivalently, d | v) would make
    the tuple product divisible by d on its own.  Residue 0 is never a
    candidate for the same reason.
    """
    if profile.params_key != (params.k, params.d, params.c):
        raise UsageError("profile was built for different instance parameters")
    out = []
    p, a = params.p, params.a
    for v in range(1, params.half + 1):
        valp = 0
        rest = v
        while rest % p == 0 and valp < a:
            rest //= p
            valp += 1
        if valp > profile.valuation_cap:
            continue
        shares = frozenset(q for q in params.m_primes if v % q == 0)
        out.append(Candidate(v=v, div3=v % 3 == 0, div9=v % 9 == 0,
                             valp=valp, shares=shares))
    _check_folding_consistency(params, profile, out)
    return out


def _check_folding_consistency(params, profile, cands: list[Candidate]) -> None:
    """Attributes must agree between v and its unfolded partner M - v.

    This holds because p**a | M and q | M for every tracked prime q; the
    div-by-3 and div-by-9 flags additionally need 9 | M, which the
    nine-runner mode guarantees (M = 9cd).  Checked at build time so a bad
    generalization cannot silently corrupt a verdict.
    """
    M, p, a = params.M, params.p, params.a
    for cand in cands:
        w = M - cand.v
        valp_w = 0
        rest = w
        while rest % p == 0 and valp_w < a:
            rest //= p
            valp_w += 1
        ok = (valp_w == cand.valp
              and frozenset(q for q in params.m_primes if w % q == 0) == cand.shares)
        if ok and profile.mode == "nine":
            ok = (w % 3 == 0) == cand.div3 and (w % 9 == 0) == cand.div9
        if not ok:
            raise UsageError(
                f"folding does not preserve attributes for v={cand.v} "
                f"(partner {w}) with M={M}; instance is outside the method's domain")


def save_table(table: CoverTable, path) -> None:
    data = table.serialize()
    with open(path, "wb") as fh:
        fh.write(data)


def load_table(path) -> CoverTable:
    """Read a cached table; any mismatch or corruption is an error.

    Cache files are an optimization only: a loaded table is bit-identical
    to a cold build for the same parameters.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(_MAGIC) + 40 + 32 or data[:8] != _MAGIC:
        raise UsageError(f"{path}: not a cover table dump")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise UsageError(f"{path}: checksum mismatch, file is corrupt")
    version, k, d, c, M = struct.unpack("<5Q", body[8:48])
    if version != _FORMAT_VERSION:
        raise UsageError(f"{path}: unsupported format version {version}")
    params = make_params(k, d, c)
    if params.M != M:
        raise UsageError(f"{path}: header M={M} inconsistent with (k, d, c)")
    words = (params.half + 63) // 64
    expect = 48 + params.half * words * 8
    if len(body) != expect:
        raise UsageError(f"{path}: truncated table body")
    rows = []
    off = 48
    for _ in range(params.half):
        rows.append(int.from_bytes(body[off:off + words * 8], "little"))
        off += words * 8
    return CoverTable(params=params, rows=tuple(rows))
