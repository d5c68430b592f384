"""Command-line surface: batch verification, proof assembly, encodings,
oracle access, exact bounds and runtime statistics.

Exit codes: 0 all jobs verified / proof complete, 1 counterexample found,
2 aborted or insufficient, 3 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import cnf, oracle, prover
from .conditions import default_mode, make_profile
from .covertab import admissible_candidates, build_table, make_params
from .errors import RunnerCoverError, UsageError
from .numtheory import approx_scientific, product_bound
from .records import JobConfig, RunRecord, load_records, make_record, save_record
from .search import (ABORTED, COUNTEREXAMPLE, VERIFIED, SearchOptions,
                     find_bad_cover)

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_ABORTED = 2
EXIT_USAGE = 3


def run_verify_job(config: JobConfig, progress=None) -> list[RunRecord]:
    """Run every job in the batch; a failing job never halts the rest.

    Each job builds its instance, runs the search, and persists one record
    atomically.  Timeouts and per-job errors become Aborted records with a
    reason; partial work is never recorded as Verified.
    """
    out = []
    for k, d, c, mode in config.jobs:
        start = time.monotonic()
        deadline = (start + config.timeout_seconds
                    if config.timeout_seconds is not None else None)
        checksum = ""
        try:
            params = make_params(k, d, c)
            profile = make_profile(params, mode)
            table = build_table(params, memory_budget=config.memory_budget)
            checksum = table.checksum()
            cands = admissible_candidates(params, profile)
            remaining = None
            if deadline is not None:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise TimeoutError(f"timeout after {config.timeout_seconds}s")
            outcome = find_bad_cover(table, cands, profile, SearchOptions(
                timeout_seconds=remaining, workers=config.worker_count))
            record = make_record(
                k=k, d=d, c=c, profile=mode, verdict=outcome.verdict,
                witness=outcome.witness, nodes=outcome.stats.nodes,
                prune_hits=outcome.stats.prune_hits,
                exclusions=outcome.stats.exclusions,
                wall_seconds=time.monotonic() - start,
                worker_count=config.worker_count, table_checksum=checksum,
                abort_reason=outcome.abort_reason)
        except (RunnerCoverError, TimeoutError, MemoryError) as exc:
            record = make_record(
                k=k, d=d, c=c, profile=mode, verdict=ABORTED, witness=None,
                nodes=0, prune_hits=0, exclusions=0,
                wall_seconds=time.monotonic() - start,
                worker_count=config.worker_count, table_checksum=checksum,
                abort_reason=str(exc))
        save_record(record, config.out_dir)
        if progress is not None:
            progress(record)
        out.append(record)
    return out


def emit_stats(records: list[RunRecord]) -> str:
    """CSV of (d*c, wall time, node count, k, profile), sorted by d*c.

    Raw data only, suitable for external plotting; no fitting.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dc", "wall_seconds", "nodes", "k", "profile"])
    rows = sorted(records, key=lambda r: (r.d * r.c, r.d, r.c, r.k, r.profile))
    for r in rows:
        writer.writerow([r.d * r.c, f"{r.wall_seconds:.3f}", r.nodes, r.k, r.profile])
    return buf.getvalue()


def _parse_bytes(text: str) -> int:
    suffixes = {"K": 2 ** 10, "M": 2 ** 20, "G": 2 ** 30}
    if text and text[-1].upper() in suffixes:
        return int(text[:-1]) * suffixes[text[-1].upper()]
    return int(text)


def _job_list(args) -> list[tuple[int, int, int, str]]:
    sources = sum(1 for flag in (args.set, args.batch, args.d) if flag)
    if sources != 1:
        raise UsageError("give exactly one of --d (with --k/--c), --batch, --set")
    if args.set:
        if args.set != "nine":
            raise UsageError(f"unknown job set {args.set!r}")
        return [(8, d, c, "nine") for d, c in prover.NINE_RUNNER_SET]
    if args.batch:
        jobs = []
        for item in json.loads(Path(args.batch).read_text()):
            k = item["k"]
            jobs.append((k, item["d"], item.get("c", 1),
                         item.get("profile", default_mode(k))))
        return jobs
    k = args.k
    return [(k, args.d, args.c, args.profile or default_mode(k))]


def _cmd_verify(args) -> int:
    jobs = _job_list(args)
    config = JobConfig(jobs=tuple(jobs), worker_count=args.threads,
                       memory_budget=_parse_bytes(args.memory),
                       timeout_seconds=args.timeout, out_dir=args.out)

    def progress(record: RunRecord) -> None:
        sys.stderr.write(
            f"k={record.k} d={record.d} c={record.c} {record.profile}: "
            f"{record.verdict} nodes={record.nodes} "
            f"wall={record.wall_seconds:.2f}s\n")

    records = run_verify_job(config, progress=progress)
    for record in records:
        line = f"{record.verdict} k={record.k} d={record.d} c={record.c}"
        if record.witness:
            line += f" witness={','.join(str(v) for v in record.witness)}"
        if record.abort_reason:
            line += f" reason={record.abort_reason}"
        print(line)
    if any(r.verdict == COUNTEREXAMPLE for r in records):
        return EXIT_COUNTEREXAMPLE
    if any(r.verdict == ABORTED for r in records):
        return EXIT_ABORTED
    return EXIT_OK


def _cmd_prove(args) -> int:
    if args.entries:
        pairs = [(int(d), int(c)) for d, c in json.loads(Path(args.entries).read_text())]
    elif args.k == 8:
        pairs = list(prover.NINE_RUNNER_SET)
    else:
        raise UsageError("no default entry set for this k; pass --entries")
    records = load_records(args.records)
    by_params: dict[tuple[int, int, int], RunRecord] = {}
    for record in records:
        if record.verdict != VERIFIED:
            continue
        key = (record.k, record.d, record.c)
        prev = by_params.get(key)
        if prev is None or record.content_hash < prev.content_hash:
            by_params[key] = record
    entries = []
    store = {}
    for d, c in pairs:
        record = by_params.get((args.k, d, c))
        if record is None:
            raise UsageError(f"no Verified record for (k={args.k}, d={d}, c={c}) "
                             f"in {args.records}")
        entries.append(prover.CertifiedEntry(d=d, c=c, record_ref=record.content_hash))
        store[record.content_hash] = record
    cert = prover.assemble_certificate(entries, args.k, store)
    text = prover.format_certificate(cert)
    if args.out:
        Path(args.out).write_text(text)
        Path(args.out + ".hashes").write_text(
            "".join(e.record_ref + "\n" for e in cert.entries))
    else:
        sys.stdout.write(text)
    print(f"verdict: {cert.verdict}", file=sys.stderr)
    print(f"lcm  = {cert.lcm_value} (~{approx_scientific(cert.lcm_value)})",
          file=sys.stderr)
    print(f"bound = {cert.bound.numerator}/{cert.bound.denominator} "
          f"(~{approx_scientific(cert.bound)})", file=sys.stderr)
    if cert.verdict != prover.PROOF_COMPLETE and cert.deficit_factor is not None:
        print(f"deficit factor ~{approx_scientific(cert.deficit_factor)}",
              file=sys.stderr)
    return EXIT_OK if cert.verdict == prover.PROOF_COMPLETE else EXIT_ABORTED


def _cmd_encode(args) -> int:
    params = make_params(args.k, args.d, 1)
    profile = make_profile(params, args.profile or default_mode(args.k))
    doc = cnf.encode_instance(params, profile)
    text = cnf.to_dimacs(doc) if args.format == "cnf" else cnf.to_knf(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.oracle_cmd == "cover":
        params = make_params(args.k, args.d, args.c)
        profile = make_profile(params, args.profile or default_mode(args.k))
        outcome = oracle.exhaustive_bad_cover(params, profile)
        print(f"{outcome.verdict} subsets_checked={outcome.stats.nodes}")
        if outcome.witness:
            print("witness=" + ",".join(str(v) for v in outcome.witness))
        return EXIT_OK if outcome.verdict == VERIFIED else EXIT_COUNTEREXAMPLE
    if args.oracle_cmd == "lonely-time":
        params = make_params(args.k, args.d, args.c)
        residues = [int(v) for v in args.residues.split(",")] if args.residues else []
        t = oracle.modular_lonely_time(residues, params)
        if t is None:
            print("covered (no lonely time index)")
            return EXIT_COUNTEREXAMPLE
        print(f"lonely time index t={t} of modulus {params.M}")
        return EXIT_OK
    if args.oracle_cmd == "lr":
        speeds = oracle.SpeedSet(tuple(int(v) for v in args.speeds.split(",")))
        holds, witness = oracle.lr_holds(speeds)
        if holds:
            print(f"holds t={witness}")
            return EXIT_OK
        print("fails")
        return EXIT_COUNTEREXAMPLE
    raise UsageError(f"unknown oracle command {args.oracle_cmd!r}")


def _cmd_bound(args) -> int:
    bound = product_bound(args.k)
    print(f"exact: {bound.numerator}" +
          ("" if bound.denominator == 1 else f"/{bound.denominator}"))
    print(f"approx: {approx_scientific(bound)}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    records = load_records(args.records)
    text = emit_stats(records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="runnercover",
        description="Verify divisor covering conditions for the lonely runner "
                    "conjecture and assemble exact proof certificates.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("verify", help="run verification jobs and persist records")
    p.add_argument("--k", type=int, help="number of speeds")
    p.add_argument("--d", type=int, help="divisor to certify (prime power)")
    p.add_argument("--c", type=int, default=1, help="multiplier (default 1)")
    p.add_argument("--profile", choices=["generic", "nine"])
    p.add_argument("--batch", help="JSON file with a list of jobs")
    p.add_argument("--set", help="named job set: 'nine' = the full nine-runner proof")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timeout", type=float, default=None, help="seconds per job")
    p.add_argument("--memory", default=str(2 ** 31), help="table budget, bytes (K/M/G ok)")
    p.add_argument("--out", default="records")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("prove", help="assemble a certificate from records")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--entries", help="JSON file [[d, c], ...]; default: nine-runner set")
    p.add_argument("--out", help="certificate file (hashes written alongside)")
    p.set_defaults(func=_cmd_prove)

    p = sub.add_parser("encode", help="emit a SAT encoding (c=1, prime d)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--profile", choices=["generic", "nine"])
    p.add_argument("--format", choices=["cnf", "knf"], default="cnf")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("oracle", help="brute-force reference checks")
    osub = p.add_subparsers(dest="oracle_cmd", required=True)
    q = osub.add_parser("cover", help="exhaustive bad-cover enumeration")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--c", type=int, default=1)
    q.add_argument("--profile", choices=["generic", "nine"])
    q = osub.add_parser("lonely-time", help="first uncovered time index")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--c", type=int, default=1)
    q.add_argument("--residues", default="", help="comma-separated residues")
    q = osub.add_parser("lr", help="exact lonely runner property check")
    q.add_argument("--speeds", required=True, help="comma-separated speeds")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bound", help="print the exact product bound")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("stats", help="CSV of runtimes per record")
    p.add_argument("--records", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RunnerCoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORTED


if __name__ == "__main__":
    sys.exit(main())
