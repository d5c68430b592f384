"""Covering-condition verifier and exact proof assembly for the lonely
runner conjecture's divisor method.

For a chosen instance (k, d, c) the search certifies that no "bad cover"
exists: no small set of residues that both satisfies the divisibility caps
and covers every candidate lonely time index.  Certified divisors combine,
by exact integer arithmetic, into a contradiction with the product bound
on a minimal counterexample, which is the nine-runner proof at full scale.
"""

from .conditions import (ConditionProfile, TupleCounters, admits, default_mode,
                         equivalent_gcd_check, make_profile)
from .covertab import (Candidate, CoverTable, InstanceParams,
                       admissible_candidates, build_table, covers, load_table,
                       make_params, save_table)
from .errors import (InternalError, ResourceLimitError, RunnerCoverError,
                     UnsupportedConfigError, UsageError)
from .numtheory import (ExactRational, PrimePower, approx_scientific, gcd_set,
                        prime_power_decompose, product_bound, valuation)
from .oracle import SpeedSet, exhaustive_bad_cover, lr_holds, modular_lonely_time
from .prover import (NINE_RUNNER_SET, Certificate, CertifiedEntry,
                     assemble_certificate, format_certificate, parse_certificate)
from .records import JobConfig, RunRecord, load_records, make_record, save_record
from .search import (ABORTED, COUNTEREXAMPLE, VERIFIED, SearchOptions,
                     SearchOutcome, SearchStats, find_bad_cover)

__version__ = "0.1.0"
