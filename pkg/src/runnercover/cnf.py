"""SAT encodings of the bad-cover condition, for external confirmation.

One boolean variable per admissible candidate; a clause per target forces
coverage, and at-most bounds carry the divisibility caps.  A satisfying
assignment is exactly a bad cover, so an UNSAT result from any trusted
solver confirms a Verified verdict independently.

Two output formats:

* plain DIMACS CNF, with every cardinality bound lowered to clauses via
  the sequential-counter construction — consumable by any solver;
* an extended "knf" format that keeps cardinality lines native:
  header ``p knf <vars> <lines>``, clause lines as in DIMACS, then one
  ``k <bound> <literals...> 0`` line per at-most constraint.

Only c = 1 with prime d is supported: the divisibility condition on a
prime power is a weighted valuation sum, which is not a cardinality
constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conditions import ConditionProfile
from .covertab import InstanceParams, admissible_candidates, build_table
from .errors import UnsupportedConfigError, UsageError


@dataclass(frozen=True)
class CnfDocument:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    cardinality: tuple[tuple[tuple[int, ...], int], ...]  # (literals, at-most bound)
    var_map: dict[int, int]  # candidate residue -> variable index

    def residue_of(self, var: int) -> int:
        for v, idx in self.var_map.items():
            if idx == var:
                return v
        raise UsageError(f"variable {var} is not mapped")


class VarAllocator:
    """Hands out fresh auxiliary variable indexes."""

    def __init__(self, first_free: int):
        self._next = first_free

    def next(self) -> int:
        out = self._next
        self._next += 1
        return out

    @property
    def top(self) -> int:
        return self._next - 1


def encode_instance(params: InstanceParams, profile: ConditionProfile) -> CnfDocument:
    """Encode "a bad cover exists" for c = 1 and prime d.

    Satisfiable iff a bad cover exists; UNSAT confirms Verified.
    """
    if params.c != 1:
        raise UnsupportedConfigError(f"encoder supports c = 1 only, got c = {params.c}")
    if params.a != 1:
        raise UnsupportedConfigError(
            f"encoder supports prime d only, got d = {params.d} = {params.p}^{params.a}")
    if profile.params_key != (params.k, params.d, params.c):
        raise UsageError("profile and params belong to different instances")

    cands = admissible_candidates(params, profile)
    table = build_table(params)
    var_map = {c.v: idx + 1 for idx, c in enumerate(cands)}

    clauses = []
    for j in range(1, params.half + 1):
        clauses.append(tuple(var_map[c.v] for c in cands
                             if table.covers_target(c.v, j)))

    cardinality = [(tuple(var_map[c.v] for c in cands), params.k)]
    for q in sorted(profile.per_prime_caps):
        lits = tuple(var_map[c.v] for c in cands if c.v % q == 0)
        if lits:
            cardinality.append((lits, profile.per_prime_caps[q]))
    if profile.three_cap is not None:
        lits = tuple(var_map[c.v] for c in cands if c.div3)
        if lits:
            cardinality.append((lits, profile.three_cap))
    if profile.nine_cap is not None:
        lits = tuple(var_map[c.v] for c in cands if c.div9)
        if lits:
            cardinality.append((lits, profile.nine_cap))

    return CnfDocument(num_vars=len(cands), clauses=tuple(clauses),
                       cardinality=tuple(cardinality), var_map=var_map)


def lower_cardinality(literals: tuple[int, ...], bound: int,
                      fresh: VarAllocator) -> list[list[int]]:
    """Sequential-counter lowering of "at most `bound` of `literals` are true".

    Auxiliary variable r(i, j) reads "at least j of the first i literals
    are true"; clause size stays <= 3 and the construction is O(n * bound).
    The clause set is satisfiable for a fixed assignment of the original
    literals iff at most `bound` of them are true.
    """
    if bound < 0:
        raise UsageError(f"cardinality bound must be >= 0, got {bound}")
    n = len(literals)
    if bound >= n:
        return []
    if bound == 0:
        return [[-lit] for lit in literals]
    reg = [[fresh.next() for _ in range(bound)] for _ in range(n - 1)]
    out = []
    out.append([-literals[0], reg[0][0]])
    for j in range(1, bound):
        out.append([-reg[0][j]])
    for i in range(1, n - 1):
        out.append([-literals[i], reg[i][0]])
        out.append([-reg[i - 1][0], reg[i][0]])
        for j in range(1, bound):
            out.append([-literals[i], -reg[i - 1][j - 1], reg[i][j]])
            out.append([-reg[i - 1][j], reg[i][j]])
        out.append([-literals[i], -reg[i - 1][bound - 1]])
    out.append([-literals[n - 1], -reg[n - 2][bound - 1]])
    return out


def _var_comments(doc: CnfDocument) -> list[str]:
    return [f"c var {idx} = speed {v}"
            for v, idx in sorted(doc.var_map.items(), key=lambda kv: kv[1])]


def to_dimacs(doc: CnfDocument) -> str:
    """Pure CNF, cardinality bounds lowered with sequential counters."""
    fresh = VarAllocator(doc.num_vars + 1)
    lowered: list[list[int]] = []
    for lits, bound in doc.cardinality:
        lowered.extend(lower_cardinality(lits, bound, fresh))
    total_vars = max(doc.num_vars, fresh.top)
    lines = _var_comments(doc)
    lines.append(f"p cnf {total_vars} {len(doc.clauses) + len(lowered)}")
    for clause in doc.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    for clause in lowered:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def to_knf(doc: CnfDocument) -> str:
    """Cardinality-extended format: clause lines, then `k <bound> <lits> 0`."""
    lines = _var_comments(doc)
    lines.append(f"p knf {doc.num_vars} {len(doc.clauses) + len(doc.cardinality)}")
    for clause in doc.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    for lits, bound in doc.cardinality:
        lines.append(f"k {bound} " + " ".join(str(lit) for lit in lits) + " 0")
    return "\n".join(lines) + "\n"


def satisfies(doc: CnfDocument, true_vars: set[int]) -> bool:
    """Evaluate the document semantically under an assignment of the
    candidate variables (clauses + native cardinality bounds)."""
    for clause in doc.clauses:
        if not any((lit > 0) == (abs(lit) in true_vars) for lit in clause):
            return False
    for lits, bound in doc.cardinality:
        if sum(1 for lit in lits if (lit > 0) == (abs(lit) in true_vars)) > bound:
            return False
    return True


def decode_assignment(doc: CnfDocument, true_vars: set[int]) -> tuple[int, ...]:
    """Map true candidate variables back to residues (a claimed bad cover)."""
    reverse = {idx: v for v, idx in doc.var_map.items()}
    return tuple(sorted(reverse[var] for var in true_vars if var in reverse))
