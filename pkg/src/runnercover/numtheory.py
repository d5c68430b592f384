"""Exact integer and rational arithmetic primitives.

Everything on the proof path is arbitrary-precision integer or rational
arithmetic; floats appear only in human-facing approximations produced by
:func:`approx_scientific`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import UsageError

# Exact rationals are stored as fractions.Fraction, which keeps numerator
# and denominator in lowest terms with a positive denominator.
ExactRational = Fraction


@dataclass(frozen=True)
class PrimePower:
    """A value p**a with p prime and a >= 1."""

    p: int
    a: int
    value: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise UsageError(f"base {self.p} is not prime")
        if self.a < 1 or self.p ** self.a != self.value or self.value < 2:
            raise UsageError(f"{self.value} != {self.p}^{self.a}")


def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for the sizes used here."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def gcd_set(values: list[int]) -> int:
    """Greatest common divisor of a nonempty list of nonnegative integers.

    Zeros are absorbed (gcd(0, x) = x); an all-zero list yields 0.  An empty
    list is rejected rather than defined, to surface caller bugs.
    """
    if not values:
        raise UsageError("gcd of an empty list is undefined here")
    return math.gcd(*values)


def prime_power_decompose(d: int) -> PrimePower | None:
    """Return (p, a) with d = p**a when d is a prime power, else None."""
    if d < 2:
        raise UsageError(f"prime-power decomposition needs d >= 2, got {d}")
    p = _smallest_prime_factor(d)
    a = 0
    rest = d
    while rest % p == 0:
        rest //= p
        a += 1
    if rest != 1:
        return None
    return PrimePower(p=p, a=a, value=d)


def _smallest_prime_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of n >= 1, ascending."""
    if n < 1:
        raise UsageError(f"prime_factors needs n >= 1, got {n}")
    out = []
    rest = n
    while rest > 1:
        p = _smallest_prime_factor(rest)
        out.append(p)
        while rest % p == 0:
            rest //= p
    return tuple(out)


def valuation(n: int, p: int) -> int:
    """Largest e with p**e dividing n.  n = 0 is rejected (infinite)."""
    if n < 1:
        raise UsageError(f"valuation needs n >= 1, got {n}")
    if not is_prime(p):
        raise UsageError(f"valuation base {p} is not prime")
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def product_bound(k: int) -> Fraction:
    """Exact upper bound [binom(k+1,2)^(k-1) / k]^k on the speed product of a
    minimal counterexample with k speeds.

    A contradiction is certified only when a divisor lcm strictly exceeds
    this value.
    """
    if k < 3:
        raise UsageError(f"product bound needs k >= 3, got {k}")
    return Fraction(math.comb(k + 1, 2) ** ((k - 1) * k), k ** k)


def approx_scientific(x: Fraction | int, digits: int = 6) -> str:
    """Decimal scientific approximation of a positive exact value.

    Rendered for human readers only (e.g. "8.47657e+79"); computed with
    integer arithmetic so huge values never touch floats.
    """
    if digits < 1:
        raise UsageError("need at least one significant digit")
    frac = Fraction(x)
    if frac <= 0:
        raise UsageError("approx_scientific handles positive values only")
    num, den = frac.numerator, frac.denominator
    # exponent e with 10^e <= num/den < 10^(e+1)
    e = len(str(num)) - len(str(den))
    while num * 10 ** max(0, -e) < den * 10 ** max(0, e):
        e -= 1
    while num * 10 ** max(0, -(e + 1)) >= den * 10 ** max(0, e + 1):
        e += 1
    # round-half-up mantissa with `digits` significant digits
    shift = digits - 1 - e
    if shift >= 0:
        mant = (num * 10 ** shift * 2 + den) // (2 * den)
    else:
        mant = (num * 2 + den * 10 ** (-shift)) // (2 * den * 10 ** (-shift))
    if mant >= 10 ** digits:  # rounding carried over, e.g. 9.99995 -> 1.00000e+1
        mant //= 10
        e += 1
    s = str(mant)
    return f"{s[0]}.{s[1:]}e{e:+03d}"
