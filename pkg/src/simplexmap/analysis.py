"""Volumes of self-similar orthotope sets and their fit to the simplex.

A set with inverse scale ``inv_r`` and arity ``beta`` over side ``n`` holds one
orthotope of side ``n / inv_r`` plus ``beta`` copies of the set over side
``n / inv_r``. Unrolled down to side 1 this sums to

    V(n) = (n**m - beta**k) / (inv_r**m - beta),   n = inv_r**k.

Everything here is exact (``Fraction``); the one float helper is
:func:`real_valued_diagnostic`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .core import ACCUMULATOR_BITS, ContractViolation, RangeError, simplex_volume


@dataclass(frozen=True)
class SelfSimilarParams:
    inv_r: int
    beta: int
    m: int

    def __post_init__(self):
        for name in ("inv_r", "beta", "m"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ContractViolation(f"{name} must be an integer, got {v!r}")
        if self.beta < 2:
            raise ContractViolation(f"beta must be > 1, got {self.beta}")
        # inv_r == beta is admitted: the (2, 2) set that tiles the triangle exactly
        if self.inv_r < self.beta:
            raise ContractViolation(f"inv_r must be >= beta, got inv_r={self.inv_r}, beta={self.beta}")
        if self.m < 2:
            raise ContractViolation(f"m must be >= 2, got {self.m}")


@dataclass(frozen=True)
class EfficiencyReport:
    n: int
    volume_S: Fraction
    volume_simplex: int
    alpha: Fraction
    n0: Optional[int]  # None: no covering n found below the bound

    @property
    def n0_label(self) -> str:
        return "not-found" if self.n0 is None else str(self.n0)


def _log_exact(n: int, base: int) -> int:
    if n < 1:
        raise ContractViolation(f"n must be positive, got {n}")
    k, v = 0, 1
    while v < n:
        v *= base
        k += 1
    if v != n:
        raise ContractViolation(f"n={n} is not a power of {base}")
    return k


def self_similar_volume(n: int, p: SelfSimilarParams) -> Fraction:
    k = _log_exact(n, p.inv_r)
    top = n ** p.m
    if top >> ACCUMULATOR_BITS:
        raise RangeError(f"n**m = {n}**{p.m} exceeds {ACCUMULATOR_BITS} bits")
    return Fraction(top - p.beta ** k, p.inv_r ** p.m - p.beta)


def extra_fraction_limit(m: int, p: Optional[SelfSimilarParams] = None) -> Fraction:
    """Large-``n`` limit of the extra volume, ``m! / (inv_r**m - beta) - 1``.

    Defaults to ``inv_r = beta = 2``.
    """
    p = p or SelfSimilarParams(2, 2, m)
    if p.m != m:
        raise ContractViolation(f"params are for m={p.m}, asked for m={m}")
    f = math.factorial(m)
    if f >> ACCUMULATOR_BITS:
        raise RangeError(f"{m}! exceeds {ACCUMULATOR_BITS} bits")
    return Fraction(f, p.inv_r ** m - p.beta) - 1


def extra_fraction_at(n: int, p: SelfSimilarParams) -> Fraction:
    """``V(S_n) / V(simplex of side n-1) - 1``."""
    if n < 2:
        raise ContractViolation(f"n must be >= 2, got {n}")
    return self_similar_volume(n, p) / simplex_volume(n - 1, p.m) - 1


def _report(n: int, p: SelfSimilarParams, n0: Optional[int]) -> EfficiencyReport:
    vs = self_similar_volume(n, p)
    vd = simplex_volume(n - 1, p.m)
    return EfficiencyReport(n, vs, vd, vs / vd - 1, n0)


def find_n0(p: SelfSimilarParams, n_bound: int) -> EfficiencyReport:
    """Smallest power of ``inv_r`` (up to ``n_bound``) whose set covers the simplex.

    The report carries alpha at ``n0``, or at the last side examined when no
    side covers. The sweep also stops where volumes leave the 128-bit range.
    """
    n = p.inv_r
    if n > n_bound:
        raise ContractViolation(f"n_bound={n_bound} is below the smallest side {n}")
    last = n
    while n <= n_bound:
        try:
            covers = self_similar_volume(n, p) >= simplex_volume(n - 1, p.m)
        except RangeError:
            # past the 128-bit envelope; the sweep ends here
            break
        if covers:
            return _report(n, p, n)
        last = n
        n *= p.inv_r
    return _report(last, p, None)


def _largest_power(base: int, bound: int) -> int:
    n = base
    while n * base <= bound:
        n *= base
    return n


def optimize_params(
    m: int, inv_r_max: int = 8, beta_max: int = 8, n_eval: int = 2 ** 12
) -> List[Tuple[SelfSimilarParams, EfficiencyReport]]:
    """Exhaustive search over integral ``2 <= beta <= inv_r``.

    Each pair is scored at the largest power of ``inv_r`` not above
    ``n_eval``. Ranking: sets that cover first, then ``|alpha|`` ascending,
    then smaller ``n0``, smaller ``beta``, smaller ``inv_r``.
    """
    out = []
    for beta in range(2, beta_max + 1):
        for inv_r in range(beta, inv_r_max + 1):
            if inv_r > n_eval:
                continue
            p = SelfSimilarParams(inv_r, beta, m)
            n0 = find_n0(p, n_eval).n0
            out.append((p, _report(_largest_power(inv_r, n_eval), p, n0)))
    if not out:
        raise ContractViolation(
            f"no feasible (inv_r, beta) with 2 <= beta <= inv_r, inv_r <= {inv_r_max}, "
            f"beta <= {beta_max}, inv_r <= n_eval={n_eval}"
        )

    def key(item):
        p, r = item
        return (r.alpha < 0, abs(r.alpha), r.n0 is None, r.n0 or 0, p.beta, p.inv_r)

    return sorted(out, key=key)


def real_valued_diagnostic(m: int, beta: float = 2.0, inv_r: Optional[float] = None) -> dict:
    """Extra-volume limit for non-integral parameters, in floating point.

    Without ``inv_r`` the scale that makes the limit vanish,
    ``(m! + beta) ** (1/m)``, is used. Such sets have no block packing; the
    integral optimizer never sees them.
    """
    f = math.factorial(m)
    if inv_r is None:
        inv_r = (f + beta) ** (1.0 / m)
    denom = inv_r ** m - beta
    if denom <= 0:
        raise ContractViolation(f"inv_r**m must exceed beta, got inv_r={inv_r}, beta={beta}")
    return {"m": m, "inv_r": inv_r, "beta": beta, "alpha_limit": f / denom - 1}
