"""Exact combinatorics of symbolic words over {1, 2}.

A word of length ``N0`` is *controlled* when its density of 1s is at least
``alpha``.  Words of length ``8 N0`` split into eight blocks; they belong to
``X`` when no block is controlled and to ``Y`` otherwise.  All counts are
Python integers.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InvalidInputError, ResourceError

BLOCKS = 8
# brute force walks all 2^N0 words
MAX_EXHAUSTIVE_N0 = 24


def _check_word(w: Sequence[int]) -> tuple:
    w = tuple(int(c) for c in w)
    if any(c not in (1, 2) for c in w):
        raise InvalidInputError(f"words use letters 1 and 2 only, got {w}")
    return w


def parse_word(text: str) -> tuple:
    return _check_word(int(c) for c in text if not c.isspace())


def density(w: Sequence[int]) -> Fraction:
    w = _check_word(w)
    if not w:
        raise InvalidInputError("density of the empty word is undefined")
    return Fraction(w.count(1), len(w))


def flip(w: Sequence[int]) -> tuple:
    return tuple(3 - c for c in _check_word(w))


def as_fraction(alpha) -> Fraction:
    """Read ``alpha`` as the decimal it prints as, so ``0.1`` means exactly 1/10."""
    if isinstance(alpha, (Fraction, int)):
        return Fraction(alpha)
    return Fraction(repr(float(alpha)))


def max_uncontrolled_ones(N0: int, alpha: float) -> int:
    """Largest ``j`` with ``j / N0 < alpha`` (strict: the controlled set is closed)."""
    alpha = as_fraction(alpha)
    j = math.ceil(alpha * N0) - 1
    return min(max(j, -1), N0)


def controlled_set_size(N0: int, alpha: float) -> int:
    """Number of words of length ``N0`` with density strictly below ``alpha``."""
    if N0 < 1:
        raise InvalidInputError("N0 must be >= 1")
    if not (0 < alpha < 1):
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    j = max_uncontrolled_ones(N0, alpha)
    return sum(math.comb(N0, i) for i in range(j + 1))


def binomial_bound(N0: int, alpha: float) -> int:
    """``C(N0, floor(alpha N0)) * 2^floor(alpha N0)``.

    Every set of at most ``j`` positions extends to a set of exactly ``j``
    positions, and each ``j``-set has ``2^j`` subsets.
    """
    j = math.floor(as_fraction(alpha) * N0)
    return math.comb(N0, j) * 2**j


def entropy(alpha: float) -> float:
    if alpha in (0, 1):
        return 0.0
    return -(alpha * math.log(alpha) + (1 - alpha) * math.log(1 - alpha))


@dataclass(frozen=True)
class PartitionParams:
    N0: int
    alpha: float
    h: Optional[float] = None
    rho: Optional[float] = None
    beta: Optional[float] = None

    @property
    def N1(self) -> int:
        return 4 * self.N0

    def to_json(self) -> dict:
        d = asdict(self)
        d["N1"] = self.N1
        return d


def derive_params(h: float, rho: float, beta: float) -> PartitionParams:
    """``N0 = ceil((rho/4) log(1/h))``, ``N1 = 4 N0``, ``alpha = beta^2 / 64``."""
    if not (0 < h < 1):
        raise InvalidInputError(f"h must lie in (0, 1), got {h}")
    if not (0 < rho < 1):
        raise InvalidInputError(f"rho must lie in (0, 1), got {rho}")
    if not (0 < beta <= 0.125):
        raise InvalidInputError(f"beta must lie in (0, 1/8], got {beta}")
    raw = (rho / 4) * math.log(1 / h)
    # absorb round-off such as 0.2 * 20 = 4.000000000000001
    N0 = max(1, math.ceil(raw - 1e-9 * max(1.0, raw)))
    return PartitionParams(N0=N0, alpha=beta**2 / 64, h=h, rho=rho, beta=beta)


@dataclass(frozen=True)
class CountReport:
    n_uncontrolled: int
    n_X: int
    stirling_bound: int
    stirling_bound_X: int
    asymptotic_bound: Optional[float]
    ratio_to_bound: Optional[float]
    exhaustive: Optional[bool] = None

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def enumerate_uncontrolled(N0: int, alpha: float) -> int:
    """Brute-force count over all ``2^N0`` words; independent of the binomial sum."""
    if N0 > MAX_EXHAUSTIVE_N0:
        raise ResourceError(f"exhaustive enumeration with N0={N0} is too large")
    a = as_fraction(alpha)
    # ones / N0 < p / q  <=>  ones * q < p * N0
    return sum(1 for bits in range(2**N0) if bin(bits).count("1") * a.denominator < a.numerator * N0)


def count_X(params: PartitionParams, verify_exhaustive: bool = False) -> CountReport:
    """Size of ``X`` (all eight blocks uncontrolled) with the bounds from the counting argument.

    ``asymptotic_bound`` is ``h^(-4 sqrt(alpha))`` when ``h`` is known; the ratio
    ``n_X / asymptotic_bound`` is reported, not asserted, since the constant in
    front of the power of ``h`` is unspecified.
    """
    N0, alpha = params.N0, params.alpha
    n = controlled_set_size(N0, alpha)
    stirling = binomial_bound(N0, alpha)
    asym = None if params.h is None else params.h ** (-4 * math.sqrt(alpha))
    n_X = n**BLOCKS
    report = CountReport(
        n_uncontrolled=n,
        n_X=n_X,
        stirling_bound=stirling,
        stirling_bound_X=stirling**BLOCKS,
        asymptotic_bound=asym,
        ratio_to_bound=None if asym is None else n_X / asym,
    )
    if not verify_exhaustive:
        return report
    if N0 > MAX_EXHAUSTIVE_N0:
        err = ResourceError(f"N0={N0} > {MAX_EXHAUSTIVE_N0}: exhaustive verification refused")
        err.report = report
        raise err
    return replace(report, exhaustive=enumerate_uncontrolled(N0, alpha) == n)


def xy_membership(w: Sequence[int], alpha: float) -> tuple[str, Optional[int]]:
    """Return ``("X", None)`` or ``("Y", l)`` with ``l`` the first controlled block (1-based)."""
    w = _check_word(w)
    if not w or len(w) % BLOCKS:
        raise InvalidInputError(f"word length {len(w)} is not a positive multiple of {BLOCKS}")
    N0 = len(w) // BLOCKS
    alpha = as_fraction(alpha)
    for ell in range(BLOCKS):
        if density(w[ell * N0 : (ell + 1) * N0]) >= alpha:
            return "Y", ell + 1
    return "X", None
