"""Finite unions of closed intervals and porosity certification.

Sets live inside a working window (default ``[0, 1]``).  Porosity is
certified by sweeping a ladder of scales and window translates; see
:func:`porosity_check` for the discrete criterion and what it guarantees
in the continuum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError

# relative slack when comparing a measured gap against nu * length
GAP_RTOL = 1e-12


@dataclass(frozen=True, order=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidInputError(f"non-finite interval endpoint: [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise InvalidInputError(f"interval with lo > hi: [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def as_list(self) -> list:
        return [self.lo, self.hi]


UNIT = Interval(0.0, 1.0)


def _as_interval(obj) -> Interval:
    if isinstance(obj, Interval):
        return obj
    lo, hi = obj
    try:
        return Interval(float(lo), float(hi))
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"cannot read interval from {obj!r}") from exc


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise disjoint closed intervals clipped to ``window``.

    Build instances through :func:`normalize`; the constructor trusts its input.
    """

    parts: tuple = ()
    window: Interval = UNIT
    _lo: np.ndarray = field(init=False, repr=False, compare=False)
    _hi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo = np.array([p.lo for p in self.parts], dtype=float)
        hi = np.array([p.hi for p in self.parts], dtype=float)
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_hi", hi)

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._hi

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def measure(self) -> float:
        return float(np.sum(self._hi - self._lo))

    def contains_points(self, x) -> np.ndarray:
        """Boolean membership of each point of ``x`` (closed intervals)."""
        x = np.asarray(x, dtype=float)
        if self.is_empty:
            return np.zeros(x.shape, dtype=bool)
        idx = np.searchsorted(self._lo, x, side="right") - 1
        ok = idx >= 0
        safe = np.where(ok, idx, 0)
        return ok & (x <= self._hi[safe])

    def gaps(self) -> np.ndarray:
        """Complement of the set inside the window as an ``(n, 2)`` array."""
        w = self.window
        los = np.concatenate(([w.lo], self._hi))
        his = np.concatenate((self._lo, [w.hi]))
        keep = his > los
        return np.column_stack((los[keep], his[keep]))

    def to_json(self) -> dict:
        return {
            "window": [float(self.window.lo), float(self.window.hi)],
            "parts": [[float(p.lo), float(p.hi)] for p in self.parts],
        }

    def dumps(self) -> str:
        # repr of a float round-trips exactly (17 significant digits at most)
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "IntervalSet":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict) or "parts" not in data:
            raise InvalidInputError("interval set JSON needs a 'parts' list")
        unknown = set(data) - {"window", "parts"}
        if unknown:
            raise InvalidInputError(f"unknown keys in interval set JSON: {sorted(unknown)}")
        window = _as_interval(data.get("window", [0.0, 1.0]))
        return normalize(data["parts"], window=window)


def normalize(raw: Iterable, window: Interval = UNIT) -> IntervalSet:
    window = _as_interval(window)
    items = sorted(_as_interval(r) for r in raw)
    merged: list[list[float]] = []
    for iv in items:
        lo, hi = max(iv.lo, window.lo), min(iv.hi, window.hi)
        if lo > hi:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return IntervalSet(tuple(Interval(lo, hi) for lo, hi in merged), window)


def neighborhood(X: IntervalSet, s: float) -> IntervalSet:
    """The ``s``-neighborhood ``X + [-s, s]``, clipped to the window."""
    if not math.isfinite(s) or s < 0:
        raise InvalidInputError(f"neighborhood radius must be >= 0, got {s}")
    if s == 0:
        return X
    return normalize([(p.lo - s, p.hi + s) for p in X.parts], window=X.window)


def union(A: IntervalSet, B: IntervalSet) -> IntervalSet:
    return normalize(list(A.parts) + list(B.parts), window=A.window)


def contains_set(outer: IntervalSet, inner: IntervalSet) -> bool:
    """True when every part of ``inner`` lies inside a single part of ``outer``."""
    if inner.is_empty:
        return True
    if outer.is_empty:
        return False
    idx = np.searchsorted(outer.lo, inner.lo, side="right") - 1
    if np.any(idx < 0):
        return False
    return bool(np.all(inner.hi <= outer.hi[idx]))


def largest_gap(omega: IntervalSet, I: Interval) -> tuple[Interval, float]:
    """Longest subinterval of ``I`` missing ``omega`` (leftmost on ties).

    Free intervals are closures of the open complement, so ``J`` may touch
    ``omega`` at its endpoints.  Returns a degenerate ``J`` and length 0 when
    ``I`` is covered.
    """
    I = _as_interval(I)
    best = Interval(I.lo, I.lo)
    best_len = 0.0
    cursor = I.lo
    start = int(np.searchsorted(omega.hi, I.lo, side="left")) if len(omega) else 0
    for p in omega.parts[start:]:
        if p.lo > I.hi:
            break
        if p.lo > cursor and p.lo - cursor > best_len:
            best, best_len = Interval(cursor, p.lo), p.lo - cursor
        cursor = max(cursor, p.hi)
        if cursor >= I.hi:
            break
    if I.hi - cursor > best_len:
        best, best_len = Interval(cursor, I.hi), I.hi - cursor
    return best, best_len


class GapIndex:
    """Vectorised largest-gap queries over many windows.

    Uses a sparse table for range maxima over the lengths of complement gaps;
    the two partially covered gaps at a window's ends are handled directly.
    """

    def __init__(self, omega: IntervalSet):
        g = omega.gaps()
        self.g_lo = g[:, 0] if len(g) else np.zeros(0)
        self.g_hi = g[:, 1] if len(g) else np.zeros(0)
        lengths = self.g_hi - self.g_lo
        table = [lengths]
        span = 1
        while 2 * span <= len(lengths):
            prev = table[-1]
            table.append(np.maximum(prev[:-span], prev[span:]))
            span *= 2
        self._table = table

    def _range_max(self, l: np.ndarray, r: np.ndarray) -> np.ndarray:
        # max of lengths[l..r] inclusive; -inf where l > r
        out = np.full(l.shape, -np.inf)
        ok = l <= r
        if not np.any(ok):
            return out
        l, r = l[ok], r[ok]
        k = np.floor(np.log2(r - l + 1)).astype(int)
        vals = np.empty(l.shape)
        for level in np.unique(k):
            sel = k == level
            t = self._table[level]
            vals[sel] = np.maximum(t[l[sel]], t[r[sel] - (1 << level) + 1])
        out[ok] = vals
        return out

    def query(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n = len(self.g_lo)
        if n == 0:
            return np.zeros(a.shape)
        i0 = np.searchsorted(self.g_hi, a, side="right")
        i1 = np.searchsorted(self.g_lo, b, side="left") - 1
        out = np.zeros(a.shape)
        has = i0 <= i1
        j0 = np.clip(i0, 0, n - 1)
        j1 = np.clip(i1, 0, n - 1)
        end0 = np.minimum(self.g_hi[j0], b) - np.maximum(self.g_lo[j0], a)
        end1 = np.minimum(self.g_hi[j1], b) - np.maximum(self.g_lo[j1], a)
        mid = self._range_max(i0 + 1, i1 - 1)
        best = np.maximum(np.maximum(end0, end1), mid)
        out[has] = np.maximum(best[has], 0.0)
        return out


def scale_ladder(alpha0: float, alpha1: float) -> list[float]:
    """Scales ``alpha1 * 2**-i`` down to ``alpha0``, with ``alpha0`` appended.

    Consecutive scales differ by a factor of at most 2, so every length in
    ``[alpha0, alpha1]`` lies in ``[l, 2l)`` for some ladder scale ``l``.
    """
    scales = []
    ell = alpha1
    while ell >= alpha0 * (1 - 1e-12):
        scales.append(ell)
        ell /= 2
    if not scales or scales[-1] > alpha0 * (1 + 1e-12):
        scales.append(alpha0)
    return scales


@dataclass(frozen=True)
class PorosityReport:
    certified: bool
    nu_nominal: float
    nu_certified: float
    witness: Optional[Interval]
    scales: tuple
    windows_checked: int = 0
    worst_ratio: float = math.inf

    def to_json(self) -> dict:
        return {
            "certified": self.certified,
            "nu_nominal": self.nu_nominal,
            "nu_certified": self.nu_certified,
            "witness": None if self.witness is None else self.witness.as_list(),
            "scales": list(self.scales),
            "windows_checked": self.windows_checked,
            "worst_ratio": None if math.isinf(self.worst_ratio) else self.worst_ratio,
        }


def porosity_check(omega: IntervalSet, nu: float, alpha0: float, alpha1: float) -> PorosityReport:
    """Certify that ``omega`` is porous on scales ``alpha0`` to ``alpha1``.

    Windows of every ladder length ``l`` (see :func:`scale_ladder`) are placed
    at translates ``window.lo + k * nu * l / 4`` plus one flush against the
    right edge.  Each must contain a free subinterval of length ``nu * l``.

    If all do, any interval ``I`` in the window with ``alpha0 <= |I| <= alpha1``
    contains a free piece of length at least ``3 nu |I| / 8``: pick the ladder
    scale with ``l <= |I| < 2l`` and the last translate ``a <= I.lo``; at most
    ``nu * l / 4`` of that window's gap can stick out of ``I``.  The report
    therefore certifies the continuum property with ``nu / 4``.

    On failure the witness is the window with the smallest gap ratio (ties go
    to the larger scale, then the leftmost position).
    """
    if not (0 < nu < 1):
        raise InvalidInputError(f"nu must lie in (0, 1), got {nu}")
    if not (alpha0 > 0 and alpha1 > 0 and math.isfinite(alpha0) and math.isfinite(alpha1)):
        raise InvalidInputError("scales must be positive and finite")
    if alpha0 > alpha1:
        raise InvalidInputError(f"alpha0={alpha0} exceeds alpha1={alpha1}")

    win = omega.window
    top = min(alpha1, win.length)
    if alpha0 > top:
        return PorosityReport(True, nu, nu / 4, None, (alpha0, alpha1))

    index = GapIndex(omega)
    worst = (math.inf, 0.0, 0.0)  # (ratio, -scale, lo)
    checked = 0
    for ell in scale_ladder(alpha0, top):
        step = nu * ell / 4
        n = int(math.floor((win.length - ell) / step + 1e-9)) + 1
        a = win.lo + step * np.arange(n)
        a = np.append(a[a + ell <= win.hi + 1e-15], win.hi - ell)
        b = a + ell
        ratio = index.query(a, b) / ell
        checked += len(a)
        k = int(np.argmin(ratio))
        cand = (float(ratio[k]), -ell, float(a[k]))
        if cand[0] < worst[0] - GAP_RTOL:
            worst = cand
        elif abs(cand[0] - worst[0]) <= GAP_RTOL and (cand[1], cand[2]) < (worst[1], worst[2]):
            worst = cand

    certified = worst[0] >= nu * (1 - GAP_RTOL)
    witness = None
    if not certified:
        lo = worst[2]
        witness = Interval(lo, min(lo - worst[1], win.hi))
    return PorosityReport(
        certified=certified,
        nu_nominal=nu,
        nu_certified=nu / 4 if certified else 0.0,
        witness=witness,
        scales=(alpha0, alpha1),
        windows_checked=checked,
        worst_ratio=worst[0],
    )


def cantor_set(level: int, window: Interval = UNIT) -> IntervalSet:
    """Level-``level`` approximation of the middle-thirds Cantor set."""
    if level < 0:
        raise InvalidInputError("level must be >= 0")
    lo = np.zeros(1)
    width = 1.0
    for _ in range(level):
        width /= 3
        lo = np.concatenate((lo, lo + 2 * width))
        lo.sort()
    w = window.length
    return normalize([(window.lo + w * x, window.lo + w * (x + width)) for x in lo], window=window)


# The generator below builds a random two-branch Cantor set: every node of
# length l keeps two children of relative size r placed at random inside it,
# down to nodes shorter than alpha0, which become solid leaves.  For nu above
# 1/3 no two-branch pattern survives the ladder check, so a single branch is
# kept.  Candidates are validated with porosity_check and redrawn from
# spawned streams until one passes.

_MAX_DRAWS = 200


def _keep_ratio(nu: float) -> float:
    if nu > 1 / 3:
        return 0.05
    return max(0.5 * (1 - 3 * nu) + 0.08, 0.02)


def _draw_porous(nu: float, alpha0: float, rng: np.random.Generator, window: Interval) -> IntervalSet:
    branches = 2 if nu <= 1 / 3 else 1
    r_max = _keep_ratio(nu)
    leaf = alpha0 / 8 if branches == 2 else alpha0 / 64
    nodes = np.array([window.lo]), np.array([window.length])
    leaves = []
    starts, lengths = nodes
    while len(starts):
        small = lengths < leaf
        if np.any(small):
            leaves.append(np.column_stack((starts[small], starts[small] + lengths[small])))
        starts, lengths = starts[~small], lengths[~small]
        if not len(starts):
            break
        r = rng.uniform(0.6 * r_max, r_max, size=(len(starts), branches))
        child = r * lengths[:, None]
        if branches == 2:
            # left child hugs a random point of the first quarter, right child the last
            slack = lengths * (1 - r.sum(axis=1))
            shift = rng.uniform(0, 0.25, size=(len(starts), 2)) * slack[:, None]
            lo_left = starts + shift[:, 0]
            lo_right = starts + lengths - child[:, 1] - shift[:, 1]
            starts = np.concatenate((lo_left, lo_right))
        else:
            slack = lengths - child[:, 0]
            starts = starts + rng.uniform(0.3, 0.7, size=len(starts)) * slack
        lengths = child.T.reshape(-1) if branches == 2 else child[:, 0]
    raw = np.concatenate(leaves) if leaves else np.zeros((0, 2))
    return normalize(raw.tolist(), window=window)


def random_porous(nu: float, alpha0: float, seed: int, window: Interval = UNIT) -> IntervalSet:
    """Seeded random set certified ``nu``-porous on scales ``alpha0`` to 1.

    Accepts ``0 < nu <= 1/2``.  Near ``nu = 1/2`` only very sparse sets pass
    the ladder check, so outputs there are a handful of tiny intervals.
    """
    if not (0 < nu <= 0.5):
        raise InvalidInputError(f"random_porous needs 0 < nu <= 1/2, got {nu}")
    if not (0 < alpha0 < 1):
        raise InvalidInputError(f"alpha0 must lie in (0, 1), got {alpha0}")
    streams = np.random.SeedSequence(seed).spawn(_MAX_DRAWS)
    for ss in streams:
        omega = _draw_porous(nu, alpha0, np.random.default_rng(ss), window)
        if porosity_check(omega, nu, alpha0, window.length).certified:
            return omega
    raise InvalidInputError(f"no porous set found for nu={nu}, alpha0={alpha0} after {_MAX_DRAWS} draws")


def intervals_from_pairs(pairs: Sequence) -> list[Interval]:
    return [_as_interval(p) for p in pairs]
