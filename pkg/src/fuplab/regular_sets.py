"""Cantor-tree embedding of porous sets into Ahlfors-David regular sets.

A porous set ``Omega`` inside ``[0, 1]`` is covered by a base-``L`` Cantor
set ``X``: at every level ``k <= k0`` each kept interval
``I_{m,k} = [m L^-k, (m+1) L^-k]`` drops one child that misses ``Omega``,
and below ``k0`` it drops its leftmost child.  ``X`` carries the natural
measure giving ``(L-1)^-k`` to each kept interval of level ``k``, which is
``delta``-regular with ``delta = log(L-1)/log(L)`` and constant ``2L``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConstructionError, InvalidInputError
from .interval_sets import Interval, IntervalSet, contains_set, largest_gap, normalize

# explicit levels are expanded lazily below k0 + 1 only up to this many nodes
MAX_EXPLICIT_NODES = 2_000_000


def base_for(nu: float) -> int:
    """``L = ceil(2 / nu)``, guarded against round-off in ``2 / nu``."""
    if not (0 < nu < 1):
        raise InvalidInputError(f"nu must lie in (0, 1), got {nu}")
    q = 2.0 / nu
    L = math.ceil(q)
    if L - q > 1 - 1e-9:
        L -= 1
    return L


def cutoff_level(L: int, alpha0: float) -> int:
    """The integer ``k0 >= 0`` with ``L^(-1-k0) < alpha0 <= L^(-k0)``."""
    if not (0 < alpha0 <= 1):
        raise InvalidInputError(f"alpha0 must lie in (0, 1], got {alpha0}")
    k0 = 0
    while float(L) ** -(k0 + 1) >= alpha0:
        k0 += 1
    return k0


@dataclass(frozen=True)
class CantorTree:
    """Kept index sets ``M(0), ..., M(k0 + 1)``; deeper levels follow ``n(m, k) = L m``.

    ``depth`` is the nominal resolution used when sampling (``L^-depth``);
    the measure itself is evaluated exactly through the self-similar tail.
    """

    L: int
    k0: int
    depth: int
    kept: tuple

    @property
    def explicit_level(self) -> int:
        return len(self.kept) - 1

    def level(self, k: int) -> np.ndarray:
        if k < 0:
            raise InvalidInputError("level must be >= 0")
        if k <= self.explicit_level:
            return self.kept[k]
        extra = k - self.explicit_level
        size = len(self.kept[-1]) * (self.L - 1) ** extra
        if size > MAX_EXPLICIT_NODES:
            raise InvalidInputError(f"level {k} has {size} nodes; too many to expand")
        m = self.kept[-1]
        digits = np.arange(1, self.L)
        for _ in range(extra):
            m = (self.L * m[:, None] + digits[None, :]).reshape(-1)
        return m

    def intervals(self, k: int) -> IntervalSet:
        m = self.level(k)
        step = float(self.L) ** -k
        return normalize(np.column_stack((m * step, (m + 1) * step)).tolist())

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "k0": self.k0,
            "depth": self.depth,
            "kept": [[int(v) for v in level] for level in self.kept],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "CantorTree":
        if isinstance(data, str):
            data = json.loads(data)
        unknown = set(data) - {"L", "k0", "depth", "kept"}
        if unknown:
            raise InvalidInputError(f"unknown keys in tree JSON: {sorted(unknown)}")
        kept = tuple(np.array(level, dtype=np.int64) for level in data["kept"])
        tree = cls(int(data["L"]), int(data["k0"]), int(data["depth"]), kept)
        check_tree(tree)
        return tree


def check_tree(tree: CantorTree) -> None:
    """Raise unless parents exist and levels ``<= k0`` keep exactly ``L - 1`` children."""
    L = tree.L
    if tree.kept[0].tolist() != [0]:
        raise InvalidInputError("tree must be rooted at M(0) = {0}")
    for k in range(1, len(tree.kept)):
        child, parent = tree.kept[k], tree.kept[k - 1]
        if np.any(np.diff(child) <= 0):
            raise InvalidInputError(f"level {k} indices not strictly increasing")
        owners, counts = np.unique(child // L, return_counts=True)
        if not np.array_equal(owners, parent) or np.any(counts != L - 1):
            raise InvalidInputError(f"level {k}: each kept node needs exactly L-1 kept children")


def embed_porous(omega: IntervalSet, nu: float, alpha0: float, extra_levels: int = 4) -> CantorTree:
    """Build the Cantor tree whose limit set ``X`` satisfies ``Omega ⊆ X(alpha0)``.

    At each node of level ``k <= k0`` the removed child is the leftmost child
    lying inside the largest ``Omega``-free subinterval of the node.  Raises
    :class:`ConstructionError` naming the node when there is none.
    """
    if omega.window != Interval(0.0, 1.0):
        raise InvalidInputError("embed_porous works on sets in the unit window")
    L = base_for(nu)
    k0 = cutoff_level(L, alpha0)
    kept = [np.array([0], dtype=np.int64)]
    for k in range(k0 + 1):
        step = float(L) ** -k
        child = step / L
        tol = 1e-12 * child
        nxt = []
        for m in kept[-1]:
            m = int(m)
            J, _ = largest_gap(omega, Interval(m * step, (m + 1) * step))
            first = max(L * m, math.ceil((J.lo - tol) / child))
            n = first if (first + 1) * child <= J.hi + tol and first < L * (m + 1) else None
            if n is None:
                raise ConstructionError(
                    f"embed_porous: no Omega-free child in I_(m={m},k={k}); set is not porous enough",
                    node=(m, k),
                )
            nxt.extend(c for c in range(L * m, L * (m + 1)) if c != n)
        kept.append(np.array(nxt, dtype=np.int64))
    return CantorTree(L, k0, k0 + 1 + extra_levels, tuple(kept))


def containment_check(omega: IntervalSet, tree: CantorTree, alpha0: float) -> bool:
    """Check ``Omega ⊆ X(alpha0)``.

    Every kept interval at level ``k0 + 1`` meets ``X`` and is shorter than
    ``alpha0``, so it suffices that ``Omega`` lies in their union.  This is
    checked for whole parts and again for every point of the ``alpha0``-grid
    that falls in ``Omega``.
    """
    cover = tree.intervals(tree.k0 + 1)
    if float(tree.L) ** -(tree.k0 + 1) >= alpha0:
        return False
    if not contains_set(cover, omega):
        return False
    if omega.is_empty:
        return True
    grid = np.arange(0, math.floor(1 / alpha0) + 1) * alpha0
    pts = np.concatenate((grid[omega.contains_points(grid)], omega.lo, omega.hi))
    return bool(np.all(cover.contains_points(pts)))


def _tail_cdf(t: np.ndarray, L: int) -> np.ndarray:
    # measure of [0, t] for the self-similar set that drops the first child at every level
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0).copy()
    out = np.zeros_like(t)
    alive = np.ones(t.shape, dtype=bool)
    scale = 1.0 / (L - 1)
    while scale > 1e-18:
        t *= L
        d = np.minimum(np.floor(t), L - 1)
        t -= d
        out += np.where(alive, scale * np.maximum(d - 1, 0), 0.0)
        alive &= d > 0
        scale /= L - 1
    return out


@dataclass(frozen=True)
class RegularMeasure:
    tree: CantorTree

    @property
    def delta(self) -> float:
        return math.log(self.tree.L - 1) / math.log(self.tree.L)

    @property
    def C_R(self) -> float:
        return 2.0 * self.tree.L

    def weight(self, m: int, k: int) -> float:
        kept = self.tree.level(k)
        i = np.searchsorted(kept, m)
        hit = i < len(kept) and kept[i] == m
        return float(self.tree.L - 1) ** -k if hit else 0.0

    def cdf(self, x) -> np.ndarray:
        tree = self.tree
        L, K = tree.L, tree.explicit_level
        kept = tree.kept[K]
        x = np.asarray(x, dtype=float)
        scaled = np.clip(x, 0.0, 1.0) * float(L) ** K
        m = np.minimum(np.floor(scaled), L**K - 1).astype(np.int64)
        frac = scaled - m
        below = np.searchsorted(kept, m, side="left")
        safe = np.minimum(below, len(kept) - 1)
        inside = kept[safe] == m
        w = float(L - 1) ** -K
        out = below * w + np.where(inside, w * _tail_cdf(frac, L), 0.0)
        return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out))

    def measure(self, lo, hi) -> np.ndarray:
        return self.cdf(hi) - self.cdf(lo)

    def point_in_X(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Right endpoints of random kept intervals of level ``depth``; these lie in ``X``."""
        tree = self.tree
        K = tree.explicit_level
        m = rng.choice(tree.kept[K], size=size)
        for _ in range(tree.depth - K):
            m = tree.L * m + rng.integers(1, tree.L, size=size)
        return (m + 1) / float(tree.L) ** max(tree.depth, K)


def measure_of_interval(mu: RegularMeasure, I: Interval) -> float:
    return float(mu.measure(I.lo, I.hi))


@dataclass(frozen=True)
class RegularityReport:
    upper_ok: bool
    lower_ok: bool
    worst_upper_ratio: float
    worst_lower_ratio: float
    samples: int
    rows: Optional[tuple] = None

    def to_json(self) -> dict:
        return {
            "upper_ok": self.upper_ok,
            "lower_ok": self.lower_ok,
            "worst_upper_ratio": self.worst_upper_ratio,
            "worst_lower_ratio": self.worst_lower_ratio,
            "samples": self.samples,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scale", "ratio_upper", "ratio_lower"])
        for row in self.rows or ():
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def regularity_check(mu: RegularMeasure, n_samples: int, seed: int, keep_rows: bool = False) -> RegularityReport:
    """Sample intervals and compare ``mu(I) / |I|^delta`` with ``C_R`` and ``1 / C_R``.

    Lengths are log-uniform in ``[L^-depth, 1]``.  Upper-bound intervals are
    placed uniformly inside ``[0, 1]``; lower-bound intervals are centered at
    points of ``X``.
    """
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    tree = mu.tree
    upper_rng, lower_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    log_min = -tree.depth * math.log(tree.L)

    lengths = np.exp(upper_rng.uniform(log_min, 0.0, n_samples))
    lo = upper_rng.uniform(0.0, 1.0, n_samples) * (1 - lengths)
    upper = mu.measure(lo, lo + lengths) / lengths**mu.delta

    radii = np.exp(lower_rng.uniform(log_min, 0.0, n_samples)) / 2
    centers = mu.point_in_X(lower_rng, n_samples)
    lower = mu.measure(centers - radii, centers + radii) / (2 * radii) ** mu.delta

    worst_up = float(np.max(upper))
    worst_low = float(np.min(lower))
    rows = tuple(zip(lengths, upper, lower)) if keep_rows else None
    return RegularityReport(
        upper_ok=worst_up <= mu.C_R,
        lower_ok=worst_low >= 1 / mu.C_R,
        worst_upper_ratio=worst_up,
        worst_lower_ratio=worst_low,
        samples=n_samples,
        rows=rows,
    )
