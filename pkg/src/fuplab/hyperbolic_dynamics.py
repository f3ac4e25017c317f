"""Unit tangent bundle of a compact hyperbolic surface as ``Γ \\ PSL(2, R)``.

Points are cosets ``Γ g``; flows act by right multiplication:

* geodesic flow ``φ_t(g) = g a_t`` with ``a_t = diag(e^{t/2}, e^{-t/2})``;
* unstable horocycle flow ``g n⁻_s`` with ``n⁻_s = [[1, 0], [s, 1]]``;
* stable horocycle flow ``g n⁺_s`` with ``n⁺_s = [[1, s], [0, 1]]``.

With this orientation ``φ_t ∘ e^{sU_-} = e^{e^t s U_-} ∘ φ_t``: the forward
geodesic flow stretches the unstable direction and shrinks the stable one.

Cosets are represented by the element of ``Γ g`` whose base point ``g·i``
lies in the Dirichlet domain of ``Γ`` centred at ``i``.  Since
``cosh d(g·i, i) = |g|_F^2 / 2`` for ``g`` in ``SL(2, R)``, reduction is a
greedy descent of the Frobenius norm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from .errors import InvalidInputError, ReductionError, WitnessError

MAX_REDUCTION_STEPS = 10_000
# relative decrease needed for a greedy step; stops ping-pong on domain edges
REDUCTION_RTOL = 1e-12
TAU_FLOOR = 2.0**-20
SIGN_EPS = 1e-14


class Direction(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


# --- matrix helpers ---------------------------------------------------------


def a_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (2, 2))
    out[..., 0, 0] = np.exp(t / 2)
    out[..., 1, 1] = np.exp(-t / 2)
    return out


def n_plus(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape + (2, 2))
    out[..., 0, 0] = out[..., 1, 1] = 1.0
    out[..., 0, 1] = s
    return out


def n_minus(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape + (2, 2))
    out[..., 0, 0] = out[..., 1, 1] = 1.0
    out[..., 1, 0] = s
    return out


def horocycle_matrix(s, direction) -> np.ndarray:
    return n_plus(s) if Direction(direction) is Direction.STABLE else n_minus(s)


def renormalize(m: np.ndarray) -> np.ndarray:
    """Rescale to determinant 1 and fix the sign: first entry beyond ``SIGN_EPS`` is positive."""
    m = np.array(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if np.any(det <= 0):
        raise InvalidInputError("matrix must have positive determinant")
    m = m / np.sqrt(det)[..., None, None]
    flat = m.reshape(m.shape[:-2] + (4,))
    first = np.argmax(np.abs(flat) > SIGN_EPS, axis=-1)
    lead = np.take_along_axis(flat, first[..., None], axis=-1)[..., 0]
    return np.where((lead < 0)[..., None, None], -m, m)


def sq_norm(m: np.ndarray) -> np.ndarray:
    return np.sum(np.asarray(m) ** 2, axis=(-2, -1))


def distance_to_base(m: np.ndarray) -> np.ndarray:
    """Hyperbolic distance ``d(m·i, i)``."""
    return np.arccosh(np.maximum(sq_norm(m) / 2, 1.0))


def frobenius_pm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Frobenius distance in ``PSL(2, R)``: minimum over the two signs."""
    a, b = np.asarray(a), np.asarray(b)
    return np.sqrt(np.minimum(sq_norm(a - b), sq_norm(a + b)))


@dataclass(frozen=True, eq=False)
class MoebiusElement:
    """An element of ``PSL(2, R)`` stored with determinant 1 and canonical sign."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise InvalidInputError("a Moebius element is a finite 2x2 real matrix")
        object.__setattr__(self, "entries", renormalize(m))

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "MoebiusElement":
        a, b, c, d = map(float, values)
        return cls(np.array([[a, b], [c, d]]))

    def as_list(self) -> list:
        return [float(v) for v in self.entries.ravel()]

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return MoebiusElement(self.entries @ other.entries)

    def inverse(self) -> "MoebiusElement":
        (a, b), (c, d) = self.entries
        return MoebiusElement(np.array([[d, -b], [-c, a]]))

    def close_to(self, other: "MoebiusElement", tol: float = 1e-10) -> bool:
        return float(frobenius_pm(self.entries, other.entries)) <= tol

    def det(self) -> float:
        return float(np.linalg.det(self.entries))

    def trace(self) -> float:
        return float(abs(np.trace(self.entries)))

    def act(self, z: complex) -> complex:
        (a, b), (c, d) = self.entries
        return (a * z + b) / (c * z + d)


IDENTITY = MoebiusElement(np.eye(2))


# --- groups -----------------------------------------------------------------


def _bolza_generators() -> list:
    # octagon side pairings in the disk model, conjugated to the upper half-plane
    alpha = 1 + math.sqrt(2)
    beta = math.sqrt(2 + 2 * math.sqrt(2))
    cayley = np.array([[1, -1j], [1, 1j]])
    cayley_inv = np.linalg.inv(cayley)
    gens = []
    for k in range(8):
        e = np.exp(1j * k * np.pi / 4)
        g = np.array([[alpha, beta * e], [beta * np.conj(e), alpha]])
        gens.append(MoebiusElement((cayley_inv @ g @ cayley).real))
    return gens


# g_{k+4} = g_k^{-1}; with a_k = g_k this is a0 a1^-1 a2 a3^-1 a0^-1 a1 a2^-1 a3
BOLZA_RELATION = (0, 5, 2, 7, 4, 1, 6, 3)
# circumradius of the regular octagon with angles π/4: cosh R = cot^2(π/8)
BOLZA_CIRCUMRADIUS = math.acosh((1 + math.sqrt(2)) ** 2)
BOLZA_INRADIUS = math.acosh(1 + math.sqrt(2))
BOLZA_AREA = 4 * math.pi


@dataclass(frozen=True, eq=False)
class FuchsianGroup:
    generators: tuple
    relation_products: tuple = ()
    preset_name: Optional[str] = None
    covering_radius: Optional[float] = None
    area: Optional[float] = None
    _moves: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.generators:
            raise InvalidInputError("a group needs at least one generator")
        moves = []
        for g in self.generators:
            for m in (g, g.inverse()):
                if not any(m.close_to(x, 1e-12) for x in moves):
                    moves.append(m)
        object.__setattr__(self, "_moves", np.stack([m.entries for m in moves]))
        for rel in self.relation_products:
            if any(not (0 <= i < len(self.generators)) for i in rel):
                raise InvalidInputError(f"relation {rel} refers to a missing generator")

    @property
    def moves(self) -> np.ndarray:
        """Generators and their inverses, as a ``(k, 2, 2)`` array."""
        return self._moves

    def relation_errors(self) -> list:
        out = []
        for rel in self.relation_products:
            P = np.eye(2)
            for i in rel:
                P = P @ self.generators[i].entries
            out.append(float(frobenius_pm(P, np.eye(2))))
        return out

    def check(self, tol: float = 1e-9) -> bool:
        dets_ok = all(abs(g.det() - 1) < 1e-12 for g in self.generators)
        hyperbolic = all(g.trace() > 2 for g in self.generators)
        return dets_ok and hyperbolic and all(e <= tol for e in self.relation_errors())

    def to_json(self) -> dict:
        if self.preset_name:
            return {"preset": self.preset_name}
        return {
            "generators": [g.as_list() for g in self.generators],
            "relations": [list(r) for r in self.relation_products],
        }

    @classmethod
    def from_json(cls, data) -> "FuchsianGroup":
        if isinstance(data, str):
            data = json.loads(data)
        if "preset" in data:
            if set(data) != {"preset"}:
                raise InvalidInputError("preset groups take no other keys")
            if data["preset"] != "bolza":
                raise InvalidInputError(f"unknown preset {data['preset']!r}")
            return bolza()
        unknown = set(data) - {"generators", "relations"}
        if unknown:
            raise InvalidInputError(f"unknown keys in group JSON: {sorted(unknown)}")
        gens = tuple(MoebiusElement.from_list(g) for g in data.get("generators", ()))
        rels = tuple(tuple(int(i) for i in r) for r in data.get("relations", ()))
        return cls(gens, rels)


@lru_cache(maxsize=1)
def bolza() -> FuchsianGroup:
    """Genus-2 surface group of the regular octagon with opposite sides paired."""
    return FuchsianGroup(
        tuple(_bolza_generators()),
        (BOLZA_RELATION,),
        preset_name="bolza",
        covering_radius=BOLZA_CIRCUMRADIUS,
        area=BOLZA_AREA,
    )


def reduce_batch(m: np.ndarray, group: FuchsianGroup) -> np.ndarray:
    """Reduce a ``(..., 2, 2)`` stack; see :func:`reduce`."""
    m = np.array(m, dtype=float)
    shape = m.shape
    m = m.reshape(-1, 2, 2)
    moves = group.moves
    norms = sq_norm(m)
    active = np.arange(len(m))
    for _ in range(MAX_REDUCTION_STEPS):
        if active.size == 0:
            break
        cand = np.einsum("gij,njk->ngik", moves, m[active])
        cn = sq_norm(cand)
        best = np.argmin(cn, axis=1)
        best_n = cn[np.arange(len(active)), best]
        better = best_n < norms[active] * (1 - REDUCTION_RTOL)
        idx = active[better]
        m[idx] = cand[better, best[better]]
        norms[idx] = best_n[better]
        active = idx
    else:
        raise ReductionError(f"reduction did not terminate in {MAX_REDUCTION_STEPS} steps; check the generators")
    return renormalize(m).reshape(shape)


def reduce(m: MoebiusElement, group: Optional[FuchsianGroup] = None) -> MoebiusElement:
    """Coset representative whose base point is closest to ``i`` among greedy moves.

    Left-multiplies by generators and inverses while ``d(m·i, i)`` strictly
    decreases.  For a group given by the side pairings of its Dirichlet domain
    at ``i`` this lands in that domain.
    """
    group = group or bolza()
    return MoebiusElement(reduce_batch(m.entries, group))


# --- points and flows -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnitTangentPoint:
    rep: MoebiusElement
    scale_w: float = 1.0

    def __post_init__(self):
        if not (0.25 <= self.scale_w <= 4):
            raise InvalidInputError(f"scale_w must lie in [1/4, 4], got {self.scale_w}")

    @classmethod
    def at(cls, m, group: Optional[FuchsianGroup] = None, scale_w: float = 1.0) -> "UnitTangentPoint":
        if not isinstance(m, MoebiusElement):
            m = MoebiusElement(np.asarray(m, dtype=float))
        return cls(reduce(m, group), scale_w)

    def close_to(self, other: "UnitTangentPoint", tol: float = 1e-10) -> bool:
        return self.rep.close_to(other.rep, tol) and abs(self.scale_w - other.scale_w) <= tol

    def to_json(self) -> dict:
        return {"rep": self.rep.as_list(), "scale_w": self.scale_w}


def geodesic_flow(g: UnitTangentPoint, t: float, group: Optional[FuchsianGroup] = None) -> UnitTangentPoint:
    if not math.isfinite(t):
        raise InvalidInputError("t must be finite")
    return UnitTangentPoint(reduce(MoebiusElement(g.rep.entries @ a_t(t)), group), g.scale_w)


def horocycle_flow(g: UnitTangentPoint, s: float, direction, group: Optional[FuchsianGroup] = None) -> UnitTangentPoint:
    if not math.isfinite(s):
        raise InvalidInputError("s must be finite")
    m = g.rep.entries @ horocycle_matrix(s, direction)
    return UnitTangentPoint(reduce(MoebiusElement(m), group), g.scale_w)


def horocycle_orbit(g: UnitTangentPoint, s: np.ndarray, direction, group: Optional[FuchsianGroup] = None) -> np.ndarray:
    """Reduced representatives of ``g`` moved by each ``s``; horocycle and reduction commute."""
    group = group or bolza()
    return reduce_batch(g.rep.entries @ horocycle_matrix(np.asarray(s, dtype=float), direction), group)


# --- observables and averages -----------------------------------------------


def bump_profile(r, radius: float) -> np.ndarray:
    t = np.asarray(r, dtype=float) / radius
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1 - 1 / (1 - t[inside] ** 2))
    return out


@dataclass(frozen=True)
class Observable:
    """``f(g) = c + amplitude * ψ(d(reduce(g)·i, q·i) / radius)`` with a smooth bump ``ψ``."""

    amplitude: float = 1.0
    radius: float = 1.0
    center: tuple = (1.0, 0.0, 0.0, 1.0)
    constant: float = 0.0

    @classmethod
    def const(cls, c: float) -> "Observable":
        return cls(amplitude=0.0, constant=c)

    def __call__(self, reps: np.ndarray) -> np.ndarray:
        """Evaluate on reduced representatives (shape ``(..., 2, 2)``)."""
        reps = np.asarray(reps, dtype=float)
        if self.amplitude == 0:
            return np.full(reps.shape[:-2], float(self.constant))
        q_inv = MoebiusElement.from_list(self.center).inverse().entries
        d = distance_to_base(q_inv @ reps)
        return self.constant + self.amplitude * bump_profile(d, self.radius)

    def exact_mean(self, group: FuchsianGroup) -> float:
        """Liouville mean when the bump's support lies inside the Dirichlet domain."""
        if self.amplitude == 0:
            return float(self.constant)
        q = MoebiusElement.from_list(self.center)
        if group.area is None or group.preset_name != "bolza":
            raise InvalidInputError("exact mean is only available for the Bolza preset")
        if float(distance_to_base(q.entries)) + self.radius >= BOLZA_INRADIUS:
            raise InvalidInputError("bump support leaves the fundamental domain")
        val, _ = integrate.quad(lambda r: float(bump_profile(r, self.radius)) * math.sinh(r), 0, self.radius, epsabs=1e-13)
        return self.constant + self.amplitude * 2 * math.pi * val / group.area


def horocycle_average(
    f: Observable,
    g: UnitTangentPoint,
    T: float,
    n_steps: int,
    group: Optional[FuchsianGroup] = None,
    direction=Direction.STABLE,
) -> float:
    """Midpoint rule for ``(1/T) ∫_0^T f(g n⁺_s) ds``."""
    if not (T > 0):
        raise InvalidInputError("T must be > 0")
    if n_steps < 2:
        raise InvalidInputError("n_steps must be >= 2")
    s = (np.arange(n_steps) + 0.5) * (T / n_steps)
    return float(np.mean(f(horocycle_orbit(g, s, direction, group))))


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_samples: int
    acceptance: float

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n_samples": self.n_samples, "acceptance": self.acceptance}


def element_at(z: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``g`` with ``g·i = z`` followed by rotation by ``theta`` about ``i``."""
    x, y = np.real(z), np.imag(z)
    sy = np.sqrt(y)
    p = np.zeros(np.shape(z) + (2, 2))
    p[..., 0, 0] = sy
    p[..., 0, 1] = x / sy
    p[..., 1, 1] = 1 / sy
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    k = np.zeros(np.shape(theta) + (2, 2))
    k[..., 0, 0] = k[..., 1, 1] = c
    k[..., 0, 1] = -s
    k[..., 1, 0] = s
    return p @ k


def haar_in_domain(rng: np.random.Generator, n: int, group: FuchsianGroup) -> tuple[np.ndarray, float]:
    """Haar-uniform reduced elements, by rejection from a hyperbolic disc around ``i``.

    Returns the samples and the acceptance rate.
    """
    R = group.covering_radius
    if R is None:
        raise InvalidInputError("group has no covering radius; Liouville sampling needs one")
    out, drawn = [], 0
    need = n
    while need > 0:
        batch = max(2 * need + 64, 256)
        drawn += batch
        # area element sinh r dr dφ: invert the CDF of cosh r - 1
        r = np.arccosh(1 + rng.uniform(0, 1, batch) * (math.cosh(R) - 1))
        phi = rng.uniform(0, 2 * math.pi, batch)
        theta = rng.uniform(0, 2 * math.pi, batch)
        # disc point: rotate about i by phi after moving distance r up the imaginary axis
        z = 1j * np.exp(r)
        kphi = element_at(np.full(batch, 1j), phi)
        m = kphi @ element_at(z, np.zeros(batch)) @ element_at(np.full(batch, 1j), theta)
        red = reduce_batch(m, group)
        keep = frobenius_pm(red, renormalize(m)) < 1e-9
        got = red[keep][:need]
        out.append(got)
        need -= len(got)
    samples = np.concatenate(out)[:n]
    return samples, n / drawn


def liouville_average(f: Observable, n_samples: int, seed: int, group: Optional[FuchsianGroup] = None) -> MonteCarloEstimate:
    """Monte Carlo mean of ``f`` under normalised Liouville (Haar) measure, with standard error."""
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    group = group or bolza()
    rng = np.random.default_rng(seed)
    samples, acc = haar_in_domain(rng, n_samples, group)
    vals = f(samples)
    se = float(np.std(vals, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
    return MonteCarloEstimate(float(np.mean(vals)), se, n_samples, acc)


def random_points(n: int, seed: int, group: Optional[FuchsianGroup] = None) -> list:
    """``n`` Liouville-distributed points, one independent stream per point."""
    group = group or bolza()
    pts = []
    for child in np.random.SeedSequence(seed).spawn(n):
        m, _ = haar_in_domain(np.random.default_rng(child), 1, group)
        pts.append(UnitTangentPoint(MoebiusElement(m[0])))
    return pts


# --- balls, hitting times, witnesses ----------------------------------------


@dataclass(frozen=True)
class Ball:
    """Ball in the proxy metric ``max(Frobenius±, |log(w / w_c)|)`` between reduced representatives."""

    center: MoebiusElement
    radius: float
    scale_w: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidInputError("ball radius must be > 0")

    def distance(self, reps: np.ndarray, scale_w=1.0) -> np.ndarray:
        d = frobenius_pm(reps, self.center.entries)
        return np.maximum(d, np.abs(np.log(np.asarray(scale_w) / self.scale_w)))

    def shrink(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor, self.scale_w)

    def to_json(self) -> dict:
        return {"center": self.center.as_list(), "radius": self.radius, "scale_w": self.scale_w}


def hitting_time(
    ball: Ball,
    g: UnitTangentPoint,
    s_max: float,
    direction=Direction.STABLE,
    group: Optional[FuchsianGroup] = None,
    chunk: int = 512,
) -> Optional[float]:
    """Smallest sampled ``s`` in ``[0, s_max]`` whose orbit point lies in ``ball``, else ``None``.

    The step is ``radius / 16``: reduced representatives of the Bolza group
    have Frobenius norm below 3.5, so consecutive samples move less than a
    quarter radius.  The orbit is swept in chunks, each started from the
    reduced point at the end of the previous one so reductions stay short.
    """
    if not (s_max > 0):
        raise InvalidInputError("s_max must be > 0")
    group = group or bolza()
    step = ball.radius / 16
    n = int(math.floor(s_max / step)) + 1
    base = g.rep.entries
    offsets = np.arange(chunk) * step
    moves = horocycle_matrix(offsets, direction)
    for start in range(0, n, chunk):
        count = min(chunk, n - start)
        reps = reduce_batch(base @ moves[:count], group)
        hit = np.flatnonzero(ball.distance(reps, g.scale_w) < ball.radius)
        if hit.size:
            return float((start + hit[0]) * step)
        base = reduce_batch(base @ horocycle_matrix(chunk * step, direction), group)
    return None


@dataclass(frozen=True)
class SliceSpec:
    nu0: float
    nu1: float
    direction: Direction = Direction.UNSTABLE
    n_samples: int = 3

    def __post_init__(self):
        if self.nu0 <= 0 or self.nu1 <= 0:
            raise InvalidInputError("slice widths must be > 0")
        if self.n_samples < 1:
            raise InvalidInputError("n_samples must be >= 1")
        object.__setattr__(self, "direction", Direction(self.direction))


def slice_samples(g: np.ndarray, spec: SliceSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid samples ``g exp(v1 H + v3 E) n_s`` and scales ``e^{v2}``.

    ``s`` runs along the slice direction over ``[-nu0, nu0]``; ``v`` over
    ``[-nu1, nu1]^3``.  ``E`` is the horocycle generator of the opposite
    direction.  Returns ``(matrices, scales, v3)``.
    """
    axis = np.linspace(-1, 1, spec.n_samples) if spec.n_samples > 1 else np.zeros(1)
    s, v1, v2, v3 = np.meshgrid(axis * spec.nu0, axis * spec.nu1, axis * spec.nu1, axis * spec.nu1, indexing="ij")
    s, v1, v2, v3 = (a.ravel() for a in (s, v1, v2, v3))
    unstable = spec.direction is Direction.UNSTABLE
    gen = np.zeros((len(s), 2, 2))
    gen[:, 0, 0] = v1 / 2
    gen[:, 1, 1] = -v1 / 2
    if unstable:
        gen[:, 0, 1] = v3
    else:
        gen[:, 1, 0] = v3
    ex = np.stack([expm(x) for x in gen])
    along = n_minus(s) if unstable else n_plus(s)
    return g @ ex @ along, np.exp(v2), v3


def flow_exponent(tau: float, T: float) -> int:
    """The integer ``j`` with ``e^{j-1} tau < T <= e^j tau``."""
    if not (tau > 0 and T > 0):
        raise InvalidInputError("tau and T must be > 0")
    j = math.ceil(math.log(T / tau))
    while math.exp(j - 1) * tau >= T:
        j -= 1
    while math.exp(j) * tau < T:
        j += 1
    return j


@dataclass(frozen=True)
class WitnessRecord:
    s0: float
    j: int
    w: int
    s_w: float
    verified: bool
    max_distance: float
    n_samples: int

    def to_json(self) -> dict:
        return {
            "s0": self.s0,
            "j": self.j,
            "w": self.w,
            "s_w": self.s_w,
            "verified": self.verified,
            "max_distance": self.max_distance,
            "n_samples": self.n_samples,
        }


def porosity_witness(
    avoid: Sequence[Ball],
    g: UnitTangentPoint,
    tau: float,
    T: float,
    slice_spec: SliceSpec,
    group: Optional[FuchsianGroup] = None,
    inner: float = 0.8,
) -> WitnessRecord:
    """Find ``s0 in [0, tau]`` whose thin unstable slice is carried into a target ball by ``φ_j``.

    ``j`` solves ``e^{j-1} tau < T <= e^j tau``.  At ``φ_j(g)`` the unstable
    horocycle enters the ball ``U_w`` shrunk by ``inner`` after time ``s_w``
    (the earliest over ``w``); pulling back gives ``s0 = e^{-j} s_w``.  The
    slice of half-width ``ε0 τ`` (``ε0 = nu1 / (3T)``) and thickness ``nu1``
    around ``g n⁻_{s0}`` is pushed forward by ``a_j``; the witness is
    verified when every sample lands in ``U_w``.
    """
    group = group or bolza()
    if not (3 * T * TAU_FLOOR <= tau <= 1):
        raise InvalidInputError(f"tau must lie in [3T 2^-20, 1], got {tau}")
    if not (0 < inner <= 1):
        raise InvalidInputError("inner must lie in (0, 1]")
    j = flow_exponent(tau, T)
    p = geodesic_flow(g, j, group)
    hits = [hitting_time(b.shrink(inner), p, T, Direction.UNSTABLE, group) for b in avoid]
    found = [(s, w) for w, s in enumerate(hits, start=1) if s is not None]
    if not found:
        raise WitnessError(f"no target ball reached within T={T}; T is too small for this point")
    s_w, w = min(found)
    s0 = math.exp(-j) * s_w
    eps0 = slice_spec.nu1 / (3 * T)
    spec = SliceSpec(eps0 * tau, slice_spec.nu1, Direction.UNSTABLE, slice_spec.n_samples)
    base = g.rep.entries @ n_minus(s0)
    mats, scales, _ = slice_samples(base, spec)
    pushed = reduce_batch(mats @ a_t(j), group)
    dist = avoid[w - 1].distance(pushed, g.scale_w * scales)
    return WitnessRecord(
        s0=s0,
        j=j,
        w=w,
        s_w=s_w,
        verified=bool(np.all(dist < avoid[w - 1].radius)),
        max_distance=float(dist.max()),
        n_samples=len(dist),
    )


def default_targets(radius: float = 0.3) -> tuple:
    """Two separated balls: one at the identity, one 0.7 from ``i`` turned by π/3."""
    far = element_at(np.array(1j * math.exp(0.7)), np.array(math.pi / 3))
    return (Ball(IDENTITY, radius), Ball(MoebiusElement(far), radius))
