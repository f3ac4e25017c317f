"""Discretised oscillatory integral operators and their masked norms.

The operator ``Bf(x) = h^{-1/2} ∫ exp(iΦ(x, y)/h) b(x, y) f(y) dy`` is sampled
with the midpoint rule on uniform grids.  Two phases are supported:

* ``fourier``: ``Φ(x, y) = x y`` on two windows (default ``[0, 1]``);
* ``hyperbolic``: ``Φ(y, y') = 2w log|y - y'| - w log 4`` on the unit
  circle ``R / Z`` with chordal distance, with the amplitude cut off near
  the diagonal.

Matrices up to ``DENSE_CAP`` are materialised entry by entry.  Larger
operators are applied matrix-free: the Fourier phase is a chirp (Bluestein)
convolution and the hyperbolic kernel is circulant, so both run through FFTs.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.sparse.linalg import LinearOperator

from .errors import ConvergenceError, InvalidInputError, ResourceError
from .interval_sets import UNIT, Interval, IntervalSet, neighborhood, normalize, porosity_check

DEFAULT_DIM_CAP = 2**17
DENSE_CAP = 2**12
MIN_OVERSAMPLE = 8

PHASES = ("fourier", "hyperbolic")


def bump(t):
    """``exp(1 - 1/(1 - t^2))`` on ``|t| < 1``, zero outside; peak value 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1 - 1 / (1 - t[inside] ** 2))
    return out


def smooth_ramp(t):
    """0 for ``t <= 0``, 1 for ``t >= 1``, smooth in between."""
    t = np.asarray(t, dtype=float)
    a = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
    s = 1 - t
    b = np.where(s > 0, np.exp(-1 / np.where(s > 0, s, 1)), 0.0)
    return a / (a + b)


def window_bump(x, window: Interval):
    c = 0.5 * (window.lo + window.hi)
    return bump(2 * (np.asarray(x) - c) / window.length)


def chordal(d):
    """Euclidean distance between ``exp(2πi y)`` and ``exp(2πi y')`` for ``d = y - y'``."""
    return 2 * np.abs(np.sin(np.pi * np.asarray(d)))


@dataclass(frozen=True)
class KernelSpec:
    phase: str = "fourier"
    w: float = 1.0
    d_min: float = 0.0
    x_window: Interval = UNIT
    y_window: Interval = UNIT
    amplitude: float = 1.0

    def __post_init__(self):
        if self.phase not in PHASES:
            raise InvalidInputError(f"unknown phase {self.phase!r}; expected one of {PHASES}")
        if not (0 <= self.amplitude <= 1):
            raise InvalidInputError("amplitude scale must lie in [0, 1]")
        if self.d_min < 0:
            raise InvalidInputError("d_min must be >= 0")
        if self.phase == "hyperbolic":
            if self.d_min <= 0:
                raise InvalidInputError("invalid spec: hyperbolic phase needs d_min > 0")
            if self.w == 0:
                raise InvalidInputError("invalid spec: hyperbolic phase needs w != 0")
            if self.x_window != UNIT or self.y_window != UNIT:
                raise InvalidInputError("invalid spec: hyperbolic phase lives on the unit circle")

    def to_json(self) -> dict:
        return {
            "phase": self.phase,
            "w": self.w,
            "d_min": self.d_min,
            "x_window": self.x_window.as_list(),
            "y_window": self.y_window.as_list(),
            "amplitude": self.amplitude,
        }

    @classmethod
    def from_json(cls, data: dict) -> "KernelSpec":
        unknown = set(data) - {"phase", "w", "d_min", "x_window", "y_window", "amplitude"}
        if unknown:
            raise InvalidInputError(f"unknown keys in kernel spec: {sorted(unknown)}")
        kw = dict(data)
        for key in ("x_window", "y_window"):
            if key in kw:
                kw[key] = Interval(*map(float, kw[key]))
        return cls(**kw)

    def phase_values(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.phase == "fourier":
            return x * y
        c = chordal(x - y)
        with np.errstate(divide="ignore"):
            return 2 * self.w * np.log(c) - self.w * math.log(4)

    def amplitude_values(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        b = self.amplitude * window_bump(x, self.x_window) * window_bump(y, self.y_window)
        if self.d_min > 0:
            c = chordal(x - y) if self.phase == "hyperbolic" else np.abs(x - y)
            b = b * smooth_ramp((c - self.d_min) / self.d_min)
        return b

    @property
    def sup_amplitude(self) -> float:
        return self.amplitude


def _chirp_fft(gamma: float, n_out: int, n_in: int) -> np.ndarray:
    """FFT of ``c_k = exp(-i gamma k^2 / 2)`` for ``k = -(n_in-1) .. n_out-1``, wrapped for convolution."""
    size = sfft.next_fast_len(n_out + n_in - 1)
    kern = np.zeros(size, dtype=complex)
    k_pos = np.arange(n_out, dtype=float)
    k_neg = np.arange(1, n_in, dtype=float)
    kern[:n_out] = np.exp(-0.5j * gamma * k_pos**2)
    if n_in > 1:
        kern[size - (n_in - 1):] = np.exp(-0.5j * gamma * k_neg[::-1] ** 2)
    return sfft.fft(kern)


def _toeplitz_apply(kf: np.ndarray, v: np.ndarray, n_out: int) -> np.ndarray:
    buf = np.zeros(len(kf), dtype=complex)
    buf[: len(v)] = v
    return sfft.ifft(sfft.fft(buf) * kf)[:n_out]


def midpoint_grid(window: Interval, n: int) -> np.ndarray:
    step = window.length / n
    return window.lo + step * (np.arange(n) + 0.5)


@dataclass
class DiscretizedOperator:
    """Entry ``(i, j)`` is ``Δ h^{-1/2} exp(iΦ(x_i, y_j)/h) b(x_i, y_j)``.

    ``Δ`` is the common grid step, so the matrix 2-norm approximates the
    ``L^2 -> L^2`` norm.
    """

    spec: KernelSpec
    h: float
    oversample: int
    x: np.ndarray
    y: np.ndarray
    delta: float
    warnings: list = field(default_factory=list)
    _fast: Optional[tuple] = field(default=None, repr=False)

    @property
    def shape(self) -> tuple:
        return (len(self.x), len(self.y))

    @property
    def prefactor(self) -> float:
        return self.delta / math.sqrt(self.h)

    def dense(self, rows=None, cols=None) -> np.ndarray:
        """Materialise the matrix (optionally a row/column subset) from the formula."""
        x = self.x if rows is None else self.x[rows]
        y = self.y if cols is None else self.y[cols]
        if len(x) * len(y) > DENSE_CAP**2:
            raise ResourceError(f"dense {len(x)}x{len(y)} matrix exceeds the cap {DENSE_CAP}^2")
        X, Y = np.meshgrid(x, y, indexing="ij")
        b = self.spec.amplitude_values(X, Y)
        phase = np.where(b > 0, self.spec.phase_values(X, Y), 0.0)
        return self.prefactor * b * np.exp(1j * phase / self.h)

    # matrix-free application -------------------------------------------------

    def _prepare(self):
        if self._fast is not None:
            return self._fast
        spec, h = self.spec, self.h
        bx = spec.amplitude * window_bump(self.x, spec.x_window)
        by = window_bump(self.y, spec.y_window)
        nx, ny = self.shape
        if spec.phase == "fourier":
            dx = self.x[1] - self.x[0] if nx > 1 else spec.x_window.length
            dy = self.y[1] - self.y[0] if ny > 1 else spec.y_window.length
            x0, y0 = self.x[0], self.y[0]
            gamma = dx * dy / h
            i = np.arange(nx)
            j = np.arange(ny)
            # x_i y_j = x0 y0 + x0 j dy + y0 i dx + i j dx dy, and i j = (i^2 + j^2 - (i-j)^2) / 2
            row = np.exp(1j * (x0 * y0 / h + y0 * dx * i / h + gamma * i**2 / 2)) * bx
            col = np.exp(1j * (x0 * dy * j / h + gamma * j**2 / 2)) * by
            self._fast = ("toeplitz", row, col, _chirp_fft(gamma, nx, ny), _chirp_fft(gamma, ny, nx))
        else:
            n = nx
            d = np.arange(n) * self.delta
            c = chordal(d)
            cut = smooth_ramp((c - spec.d_min) / spec.d_min)
            with np.errstate(divide="ignore"):
                phase = np.where(cut > 0, (2 * spec.w * np.log(c) - spec.w * math.log(4)) / h, 0.0)
            kern = cut * np.exp(1j * phase)
            self._fast = ("circulant", bx, by, sfft.fft(kern), None)
        return self._fast

    def matvec(self, v: np.ndarray) -> np.ndarray:
        kind, row, col, kf, kf_t = self._prepare()
        v = np.asarray(v, dtype=complex)
        if kind == "toeplitz":
            return self.prefactor * row * _toeplitz_apply(kf, col * v, self.shape[0])
        return self.prefactor * row * sfft.ifft(sfft.fft(col * v) * kf)

    def rmatvec(self, u: np.ndarray) -> np.ndarray:
        """Apply the conjugate transpose."""
        kind, row, col, kf, kf_t = self._prepare()
        u = np.asarray(u, dtype=complex)
        z = np.conj(row * np.conj(u))
        if kind == "toeplitz":
            # the chirp kernel is even, so T^T is the same convolution with the shape swapped
            return self.prefactor * np.conj(col) * np.conj(_toeplitz_apply(kf_t, np.conj(z), self.shape[1]))
        return self.prefactor * np.conj(col) * sfft.ifft(sfft.fft(z) * np.conj(kf))

    def linear_operator(self, row_mask=None, col_mask=None) -> LinearOperator:
        nx, ny = self.shape
        rm = np.ones(nx) if row_mask is None else np.asarray(row_mask, dtype=float)
        cm = np.ones(ny) if col_mask is None else np.asarray(col_mask, dtype=float)
        return LinearOperator(
            (nx, ny),
            matvec=lambda v: rm * self.matvec(cm * np.ravel(v)),
            rmatvec=lambda u: cm * self.rmatvec(rm * np.ravel(u)),
            dtype=complex,
        )


def grid_size(window: Interval, h: float, oversample: int) -> int:
    return int(math.ceil(window.length * oversample / h - 1e-9))


def build_operator(spec: KernelSpec, h: float, oversample: int = MIN_OVERSAMPLE, dim_cap: int = DEFAULT_DIM_CAP) -> DiscretizedOperator:
    """Midpoint-rule discretisation with step ``<= h / oversample``."""
    if not (0 < h < 1):
        raise InvalidInputError(f"h must lie in (0, 1), got {h}")
    if oversample < 1:
        raise InvalidInputError("oversample must be >= 1")
    nx = grid_size(spec.x_window, h, oversample)
    ny = grid_size(spec.y_window, h, oversample)
    if spec.phase == "hyperbolic":
        ny = nx
    if max(nx, ny) > dim_cap:
        raise ResourceError(f"grid dimension {max(nx, ny)} exceeds cap {dim_cap} (h={h}, oversample={oversample})")
    x = midpoint_grid(spec.x_window, nx)
    y = midpoint_grid(spec.y_window, ny)
    # equal steps keep the Δ weighting symmetric
    delta = spec.x_window.length / nx
    if spec.phase == "fourier" and not math.isclose(delta, spec.y_window.length / ny, rel_tol=1e-12):
        ny = int(round(spec.y_window.length / delta))
        y = midpoint_grid(spec.y_window, ny)
        if not math.isclose(delta, spec.y_window.length / ny, rel_tol=1e-9):
            raise InvalidInputError("x and y windows must have commensurate lengths")
    return DiscretizedOperator(spec, h, oversample, x, y, delta)


def fit_oversample(spec: KernelSpec, h: float, oversample: int, dim_cap: int) -> tuple[int, Optional[str]]:
    """Largest oversample ``<= oversample`` whose grid fits under ``dim_cap``."""
    length = max(spec.x_window.length, spec.y_window.length)
    if grid_size(Interval(0, length), h, oversample) <= dim_cap:
        return oversample, None
    reduced = int(math.floor(dim_cap * h / length))
    if reduced < 1:
        raise ResourceError(f"h={h} cannot be resolved under dimension cap {dim_cap}")
    return reduced, f"oversample reduced from {oversample} to {reduced} at h={h} (dimension cap {dim_cap})"


NORM_METHODS = ("power", "lanczos")


def operator_norm(A, tol: float = 1e-12, max_iter: int = 10_000, seed: int = 0, method: str = "power") -> float:
    """Largest singular value of ``A``.

    ``A`` is a dense array or anything with ``matvec``/``rmatvec``.  The
    default ``power`` method iterates ``A^* A`` until successive estimates
    ``|A v|`` agree to relative ``tol``.  ``lanczos`` hands the same operator
    to ARPACK (``scipy.sparse.linalg.svds``) with a seeded start vector; it
    needs far fewer products when the top singular values cluster.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be > 0")
    if method not in NORM_METHODS:
        raise InvalidInputError(f"unknown norm method {method!r}; expected one of {NORM_METHODS}")
    if method == "lanczos":
        return _lanczos_norm(A, tol, max_iter, seed)
    if isinstance(A, np.ndarray):
        mat = A
        fwd, adj = mat.__matmul__, lambda u: mat.conj().T @ u
        n = mat.shape[1]
    else:
        fwd, adj = A.matvec, A.rmatvec
        n = A.shape[1]
    if n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    residual = math.inf
    for _ in range(max_iter):
        Av = np.ravel(fwd(v))
        new = float(np.linalg.norm(Av))
        if new == 0.0:
            # v may have landed in the kernel; one fresh start before declaring zero
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            v /= np.linalg.norm(v)
            Av = np.ravel(fwd(v))
            if np.linalg.norm(Av) == 0.0:
                return 0.0
            new = float(np.linalg.norm(Av))
        w = np.ravel(adj(Av))
        wn = float(np.linalg.norm(w))
        residual = float(np.linalg.norm(w - new**2 * v)) / new**2
        if abs(new - sigma) <= tol * new:
            return new
        sigma = new
        v = w / wn
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps (residual {residual:.3e})", residual)


def _lanczos_norm(A, tol: float, max_iter: int, seed: int) -> float:
    from scipy.sparse.linalg import ArpackNoConvergence, aslinearoperator, svds

    shape = A.shape
    if min(shape) == 0:
        return 0.0
    if min(shape) <= 2:
        dense = A if isinstance(A, np.ndarray) else A.matmat(np.eye(shape[1], dtype=complex))
        return dense_norm(dense)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(min(shape)) + 0j
    try:
        s = svds(aslinearoperator(A), k=1, tol=tol, maxiter=max_iter, v0=v0, return_singular_vectors=False)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"Lanczos did not converge: {exc}") from exc
    return float(s[0])


def dense_norm(A: np.ndarray) -> float:
    """Reference value: largest singular value from a full SVD."""
    return float(np.linalg.svd(A, compute_uv=False)[0]) if A.size else 0.0


@dataclass
class MaskedOperator:
    op: DiscretizedOperator
    X_mask: np.ndarray
    Y_mask: np.ndarray
    rho: float

    def dense(self) -> np.ndarray:
        A = self.op.dense()
        return A * self.X_mask[:, None] * self.Y_mask[None, :]

    def linear_operator(self) -> LinearOperator:
        return self.op.linear_operator(self.X_mask, self.Y_mask)

    def norm(self, tol: float = 1e-10, seed: int = 0, method: str = "power") -> float:
        if not self.X_mask.any() or not self.Y_mask.any():
            return 0.0
        rows, cols = np.flatnonzero(self.X_mask), np.flatnonzero(self.Y_mask)
        if len(rows) * len(cols) <= 1024**2:
            return operator_norm(self.op.dense(rows, cols), tol=tol, seed=seed, method=method)
        return operator_norm(self.linear_operator(), tol=tol, seed=seed, method=method)

    def volume_bound(self) -> float:
        """``h^{-1/2} sup|b| sqrt(|X(h^ρ)| |Y(h^ρ)|)``, measured on the grid."""
        d = self.op.delta
        return self.op.spec.sup_amplitude * math.sqrt(self.X_mask.sum() * d * self.Y_mask.sum() * d / self.op.h)


def mask(op: DiscretizedOperator, X: IntervalSet, Y: IntervalSet, rho: float, scale: float = 1.0) -> MaskedOperator:
    """Keep rows in ``X(scale h^ρ)`` and columns in ``Y(scale h^ρ)``."""
    if not (0 < rho < 1):
        raise InvalidInputError(f"rho must lie in (0, 1), got {rho}")
    s = scale * op.h**rho
    return MaskedOperator(
        op,
        neighborhood(X, s).contains_points(op.x),
        neighborhood(Y, s).contains_points(op.y),
        rho,
    )


@dataclass(frozen=True)
class DecayFit:
    points: tuple
    beta: float
    intercept: float
    r_squared: float
    beta_stderr: float
    excluded: int = 0

    @property
    def C(self) -> float:
        return math.exp(self.intercept)

    def to_json(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "beta": self.beta,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "beta_stderr": self.beta_stderr,
            "excluded": self.excluded,
        }


def fit_beta(points: Sequence) -> DecayFit:
    """Least squares for ``log(norm) = intercept + beta log(h)``; zero norms are dropped."""
    pts = [(float(h), float(v)) for h, v in points]
    usable = [(h, v) for h, v in pts if v > 0 and h > 0]
    if len(usable) < 3:
        raise InvalidInputError(f"need at least 3 positive norms to fit, got {len(usable)}")
    lh = np.log([p[0] for p in usable])
    ln = np.log([p[1] for p in usable])
    A = np.column_stack((np.ones_like(lh), lh))
    coef, *_ = np.linalg.lstsq(A, ln, rcond=None)
    resid = ln - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((ln - ln.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-300 else (1.0 if ss_res <= 1e-24 else 0.0)
    dof = len(usable) - 2
    sxx = float(((lh - lh.mean()) ** 2).sum())
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 and sxx > 0 else 0.0
    return DecayFit(
        points=tuple(pts),
        beta=float(coef[1]),
        intercept=float(coef[0]),
        r_squared=min(max(r2, 0.0), 1.0),
        beta_stderr=stderr,
        excluded=len(pts) - len(usable),
    )


@dataclass
class ExperimentResult:
    fit: DecayFit
    rows: list
    warnings: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["h", "rho", "dim", "norm_masked", "norm_unmasked", "oversample"])
        for r in self.rows:
            writer.writerow([repr(r["h"]), repr(r["rho"]), r["dim"], repr(r["norm_masked"]), repr(r["norm_unmasked"]), r["oversample"]])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"fit": self.fit.to_json(), "rows": self.rows, "warnings": self.warnings}


def default_h_list() -> list:
    return [2.0**-k for k in range(6, 15)]


def regular_cover(tree, s: float) -> IntervalSet:
    """Outer approximation of ``X(s)`` for the limit set of ``tree``.

    Kept intervals at a level with ``L^-k <= s / 16`` each meet ``X`` and
    are covered by it up to ``L^-k``, so their ``s``-neighborhood contains
    ``X(s)`` and lies inside ``X(s + L^-k)``.
    """
    k = max(tree.k0 + 1, int(math.ceil(math.log(16 / s) / math.log(tree.L))))
    return tree.intervals(k)


def fup_experiment(
    omega_plus: IntervalSet,
    omega_minus: IntervalSet,
    nu: float,
    spec: KernelSpec,
    rho: float,
    h_list: Optional[Sequence[float]] = None,
    mode: str = "raw",
    oversample: int = MIN_OVERSAMPLE,
    dim_cap: int = DEFAULT_DIM_CAP,
    tol: float = 1e-9,
    threads: int = 1,
    seed: int = 0,
    norm_method: str = "lanczos",
) -> ExperimentResult:
    """Masked norms over a sweep of ``h`` and the fitted decay exponent.

    Rows are masked by ``Omega_-`` neighborhoods and columns by ``Omega_+``
    neighborhoods of radius ``h^ρ``.  In ``embedded`` mode both sets are first
    embedded in regular Cantor sets ``X ⊇ Omega_-``, ``Y ⊇ Omega_+`` and the
    masks become ``X(2h^ρ)`` and ``Y(2h^ρ)``.
    """
    from .regular_sets import embed_porous

    if mode not in ("raw", "embedded"):
        raise InvalidInputError(f"mode must be 'raw' or 'embedded', got {mode!r}")
    if not (0 < rho < 1):
        raise InvalidInputError(f"rho must lie in (0, 1), got {rho}")
    hs = list(default_h_list() if h_list is None else h_list)
    if any(not (0 < h < 1) for h in hs):
        raise InvalidInputError("every h must lie in (0, 1)")

    if mode == "embedded":
        alpha0 = min(hs) ** rho
        for name, om in (("Omega_+", omega_plus), ("Omega_-", omega_minus)):
            if not porosity_check(om, nu, alpha0, 1.0).certified:
                from .errors import ConstructionError

                raise ConstructionError(f"embed_porous: {name} is not {nu}-porous on scales {alpha0:.3g} to 1")
        tx, ty = embed_porous(omega_minus, nu, alpha0), embed_porous(omega_plus, nu, alpha0)

    def one(idx_h):
        idx, h = idx_h
        over, note = fit_oversample(spec, h, oversample, dim_cap)
        op = build_operator(spec, h, over, dim_cap)
        if mode == "raw":
            m = mask(op, omega_minus, omega_plus, rho)
        else:
            s = 2 * h**rho
            m = mask(op, regular_cover(tx, s), regular_cover(ty, s), rho, scale=2.0)
        masked = m.norm(tol=tol, seed=seed + idx, method=norm_method)
        full = MaskedOperator(op, np.ones(op.shape[0], bool), np.ones(op.shape[1], bool), rho)
        unmasked = masked if (m.X_mask.all() and m.Y_mask.all()) else full.norm(tol=tol, seed=seed + idx, method=norm_method)
        row = {
            "h": h,
            "rho": rho,
            "dim": int(max(op.shape)),
            "norm_masked": masked,
            "norm_unmasked": unmasked,
            "oversample": over,
        }
        return row, note

    jobs = list(enumerate(hs))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    rows = [r for r, _ in results]
    notes = [n for _, n in results if n]
    for n in notes:
        warnings.warn(n, RuntimeWarning, stacklevel=2)
    fit = fit_beta([(r["h"], r["norm_masked"]) for r in rows])
    return ExperimentResult(fit, rows, notes)
