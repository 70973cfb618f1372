"""Sampled vector-valued paths on time grids.

A path is a function of time with values in R^d, stored on a finite strictly
increasing grid together with an interpolation rule and a policy for
evaluation beyond the grid.  Paths carry solutions, base points, forcing data
and envelope profiles; everything downstream (quadrature sweeps, certificate
audits, diagnostics) consumes them through ``evaluate``.

All paths are immutable after construction and evaluation is pure, so they
can be shared freely across workers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

FULL_LINE = "full_line"
HALF_LINE = "half_line"

TAIL_CONSTANT = "constant"
TAIL_DECAY = "decay_to_anchor"
TAIL_ERROR = "error"

_TAIL_POLICIES = (TAIL_CONSTANT, TAIL_DECAY, TAIL_ERROR)
_INTERPOLATIONS = ("linear", "cubic")

# decay rate used by the decay_to_anchor tail (anchor is zero)
_TAIL_DECAY_RATE = 1.0


class DomainEscapeError(ValueError):
    """Evaluation was requested outside the evaluable domain of a path."""


@dataclass(frozen=True)
class SampledPath:
    """A function R -> R^d (or R+ -> R^d) sampled on a strictly increasing grid.

    values has shape (n, d).  Evaluation at a grid node reproduces the stored
    value bit-exactly; between nodes the declared interpolation rule is used;
    beyond the grid the tail policy decides:

    * ``constant``        clamp to the nearest edge value,
    * ``decay_to_anchor`` edge value times exp(-|t - edge|), decaying to zero,
    * ``error``           allow up to one grid step beyond each edge (clamped),
                          raise DomainEscapeError farther out.
    """

    grid: np.ndarray
    values: np.ndarray
    domain_kind: str = FULL_LINE
    interpolation: str = "cubic"
    tail_policy: str = TAIL_ERROR

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if grid.size == 0:
            raise ValueError("path grid is empty")
        if values.shape[0] != grid.size:
            raise ValueError(
                f"grid has {grid.size} nodes but values has {values.shape[0]} rows")
        if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
            raise ValueError("path grid must be strictly increasing")
        if not np.all(np.isfinite(grid)):
            raise ValueError("path grid contains non-finite times")
        if not np.all(np.isfinite(values)):
            raise ValueError("path values contain non-finite entries")
        if self.domain_kind not in (FULL_LINE, HALF_LINE):
            raise ValueError(f"unknown domain_kind {self.domain_kind!r}")
        if self.interpolation not in _INTERPOLATIONS:
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.tail_policy not in _TAIL_POLICIES:
            raise ValueError(f"unknown tail_policy {self.tail_policy!r}")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    # -- basic geometry ----------------------------------------------------

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.grid.size

    @property
    def t_min(self) -> float:
        return float(self.grid[0])

    @property
    def t_max(self) -> float:
        return float(self.grid[-1])

    @cached_property
    def _spline(self):
        if self.n_nodes == 1:
            return None
        if self.interpolation == "cubic" and self.n_nodes >= 4:
            return CubicSpline(self.grid, self.values, axis=0)
        return None  # linear fallback handled in evaluate

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, t) -> np.ndarray:
        """Value of the path at time(s) t; shape (d,) for scalar t, (m, d) else."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        tt = np.atleast_1d(t_arr).ravel()
        lo, hi = self.grid[0], self.grid[-1]

        below = tt < lo
        above = tt > hi
        if (below.any() or above.any()) and self.tail_policy == TAIL_ERROR:
            step_lo = self.grid[1] - self.grid[0] if self.n_nodes > 1 else 0.0
            step_hi = self.grid[-1] - self.grid[-2] if self.n_nodes > 1 else 0.0
            if np.any(tt < lo - step_lo) or np.any(tt > hi + step_hi):
                worst = tt[np.argmax(np.maximum(lo - tt, tt - hi))]
                raise DomainEscapeError(
                    f"time {worst:g} escapes path domain [{lo:g}, {hi:g}] "
                    f"by more than one grid step")

        tc = np.clip(tt, lo, hi)
        if self.n_nodes == 1:
            out = np.broadcast_to(self.values[0], (tt.size, self.dim)).copy()
        elif self._spline is not None:
            out = self._spline(tc)
        else:
            out = np.empty((tt.size, self.dim))
            for j in range(self.dim):
                out[:, j] = np.interp(tc, self.grid, self.values[:, j])

        # bit-exact reproduction of stored values at grid nodes
        pos = np.searchsorted(self.grid, tc)
        pos = np.clip(pos, 0, self.n_nodes - 1)
        exact = self.grid[pos] == tc
        if exact.any():
            out[exact] = self.values[pos[exact]]

        if self.tail_policy == TAIL_DECAY:
            if above.any():
                out[above] *= np.exp(-_TAIL_DECAY_RATE * (tt[above] - hi))[:, None]
            if below.any():
                out[below] *= np.exp(-_TAIL_DECAY_RATE * (lo - tt[below]))[:, None]

        if scalar:
            return out[0]
        return out.reshape(t_arr.shape + (self.dim,)) if t_arr.ndim > 1 else out

    __call__ = evaluate

    # -- simple algebra on a shared grid -------------------------------------

    def with_values(self, values: np.ndarray) -> "SampledPath":
        return replace(self, values=np.asarray(values, dtype=float))

    def restrict(self, t_lo: float, t_hi: float) -> "SampledPath":
        """Sub-path on the grid nodes inside [t_lo, t_hi]."""
        mask = (self.grid >= t_lo) & (self.grid <= t_hi)
        if not mask.any():
            raise ValueError("restriction window contains no grid nodes")
        return replace(self, grid=self.grid[mask], values=self.values[mask])


def from_function(func: Callable, grid, **kwargs) -> SampledPath:
    """Sample a vectorized callable on a grid.  func(t_array) -> (n,) or (n, d)."""
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(func(grid), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape[0] != grid.size:
        raise ValueError("sampled values have unexpected shape")
    return SampledPath(grid, vals, **kwargs)


def zero_path(grid, dim: int = 1, **kwargs) -> SampledPath:
    grid = np.asarray(grid, dtype=float)
    return SampledPath(grid, np.zeros((grid.size, dim)), **kwargs)


# ---------------------------------------------------------------------------
# norms


def sup_norm(p: SampledPath) -> float:
    """Largest Euclidean norm of the sampled values (uniform norm on the grid)."""
    return float(np.max(np.linalg.norm(p.values, axis=1)))


def path_add(p: SampledPath, q: SampledPath) -> SampledPath:
    if p.grid.shape != q.grid.shape or not np.array_equal(p.grid, q.grid):
        raise ValueError("paths must share a grid")
    return p.with_values(p.values + q.values)


def path_sub(p: SampledPath, q: SampledPath) -> SampledPath:
    if p.grid.shape != q.grid.shape or not np.array_equal(p.grid, q.grid):
        raise ValueError("paths must share a grid")
    return p.with_values(p.values - q.values)


def path_scale(p: SampledPath, alpha: float) -> SampledPath:
    return p.with_values(alpha * p.values)


def sup_distance(p: SampledPath, q: SampledPath) -> float:
    if not np.array_equal(p.grid, q.grid):
        raise ValueError("paths must share a grid")
    return float(np.max(np.linalg.norm(p.values - q.values, axis=1)))


# ---------------------------------------------------------------------------
# time warps


@dataclass(frozen=True)
class TimeWarp:
    """Reparametrisation of time t -> a(t).

    Kinds: ``identity``; ``shift`` with a(t) = t + tau (a pure delay is a
    negative tau); ``tabulated`` with a(t) interpolated linearly from a table.
    ``declared_aa`` records whether compositions with this warp are declared
    to stay in the recurrent function classes the certificates require.
    """

    kind: str = "identity"
    tau: float = 0.0
    table_t: Optional[np.ndarray] = None
    table_a: Optional[np.ndarray] = None
    declared_aa: bool = True

    def __post_init__(self):
        if self.kind not in ("identity", "shift", "tabulated"):
            raise ValueError(f"unknown warp kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.table_t is None or self.table_a is None:
                raise ValueError("tabulated warp needs table_t and table_a")
            tt = np.asarray(self.table_t, dtype=float)
            aa = np.asarray(self.table_a, dtype=float)
            if tt.size != aa.size or tt.size < 2 or not np.all(np.diff(tt) > 0):
                raise ValueError("warp table must be strictly increasing and matched")
            object.__setattr__(self, "table_t", tt)
            object.__setattr__(self, "table_a", aa)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "identity":
            return t.copy() if t.ndim else float(t)
        if self.kind == "shift":
            return t + self.tau
        out = np.interp(t, self.table_t, self.table_a)
        return out if t.ndim else float(out)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity" or (self.kind == "shift" and self.tau == 0.0)

    def reach(self, t_lo: float, t_hi: float) -> tuple:
        """Image interval of [t_lo, t_hi] (monotone table assumed for tabulated)."""
        if self.kind == "identity":
            return (t_lo, t_hi)
        if self.kind == "shift":
            return (t_lo + self.tau, t_hi + self.tau)
        vals = self(np.linspace(t_lo, t_hi, 257))
        return (float(np.min(vals)), float(np.max(vals)))


identity_warp = TimeWarp("identity")


def shift_warp(tau: float) -> TimeWarp:
    return TimeWarp("shift", tau=tau)


def warp_compose(p: SampledPath, warp: TimeWarp, out_grid=None) -> SampledPath:
    """Path q with q(t) = p(a(t)) sampled on out_grid (default: p's grid)."""
    if warp.is_identity and out_grid is None:
        return p
    grid = p.grid if out_grid is None else np.asarray(out_grid, dtype=float)
    vals = p.evaluate(warp(grid))
    return SampledPath(grid, vals, domain_kind=p.domain_kind,
                       interpolation=p.interpolation, tail_policy=p.tail_policy)


# ---------------------------------------------------------------------------
# epsilon nets over the sampled range


def range_epsilon_net(p: SampledPath, eps: float):
    """Greedy farthest-point net covering the sampled values within eps.

    Returns (net, size) where net has shape (size, d).  Insertion is seeded
    at the lexicographically smallest sampled value and always inserts the
    value farthest from the current net, breaking ties by earliest grid
    index, so the result is reproducible and stable under enlarging a dense
    sample of the same range.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    pts = p.values
    n = pts.shape[0]
    seed = int(np.lexsort(pts.T[::-1])[0])
    dist = np.linalg.norm(pts - pts[seed], axis=1)
    chosen = [seed]
    while True:
        far = int(np.argmax(dist))  # argmax returns the earliest maximiser
        if dist[far] <= eps:
            break
        chosen.append(far)
        dist = np.minimum(dist, np.linalg.norm(pts - pts[far], axis=1))
        if len(chosen) >= n:
            break
    net = pts[chosen]
    return net, len(chosen)


# ---------------------------------------------------------------------------
# asymptotic decompositions


@dataclass(frozen=True)
class AAADecomposition:
    """Half-line function split as a recurrent full-line part plus a part
    vanishing at +infinity.  The norm of the pair is the sum of the two
    uniform norms."""

    principal: SampledPath
    ergodic: SampledPath

    def __post_init__(self):
        if self.principal.domain_kind != FULL_LINE:
            raise ValueError("principal component must live on the full line")
        if self.ergodic.domain_kind != HALF_LINE:
            raise ValueError("ergodic component must live on the half line")
        if self.principal.dim != self.ergodic.dim:
            raise ValueError("components must share the state dimension")

    def recombined(self) -> SampledPath:
        """principal + ergodic sampled on the ergodic grid."""
        grid = self.ergodic.grid
        vals = self.principal.evaluate(grid) + self.ergodic.values
        return SampledPath(grid, vals, domain_kind=HALF_LINE,
                           interpolation=self.ergodic.interpolation,
                           tail_policy=self.ergodic.tail_policy)

    def ergodic_window_profile(self, n_windows: int = 8) -> np.ndarray:
        """Sup of the ergodic part over n_windows consecutive blocks of its grid."""
        norms = np.linalg.norm(self.ergodic.values, axis=1)
        blocks = np.array_split(norms, n_windows)
        return np.array([b.max() if b.size else 0.0 for b in blocks])

    def check_ergodic_decay(self, tol: float = 1e-6, n_windows: int = 8) -> bool:
        """Sliding-window sup of the ergodic part is non-increasing to ~0."""
        prof = self.ergodic_window_profile(n_windows)
        nonincreasing = np.all(np.diff(prof) <= tol)
        return bool(nonincreasing and prof[-1] <= tol)


def aaa_norm(g: AAADecomposition) -> float:
    """Sum of the uniform norms of the two components."""
    return sup_norm(g.principal) + sup_norm(g.ergodic)


# ---------------------------------------------------------------------------
# CSV serialization: header t,v1,...,vd, one row per node, round-trip decimals


def write_csv(p: SampledPath, f) -> None:
    own = isinstance(f, (str,)) or hasattr(f, "__fspath__")
    fh = open(f, "w", encoding="utf-8") if own else f
    try:
        header = "t," + ",".join(f"v{j + 1}" for j in range(p.dim))
        fh.write(header + "\n")
        for t, row in zip(p.grid, p.values):
            fh.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")
    finally:
        if own:
            fh.close()


def read_csv(f, **path_kwargs) -> SampledPath:
    own = isinstance(f, (str,)) or hasattr(f, "__fspath__")
    fh = open(f, "r", encoding="utf-8") if own else f
    try:
        header = fh.readline().strip()
        cols = header.split(",")
        if not cols or cols[0] != "t" or any(c != f"v{j + 1}" for j, c in enumerate(cols[1:])):
            raise ValueError(f"unexpected path CSV header: {header!r}")
        grid, rows = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(cols):
                raise ValueError(f"malformed path CSV row: {line!r}")
            grid.append(float(parts[0]))
            rows.append([float(x) for x in parts[1:]])
    finally:
        if own:
            fh.close()
    return SampledPath(np.array(grid), np.array(rows), **path_kwargs)


def to_csv_text(p: SampledPath) -> str:
    buf = io.StringIO()
    write_csv(p, buf)
    return buf.getvalue()
