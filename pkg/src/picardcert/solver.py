"""Integral-operator application and certified Picard iteration.

Full-line problems are solved on a finite working window chosen so that the
kernel-envelope tails beyond it contribute less than the quadrature
tolerance; the window is recorded in the report.  Warped state arguments that
reach outside the window are served by the constant-tail policy of the
current iterate, and the induced error is bounded by the envelope tail.

The stopping rule converts the contraction certificate into a computable
error guarantee: iteration stops when the increment falls below
tol*(1-L)/L, which bounds the distance to the fixed point by tol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import problem as pb
from .certify import ContractionCertificate
from .paths import (HALF_LINE, SampledPath, TAIL_CONSTANT, sup_distance,
                    sup_norm, zero_path)
from .quadrature import adaptive_integral, panel_nodes

_PANEL_ORDER = 15
_PANEL_WIDTH = 0.5
_ODE_RTOL = 1e-11
_ODE_ATOL = 1e-12


class CertificationRequired(RuntimeError):
    """picard_solve was asked to run without a passing certificate."""


class NonContractionError(RuntimeError):
    """Measured rates exceeded one repeatedly; iteration aborted."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before the certified stopping rule fired."""


@dataclass
class SolverReport:
    solution: SampledPath
    solution_work: SampledPath
    iterations: int
    increment_norms: list
    measured_rates: list
    apriori_bound_at_stop: float
    residual: float
    certificate_id: str
    L_gamma: float
    work_window: tuple
    tol: float
    notes: list = field(default_factory=list)
    iterates: Optional[list] = None

    def to_text(self) -> str:
        lines = [
            f"certificate: {self.certificate_id}",
            f"iterations: {self.iterations}",
            f"contraction_constant: {self.L_gamma:.12g}",
            f"tolerance: {self.tol:g}",
            f"work_window: [{self.work_window[0]:g}, {self.work_window[1]:g}]",
            f"apriori_bound_at_stop: {self.apriori_bound_at_stop:.6g}",
            f"residual: {self.residual:.6g}",
            "increments: " + " ".join(f"{v:.6g}" for v in self.increment_norms),
            "rates: " + " ".join(f"{v:.6g}" for v in self.measured_rates),
        ]
        lines += ["note: " + n for n in self.notes]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# working grids


def _warp_margin(spec) -> float:
    extra = 0.0
    lo, hi = spec.report_window
    for key in ("a0", "a1", "a2"):
        w = spec.warp(key)
        r = w.reach(lo, hi)
        extra = max(extra, lo - r[0], r[1] - hi, 0.0)
    return extra


def _delay_margin(spec) -> float:
    """Left margin for delayed mild-solution problems.

    Constant-tail reads of the iterate left of the grid inject an O(1) error
    whose decay into the window is governed not by the stability rate delta
    but by the root of the delay majorant  L_f M e^(omega tau) = delta - omega;
    the margin is sized so that the injected error falls below the quadrature
    tolerance at the report edge.
    """
    tau = abs(float(spec.delay or 0.0))
    stab = getattr(spec.evolution, "stability", None)
    if stab is None:
        raise pb.ProblemError("delay problems need a certified evolution family")
    L = spec.effective_lipschitz()
    feedback = L * stab.M
    if feedback <= 0.0:
        return tau + 1.0
    if feedback >= stab.delta:
        raise pb.ProblemError(
            "delayed feedback at least as strong as the stability rate: the "
            "window-truncation error has no decaying majorant")
    lo_w, hi_w = 0.0, stab.delta
    for _ in range(200):
        mid = 0.5 * (lo_w + hi_w)
        if feedback * np.exp(mid * tau) < stab.delta - mid:
            lo_w = mid
        else:
            hi_w = mid
    omega = max(lo_w, 1e-6)
    scale = 10.0 * max(1.0, stab.M / stab.delta)
    return tau + np.log(scale / spec.quad_tol) / omega


def work_window(spec: pb.ProblemSpec) -> tuple:
    lo, hi = spec.report_window
    tol = spec.quad_tol
    if spec.variant in (pb.ADVANCED_DELAYED, pb.DELAYED_ONLY):
        m_del = (spec.kernel_delayed.envelope.truncation_span(tol / 2.0)
                 if spec.kernel_delayed is not None and not spec.kernel_delayed.is_zero
                 else 0.0)
        k2 = spec.kernel_advanced
        m_adv = (k2.envelope.truncation_span(tol / 2.0)
                 if k2 is not None and not k2.is_zero else 0.0)
        extra = _warp_margin(spec)
        return (lo - m_del - extra, hi + m_adv + extra)
    if spec.variant == pb.HALF_LINE:
        b2 = spec.split_advanced
        m_adv = (b2.aa_part.envelope.truncation_span(tol / 2.0)
                 if b2 is not None else 0.0)
        extra = _warp_margin(spec)
        return (max(0.0, lo), hi + m_adv + extra)
    if spec.variant == pb.DELAY_PARABOLIC:
        return (lo - _delay_margin(spec), hi)
    return (max(0.0, lo), hi)


def work_grid(spec: pb.ProblemSpec) -> np.ndarray:
    lo, hi = work_window(spec)
    h = spec.grid_step
    r_lo, r_hi = spec.report_window
    n_lo = int(np.ceil((r_lo - lo) / h - 1e-12))
    n_hi = int(np.ceil((hi - r_hi) / h - 1e-12))
    n_mid = int(round((r_hi - r_lo) / h))
    return r_lo + h * np.arange(-n_lo, n_mid + n_hi + 1)


def zero_start(spec: pb.ProblemSpec, grid=None) -> SampledPath:
    g = work_grid(spec) if grid is None else np.asarray(grid, dtype=float)
    kind = HALF_LINE if spec.variant not in pb.FULL_LINE_VARIANTS else "full_line"
    if spec.variant == pb.DELAY_PARABOLIC:
        kind = "full_line"
    return zero_path(g, spec.dim, domain_kind=kind, tail_policy=TAIL_CONSTANT)


def _iterate_like(y: SampledPath, values: np.ndarray) -> SampledPath:
    return SampledPath(y.grid, values, domain_kind=y.domain_kind,
                       interpolation=y.interpolation, tail_policy=TAIL_CONSTANT)


# ---------------------------------------------------------------------------
# operator application: full-line advanced/delayed equations


def _kernel_sweep(spec, kernel, warp, y, t, advanced: bool) -> np.ndarray:
    """Vectorized oriented integral of kernel(t, s, y(s), y(a(s))) over all t.

    The truncation span comes from the kernel's envelope; nodes are fixed
    Gauss-Legendre panels in the separation u = |t - s|, shared by every t.
    """
    span = kernel.envelope.truncation_span(spec.quad_tol / 2.0)
    u, w = panel_nodes(0.0, span, max_width=_PANEL_WIDTH, order=_PANEL_ORDER)
    S = t[:, None] + u[None, :] if advanced else t[:, None] - u[None, :]
    flat = S.ravel()
    ys = y.evaluate(flat).reshape(S.shape + (spec.dim,))
    if warp.is_identity:
        ya = ys
    else:
        ya = y.evaluate(warp(flat)).reshape(S.shape + (spec.dim,))
    T = np.broadcast_to(t[:, None], S.shape)
    vals = np.asarray(kernel.evaluator(T, S, ys, ya))
    return np.tensordot(vals, w, axes=(1, 0)) if vals.ndim == 3 \
        else (vals * w[None, :]).sum(axis=1)


def apply_gamma(spec: pb.ProblemSpec, y: SampledPath) -> SampledPath:
    """Image of y under the advanced/delayed integral operator on y's grid."""
    t = y.grid
    out = np.zeros((t.size, spec.dim))
    if spec.f is not None and not spec.f.is_zero:
        yt = y.values
        a0 = spec.warp("a0")
        ya0 = yt if a0.is_identity else y.evaluate(a0(t))
        out += np.asarray(spec.f(t, yt, ya0))
    k1 = spec.kernel_delayed
    if k1 is not None and not k1.is_zero:
        out += _kernel_sweep(spec, k1, spec.warp("a1"), y, t, advanced=False)
    k2 = spec.kernel_advanced
    if k2 is not None and not k2.is_zero:
        out += _kernel_sweep(spec, k2, spec.warp("a2"), y, t, advanced=True)
    return _iterate_like(y, out)


# ---------------------------------------------------------------------------
# operator application: half-line equations


def _half_line_delayed_sweep(spec, split, warp, y, t) -> np.ndarray:
    """Per-t integral over [max(0, t - span), t] of the split kernel."""
    span = split.aa_part.envelope.truncation_span(spec.quad_tol / 2.0)
    out = np.zeros((t.size, spec.dim))
    for i, ti in enumerate(t):
        lo = max(0.0, ti - span)
        if ti <= lo:
            continue
        s, w = panel_nodes(lo, ti, max_width=_PANEL_WIDTH, order=_PANEL_ORDER)
        ys = y.evaluate(s)
        ya = ys if warp.is_identity else y.evaluate(warp(s))
        vals = np.asarray(split.full_evaluator(np.full(s.size, ti), s, ys, ya))
        out[i] = np.tensordot(w, vals, axes=(0, 0))
    return out


def apply_pi(spec: pb.ProblemSpec, y: SampledPath) -> SampledPath:
    """Image of y under the half-line operator: pointwise term, history
    integral from zero, and forward integral to +infinity."""
    t = y.grid
    out = np.zeros((t.size, spec.dim))
    if spec.f is not None and not spec.f.is_zero:
        a0 = spec.warp("a0")
        ya0 = y.values if a0.is_identity else y.evaluate(a0(t))
        out += np.asarray(spec.f(t, y.values, ya0))
    if spec.split_delayed is not None:
        out += _half_line_delayed_sweep(spec, spec.split_delayed,
                                        spec.warp("a1"), y, t)
    b2 = spec.split_advanced
    if b2 is not None:
        span = b2.aa_part.envelope.truncation_span(spec.quad_tol / 2.0)
        u, w = panel_nodes(0.0, span, max_width=_PANEL_WIDTH, order=_PANEL_ORDER)
        S = t[:, None] + u[None, :]
        flat = S.ravel()
        ys = y.evaluate(flat).reshape(S.shape + (spec.dim,))
        warp2 = spec.warp("a2")
        ya = ys if warp2.is_identity else y.evaluate(warp2(flat)).reshape(S.shape + (spec.dim,))
        T = np.broadcast_to(t[:, None], S.shape)
        vals = np.asarray(b2.full_evaluator(T, S, ys, ya))
        out += np.tensordot(vals, w, axes=(1, 0))
    return _iterate_like(y, out)


# ---------------------------------------------------------------------------
# operator application: evolution variants


def _forced_linear_solve(generator, forcing, t_start, z0, t_eval):
    """z' = A(t) z + forcing(t) from (t_start, z0), sampled on t_eval."""
    def rhs(t, z):
        return generator(t) @ z + forcing(t)

    sol = solve_ivp(rhs, (t_start, float(t_eval[-1])), z0, method="DOP853",
                    t_eval=t_eval, rtol=_ODE_RTOL, atol=_ODE_ATOL,
                    dense_output=False)
    if not sol.success:
        raise ConvergenceError(f"propagation failed: {sol.message}")
    return sol.y.T


def _causal_history(spec, y) -> np.ndarray:
    """History integral int_0^t B(t, s) y(s) ds on y's grid."""
    mk = spec.memory_kernel
    t = y.grid
    out = np.zeros((t.size, spec.dim))
    for i, ti in enumerate(t):
        if ti <= 0.0:
            continue
        s, w = panel_nodes(0.0, ti, max_width=_PANEL_WIDTH, order=_PANEL_ORDER)
        mats = np.asarray(mk.matrix(np.full(s.size, ti), s))
        ys = y.evaluate(s)
        vals = np.einsum("kij,kj->ki", mats, ys)
        out[i] = np.tensordot(w, vals, axes=(0, 0))
    return out


def apply_mild_evolution(spec: pb.ProblemSpec, y: SampledPath) -> SampledPath:
    """Image of y under the mild-solution operator of the evolution variants."""
    t = y.grid
    if spec.variant == pb.EVOLUTION_NONLOCAL:
        hist = _causal_history(spec, y) if spec.memory_kernel is not None \
            else np.zeros((t.size, spec.dim))
        zeros = np.zeros_like(y.values)
        forcing_vals = hist + np.asarray(spec.f(t, y.values, zeros))
        forcing = CubicSpline(t, forcing_vals, axis=0)
        g_val = (spec.nonlocal_map(y) if spec.nonlocal_map is not None
                 else np.zeros(spec.dim))
        z0 = spec.u0 + g_val
        vals = _forced_linear_solve(spec.evolution.generator, forcing,
                                    float(t[0]), z0, t)
        return _iterate_like(y, vals)

    if spec.variant == pb.RESOLVENT_NONLOCAL:
        R = spec.resolvent
        g_val = (spec.nonlocal_map(y) if spec.nonlocal_map is not None
                 else np.zeros(spec.dim))
        vals = np.einsum("kij,j->ki", R.eval(t), spec.u0 + g_val)
        if spec.f is not None and not spec.f.is_zero:
            zeros = np.zeros_like(y.values)
            f_vals = np.asarray(spec.f(t, y.values, zeros))
            f_interp = CubicSpline(t, f_vals, axis=0)
            for i, ti in enumerate(t):
                if ti <= 0.0:
                    continue
                s, w = panel_nodes(0.0, ti, max_width=_PANEL_WIDTH,
                                   order=_PANEL_ORDER)
                conv = np.einsum("kij,kj->ki", R.eval(ti - s), f_interp(s))
                vals[i] += np.tensordot(w, conv, axes=(0, 0))
        return _iterate_like(y, vals)

    if spec.variant == pb.DELAY_PARABOLIC:
        tau = float(spec.delay)
        stab = getattr(spec.evolution, "stability", None)
        if stab is None:
            raise pb.ProblemError("delay problems need a certified evolution "
                                  "family (stability constants fix the run-in)")
        # run-in long enough that the neglected history integral beyond it is
        # below the quadrature tolerance at every grid node, including the
        # first one; the current iterate serves reads beyond its grid by its
        # constant tail
        sup_f = np.max(np.linalg.norm(spec.f.at_zero(t), axis=1))
        sup_f = max(sup_f + spec.effective_lipschitz() * sup_norm(y), 1.0)
        span = np.log(max(stab.M * sup_f / (stab.delta * spec.quad_tol), 2.0)) \
            / stab.delta

        def forcing(s):
            x_del = y.evaluate(np.atleast_1d(s) - tau)
            zeros = np.zeros_like(x_del)
            return np.asarray(spec.f(np.atleast_1d(s), x_del, zeros))[0]

        vals = _forced_linear_solve(spec.evolution.generator, forcing,
                                    float(t[0]) - span, np.zeros(spec.dim), t)
        return _iterate_like(y, vals)

    raise pb.ProblemError(f"variant {spec.variant!r} has no mild-evolution operator")


def apply_operator(spec: pb.ProblemSpec, y: SampledPath) -> SampledPath:
    if spec.variant in (pb.ADVANCED_DELAYED, pb.DELAYED_ONLY):
        return apply_gamma(spec, y)
    if spec.variant == pb.HALF_LINE:
        return apply_pi(spec, y)
    return apply_mild_evolution(spec, y)


def residual(spec: pb.ProblemSpec, y: SampledPath) -> float:
    """Uniform norm of y - (operator image of y) over y's grid."""
    return sup_distance(y, apply_operator(spec, y))


# ---------------------------------------------------------------------------
# Picard iteration


def _restrict_to_report(spec, y: SampledPath) -> SampledPath:
    lo, hi = spec.report_window
    sub = y.restrict(lo - 1e-12, hi + 1e-12)
    return SampledPath(sub.grid, sub.values, domain_kind=y.domain_kind,
                       interpolation=y.interpolation, tail_policy="error")


def picard_solve(spec: pb.ProblemSpec, cert: ContractionCertificate,
                 tol: float = 1e-8, start: SampledPath = None,
                 max_iter: int = 200, store_iterates: bool = False,
                 allow_uncertified: bool = False) -> SolverReport:
    """Iterate the operator from the certificate's base point to the fixed point.

    Under a passing certificate the stopping rule guarantees the returned
    solution is within tol of the true fixed point in the uniform norm.
    Alternative starting paths are accepted only for uniqueness experiments;
    the theorems centre the ball at the base point.
    """
    notes = []
    if not cert.passed:
        if not allow_uncertified:
            raise CertificationRequired(
                f"certificate {cert.certificate_id} did not pass "
                f"(violated: {cert.violated}); use allow_uncertified to override")
        notes.append("uncertified run: override recorded")
    L = max(cert.L_gamma, 0.0)
    if 0.0 < L < 1.0:
        threshold = tol * (1.0 - L) / L
    elif L == 0.0:
        threshold = np.inf
        notes.append("contraction constant 0: first increment is final")
    else:
        threshold = tol
        notes.append("contraction constant >= 1: plain increment stopping")

    if start is not None:
        y = SampledPath(start.grid, start.values, domain_kind=start.domain_kind,
                        interpolation=start.interpolation,
                        tail_policy=TAIL_CONSTANT)
        notes.append("alternative start accepted (uniqueness experiment)")
    elif cert.base_point is not None:
        bp = cert.base_point
        y = SampledPath(bp.grid, bp.values, domain_kind=bp.domain_kind,
                        interpolation=bp.interpolation, tail_policy=TAIL_CONSTANT)
    else:
        from .certify import compute_base_point
        y = compute_base_point(spec)

    increments, rates = [], []
    iterates = [y] if store_iterates else None
    first_inc = None
    bad_rate_streak = 0
    for n in range(1, max_iter + 1):
        y_next = apply_operator(spec, y)
        inc = sup_distance(y_next, y)
        increments.append(inc)
        if len(increments) >= 2 and increments[-2] > 0.0:
            rate = inc / increments[-2]
            rates.append(rate)
            bad_rate_streak = bad_rate_streak + 1 if rate > 1.0 else 0
            if bad_rate_streak >= 3:
                raise NonContractionError(
                    f"measured rate exceeded 1 for 3 consecutive sweeps "
                    f"(last {rate:.4g}); operator is not contracting on this data")
        if first_inc is None:
            first_inc = inc
        y = y_next
        if store_iterates:
            iterates.append(y)
        if inc <= threshold:
            break
    else:
        raise ConvergenceError(
            f"stopping rule not reached within {max_iter} sweeps "
            f"(last increment {increments[-1]:.4g}, threshold {threshold:.4g})")

    n_done = len(increments)
    if 0.0 < L < 1.0:
        apriori = (L ** n_done) / (1.0 - L) * (first_inc or 0.0)
    else:
        apriori = increments[-1]
    res = sup_distance(y, apply_operator(spec, y))
    report = SolverReport(
        solution=_restrict_to_report(spec, y),
        solution_work=y,
        iterations=n_done,
        increment_norms=increments,
        measured_rates=rates,
        apriori_bound_at_stop=apriori,
        residual=res,
        certificate_id=cert.certificate_id,
        L_gamma=cert.L_gamma,
        work_window=(float(y.grid[0]), float(y.grid[-1])),
        tol=tol,
        notes=notes,
        iterates=iterates,
    )
    return report


# ---------------------------------------------------------------------------
# integral-inequality checker


@dataclass
class IntegralInequalityReport:
    rho: float
    hypothesis_violations: list
    worst_witness: Optional[dict]
    sup_v: float
    sup_a: float
    bound: float
    conclusion_holds: bool
    lines: list = field(default_factory=list)

    @property
    def hypothesis_holds(self) -> bool:
        return not self.hypothesis_violations

    def to_text(self) -> str:
        return "\n".join(self.lines) + "\n"


def check_integral_inequality(a, w1, w2, v, grid, tol: float = 1e-8
                              ) -> IntegralInequalityReport:
    """Audit of the comparison inequality behind the boundedness transfer.

    a and v are vectorized scalar callables on the real line; w1 and w2 are
    decaying two-time weights (delayed and advanced side).  With
    rho = sup_t (int w1 + int w2) < 1, any v satisfying
    v(t) <= a(t) + int w1 v + int w2 v pointwise obeys sup v <= sup a/(1-rho).
    Both the pointwise hypothesis and the conclusion are checked on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    terms = [(w, orient) for w, orient in ((w1, "delayed"), (w2, "advanced"))
             if w is not None and w.amplitude > 0.0]
    rho, rho_t = 0.0, float(grid[0]) if grid.size else 0.0
    for t in grid:
        total = 0.0
        for w, orient in terms:
            span = w.truncation_span(tol / 2.0)
            lo, hi = (t - span, t) if orient == "delayed" else (t, t + span)
            val, _ = adaptive_integral(lambda s: w(float(t), s), lo, hi, tol / 2.0)
            total += float(val)
        if total > rho:
            rho, rho_t = total, float(t)
    if rho >= 1.0:
        raise ValueError(f"weight integrals reach {rho:.6g} >= 1 at t = {rho_t:g}; "
                         "the comparison bound does not apply")

    violations = []
    worst = None
    worst_gap = -np.inf
    for t in grid:
        lhs = float(np.asarray(v(np.array([t])))[0])
        rhs = float(np.asarray(a(np.array([t])))[0])
        for w, orient in terms:
            span = w.truncation_span(tol / 2.0)
            lo, hi = (t - span, t) if orient == "delayed" else (t, t + span)
            val, _ = adaptive_integral(
                lambda s: np.asarray(w(float(t), s)) * np.asarray(v(s)), lo, hi,
                tol / 2.0)
            rhs += float(val)
        gap = lhs - rhs
        if gap > tol:
            violations.append({"t": float(t), "lhs": lhs, "rhs": rhs})
        if gap > worst_gap:
            worst_gap = gap
            worst = {"t": float(t), "lhs": lhs, "rhs": rhs}

    sup_v = float(np.max(np.asarray(v(grid))))
    sup_a = float(np.max(np.asarray(a(grid))))
    bound = sup_a / (1.0 - rho)
    concl = sup_v <= bound + tol
    lines = [
        f"rho = {rho:.12g} (argmax t = {rho_t:g})",
        f"hypothesis violations on grid: {len(violations)}",
        f"sup v = {sup_v:.12g}, bound sup a/(1-rho) = {bound:.12g}",
        f"conclusion holds: {'yes' if concl else 'NO'}",
    ]
    if violations:
        w0 = violations[0]
        lines.append(f"first witness: t = {w0['t']:g}, v = {w0['lhs']:.6g} > "
                     f"rhs = {w0['rhs']:.6g}")
    return IntegralInequalityReport(rho, violations, worst, sup_v, sup_a,
                                    bound, concl, lines)
