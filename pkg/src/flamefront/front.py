"""Periodic front solver: speed and profile for a frozen burning rate.

Solves, for a given positive periodic rate H and curvature coefficient mu,
the pair (c, v) with v periodic and

    -c + H(y) sqrt(1 + v_y^2) = mu v_yy / (1 + v_y^2).

The state variable is the slope angle theta = arctan(v_y), which turns the
equation into the bounded-state ODE

    mu theta'(y) = -c + H(y) / cos(theta),

integrated by classical RK4 on a grid aligned with the layer breakpoints of
H.  The unknowns are the speed and the angle at a set of shooting nodes; the
residuals are the segment matching defects (periodicity for a single
segment) and the mean-slope defect, the integral of tan(theta) over one
period.  Newton uses exact sensitivities from the variational equations.

Multiple shooting matters here: the linearized flow grows like
exp(K * Y / mu) across one period, so for small mu the period is split into
segments short enough that each segment map stays well conditioned.  For
very small mu a cold start is additionally bridged by continuation from a
larger mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError
from .medium import PeriodicField

__all__ = [
    "FrontConfig",
    "FrontProfile",
    "FrontSolution",
    "solve_front",
    "speed_identity_residual",
    "arctan_bound_check",
    "simpson_panels",
]

_THETA_GUARD = 0.5 * math.pi - 1e-6


@dataclass(frozen=True)
class FrontConfig:
    """Shooting-solver knobs.

    ``grid`` is the number of quadrature panels per period (two RK4 steps
    each); stiff problems (small mu relative to the rate) are refined via
    ``stiffness_factor`` and split into more shooting segments via
    ``segment_budget``, the allowed growth exponent of the linearized flow
    per segment.  ``tol`` bounds the Newton step in solution units.
    """

    grid: int = 2048
    tol: float = 1e-9
    max_iter: int = 50
    stiffness_factor: float = 32.0
    max_grid: int = 400_000
    segment_scale: float = 0.08
    max_segments: int = 200_000


@dataclass(frozen=True)
class FrontProfile:
    """Periodic front graph on a cell-aligned grid.

    ``y`` holds the RK4 nodes over one period (endpoints included), ``v`` the
    mean-zero profile, ``slope`` its derivative and ``angle`` the slope angle
    arctan(slope).  Odd-indexed nodes are panel midpoints.
    """

    period: float
    y: np.ndarray
    v: np.ndarray
    slope: np.ndarray
    angle: np.ndarray
    mean_zero: bool = True

    def value(self, yq):
        """Profile height by periodic cubic Hermite interpolation."""
        yq = np.asarray(yq, dtype=float)
        yw = np.mod(yq, self.period)
        i = np.clip(np.searchsorted(self.y, yw, side="right") - 1, 0, self.y.size - 2)
        h = self.y[i + 1] - self.y[i]
        t = (yw - self.y[i]) / h
        t2, t3 = t * t, t * t * t
        out = ((2 * t3 - 3 * t2 + 1) * self.v[i] + (t3 - 2 * t2 + t) * h * self.slope[i]
               + (-2 * t3 + 3 * t2) * self.v[i + 1] + (t3 - t2) * h * self.slope[i + 1])
        return float(out) if np.isscalar(yq) or out.ndim == 0 else out

    def slope_at(self, yq):
        """Front slope by periodic linear interpolation."""
        yq = np.asarray(yq, dtype=float)
        yw = np.mod(yq, self.period)
        out = np.interp(yw, self.y, self.slope)
        return float(out) if out.ndim == 0 else out

    def angle_at(self, yq):
        """Slope angle by periodic linear interpolation."""
        yq = np.asarray(yq, dtype=float)
        yw = np.mod(yq, self.period)
        out = np.interp(yw, self.y, self.angle)
        return float(out) if out.ndim == 0 else out

    def curvature(self) -> np.ndarray:
        """Signed curvature -v_yy / (1 + v_y^2)^(3/2) at the grid nodes."""
        v_yy = np.gradient(self.slope, self.y, edge_order=2)
        return -v_yy / (1.0 + self.slope**2) ** 1.5

    def normal_velocity(self, rate_values: np.ndarray, mu: float) -> np.ndarray:
        """Normal velocity -rate - mu * curvature at the grid nodes."""
        return -np.asarray(rate_values, dtype=float) - mu * self.curvature()

    @property
    def sup_abs(self) -> float:
        return float(np.abs(self.v).max())

    @property
    def sup_abs_slope(self) -> float:
        return float(np.abs(self.slope).max())

    @classmethod
    def flat(cls, period: float, n: int = 16) -> "FrontProfile":
        y = np.linspace(0.0, period, 2 * n + 1)
        z = np.zeros_like(y)
        return cls(period, y, z, z.copy(), z.copy())


@dataclass(frozen=True)
class FrontSolution:
    speed: float
    profile: FrontProfile
    residual_periodicity: float
    residual_mean: float
    collocation_defect: float
    iterations: int
    segments: int
    panel_rate: np.ndarray  # rate value on each quadrature panel

    @property
    def residual(self) -> float:
        return max(abs(self.residual_periodicity), abs(self.residual_mean))


def simpson_panels(y: np.ndarray, f_nodes: np.ndarray) -> float:
    """Composite Simpson over two-step panels of a cell-aligned grid."""
    widths = y[2::2] - y[:-2:2]
    return float(np.dot(widths, f_nodes[:-2:2] + 4.0 * f_nodes[1::2] + f_nodes[2::2]) / 6.0)


def _build_grid(rate: PeriodicField, mu: float, cfg: FrontConfig):
    """RK4 nodes aligned with the rate's layers, refined for stiffness.

    Each layer receives an even number of steps so quadrature panels never
    straddle a discontinuity.  Returns (nodes, per-step rate).
    """
    period = rate.period
    n_target = max(cfg.grid, int(math.ceil(cfg.stiffness_factor * period * rate.max / mu)))
    n_target = min(n_target, cfg.max_grid)
    widths = rate.widths
    edges = np.concatenate([rate.breakpoints, [period]])
    pieces = [2 * max(1, int(round(n_target * w / period))) for w in widths]
    nodes = [np.array([0.0])]
    for i, n_steps in enumerate(pieces):
        nodes.append(np.linspace(edges[i], edges[i + 1], n_steps + 1)[1:])
    return np.concatenate(nodes), np.repeat(rate.values, pieces)


class _Shooting:
    """Multiple-shooting machinery on a fixed grid.

    Segments are integrated either one by one with a tight scalar loop (few
    segments) or all at once with numpy arrays of shape (segments, steps)
    (many segments; the sweeps are independent, so the step loop is short).
    """

    def __init__(self, y: np.ndarray, step_rate: np.ndarray, mu: float,
                 n_segments: int):
        self.y = y
        self.mu = mu
        n_steps = step_rate.size
        n_panels = n_steps // 2
        n_segments = max(1, min(n_segments, n_panels))
        # segment boundaries on panel edges, evenly in panel count
        panel_edges = np.linspace(0, n_panels, n_segments + 1).round().astype(int)
        panel_edges = np.unique(panel_edges)
        self.starts = 2 * panel_edges  # node indices
        m = self.m = self.starts.size - 1
        self.vectorized = m >= 32
        h_all = np.diff(y)
        if self.vectorized:
            counts = np.diff(self.starts)
            width = int(counts.max())
            idx = self.starts[:m, None] + np.arange(width)[None, :]
            live = np.arange(width)[None, :] < counts[:, None]
            idx = np.minimum(idx, n_steps - 1)
            self.seg_h = np.where(live, h_all[idx], 0.0)      # zero-width padding
            self.seg_rate = np.where(live, step_rate[idx], 1.0)
            self.counts = counts
            self.width = width
        else:
            self.dz = [h_all[self.starts[k]:self.starts[k + 1]].tolist()
                       for k in range(m)]
            self.rate = [step_rate[self.starts[k]:self.starts[k + 1]].tolist()
                         for k in range(m)]

    # -- vectorized sweeps over all segments at once ------------------------

    def _vsweep(self, c: float, th0: np.ndarray, sens: bool, record: bool):
        inv_mu = 1.0 / self.mu
        guard = _THETA_GUARD
        m, width = self.m, self.width
        th = th0.copy()
        iv = np.zeros(m)
        if sens:
            s = np.ones(m)
            p = np.zeros(m)
            q = np.zeros(m)
            w = np.zeros(m)
        if record:
            buf_th = np.empty((m, width + 1))
            buf_iv = np.empty((m, width + 1))
            buf_th[:, 0] = th
            buf_iv[:, 0] = 0.0

        def stage(t, sv, pv):
            sec = 1.0 / np.cos(t)
            g = np.tan(t)
            f = (rc * sec - c) * inv_mu
            if not sens:
                return f, g, None, None, None, None
            a = rc * sec * g * inv_mu
            sec2 = sec * sec
            return f, g, a * sv, -inv_mu + a * pv, sec2 * sv, sec2 * pv

        for j in range(width):
            h = self.seg_h[:, j]
            rc = self.seg_rate[:, j]
            half = 0.5 * h
            f1, g1, s1, p1, q1, w1 = stage(th, *((s, p) if sens else (None, None)))
            t2 = th + half * f1
            if float(np.abs(t2).max()) >= guard:
                return None
            f2, g2, s2, p2, q2, w2 = stage(t2, *((s + half * s1, p + half * p1)
                                                 if sens else (None, None)))
            t3 = th + half * f2
            if float(np.abs(t3).max()) >= guard:
                return None
            f3, g3, s3, p3, q3, w3 = stage(t3, *((s + half * s2, p + half * p2)
                                                 if sens else (None, None)))
            t4 = th + h * f3
            if float(np.abs(t4).max()) >= guard:
                return None
            f4, g4, s4, p4, q4, w4 = stage(t4, *((s + h * s3, p + h * p3)
                                                 if sens else (None, None)))
            sixth = h / 6.0
            th = th + sixth * (f1 + 2.0 * (f2 + f3) + f4)
            iv = iv + sixth * (g1 + 2.0 * (g2 + g3) + g4)
            if sens:
                s = s + sixth * (s1 + 2.0 * (s2 + s3) + s4)
                p = p + sixth * (p1 + 2.0 * (p2 + p3) + p4)
                q = q + sixth * (q1 + 2.0 * (q2 + q3) + q4)
                w = w + sixth * (w1 + 2.0 * (w2 + w3) + w4)
            if float(np.abs(th).max()) >= guard:
                return None
            if record:
                buf_th[:, j + 1] = th
                buf_iv[:, j + 1] = iv
        out = {"th_end": th, "iv_end": iv}
        if sens:
            out.update(phi=s, psi=p, q=q, w=w)
        if record:
            out.update(buf_th=buf_th, buf_iv=buf_iv)
        return out

    def segment(self, k: int, c: float, th0: float, sens: bool, record=None):
        """RK4 over one segment; optionally carries the variational states.

        Returns (status, th_end, int_end, phi, psi, q, w): the end angle, the
        accumulated integral of tan(theta), and the sensitivities of both
        with respect to (th0, c).  status is +-1 when the angle guard fired.
        """
        inv_mu = 1.0 / self.mu
        cos, tan = math.cos, math.tan
        guard = _THETA_GUARD
        th = th0
        iv = 0.0
        s, p, q, w = 1.0, 0.0, 0.0, 0.0
        dz = self.dz[k]
        rate = self.rate[k]
        if record is not None:
            rec_th, rec_iv = record
            rec_th.append(th)
            rec_iv.append(iv)
        else:
            rec_th = rec_iv = None

        if not sens:
            for i in range(len(dz)):
                h = dz[i]
                rc = rate[i]
                f1 = (rc / cos(th) - c) * inv_mu
                g1 = tan(th)
                t2 = th + 0.5 * h * f1
                if abs(t2) >= guard:
                    return (1 if t2 > 0 else -1), th, iv, s, p, q, w
                f2 = (rc / cos(t2) - c) * inv_mu
                g2 = tan(t2)
                t3 = th + 0.5 * h * f2
                if abs(t3) >= guard:
                    return (1 if t3 > 0 else -1), th, iv, s, p, q, w
                f3 = (rc / cos(t3) - c) * inv_mu
                g3 = tan(t3)
                t4 = th + h * f3
                if abs(t4) >= guard:
                    return (1 if t4 > 0 else -1), th, iv, s, p, q, w
                f4 = (rc / cos(t4) - c) * inv_mu
                g4 = tan(t4)
                th = th + h * (f1 + 2.0 * (f2 + f3) + f4) / 6.0
                iv = iv + h * (g1 + 2.0 * (g2 + g3) + g4) / 6.0
                if abs(th) >= guard:
                    return (1 if th > 0 else -1), th, iv, s, p, q, w
                if rec_th is not None:
                    rec_th.append(th)
                    rec_iv.append(iv)
            return 0, th, iv, s, p, q, w

        for i in range(len(dz)):
            h = dz[i]
            rc = rate[i]
            # stage 1
            sec = 1.0 / cos(th)
            g1 = tan(th)
            f1 = (rc * sec - c) * inv_mu
            a = rc * sec * g1 * inv_mu
            sec2 = sec * sec
            s1, p1, q1, w1 = a * s, -inv_mu + a * p, sec2 * s, sec2 * p
            # stage 2
            t2 = th + 0.5 * h * f1
            if abs(t2) >= guard:
                return (1 if t2 > 0 else -1), th, iv, s, p, q, w
            sv, pv = s + 0.5 * h * s1, p + 0.5 * h * p1
            sec = 1.0 / cos(t2)
            g2 = tan(t2)
            f2 = (rc * sec - c) * inv_mu
            a = rc * sec * g2 * inv_mu
            sec2 = sec * sec
            s2, p2, q2, w2 = a * sv, -inv_mu + a * pv, sec2 * sv, sec2 * pv
            # stage 3
            t3 = th + 0.5 * h * f2
            if abs(t3) >= guard:
                return (1 if t3 > 0 else -1), th, iv, s, p, q, w
            sv, pv = s + 0.5 * h * s2, p + 0.5 * h * p2
            sec = 1.0 / cos(t3)
            g3 = tan(t3)
            f3 = (rc * sec - c) * inv_mu
            a = rc * sec * g3 * inv_mu
            sec2 = sec * sec
            s3, p3, q3, w3 = a * sv, -inv_mu + a * pv, sec2 * sv, sec2 * pv
            # stage 4
            t4 = th + h * f3
            if abs(t4) >= guard:
                return (1 if t4 > 0 else -1), th, iv, s, p, q, w
            sv, pv = s + h * s3, p + h * p3
            sec = 1.0 / cos(t4)
            g4 = tan(t4)
            f4 = (rc * sec - c) * inv_mu
            a = rc * sec * g4 * inv_mu
            sec2 = sec * sec
            s4, p4, q4, w4 = a * sv, -inv_mu + a * pv, sec2 * sv, sec2 * pv

            th = th + h * (f1 + 2.0 * (f2 + f3) + f4) / 6.0
            iv = iv + h * (g1 + 2.0 * (g2 + g3) + g4) / 6.0
            s = s + h * (s1 + 2.0 * (s2 + s3) + s4) / 6.0
            p = p + h * (p1 + 2.0 * (p2 + p3) + p4) / 6.0
            q = q + h * (q1 + 2.0 * (q2 + q3) + q4) / 6.0
            w = w + h * (w1 + 2.0 * (w2 + w3) + w4) / 6.0
            if abs(th) >= guard:
                return (1 if th > 0 else -1), th, iv, s, p, q, w
            if rec_th is not None:
                rec_th.append(th)
                rec_iv.append(iv)
        return 0, th, iv, s, p, q, w

    def residuals(self, x: np.ndarray, sens: bool):
        """Residual vector (matching defects, mean defect) and, with ``sens``,
        the sensitivity blocks for the Newton matrix."""
        m = self.m
        c = x[m]
        if self.vectorized:
            out = self._vsweep(c, x[:m], sens, record=False)
            if out is None:
                return None
            r = np.empty(m + 1)
            r[:m] = out["th_end"] - np.roll(x[:m], -1)
            r[m] = float(out["iv_end"].sum())
            if not sens:
                return r, None
            return r, (out["phi"], out["psi"], out["q"], out["w"])
        r = np.empty(m + 1)
        phi = np.empty(m)
        psi = np.empty(m)
        qv = np.empty(m)
        wv = np.empty(m)
        total = 0.0
        for k in range(m):
            status, th_end, iv, s, p, q, w = self.segment(k, c, x[k], sens)
            if status != 0:
                return None
            r[k] = th_end - x[(k + 1) % m]
            phi[k], psi[k], qv[k], wv[k] = s, p, q, w
            total += iv
        r[m] = total
        if not sens:
            return r, None
        return r, (phi, psi, qv, wv)

    def newton_step(self, blocks, rhs: np.ndarray) -> np.ndarray | None:
        """Solve the Newton system for the step.

        The matrix is cyclic bidiagonal in the angles plus a dense border
        (speed column, mean-defect row).  Small systems go through dense LU;
        large ones through a streaming Givens QR that eliminates the angle
        columns in order while carrying the wrap column and the border row.
        Orthogonal rotations keep every intermediate quantity row-norm
        bounded, which matters because partial products of the segment flow
        derivatives can overflow any substitution-based elimination.
        """
        phi, psi, qv, wv = blocks
        m = self.m
        if m <= 64:
            mat = np.zeros((m + 1, m + 1))
            for k in range(m):
                mat[k, k] += phi[k]
                mat[k, (k + 1) % m] += -1.0
                mat[k, m] = psi[k]
                mat[m, k] = qv[k]
            mat[m, m] = float(np.sum(wv))
            try:
                return np.linalg.solve(mat, rhs)
            except np.linalg.LinAlgError:
                return None
        return _solve_cyclic_border(np.asarray(phi), np.asarray(psi),
                                    np.asarray(qv), float(np.sum(wv)), rhs)

    def assemble(self, x: np.ndarray):
        """Final recording sweep: concatenated nodes, angles and slope
        integral across all segments (segment joints take the shooting
        values, hiding matching defects below the tolerance)."""
        m = self.m
        c = x[m]
        if self.vectorized:
            out = self._vsweep(c, x[:m], sens=False, record=True)
            if out is None:
                raise ConvergenceError("assembled profile hit the angle guard")
            offsets = np.concatenate([[0.0], np.cumsum(out["iv_end"])])
            n_nodes = self.starts[-1] + 1
            theta = np.empty(n_nodes)
            integral = np.empty(n_nodes)
            # drop each segment's final node: the joint takes the shooting
            # value, which opens the next segment (defect below tolerance)
            for k in range(m):
                cnt = self.counts[k]
                sl = slice(self.starts[k], self.starts[k] + cnt)
                theta[sl] = out["buf_th"][k, :cnt]
                integral[sl] = out["buf_iv"][k, :cnt] + offsets[k]
            theta[-1] = x[0]
            integral[-1] = offsets[-1]
            return theta, integral, float(offsets[-1])
        thetas = []
        integrals = []
        offset = 0.0
        for k in range(m):
            rec = ([], [])
            status, th_end, iv, *_ = self.segment(k, c, x[k], False, record=rec)
            if status != 0:
                raise ConvergenceError("assembled profile hit the angle guard")
            # drop each segment's final node: the joint takes the shooting
            # value, which opens the next segment (defect below tolerance)
            thetas.append(np.asarray(rec[0][:-1]))
            integrals.append(np.asarray(rec[1][:-1]) + offset)
            offset += iv
        theta = np.concatenate(thetas + [[x[0]]])
        integral = np.concatenate(integrals + [[offset]])
        return theta, integral, offset


def _segment_count(rate: PeriodicField, mu: float, cfg: FrontConfig) -> int:
    # segment length ~ segment_scale * mu / rate.max keeps both the angular
    # drift across a segment and the growth of the linearized flow bounded,
    # so a segment map never leaves the angle range from a sane guess
    length = cfg.segment_scale * mu / rate.max
    return min(cfg.max_segments, max(1, int(math.ceil(rate.period / length))))


def solve_front(
    rate: PeriodicField,
    mu: float,
    cfg: FrontConfig | None = None,
    initial=None,
) -> FrontSolution:
    """Solve the periodic front equation for the frozen rate.

    ``rate`` must be strictly positive; its period sets the period of the
    front.  ``initial`` optionally warm-starts the solve: a pair
    (speed, angle) or (speed, callable y -> angle).
    """
    cfg = cfg or FrontConfig()
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    if rate.min <= 0.0:
        raise ValueError("rate must be positively lower bounded")

    try:
        return _solve_once(rate, mu, cfg, initial)
    except ConvergenceError:
        if initial is not None:
            raise
    # continuation ladder: bridge a cold start through larger mu values
    target = mu
    ladder = []
    level = mu
    while _segment_count(rate, level, cfg) > 2:
        level *= 8.0
        ladder.append(level)
    guess = None
    for level in reversed(ladder):
        sol = _solve_once(rate, level, cfg, guess)
        guess = (sol.speed, sol.profile.angle_at)
    return _solve_once(rate, target, cfg, guess)


def _solve_once(rate, mu, cfg, initial) -> FrontSolution:
    y, step_rate = _build_grid(rate, mu, cfg)
    period = rate.period
    shooting = _Shooting(y, step_rate, mu, _segment_count(rate, mu, cfg))
    m = shooting.m

    x = np.zeros(m + 1)
    x[m] = rate.mean
    if initial is not None:
        c0, th0 = initial
        x[m] = float(c0)
        if callable(th0):
            x[:m] = th0(y[shooting.starts[:m]])
        else:
            x[:m] = float(th0)

    r_floor = 1e-16 * max(1.0, period * rate.max / mu)
    out = shooting.residuals(x, sens=False)
    if out is None:
        raise ConvergenceError("front shooting failed: initial guess leaves the "
                               "angle range; provide a warm start")
    r, _ = out
    iterations = 0
    converged = float(np.abs(r).max()) < r_floor

    while not converged and iterations < cfg.max_iter:
        iterations += 1
        out = shooting.residuals(x, sens=True)
        if out is None:
            raise ConvergenceError("front shooting left the angle range mid-iteration")
        r, blocks = out
        mat = shooting.newton_matrix(blocks)
        try:
            if m == 1:
                step = np.linalg.solve(mat, -r)
            else:
                step = spla.spsolve(mat, -r)
        except (np.linalg.LinAlgError, RuntimeError):
            break
        if not np.all(np.isfinite(step)):
            break

        alpha = 1.0
        best = None
        r_norm = float(np.abs(r).max())
        for _ in range(40):
            x_new = x + alpha * step
            if x_new[m] > 0.0 and np.abs(x_new[:m]).max() < _THETA_GUARD:
                trial = shooting.residuals(x_new, sens=False)
                if trial is not None and float(np.abs(trial[0]).max()) < r_norm:
                    best = (x_new, trial[0])
                    break
            alpha *= 0.5
        if best is None:
            break
        x, r = best
        step_size = max(float(np.abs(step[:m]).max()) * alpha,
                        abs(step[m]) * alpha / max(1.0, x[m]))
        if step_size < cfg.tol or float(np.abs(r).max()) < r_floor:
            converged = True

    if not converged:
        fb = _solve_nested(shooting, rate, mu) if m == 1 else None
        if fb is None:
            raise ConvergenceError(
                f"front shooting did not converge in {cfg.max_iter} iterations "
                f"(residual {float(np.abs(r).max()):.3e}, {m} segments)",
                history=[float(np.abs(r).max())])
        x = fb

    final = shooting.residuals(x, sens=False)
    if final is None:
        raise ConvergenceError("converged iterate leaves the angle range")
    r = final[0]

    theta, integral, total = shooting.assemble(x)
    c = float(x[m])
    v_mean = simpson_panels(y, integral) / period
    v = integral - v_mean
    profile = FrontProfile(period=period, y=y, v=v, slope=np.tan(theta), angle=theta)

    panel_rate = step_rate[::2].copy()
    widths = y[2::2] - y[:-2:2]
    colloc = np.abs(mu * (theta[2::2] - theta[:-2:2]) / widths
                    - (-c + panel_rate / np.cos(theta[1::2])))

    return FrontSolution(
        speed=c,
        profile=profile,
        residual_periodicity=float(np.abs(r[:m]).max()),
        residual_mean=float(r[m] / period),
        collocation_defect=float(colloc.max()),
        iterations=iterations,
        segments=m,
        panel_rate=panel_rate,
    )


def _solve_nested(shooting: _Shooting, rate: PeriodicField, mu: float):
    """Single-segment fallback: bisection on c inside (the periodicity defect
    decreases in c), bracketing on the start angle outside."""
    from scipy.optimize import brentq

    def defect_period(c, theta0):
        status, th_end, _iv, *_ = shooting.segment(0, c, theta0, False)
        return 10.0 * status if status != 0 else th_end - theta0

    def speed_for(theta0):
        lo = rate.min * (1.0 - 1e-12)
        hi = rate.max / max(math.cos(theta0), 1e-6) + mu / rate.period
        f_hi = defect_period(hi, theta0)
        for _ in range(60):
            if f_hi < 0.0:
                break
            hi *= 2.0
            f_hi = defect_period(hi, theta0)
        else:
            return None
        if defect_period(lo, theta0) <= 0.0:
            return None
        return brentq(lambda c: defect_period(c, theta0), lo, hi, xtol=1e-15)

    def mean_defect(theta0):
        c = speed_for(theta0)
        if c is None:
            return math.nan
        status, _th, iv, *_ = shooting.segment(0, c, theta0, False)
        return iv if status == 0 else math.nan

    span = 0.05
    for _ in range(40):
        f_lo, f_hi = mean_defect(-span), mean_defect(span)
        if math.isnan(f_lo) or math.isnan(f_hi):
            return None
        if f_lo * f_hi <= 0.0:
            break
        span *= 1.6
        if span >= _THETA_GUARD:
            return None
    else:
        return None
    theta0 = brentq(mean_defect, -span, span, xtol=1e-15)
    return np.array([theta0, speed_for(theta0)])


def speed_identity_residual(sol: FrontSolution, rate: PeriodicField) -> float:
    """|c - mean of H sqrt(1 + v_y^2)| by Simpson quadrature on the grid.

    For a converged solution the speed equals the arclength-weighted mean of
    the rate; the quadrature here is independent of the shooting residuals.
    """
    y = sol.profile.y
    sec = 1.0 / np.cos(sol.profile.angle)
    mids = y[1::2]
    panel_rate = np.asarray(rate(mids), dtype=float)
    widths = y[2::2] - y[:-2:2]
    integral = np.dot(widths * panel_rate,
                      sec[:-2:2] + 4.0 * sec[1::2] + sec[2::2]) / 6.0
    return abs(sol.speed - integral / sol.profile.period)


def arctan_bound_check(sol: FrontSolution, mu: float, tol: float = 1e-9) -> bool:
    """Certificate: sup |arctan v_y| <= 2 c Y / mu, up to ``tol``."""
    bound = 2.0 * sol.speed * sol.profile.period / mu
    return float(np.abs(sol.profile.angle).max()) <= bound + tol
