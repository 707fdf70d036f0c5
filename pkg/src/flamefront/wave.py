"""Travelling-wave solver: couples the front and temperature problems.

A travelling wave is a triplet (speed, front profile, temperature) in which
the burning rate evaluated at the front temperature reproduces the rate that
drove the front.  The solver runs a damped Picard iteration on the frozen
rate: starting from the rate at the homogenized front temperature, each pass
solves the front for (c, v), solves the temperature below that front, reads
the trace, and blends the re-evaluated rate into the iterate.  Damping
adapts to the defect history; convergence is declared on the sup-norm
fixed-point defect.

Existence is only guaranteed when mu/period is large enough relative to the
rate bound (strong curvature regime) or when the rate does not degenerate
too fast at zero temperature; outside the strong regime the caller must
acknowledge the degenerate case explicitly via ``allow_degenerate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, ConvergenceError, QuenchError
from .front import FrontConfig, FrontProfile, FrontSolution, solve_front
from .medium import MediumSpec, PeriodicField, check_small_period
from .temperature import (MeshConfig, TemperatureField, solve_temperature,
                          verify_temperature_bounds)

__all__ = [
    "FixedPointConfig",
    "Certificate",
    "TravellingWave",
    "solve_travelling_wave",
    "wave_residuals",
    "lower_bound_certificate",
    "WaveResiduals",
]


@dataclass(frozen=True)
class FixedPointConfig:
    """Picard-iteration knobs for the rate fixed point.

    ``damping`` in (0, 1] blends the new rate into the iterate; it is grown
    toward 1 while the defect shrinks and halved when it grows.
    ``rate_regularization``, when set, replaces the rate by max(rate, value)
    before iterating (useful for strongly degenerate rates).
    """

    damping: float = 0.5
    tol: float = 1e-9
    max_iter: int = 80
    allow_degenerate: bool = False
    rate_regularization: float | None = None
    quench_floor: float = 1e-300
    front: FrontConfig = field(default_factory=FrontConfig)
    mesh: MeshConfig = field(default_factory=MeshConfig)

    def __post_init__(self):
        if not (0.0 < self.damping <= 1.0):
            raise ConfigurationError("damping must lie in (0, 1]")
        if self.tol <= 0.0:
            raise ConfigurationError("tolerance must be positive")


@dataclass(frozen=True)
class Certificate:
    name: str
    passed: bool
    value: float
    bound: float
    note: str = ""

    @property
    def margin(self) -> float:
        return self.bound - self.value


@dataclass(frozen=True)
class TravellingWave:
    speed: float
    profile: FrontProfile
    temperature: TemperatureField
    trace_values: np.ndarray           # at the temperature mesh y-nodes
    frozen_rate: PeriodicField         # rate at the converged trace
    front_solution: FrontSolution
    defect: float
    defect_history: tuple
    iterations: int
    certificates: tuple

    @property
    def converged(self) -> bool:
        return True

    def certificate(self, name: str) -> Certificate:
        for cert in self.certificates:
            if cert.name == name:
                return cert
        raise KeyError(name)

    @property
    def certificates_ok(self) -> bool:
        return all(c.passed for c in self.certificates)


def _rate_grid(medium: MediumSpec, mesh: "MeshConfig") -> np.ndarray:
    """y-cells on which the frozen rate is sampled: the temperature grid."""
    from .temperature import StripMesh

    probe = StripMesh(medium, None, 1.0, replace(mesh, depth=None))
    return probe.y


def _sample_rate(medium: MediumSpec, y_nodes: np.ndarray, trace_at) -> np.ndarray:
    mids = 0.5 * (y_nodes[:-1] + y_nodes[1:])
    temps = np.asarray(trace_at(mids), dtype=float)
    return np.asarray(medium.rate.value(mids, temps), dtype=float)


def solve_travelling_wave(medium: MediumSpec, mu: float,
                          cfg: FixedPointConfig | None = None) -> TravellingWave:
    """Compute a travelling-wave triplet for the medium and curvature weight.

    Uniqueness is not assumed; the returned wave is the converged fixed point
    of the damped Picard map together with its defect history and the full
    certificate block.
    """
    cfg = cfg or FixedPointConfig()
    if mu <= 0.0:
        raise ConfigurationError("mu must be positive")

    small_period = check_small_period(medium, mu)
    if not small_period.ok and not cfg.allow_degenerate:
        raise ConfigurationError(
            f"mu/period = {small_period.ratio:.4g} does not exceed the strong-regime "
            f"threshold {small_period.threshold:.4g}; pass allow_degenerate=True to "
            "proceed under the slow-decay assumption on the rate")

    work_medium = medium
    if cfg.rate_regularization is not None:
        work_medium = MediumSpec(medium.diffusivity, medium.heat_capacity,
                                 medium.heat_release,
                                 medium.rate.with_floor(cfg.rate_regularization))

    y_nodes = _rate_grid(work_medium, cfg.mesh)
    mids = 0.5 * (y_nodes[:-1] + y_nodes[1:])
    t0 = work_medium.limit_trace_temperature
    rate_values = np.asarray(work_medium.rate.value(mids, t0), dtype=float)

    omega = cfg.damping
    defects: list[float] = []
    warm: tuple[float, float] | None = None
    front_sol: FrontSolution | None = None
    temp: TemperatureField | None = None

    for iteration in range(1, cfg.max_iter + 1):
        rate_field = PeriodicField(work_medium.period, y_nodes[:-1], rate_values)
        front_sol = solve_front(rate_field, mu, cfg.front, initial=warm)
        warm = (front_sol.speed, float(front_sol.profile.angle[0]))
        temp = solve_temperature(front_sol.speed, front_sol.profile, work_medium,
                                 cfg.mesh)
        tau_min = float(temp.trace_values.min())
        if tau_min <= cfg.quench_floor:
            raise QuenchError(
                f"front temperature collapsed to {tau_min:.3g} at iteration "
                f"{iteration}; the rate violates the positivity assumptions",
                history=defects)
        new_values = _sample_rate(work_medium, y_nodes, temp.trace_at)
        defect = omega * float(np.abs(new_values - rate_values).max())
        rate_values = (1.0 - omega) * rate_values + omega * new_values
        defects.append(defect)
        if defect < cfg.tol:
            break
        if len(defects) >= 2:
            omega = min(1.0, omega * 1.4) if defects[-1] < defects[-2] \
                else max(0.05, 0.5 * omega)
        if len(defects) >= 12 and defects[-1] > 0.5 * defects[-11]:
            raise ConvergenceError(
                "fixed-point defect plateaued over 10 iterations", history=defects)
    else:
        raise ConvergenceError(
            f"fixed point not converged in {cfg.max_iter} iterations",
            history=defects)

    # consistent returned triplet: front against the final rate, temperature
    # against that front, frozen rate from the final trace
    rate_field = PeriodicField(work_medium.period, y_nodes[:-1], rate_values)
    front_sol = solve_front(rate_field, mu, cfg.front, initial=warm)
    temp = solve_temperature(front_sol.speed, front_sol.profile, work_medium, cfg.mesh)
    tau = temp.trace_values
    frozen = PeriodicField(work_medium.period, y_nodes[:-1],
                           _sample_rate(work_medium, y_nodes, temp.trace_at))

    certs = _certificates(work_medium, mu, front_sol, temp, frozen, small_period)
    return TravellingWave(
        speed=front_sol.speed, profile=front_sol.profile, temperature=temp,
        trace_values=tau.copy(), frozen_rate=frozen, front_solution=front_sol,
        defect=defects[-1], defect_history=tuple(defects),
        iterations=len(defects), certificates=certs)


def _certificates(medium, mu, front_sol, temp, frozen, small_period):
    period = medium.period
    c = front_sol.speed
    tol = 1e-6

    certs = [
        Certificate("speed-in-rate-range", frozen.min - tol <= c <= frozen.max + tol,
                    value=c, bound=frozen.max,
                    note=f"rate range [{frozen.min:.6g}, {frozen.max:.6g}]"),
        Certificate("slope-bound",
                    front_sol.profile.sup_abs_slope
                    <= math.sqrt(max(frozen.max**2 / frozen.min**2 - 1.0, 0.0)) + tol,
                    value=front_sol.profile.sup_abs_slope,
                    bound=math.sqrt(max(frozen.max**2 / frozen.min**2 - 1.0, 0.0))),
        Certificate("angle-bound",
                    float(np.abs(front_sol.profile.angle).max())
                    <= 2.0 * c * period / mu + tol,
                    value=float(np.abs(front_sol.profile.angle).max()),
                    bound=2.0 * c * period / mu),
    ]

    bounds = verify_temperature_bounds(temp, medium, c)
    certs.append(Certificate("temperature-envelope",
                             bounds.envelope_violation <= 1e-3,
                             value=bounds.envelope_violation, bound=1e-3))
    certs.append(Certificate("gradient-energy",
                             bounds.h1_seminorm <= bounds.h1_bound + tol,
                             value=bounds.h1_seminorm, bound=bounds.h1_bound))
    certs.append(_trace_lower_bound(medium, mu, temp, small_period))
    return tuple(certs)


def _trace_lower_bound(medium, mu, temp, small_period):
    """Explicit trace floor in the strong-curvature regime, qualitative
    positivity otherwise (the general constant is not explicit)."""
    tau_min = float(temp.trace_values.min())
    if small_period.ok:
        r_max = medium.rate.r_max
        period = medium.period
        a_m, a_M = medium.diffusivity.min, medium.diffusivity.max
        b_M = medium.heat_capacity.max
        g_m = medium.heat_release.min
        floor = (g_m * a_m / (a_M * b_M)) * math.exp(
            -(2.0 * r_max * b_M * period / a_M)
            * math.tan(2.0 * r_max * period / mu))
        return Certificate("trace-lower-bound", tau_min >= floor - 1e-9,
                           value=tau_min, bound=floor,
                           note="explicit strong-regime floor")
    return Certificate("trace-lower-bound", tau_min > 0.0,
                       value=tau_min, bound=0.0,
                       note="qualitative (weak regime): trace must stay positive")


@dataclass(frozen=True)
class WaveResiduals:
    front_ode: float
    temperature_linear: float
    coupling: float

    @property
    def max(self) -> float:
        return max(self.front_ode, self.temperature_linear, self.coupling)


def wave_residuals(wave: TravellingWave, medium: MediumSpec, mu: float) -> WaveResiduals:
    """Audit residuals of the converged triplet.

    The front equation is re-evaluated with the rate frozen at the returned
    trace (midpoint collocation on the solver grid); the coupling defect
    compares that rate with the stored one and is zero by construction.
    """
    prof = wave.profile
    y = prof.y
    theta = prof.angle
    widths = y[2::2] - y[:-2:2]
    mid_y = y[1::2]
    rate_mid = np.asarray(medium.rate.value(mid_y, wave.temperature.trace_at(mid_y)),
                          dtype=float)
    colloc = np.abs(mu * (theta[2::2] - theta[:-2:2]) / widths
                    - (-wave.speed + rate_mid / np.cos(theta[1::2])))
    frozen = wave.frozen_rate
    edges = np.concatenate([frozen.breakpoints, [frozen.period]])
    cell_mids = 0.5 * (edges[:-1] + edges[1:])
    coupling = float(np.abs(
        np.asarray(frozen(cell_mids), dtype=float)
        - np.asarray(medium.rate.value(cell_mids,
                                       wave.temperature.trace_at(cell_mids)),
                     dtype=float)).max())
    return WaveResiduals(front_ode=float(colloc.max()),
                         temperature_linear=wave.temperature.linear_residual,
                         coupling=coupling)


def lower_bound_certificate(wave: TravellingWave, medium: MediumSpec,
                            mu: float) -> Certificate:
    """Trace lower-bound certificate of the returned wave (see the solver)."""
    return _trace_lower_bound(medium, mu, wave.temperature,
                              check_small_period(medium, mu))
