"""Periodic striated media: layered parameter fields and combustion rates.

A medium is described by three positive periodic coefficient fields
(thermal diffusivity, heat capacity, heat release fraction) together with
a combustion rate giving the normal burning speed as a function of layer
position and front temperature.  All fields share a single period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PeriodicField",
    "CombustionRate",
    "ArrheniusRate",
    "TabulatedRate",
    "CallableRate",
    "MediumSpec",
    "rate_at_temperature",
    "effective_rate",
    "SmallPeriodCheck",
    "check_small_period",
    "AssumptionCheck",
    "AssumptionReport",
    "validate_assumptions",
]


@dataclass(frozen=True)
class PeriodicField:
    """Piecewise-constant periodic function of one spatial variable.

    Layer ``i`` starts at ``breakpoints[i]`` and carries ``values[i]``; the
    last layer extends to ``period``.  Evaluation at a breakpoint returns the
    right-limit value, so ``field(0.0) == values[0]`` and
    ``field(period) == values[0]``.
    """

    period: float
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bps = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if self.period <= 0.0:
            raise ValueError("period must be positive")
        if bps.ndim != 1 or vals.ndim != 1 or bps.size != vals.size:
            raise ValueError("breakpoints and values must be 1-d and of equal length")
        if bps.size == 0:
            raise ValueError("field needs at least one layer")
        if bps[0] != 0.0:
            raise ValueError("first breakpoint must be 0")
        if np.any(np.diff(bps) <= 0.0) or bps[-1] >= self.period:
            raise ValueError("breakpoints must increase strictly within [0, period)")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float, period: float = 1.0) -> "PeriodicField":
        return cls(period, np.array([0.0]), np.array([float(value)]))

    @classmethod
    def from_layers(
        cls,
        values: Sequence[float],
        widths: Sequence[float] | None = None,
        period: float = 1.0,
    ) -> "PeriodicField":
        """Build a layered field from widths (equal widths when omitted)."""
        vals = np.asarray(values, dtype=float)
        if widths is None:
            w = np.full(vals.size, period / vals.size)
        else:
            w = np.asarray(widths, dtype=float)
            if w.size != vals.size:
                raise ValueError("widths and values must have equal length")
            if not math.isclose(float(w.sum()), period, rel_tol=1e-12, abs_tol=1e-12):
                raise ValueError("layer widths must sum to the period")
        bps = np.concatenate([[0.0], np.cumsum(w)[:-1]])
        return cls(period, bps, vals)

    @classmethod
    def from_samples(cls, samples: Sequence[float], period: float = 1.0) -> "PeriodicField":
        """Sampled table: uniform cells, each sample read as its cell's midpoint value."""
        vals = np.asarray(samples, dtype=float)
        bps = period * np.arange(vals.size) / vals.size
        return cls(period, bps, vals)

    def layer_index(self, y):
        yw = np.mod(y, self.period)
        return np.searchsorted(self.breakpoints, yw, side="right") - 1

    def __call__(self, y):
        out = self.values[self.layer_index(y)]
        if np.isscalar(y):
            return float(out)
        return out

    @property
    def widths(self) -> np.ndarray:
        edges = np.concatenate([self.breakpoints, [self.period]])
        return np.diff(edges)

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def mean(self) -> float:
        return float(np.dot(self.widths, self.values) / self.period)

    def cumulative(self, y):
        """Exact antiderivative F(y) = integral of the field from 0 to y.

        Periodic extension: F(y + period) = F(y) + period * mean.
        """
        y_arr = np.asarray(y, dtype=float)
        k = np.floor(y_arr / self.period)
        yw = y_arr - k * self.period
        edges = np.concatenate([self.breakpoints, [self.period]])
        prefix = np.concatenate([[0.0], np.cumsum(self.widths * self.values)])
        idx = np.clip(np.searchsorted(edges, yw, side="right") - 1, 0, self.values.size - 1)
        f = prefix[idx] + (yw - edges[idx]) * self.values[idx]
        f = f + k * prefix[-1]
        if np.isscalar(y):
            return float(f)
        return f

    def rescale(self, s: float) -> "PeriodicField":
        """Field y -> f(y/s) with period s * period (layers stretched by s)."""
        if s <= 0.0:
            raise ValueError("scale factor must be positive")
        return PeriodicField(self.period * s, self.breakpoints * s, self.values.copy())

    def shifted(self, delta: float) -> "PeriodicField":
        """Field y -> f(y - delta)."""
        bps = np.mod(self.breakpoints + delta, self.period)
        order = np.argsort(bps, kind="stable")
        bps, vals = bps[order], self.values[order]
        if bps[0] != 0.0:
            # the layer active at y=0 is the one that wrapped past the period
            bps = np.concatenate([[0.0], bps])
            vals = np.concatenate([[vals[-1]], vals])
        return PeriodicField(self.period, bps, vals)


class CombustionRate:
    """Base interface for combustion rates R(y, T)."""

    period: float
    y_breakpoints: np.ndarray
    r_max: float

    def value(self, y, temperature):
        raise NotImplementedError

    def rescale(self, s: float) -> "CombustionRate":
        raise NotImplementedError

    def with_floor(self, floor: float) -> "CallableRate":
        """Truncated rate max(R, floor), a regularization for degenerate rates."""
        base = self
        return CallableRate(
            lambda y, T: np.maximum(base.value(y, T), floor),
            r_max=max(self.r_max, floor),
            period=self.period,
            y_breakpoints=self.y_breakpoints,
        )

    @staticmethod
    def _check_temperature(temperature):
        t = np.asarray(temperature, dtype=float)
        if np.any(t <= 0.0):
            raise ValueError("temperature must be positive")
        return t


@dataclass(frozen=True)
class ArrheniusRate(CombustionRate):
    """Rate prefactor(y) * exp(-activation(y) / T); nondecreasing in T."""

    prefactor: PeriodicField
    activation: PeriodicField

    def __post_init__(self):
        if self.prefactor.period != self.activation.period:
            raise ValueError("prefactor and activation must share a period")
        if self.prefactor.min <= 0.0:
            raise ValueError("prefactor must be positive")
        if self.activation.min < 0.0:
            raise ValueError("activation must be nonnegative (rate unbounded otherwise)")

    @property
    def period(self) -> float:
        return self.prefactor.period

    @property
    def y_breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self.prefactor.breakpoints, self.activation.breakpoints]))

    @property
    def r_max(self) -> float:
        # sup over T > 0 of A exp(-E/T) is A itself (E >= 0)
        return self.prefactor.max

    def value(self, y, temperature):
        t = self._check_temperature(temperature)
        out = self.prefactor(y) * np.exp(-self.activation(y) / t)
        if np.isscalar(y) and np.isscalar(temperature):
            return float(out)
        return out

    def rescale(self, s: float) -> "ArrheniusRate":
        return ArrheniusRate(self.prefactor.rescale(s), self.activation.rescale(s))


@dataclass(frozen=True)
class TabulatedRate(CombustionRate):
    """Rate sampled on layers x temperature grid, linear in T, clamped at the ends.

    Rows of ``table`` correspond to the y-layers (one per breakpoint), columns
    to the increasing ``temperatures`` grid.  Rows must be nondecreasing so the
    interpolated rate stays monotone in T.
    """

    period: float
    y_breakpoints: np.ndarray
    temperatures: np.ndarray
    table: np.ndarray

    def __post_init__(self):
        bps = np.atleast_1d(np.asarray(self.y_breakpoints, dtype=float))
        temps = np.atleast_1d(np.asarray(self.temperatures, dtype=float))
        tab = np.atleast_2d(np.asarray(self.table, dtype=float))
        if bps[0] != 0.0 or np.any(np.diff(bps) <= 0.0) or bps[-1] >= self.period:
            raise ValueError("y_breakpoints must increase strictly within [0, period)")
        if np.any(temps <= 0.0) or np.any(np.diff(temps) <= 0.0):
            raise ValueError("temperature grid must be positive and increasing")
        if tab.shape != (bps.size, temps.size):
            raise ValueError("table must have shape (n_layers, n_temperatures)")
        if np.any(tab <= 0.0):
            raise ValueError("rate samples must be positive")
        if np.any(np.diff(tab, axis=1) < 0.0):
            raise ValueError("rate samples must be nondecreasing in T")
        object.__setattr__(self, "y_breakpoints", bps)
        object.__setattr__(self, "temperatures", temps)
        object.__setattr__(self, "table", tab)

    @property
    def r_max(self) -> float:
        return float(self.table.max())

    def value(self, y, temperature):
        t = self._check_temperature(temperature)
        layer = np.searchsorted(self.y_breakpoints, np.mod(y, self.period), side="right") - 1
        tc = np.clip(t, self.temperatures[0], self.temperatures[-1])
        j = np.clip(np.searchsorted(self.temperatures, tc, side="right") - 1, 0,
                    self.temperatures.size - 2)
        t0, t1 = self.temperatures[j], self.temperatures[j + 1]
        w = (tc - t0) / (t1 - t0)
        out = (1.0 - w) * self.table[layer, j] + w * self.table[layer, j + 1]
        if np.isscalar(y) and np.isscalar(temperature):
            return float(out)
        return out

    def rescale(self, s: float) -> "TabulatedRate":
        return TabulatedRate(self.period * s, self.y_breakpoints * s,
                             self.temperatures.copy(), self.table.copy())


@dataclass(frozen=True)
class CallableRate(CombustionRate):
    """Rate backed by an arbitrary function of (y, T).

    Convenient for closed-form rates in experiments and tests; the on-disk
    medium format only supports the Arrhenius and tabulated variants.  The
    function must broadcast over numpy arrays, ``r_max`` must be a true upper
    bound, and ``y_breakpoints`` must list the discontinuities in y.
    """

    fn: Callable
    r_max: float
    period: float = 1.0
    y_breakpoints: np.ndarray = field(default_factory=lambda: np.array([0.0]))

    def __post_init__(self):
        object.__setattr__(self, "y_breakpoints",
                           np.atleast_1d(np.asarray(self.y_breakpoints, dtype=float)))

    def value(self, y, temperature):
        y_arr = np.asarray(y, dtype=float)
        t = self._check_temperature(temperature)
        out = np.asarray(self.fn(y_arr, t), dtype=float)
        shape = np.broadcast_shapes(y_arr.shape, t.shape)
        out = np.broadcast_to(out, shape)
        if np.isscalar(y) and np.isscalar(temperature):
            return float(out)
        return out.copy()

    def rescale(self, s: float) -> "CallableRate":
        base = self.fn
        return CallableRate(lambda y, T: base(np.asarray(y) / s, T),
                            r_max=self.r_max, period=self.period * s,
                            y_breakpoints=self.y_breakpoints * s)


@dataclass(frozen=True)
class MediumSpec:
    """Periodic medium: coefficient fields, combustion rate, shared period."""

    diffusivity: PeriodicField
    heat_capacity: PeriodicField
    heat_release: PeriodicField
    rate: CombustionRate

    def __post_init__(self):
        periods = {self.diffusivity.period, self.heat_capacity.period,
                   self.heat_release.period, self.rate.period}
        if len(periods) != 1:
            raise ValueError(f"all fields must share one period, got {sorted(periods)}")

    @property
    def period(self) -> float:
        return self.diffusivity.period

    @property
    def limit_trace_temperature(self) -> float:
        """Front temperature of the homogenized wave: mean(g) / mean(b)."""
        return self.heat_release.mean / self.heat_capacity.mean

    @property
    def y_breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([
            self.diffusivity.breakpoints, self.heat_capacity.breakpoints,
            self.heat_release.breakpoints, self.rate.y_breakpoints,
        ]))

    def rescale(self, s: float) -> "MediumSpec":
        """Medium with all fields mapped y -> f(y/s); period becomes s * period."""
        return MediumSpec(self.diffusivity.rescale(s), self.heat_capacity.rescale(s),
                          self.heat_release.rescale(s), self.rate.rescale(s))


def rate_at_temperature(medium: MediumSpec, temperature: float) -> PeriodicField:
    """Combustion rate frozen at a fixed temperature, as a layered field."""
    bps = medium.rate.y_breakpoints
    edges = np.concatenate([bps, [medium.period]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = np.asarray(medium.rate.value(mids, temperature), dtype=float)
    return PeriodicField(medium.period, bps.copy(), vals)


def effective_rate(medium: MediumSpec) -> PeriodicField:
    """Rate frozen at the limiting front temperature, on the unit cell.

    Requires a period-1 medium (the rescaled unit-cell form); the result is the
    1-periodic positive field driving all homogenized-speed computations.
    """
    if abs(medium.period - 1.0) > 1e-12:
        raise ValueError("effective_rate expects a unit-cell medium (period 1)")
    return rate_at_temperature(medium, medium.limit_trace_temperature)


@dataclass(frozen=True)
class SmallPeriodCheck:
    ok: bool
    margin: float
    ratio: float
    threshold: float


def check_small_period(medium: MediumSpec, mu: float) -> SmallPeriodCheck:
    """Whether mu/period exceeds 4 R_max / pi, with the margin.

    Passing selects the strong existence regime and enables the explicit
    trace lower-bound certificate.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    ratio = mu / medium.period
    threshold = 4.0 * medium.rate.r_max / math.pi
    return SmallPeriodCheck(ok=ratio > threshold, margin=ratio - threshold,
                            ratio=ratio, threshold=threshold)


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple
    degeneracy_proxy: tuple
    degenerate_rate: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = [f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in self.checks]
        trend = "decays toward 0 (degenerate, Arrhenius-type)" if self.degenerate_rate \
            else "stays away from 0"
        lines.append(f"[info] low-temperature proxy |ln T| * essinf_y R(y, T) {trend}")
        return "\n".join(lines)


def validate_assumptions(medium: MediumSpec, t_grid) -> AssumptionReport:
    """Check the standing structural assumptions on a temperature grid.

    Periodicity and positivity of the coefficient fields, monotonicity and
    two-sided bounds of the rate, and positivity of the per-temperature
    infimum are each reported with a witness on failure.  The report also
    evaluates the low-temperature degeneracy proxy |ln T| * essinf_y R(y, T)
    on the smallest grid temperatures; rates decaying faster than any power
    of 1/|ln T| (the Arrhenius case) drive the proxy to zero, which flags
    that the small-period condition is needed for existence.
    """
    t_grid = np.sort(np.atleast_1d(np.asarray(t_grid, dtype=float)))
    if t_grid.size == 0 or t_grid[0] <= 0.0:
        raise ValueError("t_grid must be nonempty and positive")

    checks = []
    fields = {
        "a (diffusivity)": medium.diffusivity,
        "b (heat capacity)": medium.heat_capacity,
        "g (heat release)": medium.heat_release,
    }

    rng = np.random.default_rng(0)
    period_ok, period_detail = True, "eval(y + k*period) == eval(y) on random samples"
    for name, f in fields.items():
        ys = rng.uniform(0.0, medium.period, size=64)
        ks = rng.integers(-5, 6, size=64)
        if not np.array_equal(f(ys), f(ys + ks * medium.period)):
            period_ok, period_detail = False, f"{name} not exactly periodic"
            break
    checks.append(AssumptionCheck("A1 periodicity", period_ok, period_detail))

    bounds_ok, bounds_detail = True, "all coefficient layers positive"
    for name, f in fields.items():
        if f.min <= 0.0:
            layer = int(np.argmin(f.values))
            bounds_ok = False
            bounds_detail = f"{name} layer {layer} has value {f.values[layer]} <= 0"
            break
    checks.append(AssumptionCheck("A2 positive bounds", bounds_ok, bounds_detail))

    edges = np.concatenate([medium.rate.y_breakpoints, [medium.period]])
    y_samples = 0.5 * (edges[:-1] + edges[1:])
    rate_grid = np.asarray(
        [medium.rate.value(y_samples, t) for t in t_grid], dtype=float)  # (n_T, n_y)

    mono = np.all(np.diff(rate_grid, axis=0) >= -1e-14)
    detail = "R(y, .) nondecreasing on the grid" if mono else "decreasing step found"
    if not mono:
        it, iy = np.argwhere(np.diff(rate_grid, axis=0) < -1e-14)[0]
        detail = (f"R decreases between T={t_grid[it]} and T={t_grid[it + 1]} "
                  f"at y={y_samples[iy]:.6g}")
    checks.append(AssumptionCheck("A3 monotone in T", bool(mono), detail))

    checks.append(AssumptionCheck(
        "A4 periodic in y", True, "structural (layered representation)"))

    pos = rate_grid.min() > 0.0
    bounded = rate_grid.max() <= medium.rate.r_max * (1.0 + 1e-12)
    if pos and bounded:
        detail = f"0 < R <= {medium.rate.r_max:.6g} on the sample grid"
    elif not pos:
        it, iy = np.unravel_index(np.argmin(rate_grid), rate_grid.shape)
        detail = f"R({y_samples[iy]:.6g}, {t_grid[it]:.6g}) = {rate_grid[it, iy]:.3g} <= 0"
    else:
        detail = f"sample {rate_grid.max():.6g} exceeds declared bound {medium.rate.r_max:.6g}"
    checks.append(AssumptionCheck("A5 bounded and positive", bool(pos and bounded), detail))

    essinf = rate_grid.min(axis=1)
    a6 = essinf.min() > 0.0
    detail = "essinf_y R(y, T) > 0 for every grid T" if a6 else \
        f"essinf vanishes at T={t_grid[int(np.argmin(essinf))]:.6g}"
    checks.append(AssumptionCheck("A6 positive infimum per T", a6, detail))

    n_low = min(4, t_grid.size)
    proxy = tuple(
        (float(t), float(abs(math.log(t)) * essinf[i])) for i, t in enumerate(t_grid[:n_low]))
    proxy_vals = [p for _, p in proxy]
    degenerate = len(proxy_vals) >= 2 and proxy_vals[0] <= proxy_vals[-1] \
        and proxy_vals[0] < 1.0

    return AssumptionReport(checks=tuple(checks), degeneracy_proxy=proxy,
                            degenerate_rate=bool(degenerate))
