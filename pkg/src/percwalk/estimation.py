"""Estimating the percolation parameter from an event frequency.

For an event E observed ``n`` times out of ``n`` runs, the plug-in
frequency has variance ``P_E (1 - P_E) / n``.  Propagating that through the
curve ``P_E(p)`` gives ``dp = sqrt(P_E (1 - P_E) / n) / |dP_E/dp|``, so a
target precision ``eps`` needs at least

    n_min = P_E (1 - P_E) / (eps^2 (dP_E/dp)^2)

runs.  ``P_E(p)`` is simulated (exact per-lattice probabilities averaged
over lattices), fitted with a polynomial, and differentiated analytically.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .inputs import parse_input
from .lattice import Regime
from .observables import mean_and_stderr

DEFAULT_EPSILON = 0.01
DEFAULT_DEGREE = 5
UNRELIABLE_P_TOL = 1e-3
UNRELIABLE_SLOPE_TOL = 1e-3

PLUGIN_NOTE = (
    "P(1-P) is evaluated with the simulated P; this plug-in estimate is "
    "biased for finite A and consistent as A grows"
)


class EventKind(str, enum.Enum):
    BOTH_AT_ORIGIN = "both_at_origin"
    SINGLE_AT_ORIGIN = "single_at_origin"
    BOTH_SAME_SITE = "both_same_site"


@dataclass(frozen=True)
class EventSpec:
    kind: EventKind
    input_name: str
    steps: int
    regime: Regime | str = Regime.STATIC

    def __post_init__(self):
        spec = parse_input(self.input_name)
        if spec.is_single != (self.kind is EventKind.SINGLE_AT_ORIGIN):
            raise ValueError(f"event {self.kind.value} does not fit input {self.input_name}")
        if self.kind is not EventKind.BOTH_SAME_SITE and self.steps % 2 == 0:
            warnings.warn(
                "origin events with an even number of steps do not vanish at p=1; "
                "an odd step count is recommended",
                stacklevel=2,
            )

    @property
    def quantity(self) -> str:
        return "M" if self.kind is EventKind.BOTH_SAME_SITE else "C"

    @classmethod
    def origin_event(cls, input_name: str, steps: int, regime=Regime.STATIC) -> "EventSpec":
        kind = EventKind.SINGLE_AT_ORIGIN if parse_input(input_name).is_single else EventKind.BOTH_AT_ORIGIN
        return cls(kind, input_name, steps, regime)


def event_probability_samples(event: EventSpec, p_grid, averages: int, master_seed: int, workers: int = 1):
    from .montecarlo import sample_observables

    return sample_observables(
        [event.input_name], [event.quantity], event.regime, p_grid, event.steps,
        averages, master_seed, workers,
    )[event.input_name][event.quantity]


def event_probability_sweep(event: EventSpec, p_grid, averages: int, master_seed: int, workers: int = 1):
    """Mean and standard error of P(E | lattice) over ``averages`` lattices per p."""
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.ndim != 1 or p_grid.size < 2 or np.any(np.diff(p_grid) <= 0):
        raise ValueError("p grid must be strictly increasing with at least two points")
    if averages < 2:
        raise ValueError("need at least two realizations")
    samples = event_probability_samples(event, p_grid, averages, master_seed, workers)
    return mean_and_stderr(samples)


def polynomial_fit(xs, ys, degree: int = DEFAULT_DEGREE) -> Polynomial:
    """Least-squares polynomial; the abscissa is mapped onto [-1, 1] internally."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size <= degree:
        raise ValueError(f"{xs.size} points cannot determine a degree-{degree} fit")
    return Polynomial.fit(xs, ys, degree)


def estimator_variance(p_event: float, n: int) -> float:
    if not 0 <= p_event <= 1:
        raise ValueError("event probability outside [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    return p_event * (1 - p_event) / n


def n_min(p_event, slope, epsilon: float = DEFAULT_EPSILON):
    """Lower bound on the number of runs for precision ``epsilon``.

    A flat curve (zero slope) gives ``inf``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p_event = np.asarray(p_event, dtype=float)
    slope = np.asarray(slope, dtype=float)
    num = p_event * (1 - p_event)
    den = epsilon**2 * slope**2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def unreliable(p_event, slope) -> np.ndarray | bool:
    """Points where linear error propagation is not trustworthy.

    Near P_E = 0 or 1 the bound collapses towards zero runs, and near a
    flat curve it blows up; neither value should be read literally.
    """
    p_event = np.asarray(p_event, dtype=float)
    slope = np.asarray(slope, dtype=float)
    flag = (p_event < UNRELIABLE_P_TOL) | (p_event > 1 - UNRELIABLE_P_TOL) | (np.abs(slope) < UNRELIABLE_SLOPE_TOL)
    return bool(flag) if flag.ndim == 0 else flag


@dataclass(frozen=True, eq=False)
class EstimationCurve:
    input_name: str
    event: str
    p_grid: np.ndarray
    p_sim: np.ndarray
    stderr: np.ndarray
    fit: Polynomial
    fitted: np.ndarray
    slope: np.ndarray
    n_min: np.ndarray
    unreliable: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.p_sim - self.fitted)))

    @property
    def coefficients(self) -> list[float]:
        """Coefficients in the plain power basis of p."""
        return [float(c) for c in self.fit.convert().coef]


@dataclass(frozen=True)
class Window:
    input_name: str
    p_lo: float
    p_hi: float


@dataclass(frozen=True, eq=False)
class EstimationReport:
    steps: int
    regime: str
    averages: int
    master_seed: int
    epsilon: float
    degree: int
    curves: dict[str, EstimationCurve]
    windows: list[Window] = field(default_factory=list)
    plugin_note: str = PLUGIN_NOTE

    @property
    def p_grid(self) -> np.ndarray:
        return next(iter(self.curves.values())).p_grid

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "regime": self.regime,
            "averages": self.averages,
            "master_seed": self.master_seed,
            "epsilon": self.epsilon,
            "fit_degree": self.degree,
            "grid_step": float(self.p_grid[1] - self.p_grid[0]),
            "plugin_note": self.plugin_note,
            "curves": {
                name: {
                    "event": c.event,
                    "p": c.p_grid.tolist(),
                    "p_sim": c.p_sim.tolist(),
                    "stderr": c.stderr.tolist(),
                    "fit_coefficients": c.coefficients,
                    "fit_max_residual": c.max_residual,
                    "slope": c.slope.tolist(),
                    "n_min": [None if not np.isfinite(v) else float(v) for v in c.n_min],
                    "unreliable": c.unreliable.tolist(),
                }
                for name, c in self.curves.items()
            },
            "optimality_windows": [
                {"input": w.input_name, "p_lo": w.p_lo, "p_hi": w.p_hi} for w in self.windows
            ],
        }


def build_curve(input_name: str, event: str, p_grid, p_sim, stderr, epsilon, degree) -> EstimationCurve:
    fit = polynomial_fit(p_grid, p_sim, degree)
    slope = fit.deriv()(p_grid)
    # the plug-in variance uses the simulated values, not the fit
    return EstimationCurve(
        input_name=input_name,
        event=event,
        p_grid=np.asarray(p_grid, dtype=float),
        p_sim=np.asarray(p_sim),
        stderr=np.asarray(stderr),
        fit=fit,
        fitted=fit(p_grid),
        slope=slope,
        n_min=n_min(np.clip(p_sim, 0, 1), slope, epsilon),
        unreliable=unreliable(p_sim, slope),
    )


def optimality_windows(curves: dict[str, EstimationCurve] | list[EstimationCurve]) -> list[Window]:
    """Contiguous p ranges in which each input needs the fewest runs.

    Unreliable points are excluded; a grid point where every input is
    unreliable has no winner and splits windows.
    """
    curves = list(curves.values()) if isinstance(curves, dict) else list(curves)
    grid = curves[0].p_grid
    for c in curves[1:]:
        if not np.array_equal(c.p_grid, grid):
            raise ValueError("curves must share one p grid")
    table = np.array([np.where(c.unreliable, np.inf, c.n_min) for c in curves])
    winners: list[int | None] = []
    for col in table.T:
        winners.append(int(np.argmin(col)) if np.isfinite(col).any() else None)
    windows: list[Window] = []
    start = 0
    for k in range(1, len(grid) + 1):
        if k == len(grid) or winners[k] != winners[start]:
            if winners[start] is not None:
                windows.append(Window(curves[winners[start]].input_name, float(grid[start]), float(grid[k - 1])))
            start = k
    return windows


DEFAULT_INPUTS = ("single:phi+", "phi_plus", "psi_minus", "psi_s")


def estimate(
    steps: int = 7,
    regime=Regime.STATIC,
    p_grid=None,
    averages: int = 20000,
    master_seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
    degree: int = DEFAULT_DEGREE,
    inputs=DEFAULT_INPUTS,
    workers: int = 1,
) -> EstimationReport:
    """Origin-event estimation pipeline for several inputs on common lattices."""
    from .montecarlo import sample_observables

    p_grid = np.linspace(0, 1, 41) if p_grid is None else np.asarray(p_grid, dtype=float)
    regime = Regime.parse(regime)
    events = {name: EventSpec.origin_event(name, steps, regime) for name in inputs}
    samples = sample_observables(list(inputs), ["C"], regime, p_grid, steps, averages, master_seed, workers)
    curves = {}
    for name in inputs:
        mean, err = mean_and_stderr(samples[name]["C"])
        curves[name] = build_curve(name, events[name].kind.value, p_grid, mean, err, epsilon, degree)
    return EstimationReport(
        steps, regime.value, averages, master_seed, epsilon, degree, curves, optimality_windows(curves)
    )
