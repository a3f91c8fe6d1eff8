"""Cyclic restoration controller.

One component of the density matrix is corrected per time step, in the fixed
`Component` order, by solving a scalar transcendental equation for the pulse
area applied at that step. Per-component clocks track decoherence age and
accumulated pulses since each component's last exact restoration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .evolution import THERMAL_CONSISTENT, component_response, evolve
from .kernels import Regime
from .noise import NoiseConfig, PulseNoise
from .state import COMPONENT_LABELS, Component, DensityMatrix

N_COMPONENTS = 8


class RootSelection(Enum):
    SMALLEST_MAGNITUDE = "smallest-magnitude"


class NoRootInInterval(RuntimeError):
    """The restoration equation has no root in the search interval.

    Signals that exact restoration is impossible at this pulse rate; the run
    aborts rather than degrading to best-effort correction.
    """


class NonConvergence(RuntimeError):
    """Root refinement exhausted its iteration budget."""


class NotStabilized(RuntimeError):
    """No cycle after which the pulse sequence repeats with period 8."""


@dataclass(frozen=True)
class SolverConfig:
    interval_halfwidth: float = math.pi / 2.0
    root_tol: float = 1e-12          # on the equation residual
    max_iter: int = 200
    n_scan: int = 64                 # uniform subintervals scanned for sign changes
    selection: RootSelection = RootSelection.SMALLEST_MAGNITUDE

    def __post_init__(self):
        if self.interval_halfwidth <= 0 or self.root_tol <= 0:
            raise ValueError("interval_halfwidth and root_tol must be > 0")
        if self.max_iter < 1 or self.n_scan < 2:
            raise ValueError("max_iter must be >= 1 and n_scan >= 2")


@dataclass(frozen=True)
class PulseSolution:
    value: float
    residual: float
    bracket: tuple[float, float]
    degenerate: bool = False


@dataclass(frozen=True)
class PulseRecord:
    step: int
    component: Component
    solved_I: float
    applied_I: float
    root_residual: float
    bracket: tuple[float, float]
    degenerate: bool = False


@dataclass
class ControlLedger:
    """Per-component decoherence clocks and pulse sums since last restoration.

    `intended` sums the controller's solved pulses (what it plans with);
    `applied` sums the pulses actually delivered (solved + noise). They agree
    whenever noise is disabled.
    """

    step_T: float
    step: int = 0
    ages: list[int] = field(default_factory=lambda: [0] * N_COMPONENTS)
    intended: list[float] = field(default_factory=lambda: [0.0] * N_COMPONENTS)
    applied: list[float] = field(default_factory=lambda: [0.0] * N_COMPONENTS)

    def begin_step(self) -> Component:
        self.step += 1
        for e in range(N_COMPONENTS):
            self.ages[e] += 1
        return Component((self.step - 1) % N_COMPONENTS)

    def accumulate(self, solved: float, applied: float) -> None:
        for e in range(N_COMPONENTS):
            self.intended[e] += solved
            self.applied[e] += applied

    def reset(self, idx: Component) -> None:
        self.ages[idx] = 0
        self.intended[idx] = 0.0
        self.applied[idx] = 0.0


def _refine_root(f, a, b, fa, fb, cfg: SolverConfig) -> tuple[float, float]:
    """Hybrid secant/bisection on a sign-change bracket; stops on residual."""
    for it in range(cfg.max_iter):
        if fb != fa:
            m = b - fb * (b - a) / (fb - fa)
        else:
            m = 0.5 * (a + b)
        lo, hi = (a, b) if a < b else (b, a)
        # fall back to bisection when secant stalls near an endpoint or escapes
        if it % 2 == 1 or not (lo + 1e-17 < m < hi - 1e-17):
            m = 0.5 * (a + b)
        fm = f(m)
        if abs(fm) <= cfg.root_tol:
            return m, fm
        if (fa < 0.0) != (fm < 0.0):
            b, fb = m, fm
        else:
            a, fa = m, fm
        if abs(b - a) <= 4.0 * math.ulp(max(abs(a), abs(b), 1.0)):
            # bracket at machine width; accept the better endpoint if within tol
            x, fx = (a, fa) if abs(fa) < abs(fb) else (b, fb)
            if abs(fx) <= cfg.root_tol:
                return x, fx
    raise NonConvergence(
        f"residual {min(abs(fa), abs(fb)):.3e} > {cfg.root_tol:g} "
        f"after {cfg.max_iter} iterations on [{a!r}, {b!r}]"
    )


def solve_restoration(response, pulse_sum: float, target: float,
                      cfg: SolverConfig = SolverConfig()) -> PulseSolution:
    """Solve response(pulse_sum + I) = target for the pulse I of this step.

    Scans the interval [-halfwidth, +halfwidth] for sign changes, refines each
    bracket, and returns the smallest-magnitude root (ties toward negative).
    A response that is numerically constant over the interval means the pulse
    cannot influence this component at this step (symmetry-forced components,
    or coherence factors decayed below resolution): the zero pulse is returned
    and flagged degenerate. A non-constant response with no root raises
    NoRootInInterval.
    """
    hw = cfg.interval_halfwidth
    xs = [(-hw) + 2.0 * hw * k / cfg.n_scan for k in range(cfg.n_scan + 1)]
    fs = [response(pulse_sum + x) - target for x in xs]
    spread = max(fs) - min(fs)
    if spread <= cfg.root_tol:
        return PulseSolution(
            value=0.0,
            residual=response(pulse_sum) - target,
            bracket=(-hw, hw),
            degenerate=True,
        )
    roots: list[tuple[float, float, tuple[float, float]]] = []
    for x, fx in zip(xs, fs):
        if abs(fx) <= cfg.root_tol:
            roots.append((x, fx, (x, x)))
    f = lambda x: response(pulse_sum + x) - target
    for i in range(cfg.n_scan):
        fa, fb = fs[i], fs[i + 1]
        if abs(fa) <= cfg.root_tol or abs(fb) <= cfg.root_tol:
            continue  # endpoint already registered as a root
        if (fa < 0.0) == (fb < 0.0):
            continue
        x, fx = _refine_root(f, xs[i], xs[i + 1], fa, fb, cfg)
        roots.append((x, fx, (xs[i], xs[i + 1])))
    if not roots:
        raise NoRootInInterval(
            f"no restoring pulse in [{-hw:g}, {hw:g}]: response range "
            f"[{min(fs) + target:.6g}, {max(fs) + target:.6g}] does not reach "
            f"target {target:.6g}"
        )
    roots.sort(key=lambda r: (abs(r[0]), r[0]))
    value, residual, bracket = roots[0]
    return PulseSolution(value=value, residual=residual, bracket=bracket)


def solve_pulse(
    idx: Component,
    rho0: DensityMatrix,
    g_since_reset: float,
    pulse_sum: float,
    target: float,
    cfg: SolverConfig = SolverConfig(),
    regime: Regime = Regime.ADIABATIC,
    thermal_variant: str = THERMAL_CONSISTENT,
) -> PulseSolution:
    """Restoration solve for one component given its clock state."""
    response = component_response(idx, rho0, g_since_reset, regime, variant=thermal_variant)
    return solve_restoration(response, pulse_sum, target, cfg)


@dataclass(frozen=True)
class RunSetup:
    """Everything the control loop needs, resolved to plain values."""

    rho0: DensityMatrix
    regime: Regime
    step_T: float
    num_steps: int
    g_table: tuple[float, ...]       # g at k*step_T for k = 0..num_steps
    solver: SolverConfig = SolverConfig()
    noise: NoiseConfig = NoiseConfig()
    thermal_variant: str = THERMAL_CONSISTENT
    hermitize: bool = False

    def __post_init__(self):
        if self.step_T <= 0:
            raise ValueError(f"step_T must be > 0, got {self.step_T!r}")
        if self.num_steps < 1:
            raise ValueError(f"num_steps must be >= 1, got {self.num_steps!r}")
        if len(self.g_table) < self.num_steps + 1:
            raise ValueError(
                f"g_table must cover ages 0..{self.num_steps}, got {len(self.g_table)} entries"
            )


@dataclass(frozen=True)
class StepState:
    """Post-step snapshot: bookkept component values and ledger state."""

    step: int
    values: tuple[float, ...]
    ages: tuple[int, ...]
    intended_sums: tuple[float, ...]
    applied_sums: tuple[float, ...]


@dataclass
class RunResult:
    setup: RunSetup
    pulses: list[PulseRecord]
    states: list[StepState]
    aborted_at: int | None = None
    error: str | None = None

    @property
    def completed(self) -> bool:
        return self.aborted_at is None


def _bookkept_value(setup: RunSetup, e: int, age: int, applied_sum: float) -> float:
    rho = evolve(
        setup.rho0,
        setup.g_table[age],
        applied_sum,
        setup.regime,
        variant=setup.thermal_variant,
        hermitize=setup.hermitize,
    )
    return rho.component(e)


def step(ledger: ControlLedger, setup: RunSetup, noise: PulseNoise) -> tuple[PulseRecord, StepState]:
    """Advance one control step: solve, apply (with noise), reset the clock.

    The corrected component's clock returns to zero, so its bookkept post-step
    value is exactly its reference value; every other component ages by one
    step and absorbs the applied pulse into its running sum.
    """
    idx = ledger.begin_step()
    g = setup.g_table[ledger.ages[idx]]
    target = setup.rho0.component(idx)
    solution = solve_pulse(
        idx,
        setup.rho0,
        g,
        ledger.intended[idx],
        target,
        setup.solver,
        setup.regime,
        setup.thermal_variant,
    )
    applied = noise.perturb(solution.value)
    ledger.accumulate(solution.value, applied)
    ledger.reset(idx)
    record = PulseRecord(
        step=ledger.step,
        component=idx,
        solved_I=solution.value,
        applied_I=applied,
        root_residual=solution.residual,
        bracket=solution.bracket,
        degenerate=solution.degenerate,
    )
    values = tuple(
        _bookkept_value(setup, e, ledger.ages[e], ledger.applied[e])
        for e in range(N_COMPONENTS)
    )
    state = StepState(
        step=ledger.step,
        values=values,
        ages=tuple(ledger.ages),
        intended_sums=tuple(ledger.intended),
        applied_sums=tuple(ledger.applied),
    )
    return record, state


def run(setup: RunSetup) -> RunResult:
    """Run the full control loop; abort on the first solver failure, keeping
    the partial trajectory and the failing step."""
    ledger = ControlLedger(step_T=setup.step_T)
    noise = PulseNoise(setup.noise)
    result = RunResult(setup=setup, pulses=[], states=[])
    for _ in range(setup.num_steps):
        try:
            record, state = step(ledger, setup, noise)
        except (NoRootInInterval, NonConvergence) as exc:
            idx = (ledger.step - 1) % N_COMPONENTS
            result.aborted_at = ledger.step
            result.error = (
                f"{type(exc).__name__}: step {ledger.step}, "
                f"component {COMPONENT_LABELS[idx]} "
                f"(age {ledger.ages[idx]}, pulse sum {ledger.intended[idx]!r}): {exc}"
            )
            return result
        result.pulses.append(record)
        result.states.append(state)
    return result


def replay_template(setup: RunSetup, template) -> RunResult:
    """Open-loop replay of a fixed 8-pulse template (no solving).

    The ledger bookkeeping (ages, sums, per-step resets) is identical to the
    closed-form run; only the pulse values are taken from the template.
    """
    template = tuple(float(v) for v in template)
    if len(template) != N_COMPONENTS:
        raise ValueError(f"template must have 8 pulses, got {len(template)}")
    ledger = ControlLedger(step_T=setup.step_T)
    noise = PulseNoise(setup.noise)
    result = RunResult(setup=setup, pulses=[], states=[])
    for _ in range(setup.num_steps):
        idx = ledger.begin_step()
        solved = template[idx]
        applied = noise.perturb(solved)
        ledger.accumulate(solved, applied)
        ledger.reset(idx)
        result.pulses.append(
            PulseRecord(
                step=ledger.step,
                component=idx,
                solved_I=solved,
                applied_I=applied,
                root_residual=float("nan"),
                bracket=(solved, solved),
                degenerate=False,
            )
        )
        values = tuple(
            _bookkept_value(setup, e, ledger.ages[e], ledger.applied[e])
            for e in range(N_COMPONENTS)
        )
        result.states.append(
            StepState(
                step=ledger.step,
                values=values,
                ages=tuple(ledger.ages),
                intended_sums=tuple(ledger.intended),
                applied_sums=tuple(ledger.applied),
            )
        )
    return result


@dataclass(frozen=True)
class StabilizationReport:
    first_stable_cycle: int            # 1-based cycle index
    template: tuple[float, ...]        # the 8 applied pulses of that cycle


def detect_stabilization(pulses: list[PulseRecord], tol: float = 1e-6) -> StabilizationReport:
    """Earliest cycle c with |I(k) - I(k+8)| <= tol for every step k in cycles >= c.

    Judged on the pulses as applied, so noisy runs do not spuriously report a
    periodic template.
    """
    n_cycles = len(pulses) // N_COMPONENTS
    if n_cycles < 3:
        raise ValueError(f"need at least 3 full cycles of records, got {n_cycles}")
    values = [p.applied_I for p in pulses[: n_cycles * N_COMPONENTS]]
    for cycle in range(1, n_cycles):
        start = (cycle - 1) * N_COMPONENTS
        if all(
            abs(values[k] - values[k + N_COMPONENTS]) <= tol
            for k in range(start, len(values) - N_COMPONENTS)
        ):
            template = tuple(values[start : start + N_COMPONENTS])
            return StabilizationReport(first_stable_cycle=cycle, template=template)
    raise NotStabilized(
        f"no period-8 pulse template within tolerance {tol:g} over {n_cycles} cycles"
    )
