"""Exact stochastic simulation of the three Markov limits of the rate model.

All three processes share one structure: five jump channels acting on an
integer lattice, with state-dependent intensities.

* global(N): density process on (1/(gamma*N))Z+ x (1/N)Z+, rates of order N;
* meanfield: a single unit whose interaction term is frozen at an anchor
  (by default the deterministic fixed point), lattice (1/gamma)Z+ x Z+;
* oneunit:  the N = 1 chain on the same lattice, rates x*y, alpha*x, y, p, y/beta.

Simulation is the exact direct method: exponential waiting time at the total
rate, categorical channel choice.  States are kept as integer lattice
coordinates so non-negativity is structural and there is no float drift over
millions of jumps.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .model import ModelParams, State, stationary_point
from .ode import Trajectory

RateFn = Callable[[float, float, float], float]  # (r, n, t) -> intensity

CHANNEL_LABELS = ("stim-emission", "spont-emission", "absorption", "pumping", "leak")
# (dkr, dkn) lattice increments, common to all three processes.
CHANNEL_STEPS = ((-1, +1), (-1, +1), (+1, -1), (+1, 0), (0, -1))

DEFAULT_MAX_EVENTS = 10_000_000

_MASK64 = (1 << 64) - 1


class EventCapError(RuntimeError):
    """A simulation exceeded its event-storage cap."""


class ProcessKind(str, Enum):
    GLOBAL = "global"
    MEANFIELD = "meanfield"
    ONEUNIT = "oneunit"


class Termination(str, Enum):
    TIME_HORIZON = "TimeHorizon"
    MAX_JUMPS = "MaxJumps"
    ABSORBED = "Absorbed"


@dataclass(frozen=True)
class LatticeState:
    """Integer lattice point; physical values are kr*r_unit and kn*n_unit."""

    kr: int
    kn: int
    r_unit: Fraction
    n_unit: Fraction

    def __post_init__(self) -> None:
        if self.kr < 0 or self.kn < 0:
            raise ValueError(f"lattice coordinates must be >= 0, got ({self.kr}, {self.kn})")

    @property
    def r(self) -> float:
        return float(self.kr * self.r_unit)

    @property
    def n(self) -> float:
        return float(self.kn * self.n_unit)


@dataclass(frozen=True)
class JumpChannel:
    """One transition type: lattice increment plus raw intensity function.

    ``rate`` gives the uncensored intensity at physical state (r, n) and time
    t; the engine zeroes it whenever the jump would leave the lattice.
    """

    label: str
    dkr: int
    dkn: int
    rate: RateFn


@dataclass(frozen=True)
class ProcessSpec:
    """Immutable definition of one jump process (shareable across threads)."""

    params: ModelParams
    kind: ProcessKind
    channels: tuple[JumpChannel, ...]
    r_unit: Fraction
    n_unit: Fraction
    n_units: int = 1
    anchor: State | None = None
    time_coupled: bool = False

    def lattice_state(self, r: float, n: float) -> LatticeState:
        """Nearest lattice point to the physical state (r, n)."""
        if r < 0 or n < 0:
            raise ValueError(f"physical state must be non-negative, got ({r}, {n})")
        return LatticeState(
            kr=round(r / float(self.r_unit)),
            kn=round(n / float(self.n_unit)),
            r_unit=self.r_unit,
            n_unit=self.n_unit,
        )

    def channel_rates(self, s: LatticeState, t: float = 0.0) -> list[float]:
        """Censored intensities at ``s``: a channel that would push a
        coordinate negative contributes zero."""
        r, n = s.r, s.n
        rates = []
        for ch in self.channels:
            if s.kr + ch.dkr < 0 or s.kn + ch.dkn < 0:
                rates.append(0.0)
            else:
                rates.append(ch.rate(r, n, t))
        return rates

    def total_rate(self, s: LatticeState, t: float = 0.0) -> float:
        return sum(self.channel_rates(s, t))


@dataclass
class JumpTrajectory:
    """Event-indexed path: state *after* event i is (krs[i], kns[i]).

    ``t_end`` is the horizon actually covered: the requested time horizon
    when one was given (the final state persists up to it), otherwise the
    last event time.
    """

    spec: ProcessSpec
    initial: LatticeState
    seed: int
    times: np.ndarray
    krs: np.ndarray
    kns: np.ndarray
    channels: np.ndarray
    terminated_by: Termination
    t_end: float
    meta: dict = field(default_factory=dict)

    @property
    def n_events(self) -> int:
        return len(self.times)

    def r_values(self) -> np.ndarray:
        return self.krs * float(self.spec.r_unit)

    def n_values(self) -> np.ndarray:
        return self.kns * float(self.spec.n_unit)

    def channel_labels(self) -> list[str]:
        return [CHANNEL_LABELS[i] for i in self.channels]

    def step_times(self) -> np.ndarray:
        """Event times prefixed with t = 0 (matching step_* value arrays)."""
        return np.concatenate(([0.0], self.times))

    def step_r(self) -> np.ndarray:
        return np.concatenate(([self.initial.r], self.r_values()))

    def step_n(self) -> np.ndarray:
        return np.concatenate(([self.initial.n], self.n_values()))


def build_global(params: ModelParams, n_units: int) -> ProcessSpec:
    """N-unit density process: rates N*r*n, alpha*N*r, N*n, N*p, N*n/beta."""
    if not isinstance(n_units, int) or n_units < 1:
        raise ValueError(f"n_units must be a positive integer, got {n_units}")
    a, b, p = params.alpha, params.beta, params.p
    nf = float(n_units)
    rates: tuple[RateFn, ...] = (
        lambda r, n, t: nf * r * n,
        lambda r, n, t: a * nf * r,
        lambda r, n, t: nf * n,
        lambda r, n, t: nf * p,
        lambda r, n, t: nf * n / b,
    )
    return ProcessSpec(
        params=params,
        kind=ProcessKind.GLOBAL,
        channels=_make_channels(rates),
        r_unit=Fraction(1, n_units) / Fraction(params.gamma),
        n_unit=Fraction(1, n_units),
        n_units=n_units,
    )


def build_meanfield(
    params: ModelParams,
    anchor: State | None = None,
    reference: Trajectory | None = None,
) -> ProcessSpec:
    """Single-unit process with the interaction term frozen at ``anchor``.

    Default anchor is the deterministic fixed point, which makes the chain
    time-homogeneous.  Passing an ODE ``reference`` trajectory instead
    re-evaluates the anchor at the current jump time (piecewise-frozen
    between jumps); that variant is an uncontrolled approximation, provided
    for comparison only.

    Note the stimulated channel keeps a positive raw rate at kr = 0, where
    the jump would exit the lattice; the engine censors it there.
    """
    a, b, p = params.alpha, params.beta, params.p
    if reference is not None:
        ref_t, ref_r, ref_n = reference.t, reference.r, reference.n

        def stim(r: float, n: float, t: float) -> float:
            ra = float(np.interp(t, ref_t, ref_r))
            na = float(np.interp(t, ref_t, ref_n))
            return 0.5 * (r * na + ra * n)

        anchor_used = None
        time_coupled = True
    else:
        if anchor is None:
            anchor = stationary_point(params)
        ra, na = float(anchor[0]), float(anchor[1])
        if ra < 0 or na < 0:
            raise ValueError(f"anchor must be non-negative, got ({ra}, {na})")

        def stim(r: float, n: float, t: float) -> float:
            return 0.5 * (r * na + ra * n)

        anchor_used = State(ra, na)
        time_coupled = False

    rates: tuple[RateFn, ...] = (
        stim,
        lambda r, n, t: a * r,
        lambda r, n, t: n,
        lambda r, n, t: p,
        lambda r, n, t: n / b,
    )
    return ProcessSpec(
        params=params,
        kind=ProcessKind.MEANFIELD,
        channels=_make_channels(rates),
        r_unit=Fraction(1) / Fraction(params.gamma),
        n_unit=Fraction(1),
        anchor=anchor_used,
        time_coupled=time_coupled,
    )


def build_oneunit(params: ModelParams) -> ProcessSpec:
    """The N = 1 chain: rates x*y, alpha*x, y, p, y/beta on (1/gamma)Z+ x Z+."""
    a, b, p = params.alpha, params.beta, params.p
    rates: tuple[RateFn, ...] = (
        lambda r, n, t: r * n,
        lambda r, n, t: a * r,
        lambda r, n, t: n,
        lambda r, n, t: p,
        lambda r, n, t: n / b,
    )
    return ProcessSpec(
        params=params,
        kind=ProcessKind.ONEUNIT,
        channels=_make_channels(rates),
        r_unit=Fraction(1) / Fraction(params.gamma),
        n_unit=Fraction(1),
    )


def _make_channels(rates: Sequence[RateFn]) -> tuple[JumpChannel, ...]:
    return tuple(
        JumpChannel(label=lbl, dkr=dkr, dkn=dkn, rate=fn)
        for (lbl, (dkr, dkn), fn) in zip(CHANNEL_LABELS, CHANNEL_STEPS, rates)
    )


def next_jump(
    spec: ProcessSpec,
    s: LatticeState,
    rng: np.random.Generator,
    t: float = 0.0,
) -> tuple[float, int] | None:
    """Draw (waiting time, channel index) at state ``s``, or None if absorbed.

    Consumes exactly two draws (one exponential, one uniform) per call, so
    trajectories are reproducible from the seed and draw count alone.
    """
    rates = spec.channel_rates(s, t)
    total = sum(rates)
    if total <= 0.0:
        return None
    wait = rng.standard_exponential() / total
    u = rng.random() * total
    acc = 0.0
    for i, rate in enumerate(rates):
        acc += rate
        if u < acc:
            return wait, i
    return wait, len(rates) - 1  # u landed on the top edge by round-off


def simulate(
    spec: ProcessSpec,
    initial: LatticeState,
    *,
    t_end: float | None = None,
    max_jumps: int | None = None,
    seed: int,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> JumpTrajectory:
    """Exact direct-method simulation until a horizon or absorption.

    Identical (spec, initial, seed) give identical trajectories.  The number
    of stored events is hard-capped at ``max_events``.
    """
    if t_end is None and max_jumps is None:
        raise ValueError("provide t_end and/or max_jumps")
    if t_end is not None and not (t_end > 0):
        raise ValueError(f"t_end must be > 0, got {t_end}")
    if initial.r_unit != spec.r_unit or initial.n_unit != spec.n_unit:
        raise ValueError("initial state is not on the process lattice")

    rng = np.random.default_rng(seed)
    kr, kn = initial.kr, initial.kn
    ru, nu = float(spec.r_unit), float(spec.n_unit)
    chans = [(ch.dkr, ch.dkn, ch.rate) for ch in spec.channels]

    times: list[float] = []
    krs: list[int] = []
    kns: list[int] = []
    picks: list[int] = []
    t = 0.0
    standard_exponential = rng.standard_exponential
    uniform = rng.random

    while True:
        if max_jumps is not None and len(times) >= max_jumps:
            terminated = Termination.MAX_JUMPS
            break
        r = kr * ru
        n = kn * nu
        total = 0.0
        rates = []
        for dkr, dkn, fn in chans:
            if kr + dkr < 0 or kn + dkn < 0:
                rates.append(0.0)
            else:
                rate = fn(r, n, t)
                rates.append(rate)
                total += rate
        if total <= 0.0:
            terminated = Termination.ABSORBED
            break
        wait = standard_exponential() / total
        if t_end is not None and t + wait > t_end:
            terminated = Termination.TIME_HORIZON
            break
        t += wait
        u = uniform() * total
        acc = 0.0
        pick = len(chans) - 1
        for i, rate in enumerate(rates):
            acc += rate
            if u < acc:
                pick = i
                break
        kr += chans[pick][0]
        kn += chans[pick][1]
        if kr < 0 or kn < 0:  # cannot happen with censoring; guard regressions
            raise RuntimeError(f"negative lattice state ({kr}, {kn}) after {CHANNEL_LABELS[pick]}")
        if len(times) >= max_events:
            raise EventCapError(f"event cap of {max_events} exceeded at t = {t:.6g}")
        times.append(t)
        krs.append(kr)
        kns.append(kn)
        picks.append(pick)

    covered = t_end if t_end is not None else (times[-1] if times else 0.0)
    return JumpTrajectory(
        spec=spec,
        initial=initial,
        seed=seed,
        times=np.asarray(times, dtype=np.float64),
        krs=np.asarray(krs, dtype=np.int64),
        kns=np.asarray(kns, dtype=np.int64),
        channels=np.asarray(picks, dtype=np.int8),
        terminated_by=terminated,
        t_end=covered,
    )


def expected_drift(spec: ProcessSpec, s: LatticeState, t: float = 0.0) -> tuple[float, float]:
    """Mean instantaneous motion: sum of censored rate * physical increment.

    For the global process this coincides with the deterministic vector
    field at every lattice state; for the frozen mean-field process it
    matches the mean-field drift field away from the censored kr = 0 edge.
    """
    ru, nu = float(spec.r_unit), float(spec.n_unit)
    rates = spec.channel_rates(s, t)
    dr = 0.0
    dn = 0.0
    for ch, rate in zip(spec.channels, rates):
        dr += rate * ch.dkr * ru
        dn += rate * ch.dkn * nu
    return dr, dn


def meanfield_drift_field(
    params: ModelParams, anchor: State, state: State
) -> tuple[float, float]:
    """Continuous drift field of the frozen mean-field process.

    Its stationary point coincides with the deterministic fixed point when
    the anchor is set there.
    """
    ra, na = anchor
    r, n = state
    emit = 0.5 * (r * na + ra * n) + params.alpha * r
    dr = (-emit + n + params.p) / params.gamma
    dn = emit - n - n / params.beta
    return dr, dn


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_path_seed(seed: int, index: int) -> int:
    """Per-path seed for ensembles: master seed XOR a 64-bit mix of the index.

    Order-independent, so ensemble members can run in any schedule.
    """
    if index < 0:
        raise ValueError(f"path index must be >= 0, got {index}")
    return (seed ^ _splitmix64(index)) & _MASK64
