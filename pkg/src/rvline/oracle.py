"""LP-independent check: discretized strategy search under exact replay.

Candidates follow the piecewise-constant-speed structure of the game's
optimal strategies: the holder's path turns only at grid times (at most
four direction changes, speeds from {-cap, 0, +cap}), the marker may be
dropped at any leg start, and the agent side runs at its fixed rate with
a direction tuple switching at realized rendezvous.  Every candidate is
evaluated by exact simulation; a depth-first search with an admissible
closing-speed bound keeps the search exhaustive but affordable.
"""

import itertools
from dataclasses import dataclass

from gmpy2 import mpq

from .model import AGENTS, MARKER_FAST, NO_MARKER
from .rational import ZERO, rational


@dataclass(frozen=True)
class GridStrategySpec:
    """Search grid: turn and drop times are multiples of 1/resolution up to
    the horizon (defaults to 4 times the initial distance)."""

    resolution: int = 64
    horizon: object = 4

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be at least 1")
        object.__setattr__(self, "horizon", rational(self.horizon))
        if self.horizon < 4:
            raise ValueError("horizon must cover the optimal play (>= 4D)")


@dataclass(frozen=True)
class OracleResult:
    value: object
    legs: tuple  # ((start, velocity), ...) of the best holder path
    drop_time: object
    directions: tuple
    candidates: int


class _State:
    __slots__ = ("t", "hpos", "apos", "met", "founddir", "count", "total", "marker")

    def __init__(self, D):
        self.t = ZERO
        self.hpos = ZERO
        self.apos = {a: a[0] * D for a in AGENTS}
        self.met = {a: None for a in AGENTS}
        self.founddir = {a: None for a in AGENTS}
        self.count = 0
        self.total = ZERO
        self.marker = None  # position once dropped

    def clone(self):
        s = _State.__new__(_State)
        s.t = self.t
        s.hpos = self.hpos
        s.apos = dict(self.apos)
        s.met = dict(self.met)
        s.founddir = dict(self.founddir)
        s.count = self.count
        s.total = self.total
        s.marker = self.marker
        return s


def brute_force_opt(variant, v, spec=GridStrategySpec(), distance=1):
    """Minimum simulated rendezvous-time sum over all grid strategies."""
    v = rational(v)
    D = rational(distance)
    if spec.horizon < 4 * D:
        raise ValueError("horizon must be at least 4 times the distance")
    if variant == MARKER_FAST:
        cap, rate = mpq(1), v
    else:
        cap, rate = v, mpq(1)
    max_legs = 4 if variant == NO_MARKER else 5
    with_marker = variant != NO_MARKER
    step = mpq(1, spec.resolution)
    nticks = int(spec.horizon / step)
    ticks = [step * k for k in range(nticks + 1)]
    speeds = [cap, -cap, ZERO] if cap else [ZERO]
    closing = cap + rate

    best = [None, None]
    counter = [0]

    def bound(state):
        b = state.total
        for a in AGENTS:
            if state.met[a] is None:
                gap = abs(state.apos[a] - state.hpos)
                b += state.t + (gap / closing if closing else spec.horizon)
        return b

    def agent_dir(state, a, d):
        f = state.founddir[a]
        if f is not None:
            return f * rate
        return a[1] * d[state.count] * rate

    def advance(state, vel, t_end, d):
        """Advance the holder linearly to t_end, processing finds and
        rendezvous exactly in time order; returns None on a dead branch."""
        while state.t < t_end:
            t0 = state.t
            h0 = state.hpos
            # earliest find (ties with rendezvous resolve find-first)
            ev_find, ev_meet = None, None
            if state.marker is not None:
                for a in AGENTS:
                    if state.met[a] is not None or state.founddir[a] is not None:
                        continue
                    av = agent_dir(state, a, d)
                    rel = state.apos[a] - state.marker
                    if rel == 0:
                        tau = t0
                    elif av == 0:
                        continue
                    else:
                        tau = t0 - rel / av
                        if tau < t0 or tau > t_end:
                            continue
                    if ev_find is None or tau < ev_find[0]:
                        ev_find = (tau, a)
            for a in AGENTS:
                if state.met[a] is not None:
                    continue
                av = agent_dir(state, a, d)
                rel = state.apos[a] - h0
                if rel == 0:
                    tau = t0
                else:
                    dv = vel - av
                    if dv == 0:
                        continue
                    tau = t0 + rel / dv
                    if tau < t0 or tau > t_end:
                        continue
                if ev_meet is None or tau < ev_meet[0]:
                    ev_meet = (tau, a)
            if ev_find is not None and (ev_meet is None or ev_find[0] <= ev_meet[0]):
                tau, finder = ev_find
                _move(state, vel, tau, d)
                state.founddir[finder] = (
                    0 if rate == 0 else (1 if agent_dir(state, finder, d) > 0 else -1)
                )
                continue
            if ev_meet is None:
                _move(state, vel, t_end, d)
                return state
            tau, a = ev_meet
            _move(state, vel, tau, d)
            state.met[a] = tau
            state.total += tau
            state.count += 1
            if state.count == 4:
                return state
        return state

    def _move(state, vel, tau, d):
        dt = tau - state.t
        if dt == 0:
            return
        for a in AGENTS:
            if state.met[a] is None:
                state.apos[a] += agent_dir(state, a, d) * dt
        state.hpos += vel * dt
        state.t = tau

    def record(state, legs, drop, d):
        counter[0] += 1
        if best[0] is None or state.total < best[0]:
            best[0] = state.total
            best[1] = OracleResult(state.total, tuple(legs), drop, tuple(d), 0)

    def dfs(state, legs, drop, d, prev_vel, depth):
        if best[0] is not None and bound(state) >= best[0]:
            return
        start = state.t
        drops = [False, True] if (with_marker and drop is None) else [False]
        for do_drop in drops:
            if do_drop:
                base = state.clone()
                base.marker = base.hpos
                cur_drop = start
            else:
                base = state
                cur_drop = drop
            for vel in speeds:
                if vel == prev_vel and not do_drop:
                    continue
                # final leg: run to the horizon
                s = advance(base.clone(), vel, spec.horizon, d)
                if s is not None and s.count == 4:
                    record(s, legs + [(start, vel)], cur_drop, d)
                if depth + 1 >= max_legs:
                    continue
                lo = bound(base)
                if best[0] is not None and lo >= best[0]:
                    continue
                for tb in ticks:
                    if tb <= start:
                        continue
                    s = advance(base.clone(), vel, tb, d)
                    if s.count == 4:
                        # completed mid-leg; identical to the final-leg run
                        break
                    if best[0] is not None and bound(s) >= best[0]:
                        continue
                    dfs(s, legs + [(start, vel)], cur_drop, d, vel, depth + 1)

    dirs = [(1,) + rest for rest in itertools.product((1, -1), repeat=3)]
    for d4 in itertools.product((1, -1), repeat=4):
        state = _State(D)
        dfs(state, [], None, d4, None, 0)
    if best[1] is None:
        raise ValueError("empty candidate set: no grid strategy meets all agents")
    return OracleResult(best[1].value, best[1].legs, best[1].drop_time, best[1].directions, counter[0])
