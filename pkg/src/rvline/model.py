"""Domain types and an event-driven trajectory simulator.

The simulator replays piecewise-constant-velocity strategies for both
players, including marker drop/find deviations, and extracts the realized
rendezvous times independently of any linear program.  All positions and
times are exact rationals, so event detection is exact first-crossing of
linear motions with no tolerances.
"""

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .rational import ZERO, rational

NO_MARKER = "none"
MARKER_SLOW = "slow-marker"
MARKER_FAST = "fast-marker"
VARIANTS = (NO_MARKER, MARKER_SLOW, MARKER_FAST)

#: the four agent identities (origin sign, forward sign), canonical order
AGENTS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class SimulationError(ValueError):
    """Replay failed: inconsistent meeting order, speed bound, or no meeting."""

    def __init__(self, message, slot=None):
        super().__init__(message)
        self.slot = slot


@dataclass(frozen=True)
class GameConfig:
    v: object  # slow player's speed bound; the fast bound is 1
    distance: object = 1
    variant: str = NO_MARKER

    def __post_init__(self):
        object.__setattr__(self, "v", rational(self.v))
        object.__setattr__(self, "distance", rational(self.distance))
        if not 0 <= self.v <= 1:
            raise ValueError("speed ratio must lie in [0, 1]")
        if self.distance <= 0:
            raise ValueError("initial distance must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


def validate_order(order):
    """A meeting order must be a bijection onto the four identities."""
    if tuple(sorted(order)) != tuple(sorted(AGENTS)):
        raise ValueError("meeting order must list each of the four agents once")
    return tuple(order)


@dataclass(frozen=True)
class SlowStrategy:
    """Plan of the variable-speed player (the marker holder in marker games).

    ``signs[i]`` orients the displacement of magnitude ``moves[i]`` covered
    between rendezvous i and i+1.  In marker variants the pre-drop leg is
    (pre_drop_sign, pre_drop_move) ending at the drop time.
    """

    signs: tuple
    moves: tuple
    pre_drop_sign: Optional[int] = None
    drop_time: Optional[object] = None
    pre_drop_move: Optional[object] = None

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(self.signs))
        object.__setattr__(self, "moves", tuple(rational(m) for m in self.moves))
        if self.drop_time is not None:
            object.__setattr__(self, "drop_time", rational(self.drop_time))
            object.__setattr__(self, "pre_drop_move", rational(self.pre_drop_move))


@dataclass(frozen=True)
class FastStrategy:
    """Per-segment directions of the fixed-rate player (the agent side)."""

    directions: tuple

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        if any(d not in (1, -1) for d in self.directions):
            raise ValueError("directions must be +-1")


@dataclass(frozen=True)
class MarkerState:
    holder: str
    drop_time: object
    drop_interval: int
    position: object
    finds: dict = field(default_factory=dict)  # agent -> (time, interval, direction)


@dataclass(frozen=True)
class RendezvousOutcome:
    times: tuple  # realized t_1 <= ... <= t_4
    by_agent: dict  # agent identity -> its rendezvous time
    total: object
    average: object

    @classmethod
    def from_times(cls, times, by_agent):
        total = sum(times, ZERO)
        return cls(tuple(times), dict(by_agent), total, total / 4)


def scale_outcome(outcome, factor):
    """Scale every reported time by the initial distance (exact linearity)."""
    factor = rational(factor)
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return RendezvousOutcome(
        tuple(t * factor for t in outcome.times),
        {a: t * factor for a, t in outcome.by_agent.items()},
        outcome.total * factor,
        outcome.average * factor,
    )


def _cross_time(p0, vel0, p1, vel1, start):
    """First time >= start at which two linear motions coincide.

    Motions are (position at ``start``, velocity).  Returns None if they
    never meet at or after ``start``; ``start`` itself if already together.
    """
    rel = p0 - p1
    if rel == 0:
        return start
    dv = vel1 - vel0
    if dv == 0:
        return None
    tau = start + rel / dv
    return tau if tau >= start else None


def simulate(config, slow, fast, order, marker_plan=None):
    """Replay strategies and return the realized outcome and marker state.

    ``marker_plan`` is the declared drop interval (1..4) or None for never
    dropping.  A rendezvous with the slot-i agent ends segment i; an agent
    reaching the marker at any time >= the drop time permanently keeps its
    current direction at its fixed rate.  Simultaneous events at one
    instant are processed marker-find first.
    """
    order = validate_order(order)
    D = config.distance
    if config.variant == MARKER_FAST:
        holder_cap, agent_rate = rational(1), config.v
    else:
        holder_cap, agent_rate = config.v, rational(1)
    horizon = 10 * D / max(config.v, mpq(1, 100))

    drop_interval = None
    if marker_plan is not None:
        if config.variant == NO_MARKER:
            raise ValueError("marker plan given for the no-marker variant")
        if slow.drop_time is None:
            raise ValueError("marker plan given but strategy has no drop leg")
        drop_interval = int(marker_plan)
        if not 1 <= drop_interval <= 4:
            raise ValueError("drop interval must be in 1..4")

    # agent state
    pos = {a: a[0] * D for a in AGENTS}  # position at current segment start
    met = {a: None for a in AGENTS}
    found = {a: None for a in AGENTS}  # (time, interval, direction)

    holder_pos = ZERO
    t_prev = ZERO
    marker_pos = None
    times = []

    for slot in range(1, 5):
        target = order[slot - 1]
        if met[target] is not None:
            raise SimulationError("agent met twice", slot=slot)
        d_i = fast.directions[slot - 1]
        sign_i = slow.signs[slot - 1]
        move_i = slow.moves[slot - 1]

        # displacement of the holder over this segment (drop leg included)
        disp = sign_i * move_i
        dropping = drop_interval == slot
        if dropping:
            z = slow.drop_time
            if z < t_prev:
                raise SimulationError("drop time precedes its declared interval", slot=slot)
            disp += slow.pre_drop_sign * slow.pre_drop_move
        end_pos = holder_pos + disp

        def agent_velocity(a):
            if found[a] is not None:
                return found[a][2] * agent_rate
            return a[1] * d_i * agent_rate

        # realized segment end: the target reaches end_pos
        vel_t = agent_velocity(target)
        if vel_t == 0:
            if pos[target] != end_pos:
                raise SimulationError("stationary agent is never met", slot=slot)
            # earliest consistent arrival: traverse the planned legs at the cap
            travel = abs(disp) / holder_cap if holder_cap else ZERO
            t_i = t_prev + travel
            if dropping:
                t_i = max(t_i, slow.drop_time)
        else:
            t_i = _cross_time(pos[target], vel_t, end_pos, ZERO, t_prev)
            if t_i is None:
                raise SimulationError("declared meeting never happens", slot=slot)
        if t_i > horizon:
            raise SimulationError("no rendezvous within the horizon bound", slot=slot)
        dt = t_i - t_prev

        # speed-bound preconditions on the realized segment
        if dropping:
            z = slow.drop_time
            if z > t_i:
                raise SimulationError("drop time falls beyond its declared interval", slot=slot)
            if slow.pre_drop_move > holder_cap * (z - t_prev) or move_i > holder_cap * (t_i - z):
                raise SimulationError("displacement exceeds the speed bound", slot=slot)
            marker_pos = holder_pos + slow.pre_drop_sign * slow.pre_drop_move
            pieces = [
                (t_prev, z, holder_pos,
                 ZERO if z == t_prev else slow.pre_drop_sign * slow.pre_drop_move / (z - t_prev)),
                (z, t_i, marker_pos, ZERO if t_i == z else sign_i * move_i / (t_i - z)),
            ]
        else:
            if move_i > holder_cap * dt:
                raise SimulationError("displacement exceeds the speed bound", slot=slot)
            pieces = [(t_prev, t_i, holder_pos, ZERO if dt == 0 else disp / dt)]

        # marker finds during this segment (processed before the rendezvous)
        if marker_pos is not None:
            z = slow.drop_time
            for a in AGENTS:
                if met[a] is not None or found[a] is not None:
                    continue
                vel = agent_velocity(a)
                lo = max(t_prev, z)
                if vel == 0:
                    tau = lo if pos[a] == marker_pos else None
                else:
                    at_lo = pos[a] + vel * (lo - t_prev)
                    tau = _cross_time(at_lo, vel, marker_pos, ZERO, lo)
                if tau is not None and tau <= t_i:
                    direction = a[1] * d_i if vel == 0 else (1 if vel > 0 else -1)
                    found[a] = (tau, slot, direction)

        # first-crossing consistency: no unmet agent may reach the holder
        # strictly before the declared rendezvous
        for a in AGENTS:
            if met[a] is not None:
                continue
            vel = agent_velocity(a)
            first = None
            for (ta, tb, pa, velI) in pieces:
                apos = pos[a] + vel * (ta - t_prev)
                tau = _cross_time(apos, vel, pa, velI, ta)
                if tau is not None and tau <= tb:
                    first = tau
                    break
            if first is not None and first < t_i:
                bad = order.index(a) + 1
                raise SimulationError(
                    f"agent of slot {bad} crosses the holder before slot {slot} rendezvous",
                    slot=bad,
                )

        # advance to the segment end; a mid-segment find freezes the direction
        # the agent was already travelling, so straight advance stays exact
        for a in AGENTS:
            if met[a] is None:
                pos[a] = pos[a] + agent_velocity(a) * dt
        met[target] = t_i
        times.append(t_i)
        holder_pos = end_pos
        t_prev = t_i

    outcome = RendezvousOutcome.from_times(times, met)
    marker = None
    if drop_interval is not None:
        marker = MarkerState(
            holder="fast" if config.variant == MARKER_FAST else "slow",
            drop_time=slow.drop_time,
            drop_interval=drop_interval,
            position=marker_pos,
            finds={a: f for a, f in found.items() if f is not None},
        )
    return outcome, marker


@dataclass(frozen=True)
class CheckResult:
    valid: bool
    reason: Optional[str] = None

    def __bool__(self):
        return self.valid


def check_solution(config, assignment, lp_result):
    """Replay an LP optimum and accept it only on exact agreement.

    Valid iff the simulator reproduces every declared meeting time, every
    declared marker-find time and interval, and no declared non-finder
    deviates: a non-finder may touch the marker position only inside its
    own final segment (where continuing straight is what it does anyway)
    or at its own rendezvous instant.
    """
    if lp_result.status != "optimal":
        raise ValueError("check_solution requires an optimal LP result")
    x = lp_result.primal
    slow, fast, marker_plan = assignment.strategies(x)
    try:
        outcome, marker = simulate(config, slow, fast, assignment.order, marker_plan)
    except SimulationError as exc:
        return CheckResult(False, str(exc))

    for i in range(4):
        if outcome.times[i] != x[f"t{i + 1}"]:
            return CheckResult(False, f"slot {i + 1} time differs from the program value")

    if marker_plan is not None:
        declared = assignment.find_pattern
        for slot in (2, 3, 4):
            agent = assignment.order[slot - 1]
            want = declared[slot - 2]
            got = marker.finds.get(agent)
            if want is None:
                if got is not None and got[0] < outcome.times[slot - 1] and got[1] < slot:
                    return CheckResult(
                        False, f"declared non-finder of slot {slot} crosses the marker"
                    )
            else:
                if got is None:
                    return CheckResult(False, f"declared finder of slot {slot} never finds")
                tau, interval, _ = got
                if interval != want or tau != x[f"t{slot}z"]:
                    return CheckResult(
                        False, f"find of slot {slot} differs from the declared pattern"
                    )

    if outcome.total != lp_result.objective:
        return CheckResult(False, "simulated sum differs from the program objective")
    return CheckResult(True)
