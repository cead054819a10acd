"""Family solving, ranking, and v-grid sweeps with exact lazy bounds.

The exhaustive path (:func:`solve_family`) solves every assignment's
program, verifies its duality certificate, and replays every optimum
through the simulator.  Sweeps use an exact acceleration instead of brute
force: assignments sharing (order, directions, drop interval, find
pattern) collapse into one program with free displacement variables whose
optimum equals the group's best member exactly, and group objectives are
monotone along the sweep direction (the feasible region only shrinks:
directly in v for the slow-holder variants, and through the time-rescaling
bijection t -> t/v for the fast-holder one).  A stale objective therefore
stays a valid lower bound, so each grid point only re-solves groups whose
bound approaches the optimum envelope; winners are then re-derived from
canonical per-assignment solves so results are identical to the
exhaustive path.
"""

import heapq
from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from . import families
from .families import (
    Group,
    IncompatibleAssignment,
    assignment_template,
    enumerate_assignments,
    enumerate_groups,
    group_template,
    primal_dict,
)
from .lp import CertificateError, OPTIMAL, solve_raw, verify_raw
from .model import (
    GameConfig,
    MARKER_FAST,
    NO_MARKER,
    SimulationError,
    check_solution,
    simulate,
)
from .rational import ZERO, rational

_MINUS_ONE = mpq(-1)


@dataclass
class Stats:
    solved: int = 0
    optimal: int = 0
    certified: int = 0
    infeasible: int = 0
    rejected: int = 0
    replays: int = 0
    replay_agreements: int = 0

    def merge(self, other):
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))


class _Result:
    """Duck-typed LP result for check_solution on raw solutions."""

    __slots__ = ("status", "primal", "objective")

    def __init__(self, primal, objective):
        self.status = "optimal"
        self.primal = primal
        self.objective = objective


def _solve_assignment(assignment, v, stats):
    """Canonical per-assignment solve with certificate; None if infeasible."""
    tpl = assignment_template(assignment)
    raw = tpl.instantiate(v)
    res = solve_raw(raw)
    stats.solved += 1
    if res.status != OPTIMAL:
        stats.infeasible += 1
        return None
    stats.optimal += 1
    if not verify_raw(raw, res):
        raise CertificateError(f"certificate failed for {assignment.id} at v={v}")
    stats.certified += 1
    return _Result(primal_dict(assignment, tpl, res.x), res.objective)


def signature(assignment, primal):
    """Canonical strategy signature of a solved assignment.

    Spurious representations of one motion are identified: signs of
    zero-displacement legs and directions of zero-length segments
    canonicalize to +1, agents met simultaneously are sorted within their
    tie block, and the whole tuple is reduced modulo the left-right mirror
    of the line.
    """
    move = "ut" if assignment.variant == MARKER_FAST else "vt"
    times = [primal[f"t{i}"] for i in (1, 2, 3, 4)]
    dts = [times[0]] + [times[i] - times[i - 1] for i in (1, 2, 3)]
    moves = [primal[f"{move}{i}"] for i in (1, 2, 3, 4)]
    d_c = tuple(1 if dts[i] == 0 else assignment.d[i] for i in range(4))
    a_c = tuple(1 if moves[i] == 0 else assignment.a[i] for i in range(4))
    marker = assignment.variant != NO_MARKER
    if marker:
        vz = primal["uz" if assignment.variant == MARKER_FAST else "vz"]
        a0_c = 1 if vz == 0 else assignment.a0
        flags = (None,) + assignment.find_pattern
    else:
        a0_c = None
        flags = (None, None, None, None)

    def encode(order, a, a0):
        # sort agents (with their find flags) inside equal-time blocks
        slots = list(zip(order, flags))
        i = 0
        blocks = []
        while i < 4:
            j = i
            while j + 1 < 4 and times[j + 1] == times[i]:
                j += 1
            blocks.extend(sorted(slots[i:j + 1]))
            i = j + 1
        return (tuple(blocks), d_c, a, a0,
                assignment.drop if marker else None)

    def mirror_sign(s, zero):
        return 1 if zero else -s

    plain = encode(assignment.order, a_c, a0_c)
    m_order = tuple((-o, -b) for o, b in assignment.order)
    m_a = tuple(mirror_sign(a_c[i], moves[i] == 0) for i in range(4))
    m_a0 = None if a0_c is None else mirror_sign(a0_c, vz == 0)
    mirrored = encode(m_order, m_a, m_a0)
    best = min(repr(plain), repr(mirrored))
    return best


@dataclass(frozen=True)
class RankingEntry:
    assignment_id: str
    signature: str
    objective: object
    valid: bool
    reason: Optional[str] = None


@dataclass
class FamilyRanking:
    variant: str
    v: object
    entries: list  # sorted by (objective, assignment id)
    stats: Stats

    def optimum(self):
        for e in self.entries:
            if e.valid:
                return e
        raise ValueError("no valid optimum in the ranking")


def solve_family(variant, v, progress=None):
    """Solve the whole family at one speed; certificates are mandatory."""
    v = rational(v)
    if not 0 <= v <= 1:
        raise ValueError("speed ratio must lie in [0, 1]")
    stats = Stats()
    cfg = GameConfig(v, 1, variant)
    entries = []
    for i, asg in enumerate(enumerate_assignments(variant)):
        if progress and i % 20000 == 0:
            progress(i)
        try:
            res = _solve_assignment(asg, v, stats)
        except IncompatibleAssignment:
            stats.rejected += 1
            continue
        if res is None:
            continue
        chk = check_solution(cfg, asg, res)
        stats.replays += 1
        if chk.valid:
            stats.replay_agreements += 1
        entries.append(
            RankingEntry(asg.id, signature(asg, res.primal), res.objective,
                         chk.valid, chk.reason)
        )
    entries.sort(key=lambda e: (e.objective, e.assignment_id))
    return FamilyRanking(variant, v, entries, stats)


def next_to_opt(ranking):
    """Least valid objective among strategies differing from the optimum."""
    opt = None
    for e in ranking.entries:
        if not e.valid:
            continue
        if opt is None:
            opt = e
        elif e.signature != opt.signature:
            return e.objective
    raise ValueError("ranking holds fewer than two distinct strategies")


@dataclass
class SweepRow:
    v: object
    opt_sum: object
    opt_avg: object
    next_to_opt_sum: Optional[object]
    signature: str
    assignment_id: str
    source: str  # 'family' or 'fallback'
    detail: dict = field(default_factory=dict)


@dataclass
class SweepTable:
    variant: str
    grid: int
    rows: list  # ascending in v
    stats: Stats


class _Member:
    __slots__ = ("assignment", "objective", "primal", "signature", "valid", "reason", "outcome", "marker")

    def __init__(self, assignment, objective, primal):
        self.assignment = assignment
        self.objective = objective
        self.primal = primal
        self.signature = None
        self.valid = None
        self.reason = None
        self.outcome = None
        self.marker = None


class _FamilyEngine:
    """Lazy per-grid-point family extraction with monotone stale bounds."""

    def __init__(self, variant):
        self.variant = variant
        self.groups = list(enumerate_groups(variant))
        self.gindex = {g: i for i, g in enumerate(self.groups)}
        self.templates = {}
        self.keys = [_MINUS_ONE] * len(self.groups)
        self.alive = [True] * len(self.groups)
        self.heap = [(_MINUS_ONE, i) for i in range(len(self.groups))]
        heapq.heapify(self.heap)
        self.stats = Stats()
        # mf walks v ascending; stale keys live on the rescaled objective
        # v * sum(t), which only grows as v does
        self.normalized = variant == MARKER_FAST

    def _template(self, idx):
        tpl = self.templates.get(idx)
        if tpl is None:
            tpl = group_template(self.groups[idx])
            self.templates[idx] = tpl
        return tpl

    def _solve_group(self, idx, v):
        raw = self._template(idx).instantiate(v)
        res = solve_raw(raw)
        self.stats.solved += 1
        if res.status != OPTIMAL:
            self.stats.infeasible += 1
            self.alive[idx] = False
            return None
        self.stats.optimal += 1
        if not verify_raw(raw, res):
            raise CertificateError(f"group certificate failed at v={v}")
        self.stats.certified += 1
        return res.objective

    def point(self, v):
        """Exact (family min, opt member, next-to-opt) at one grid point.

        Must be visited in sweep order (descending v for the slow-holder
        variants, ascending for the fast one) so stale keys stay bounds.
        """
        v = rational(v)
        fresh = {}
        cand = []  # (objective, kind 0=group/1=member, tie id, payload)
        members = {}
        expanded = set()
        cfg = GameConfig(v, 1, self.variant)

        def heap_bound():
            """Lower bound over all not-yet-solved groups (None if none).

            During a point the heap holds only groups not yet solved at
            this v; solved ones re-enter at the end of the point.
            """
            while self.heap:
                key, idx = self.heap[0]
                if not self.alive[idx] or key != self.keys[idx] or idx in fresh:
                    heapq.heappop(self.heap)
                    continue
                return key / v if self.normalized else key
            return None

        def solve_next_group():
            """Solve the heap's least-bound unsolved group at this v."""
            _, idx = heapq.heappop(self.heap)
            val = self._solve_group(idx, v)
            if val is None:
                return None
            fresh[idx] = val
            self.keys[idx] = val * v if self.normalized else val
            heapq.heappush(cand, (val, 0, "g%05d" % idx, idx))
            return val

        def next_candidate(strict):
            """Pop the least candidate once no unsolved group can undercut it.

            With strict=True a group whose bound merely ties the candidate
            value is left unsolved: its members cannot have objectives
            below that value, which is all the next-to-opt value needs.
            """
            while True:
                bound = heap_bound()
                if not cand:
                    if bound is None:
                        return None
                    solve_next_group()
                    continue
                top = cand[0][0]
                if bound is not None and (bound < top or (not strict and bound == top)):
                    solve_next_group()
                    continue
                return heapq.heappop(cand)

        def expand(idx):
            if idx in expanded:
                return
            expanded.add(idx)
            if idx not in fresh and self.alive[idx]:
                val = self._solve_group(idx, v)
                if val is not None:
                    fresh[idx] = val
                    self.keys[idx] = val * v if self.normalized else val
            for m in self.groups[idx].members():
                res = _solve_assignment(m, v, self.stats)
                if res is None:
                    continue
                mem = _Member(m, res.objective, res.primal)
                members[m.id] = mem
                heapq.heappush(cand, (res.objective, 1, m.id, m.id))

        def expand_with_mirror(idx):
            expand(idx)
            midx = self.gindex.get(self.groups[idx].mirror())
            if midx is not None and midx != idx:
                expand(midx)

        def validity(mem):
            if mem.valid is None:
                chk, outcome, marker = _replay(cfg, mem.assignment, _Result(mem.primal, mem.objective))
                self.stats.replays += 1
                mem.valid = chk.valid
                mem.reason = chk.reason
                mem.outcome = outcome
                mem.marker = marker
                if chk.valid:
                    self.stats.replay_agreements += 1
            if mem.signature is None:
                mem.signature = signature(mem.assignment, mem.primal)
            return mem.valid

        # family minimum over group programs
        best = None
        while True:
            bound = heap_bound()
            if bound is None or (best is not None and bound >= best):
                break
            val = solve_next_group()
            if val is not None and (best is None or val < best):
                best = val
        if best is None:
            raise ValueError(f"family {self.variant} infeasible at v={v}")

        # canonical optimum: least (objective, assignment id) valid member
        opt = None
        while True:
            c = next_candidate(strict=False)
            if c is None:
                raise ValueError(f"no valid optimum for {self.variant} at v={v}")
            _, kind, _, payload = c
            if kind == 0:
                expand_with_mirror(payload)
                continue
            mem = members[payload]
            if validity(mem):
                opt = mem
                break

        # next-to-opt: least valid objective under a different signature
        nt = None
        while True:
            c = next_candidate(strict=True)
            if c is None:
                break
            _, kind, _, payload = c
            if kind == 0:
                expand_with_mirror(payload)
                continue
            mem = members[payload]
            if mem.signature is None:
                mem.signature = signature(mem.assignment, mem.primal)
            if mem.signature == opt.signature:
                continue
            if validity(mem):
                nt = mem.objective
                break

        # groups solved at this point rejoin the pending heap with exact keys
        for idx in fresh:
            if self.alive[idx]:
                heapq.heappush(self.heap, (self.keys[idx], idx))
        return best, opt, nt


def _replay(cfg, assignment, res):
    """check_solution plus the realized outcome/marker for row details."""
    chk = check_solution(cfg, assignment, res)
    if not chk.valid:
        return chk, None, None
    slow, fast, plan = assignment.strategies(res.primal)
    outcome, marker = simulate(cfg, slow, fast, assignment.order, plan)
    return chk, outcome, marker


def _row_from_member(v, mem, nt_value):
    detail = {
        "times": tuple(mem.primal[f"t{i}"] for i in (1, 2, 3, 4)),
        "primal": dict(mem.primal),
    }
    if mem.assignment.variant != NO_MARKER:
        detail["drop_interval"] = mem.assignment.drop
        detail["drop_time"] = mem.primal["z"]
        detail["find_pattern"] = mem.assignment.find_pattern
        if mem.marker is not None:
            detail["marker_position"] = mem.marker.position
            detail["finds"] = {
                repr(agent): (str(t), interval)
                for agent, (t, interval, _) in sorted(mem.marker.finds.items())
            }
    return SweepRow(
        v=v,
        opt_sum=mem.objective,
        opt_avg=mem.objective / 4,
        next_to_opt_sum=nt_value,
        signature=mem.signature,
        assignment_id=mem.assignment.id,
        source="family",
        detail=detail,
    )


def _merge_fallback(row, fb_row):
    """Game-value semantics: the holder may simply never drop the marker."""
    fb_sig = "nd|" + fb_row.signature
    if row.opt_sum < fb_row.opt_sum:
        nt = row.next_to_opt_sum
        if nt is None or fb_row.opt_sum < nt:
            nt = fb_row.opt_sum
        row.next_to_opt_sum = nt
        return row
    # the never-drop fallback wins (or ties); prefer it deterministically
    fam_val = row.opt_sum
    nt = fam_val
    if fb_row.next_to_opt_sum is not None and fb_row.next_to_opt_sum < nt:
        nt = fb_row.next_to_opt_sum
    return SweepRow(
        v=row.v,
        opt_sum=fb_row.opt_sum,
        opt_avg=fb_row.opt_avg,
        next_to_opt_sum=nt,
        signature=fb_sig,
        assignment_id="nd|" + fb_row.assignment_id,
        source="fallback",
        detail=dict(fb_row.detail),
    )


def sweep(variant, grid=1000, progress=None, fallback=None):
    """Solve the family on v = k/grid, k = 1..grid; one row per point.

    Marker variants fold in the never-drop fallback (the no-marker table
    at the same grid); pass a precomputed one to avoid re-sweeping it.
    """
    if grid < 1:
        raise ValueError("grid must have at least one step")
    if variant != NO_MARKER:
        if fallback is None:
            fallback = sweep(NO_MARKER, grid, progress=progress)
        elif fallback.variant != NO_MARKER or fallback.grid != grid:
            raise ValueError("fallback table must be a no-marker sweep on the same grid")
    engine = _FamilyEngine(variant)
    ks = range(1, grid + 1) if engine.normalized else range(grid, 0, -1)
    rows = {}
    for k in ks:
        v = mpq(k, grid)
        best, opt, nt = engine.point(v)
        row = _row_from_member(v, opt, nt)
        if fallback is not None:
            row = _merge_fallback(row, fallback.rows[k - 1])
        rows[k] = row
        if progress:
            progress(variant, k, row)
    table = SweepTable(variant, grid, [rows[k] for k in range(1, grid + 1)], engine.stats)
    if fallback is not None:
        table.stats.merge(fallback.stats)
    _check_table_invariants(table)
    return table


def _check_table_invariants(table):
    prev = None
    for row in table.rows:
        if row.next_to_opt_sum is not None and row.next_to_opt_sum < row.opt_sum:
            raise AssertionError(f"next-to-opt below opt at v={row.v}")
        if prev is not None and row.opt_sum > prev:
            raise AssertionError(f"opt increased at v={row.v}")
        prev = row.opt_sum
    return True


def game_value(variant, v):
    """Value of the game at one speed (never-drop fallback included)."""
    v = rational(v)
    engine = _FamilyEngine(variant)
    best, opt, nt = engine.point(v)
    value = opt.objective
    if variant != NO_MARKER:
        nm = game_value(NO_MARKER, v)
        if nm < value:
            value = nm
    return value
