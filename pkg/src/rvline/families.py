"""Enumerate discrete parameter assignments and build their linear programs.

An assignment fixes the meeting order, both players' segment signs, and in
marker variants the drop interval and which agents find the marker in
which interval.  Resolving those discrete choices turns every program in
the family into a purely linear one over the rendezvous times and segment
displacements.

Three lowerings share one row emitter: the named LinearProgram (public
surface), a per-assignment RawLP (hot path), and a sign-collapsed RawLP
that merges all sign choices of the variable-speed player into free
displacement variables (its optimum equals the group minimum exactly,
because the constraints depend on sign and magnitude only through their
product).
"""

import itertools
from dataclasses import dataclass
from typing import Optional

from gmpy2 import mpq

from .lp import LinearProgram, RawLP
from .model import AGENTS, MARKER_FAST, MARKER_SLOW, NO_MARKER, FastStrategy, SlowStrategy
from .rational import ZERO, ONE, rational

ORDERS = tuple(itertools.permutations(AGENTS))
SIGNS = (1, -1)
#: find-pattern slots: slot-2 agent may find in interval 1, slot-3 in 1..2,
#: slot-4 in 1..3; None means the agent never finds the marker
PATTERNS = tuple(
    (f2, f3, f4)
    for f2 in (None, 1)
    for f3 in (None, 1, 2)
    for f4 in (None, 1, 2, 3)
)


class IncompatibleAssignment(ValueError):
    """The find pattern is impossible for the drop interval (build-time reject)."""


def _require_speed(v):
    v = rational(v)
    if not 0 <= v <= 1:
        raise ValueError("speed ratio must lie in [0, 1]")
    return v


@dataclass(frozen=True)
class ParameterAssignment:
    variant: str
    order: tuple
    d: tuple
    a: tuple
    a0: Optional[int] = None
    drop: Optional[int] = None
    find_pattern: Optional[tuple] = None

    @property
    def id(self):
        """Stable string id; lexicographic order equals enumeration order."""
        bit = lambda s: "0" if s == 1 else "1"
        parts = [
            {NO_MARKER: "nm", MARKER_SLOW: "ms", MARKER_FAST: "mf"}[self.variant],
            "o%02d" % ORDERS.index(self.order),
            "d" + "".join(bit(s) for s in self.d[1:]),
        ]
        if self.variant == NO_MARKER:
            parts.append("a" + "".join(bit(s) for s in self.a[1:]))
        else:
            parts.append("a" + "".join(bit(s) for s in self.a))
            parts.append("A" + bit(self.a0))
            parts.append("z%d" % self.drop)
            parts.append("f" + "".join(str(f or 0) for f in self.find_pattern))
        return "-".join(parts)

    def finder_slots(self):
        return [s for s in (2, 3, 4) if self.find_pattern and self.find_pattern[s - 2]]

    def var_names(self):
        move = "ut" if self.variant == MARKER_FAST else "vt"
        names = ["t1", "t2", "t3", "t4"] + [f"{move}{i}" for i in (1, 2, 3, 4)]
        if self.variant != NO_MARKER:
            names += ["z", "uz" if self.variant == MARKER_FAST else "vz"]
            names += [f"t{s}z" for s in self.finder_slots()]
        return names

    def strategies(self, primal):
        """Strategy objects for the simulator from a primal valuation."""
        move = "ut" if self.variant == MARKER_FAST else "vt"
        moves = tuple(primal[f"{move}{i}"] for i in (1, 2, 3, 4))
        if self.variant == NO_MARKER:
            return SlowStrategy(self.a, moves), FastStrategy(self.d), None
        slow = SlowStrategy(
            self.a,
            moves,
            pre_drop_sign=self.a0,
            drop_time=primal["z"],
            pre_drop_move=primal["uz" if self.variant == MARKER_FAST else "vz"],
        )
        return slow, FastStrategy(self.d), self.drop


def enumerate_assignments(variant):
    """Yield the full family in deterministic lexicographic order.

    Mirror symmetry of the line fixes d_1 = +1 in every variant and a_1 =
    +1 in the no-marker one; marker variants enumerate a_0 and a_1 freely.
    """
    if variant == NO_MARKER:
        for order in ORDERS:
            for d in itertools.product(SIGNS, repeat=3):
                for a in itertools.product(SIGNS, repeat=3):
                    yield ParameterAssignment(variant, order, (1,) + d, (1,) + a)
        return
    if variant not in (MARKER_SLOW, MARKER_FAST):
        raise ValueError(f"unknown variant {variant!r}")
    for order in ORDERS:
        for d in itertools.product(SIGNS, repeat=3):
            for a in itertools.product(SIGNS, repeat=4):
                for a0 in SIGNS:
                    for drop in (1, 2, 3, 4):
                        for pat in PATTERNS:
                            yield ParameterAssignment(
                                variant, order, (1,) + d, a, a0, drop, pat
                            )


def pattern_compatible(drop, pattern):
    return all(f is None or f >= drop for f in pattern)


# ---------------------------------------------------------------------------
# shared row emitter
#
# Rows are expressed over semantic keys with coefficients affine in the speed
# ratio: ('t', i) rendezvous times, ('w', i) the holder's signed segment
# displacement, ('wz',) the signed pre-drop displacement, ('z',) the drop
# time, ('tz', slot) find times.  |w|-bounds are emitted as a special kind so
# each lowering can expand them to its own column scheme.

def _emit(variant, order, d, drop, pattern):
    """Return (eqs, ineqs, absbounds) with affine (const, vcoef) entries."""
    marker = variant != NO_MARKER
    if marker and not pattern_compatible(drop, pattern):
        raise IncompatibleAssignment(
            f"find pattern {pattern} impossible for drop interval {drop}"
        )
    # agent motion rate and holder speed bound, each affine in v
    R = (ZERO, ONE) if variant == MARKER_FAST else (ONE, ZERO)
    B = (ONE, ZERO) if variant == MARKER_FAST else (ZERO, ONE)

    def addc(row, key, const, vcoef=ZERO):
        c0, c1 = row.get(key, (ZERO, ZERO))
        row[key] = (c0 + const, c1 + vcoef)

    def agent_terms(row, b_i, upto, sign):
        # sign * R * b_i * sum_{l<=upto} d_l (t_l - t_{l-1})
        for l in range(1, upto + 1):
            coef = sign * b_i * d[l - 1]
            addc(row, ("t", l), coef * R[0], coef * R[1])
            if l > 1:
                addc(row, ("t", l - 1), -coef * R[0], -coef * R[1])

    def holder_terms(row, upto, sign):
        for l in range(1, upto + 1):
            addc(row, ("w", l), mpq(sign))
        if marker and upto >= drop:
            addc(row, ("wz",), mpq(sign))

    def marker_terms(row, sign):
        for l in range(1, drop):
            addc(row, ("w", l), mpq(sign))
        addc(row, ("wz",), mpq(sign))

    eqs = []
    for slot in range(1, 5):
        o_i, b_i = order[slot - 1]
        f = None if (not marker or slot == 1) else pattern[slot - 2]
        if f is None:
            row = {}
            agent_terms(row, b_i, slot, 1)
            holder_terms(row, slot, -1)
            eqs.append((row, mpq(-o_i)))
        else:
            find = {}
            agent_terms(find, b_i, f - 1, 1)
            coef = b_i * d[f - 1]
            addc(find, ("tz", slot), coef * R[0], coef * R[1])
            if f > 1:
                addc(find, ("t", f - 1), -coef * R[0], -coef * R[1])
            marker_terms(find, -1)
            eqs.append((find, mpq(-o_i)))
            meet = {}
            marker_terms(meet, 1)
            addc(meet, ("t", slot), coef * R[0], coef * R[1])
            addc(meet, ("tz", slot), -coef * R[0], -coef * R[1])
            holder_terms(meet, slot, -1)
            eqs.append((meet, ZERO))

    ineqs = []
    absbounds = []  # (wkey, expr row): |w| <= expr
    for i in range(1, 5):
        expr = {}
        if marker and i == drop:
            addc(expr, ("t", i), B[0], B[1])
            addc(expr, ("z",), -B[0], -B[1])
        else:
            addc(expr, ("t", i), B[0], B[1])
            if i > 1:
                addc(expr, ("t", i - 1), -B[0], -B[1])
        absbounds.append((("w", i), expr))
    if marker:
        expr = {("z",): (B[0], B[1])}
        if drop > 1:
            addc(expr, ("t", drop - 1), -B[0], -B[1])
        absbounds.append((("wz",), expr))

    for i in range(2, 5):
        ineqs.append(({("t", i - 1): (ONE, ZERO), ("t", i): (-ONE, ZERO)}, ZERO))
    if marker:
        row = {("z",): (-ONE, ZERO)}
        if drop > 1:
            addc(row, ("t", drop - 1), ONE)
        ineqs.append((row, ZERO))
        ineqs.append(({("z",): (ONE, ZERO), ("t", drop): (-ONE, ZERO)}, ZERO))
        for slot in (2, 3, 4):
            f = pattern[slot - 2]
            if f is None:
                continue
            if f > 1:
                ineqs.append(
                    ({("t", f - 1): (ONE, ZERO), ("tz", slot): (-ONE, ZERO)}, ZERO)
                )
            ineqs.append(({("tz", slot): (ONE, ZERO), ("t", f): (-ONE, ZERO)}, ZERO))
            ineqs.append(({("z",): (ONE, ZERO), ("tz", slot): (-ONE, ZERO)}, ZERO))
    return eqs, ineqs, absbounds


def _affine(pair, v):
    c0, c1 = pair
    return c0 + c1 * v if c1 else c0


# ---------------------------------------------------------------------------
# public builders (named LinearProgram per assignment)

def _build_named(assignment, v):
    v = _require_speed(v)
    eqs, ineqs, absbounds = _emit(
        assignment.variant, assignment.order, assignment.d, assignment.drop,
        assignment.find_pattern,
    )
    move = "ut" if assignment.variant == MARKER_FAST else "vt"
    zmove = "uz" if assignment.variant == MARKER_FAST else "vz"

    def name(key):
        if key[0] == "t":
            return f"t{key[1]}"
        if key[0] == "w":
            return f"{move}{key[1]}"
        if key[0] == "wz":
            return zmove
        if key[0] == "z":
            return "z"
        return f"t{key[1]}z"

    signed = {("w", i): assignment.a[i - 1] for i in range(1, 5)}
    if assignment.variant != NO_MARKER:
        signed[("wz",)] = assignment.a0

    lp = LinearProgram()
    for var in assignment.var_names():
        lp.add_variable(var, lower=0)
    for row, rhs in eqs:
        lp.add_equality(
            {name(k): _affine(c, v) * signed.get(k, 1) for k, c in row.items()}, rhs
        )
    for wkey, expr in absbounds:
        # the magnitude variable is nonnegative, so one row bounds it
        coeffs = {name(wkey): ONE}
        for k, c in expr.items():
            coeffs[name(k)] = coeffs.get(name(k), ZERO) - _affine(c, v)
        lp.add_inequality(coeffs, ZERO)
    for row, rhs in ineqs:
        lp.add_inequality({name(k): _affine(c, v) for k, c in row.items()}, rhs)
    lp.set_objective({"t1": 1, "t2": 1, "t3": 1, "t4": 1})
    return lp


def build_no_marker(assignment, v):
    """Meeting equalities, speed bounds and ordering rows of the plain game."""
    if assignment.variant != NO_MARKER:
        raise ValueError("assignment is not a no-marker one")
    return _build_named(assignment, v)


def build_marker_slow(assignment, v):
    """Marker game with the slow player dropping; find flags resolved here."""
    if assignment.variant != MARKER_SLOW:
        raise ValueError("assignment is not a slow-marker one")
    return _build_named(assignment, v)


def build_marker_fast(assignment, v):
    """Role-swapped marker game: the unit-speed holder drops, agents run at v."""
    if assignment.variant != MARKER_FAST:
        raise ValueError("assignment is not a fast-marker one")
    return _build_named(assignment, v)


def build_assignment(assignment, v):
    builder = {
        NO_MARKER: build_no_marker,
        MARKER_SLOW: build_marker_slow,
        MARKER_FAST: build_marker_fast,
    }[assignment.variant]
    return builder(assignment, v)


# ---------------------------------------------------------------------------
# raw templates (hot paths)

class RawTemplate:
    """A RawLP with coefficients affine in v, instantiable per grid point."""

    __slots__ = ("ncols", "rows", "objective", "columns")

    def __init__(self, ncols, rows, objective, columns):
        self.ncols = ncols
        self.rows = rows  # (entries: tuple[(col, c0, c1)], rhs, is_eq)
        self.objective = objective
        self.columns = columns  # key -> column or (pos, neg) pair

    def instantiate(self, v):
        rows = []
        for entries, rhs, is_eq in self.rows:
            coeffs = []
            for col, c0, c1 in entries:
                c = c0 + c1 * v if c1 else c0
                if c:
                    coeffs.append((col, c))
            rows.append((coeffs, rhs, is_eq))
        return RawLP(self.ncols, rows, self.objective)


def _raw_template(variant, order, d, drop, pattern, signed=None):
    """signed: dict key->sign for per-assignment lowering; None collapses."""
    eqs, ineqs, absbounds = _emit(variant, order, d, drop, pattern)
    marker = variant != NO_MARKER
    columns = {}
    ncols = 0
    for i in range(1, 5):
        columns[("t", i)] = ncols
        ncols += 1
    wkeys = [("w", i) for i in range(1, 5)] + ([("wz",)] if marker else [])
    for key in wkeys:
        if signed is None:
            columns[key] = (ncols, ncols + 1)
            ncols += 2
        else:
            columns[key] = ncols
            ncols += 1
    if marker:
        columns[("z",)] = ncols
        ncols += 1
        for slot in (2, 3, 4):
            if pattern[slot - 2] is not None:
                columns[("tz", slot)] = ncols
                ncols += 1

    def lowered(row, wsign=ZERO):
        """wsign: extra +-1 coefficient on magnitude columns for abs bounds."""
        entries = []
        for key, (c0, c1) in row.items():
            col = columns[key]
            if key in columns and isinstance(col, tuple):
                entries.append((col[0], c0, c1))
                entries.append((col[1], -c0, -c1))
            else:
                if signed is not None and (key[0] == "w" or key[0] == "wz"):
                    s = signed[key]
                    entries.append((col, c0 * s, c1 * s))
                else:
                    entries.append((col, c0, c1))
        return entries

    rows = []
    for row, rhs in eqs:
        rows.append((tuple(lowered(row)), rhs, True))
    for wkey, expr in absbounds:
        col = columns[wkey]
        neg = {k: (-c0, -c1) for k, (c0, c1) in expr.items()}
        if signed is None:
            p, q = col
            rows.append((tuple([(p, ONE, ZERO), (q, -ONE, ZERO)] + list(lowered(neg))), ZERO, False))
            rows.append((tuple([(p, -ONE, ZERO), (q, ONE, ZERO)] + list(lowered(neg))), ZERO, False))
        else:
            # magnitude column is nonnegative; sign plays no role in its bound
            rows.append((tuple([(col, ONE, ZERO)] + list(lowered(neg))), ZERO, False))
    for row, rhs in ineqs:
        rows.append((tuple(lowered(row)), rhs, False))
    objective = tuple((columns[("t", i)], ONE) for i in range(1, 5))
    return RawTemplate(ncols, rows, objective, columns)


def assignment_template(assignment):
    signed = {("w", i): assignment.a[i - 1] for i in range(1, 5)}
    if assignment.variant != NO_MARKER:
        signed[("wz",)] = assignment.a0
    return _raw_template(
        assignment.variant, assignment.order, assignment.d, assignment.drop,
        assignment.find_pattern, signed,
    )


@dataclass(frozen=True)
class Group:
    """All assignments sharing (order, d, drop, pattern); signs collapsed."""

    variant: str
    order: tuple
    d: tuple
    drop: Optional[int] = None
    find_pattern: Optional[tuple] = None

    def mirror(self):
        return Group(
            self.variant,
            tuple((-o, -b) for o, b in self.order),
            self.d,
            self.drop,
            self.find_pattern,
        )

    def members(self):
        """The individual assignments whose union the collapsed LP solves."""
        if self.variant == NO_MARKER:
            for a in itertools.product(SIGNS, repeat=3):
                yield ParameterAssignment(self.variant, self.order, self.d, (1,) + a)
        else:
            for a in itertools.product(SIGNS, repeat=4):
                for a0 in SIGNS:
                    yield ParameterAssignment(
                        self.variant, self.order, self.d, a, a0, self.drop,
                        self.find_pattern,
                    )


def enumerate_groups(variant):
    if variant == NO_MARKER:
        for order in ORDERS:
            for d in itertools.product(SIGNS, repeat=3):
                yield Group(variant, order, (1,) + d)
        return
    for order in ORDERS:
        for d in itertools.product(SIGNS, repeat=3):
            for drop in (1, 2, 3, 4):
                for pat in PATTERNS:
                    if pattern_compatible(drop, pat):
                        yield Group(variant, order, (1,) + d, drop, pat)


def group_template(group):
    return _raw_template(
        group.variant, group.order, group.d, group.drop, group.find_pattern, None
    )


def primal_dict(assignment, template, x):
    """Map a raw solution vector back to the named primal valuation."""
    names = {}
    move = "ut" if assignment.variant == MARKER_FAST else "vt"
    zmove = "uz" if assignment.variant == MARKER_FAST else "vz"
    for key, col in template.columns.items():
        if key[0] == "t":
            names[f"t{key[1]}"] = x[col]
        elif key[0] == "w":
            names[f"{move}{key[1]}"] = x[col]
        elif key[0] == "wz":
            names[zmove] = x[col]
        elif key[0] == "z":
            names["z"] = x[col]
        else:
            names[f"t{key[1]}z"] = x[col]
    return names
