"""Exact two-phase simplex over rationals with optimality certificates.

Two layers:

* :class:`RawLP` is the internal standard-ish form used by the hot family
  paths: integer-indexed variables, all implicitly >= 0, sparse rows.
* :class:`LinearProgram` is the named-variable container with optional
  bounds.  It compiles to a RawLP (lower bounds shifted away, free
  variables split, upper bounds turned into rows) and maps the solution
  back.

Every optimal solve carries a dual certificate; :func:`verify_optimality`
re-checks it independently of the pivoting path.
"""

from gmpy2 import mpq

from . import kernel
from .rational import ZERO, rational

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class MalformedProgram(ValueError):
    """Raised for structurally invalid programs (unknown variable, ...)."""


class CertificateError(AssertionError):
    """An optimal solve failed its own duality certificate."""


class RawLP:
    """min c.x  s.t.  sparse rows (eq or <=), x >= 0 componentwise."""

    __slots__ = ("ncols", "rows", "objective")

    def __init__(self, ncols, rows, objective):
        self.ncols = ncols
        self.rows = rows  # list of (coeffs: list[(col, mpq)], rhs: mpq, is_eq: bool)
        self.objective = objective  # list of (col, mpq)


class RawResult:
    __slots__ = ("status", "x", "objective", "duals", "pivots")

    def __init__(self, status, x=None, objective=None, duals=None, pivots=0):
        self.status = status
        self.x = x
        self.objective = objective
        self.duals = duals  # per original row, sign convention: <= rows have y <= 0
        self.pivots = pivots


def solve_raw(lp, want_duals=True):
    """Two-phase Bland simplex on a RawLP."""
    m = len(lp.rows)
    n = lp.ncols
    nles = sum(1 for r in lp.rows if not r[2])
    width = n + nles + m + 1  # structural + slacks + artificials (worst case) + rhs
    rhs_col = width - 1

    T = []
    basis = [-1] * m
    negated = [False] * m
    unit_col = [-1] * m  # a column equal to +e_i in the initial tableau
    art_cols = []
    slack_at = n
    art_at = n + nles
    for i, (coeffs, rhs, is_eq) in enumerate(lp.rows):
        neg = rhs < 0
        negated[i] = neg
        row = [ZERO] * width
        for c, a in coeffs:
            row[c] = -a if neg else a
        row[rhs_col] = -rhs if neg else rhs
        if not is_eq:
            row[slack_at] = mpq(-1) if neg else mpq(1)
            if not neg:
                basis[i] = slack_at
                unit_col[i] = slack_at
            slack_at += 1
        if basis[i] < 0:
            row[art_at] = mpq(1)
            basis[i] = art_at
            unit_col[i] = art_at
            art_cols.append(art_at)
            art_at += 1
        T.append(row)

    pivots = 0
    if art_cols:
        # phase 1: minimize the sum of artificials
        zrow = [ZERO] * width
        for c in art_cols:
            zrow[c] = mpq(1)
        for i, b in enumerate(basis):
            if zrow[b]:
                f = zrow[b]
                row = T[i]
                for k in range(width):
                    if row[k]:
                        zrow[k] -= f * row[k]
        _, np1 = kernel.run(T, zrow, basis, n + nles)
        pivots += np1
        if zrow[rhs_col] != 0:
            return RawResult(INFEASIBLE, pivots=pivots)
        # drive artificials out of the basis; rows with no real pivot are redundant
        art_set = set(art_cols)
        drop = []
        for i in range(m):
            if basis[i] in art_set:
                row = T[i]
                done = False
                for j in range(n + nles):
                    if row[j]:
                        kernel.pivot(T, zrow, basis, i, j)
                        done = True
                        break
                if not done:
                    drop.append(i)
        if drop:
            for i in reversed(drop):
                del T[i], basis[i]
            m = len(T)

    # phase 2
    zrow = [ZERO] * width
    for c, a in lp.objective:
        zrow[c] = mpq(a)
    for i, b in enumerate(basis):
        if zrow[b]:
            f = zrow[b]
            row = T[i]
            for k in range(width):
                if row[k]:
                    zrow[k] -= f * row[k]
    status, np2 = kernel.run(T, zrow, basis, n + nles)
    pivots += np2
    if status == kernel.UNBOUNDED:
        return RawResult(UNBOUNDED, pivots=pivots)

    x = [ZERO] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][rhs_col]
    obj = -zrow[rhs_col]

    duals = None
    if want_duals:
        # y_i = c_B . (final column of the row's initial unit vector);
        # that column is exactly -zrow shifted by the phase-2 cost of the unit
        # column itself (zero for slacks and artificials), so read it off zrow.
        duals = []
        for i in range(len(lp.rows)):
            y = -zrow[unit_col[i]]
            duals.append(-y if negated[i] else y)
    return RawResult(OPTIMAL, x, obj, duals, pivots)


def verify_raw(lp, res):
    """Exact primal/dual certificate check for a RawLP optimum."""
    if res.status != OPTIMAL:
        return False
    x = res.x
    if any(v < 0 for v in x):
        return False
    dual_obj = ZERO
    for (coeffs, rhs, is_eq), y in zip(lp.rows, res.duals):
        lhs = sum((a * x[c] for c, a in coeffs), ZERO)
        if is_eq:
            if lhs != rhs:
                return False
        else:
            if lhs > rhs:
                return False
            if y > 0:
                return False
        dual_obj += y * rhs
    # reduced costs nonnegative for every column
    rc = [ZERO] * lp.ncols
    for c, a in lp.objective:
        rc[c] += a
    for (coeffs, _, _), y in zip(lp.rows, res.duals):
        if y:
            for c, a in coeffs:
                rc[c] -= y * a
    if any(r < 0 for r in rc):
        return False
    primal_obj = sum((a * x[c] for c, a in lp.objective), ZERO)
    return primal_obj == res.objective == dual_obj


class LinearProgram:
    """Named-variable LP: equalities, <= inequalities, optional var bounds."""

    def __init__(self):
        self.variables = []
        self._index = {}
        self.lower = {}
        self.upper = {}
        self.equalities = []  # (coeffs: dict name -> mpq, rhs)
        self.inequalities = []  # coeffs . x <= rhs
        self.objective = {}

    def add_variable(self, name, lower=None, upper=None):
        if name in self._index:
            raise MalformedProgram(f"duplicate variable {name!r}")
        if lower is not None and upper is not None and rational(lower) > rational(upper):
            raise MalformedProgram(f"bounds cross for {name!r}")
        self._index[name] = len(self.variables)
        self.variables.append(name)
        if lower is not None:
            self.lower[name] = rational(lower)
        if upper is not None:
            self.upper[name] = rational(upper)

    def _coeffs(self, coeffs):
        out = {}
        for name, a in coeffs.items():
            if name not in self._index:
                raise MalformedProgram(f"unknown variable {name!r}")
            a = rational(a)
            if a:
                out[name] = a
        return out

    def add_equality(self, coeffs, rhs):
        self.equalities.append((self._coeffs(coeffs), rational(rhs)))

    def add_inequality(self, coeffs, rhs):
        self.inequalities.append((self._coeffs(coeffs), rational(rhs)))

    def set_objective(self, coeffs):
        self.objective = self._coeffs(coeffs)

    def dump(self):
        """Human-readable listing (debug aid; not a stable format)."""
        out = []
        term = lambda cs: " + ".join(f"{a}*{n}" for n, a in cs.items()) or "0"
        out.append("min " + term(self.objective))
        for cs, rhs in self.equalities:
            out.append(f"  {term(cs)} == {rhs}")
        for cs, rhs in self.inequalities:
            out.append(f"  {term(cs)} <= {rhs}")
        for name in self.variables:
            lo = self.lower.get(name)
            up = self.upper.get(name)
            if lo is not None or up is not None:
                out.append(f"  {lo if lo is not None else '-inf'} <= {name} <= {up if up is not None else 'inf'}")
        return "\n".join(out)


class LPResult:
    """Solved state: primal values, objective, and the dual certificate."""

    def __init__(self, status, primal=None, objective=None, dual_eq=None, dual_ineq=None, dual_upper=None):
        self.status = status
        self.primal = primal
        self.objective = objective
        self.dual_eq = dual_eq
        self.dual_ineq = dual_ineq
        self.dual_upper = dual_upper  # dict name -> dual of the upper-bound row

    def __repr__(self):
        if self.status != OPTIMAL:
            return f"LPResult({self.status})"
        return f"LPResult(optimal, objective={self.objective})"


def _compile(lp):
    """Lower a LinearProgram to a RawLP.

    Variables with a lower bound are shifted to start at zero; unbounded-
    below variables are split into a difference of nonnegatives; upper
    bounds become explicit rows (appended after the user inequalities).
    """
    if not lp.objective:
        raise MalformedProgram("empty objective")
    cols = {}  # name -> (pos_col, neg_col or None, shift)
    ncols = 0
    for name in lp.variables:
        lo = lp.lower.get(name)
        if lo is None:
            cols[name] = (ncols, ncols + 1, ZERO)
            ncols += 2
        else:
            cols[name] = (ncols, None, lo)
            ncols += 1

    def lower_row(coeffs, rhs):
        out = []
        for name, a in coeffs.items():
            p, q, shift = cols[name]
            out.append((p, a))
            if q is not None:
                out.append((q, -a))
            if shift:
                rhs -= a * shift
        return out, rhs

    rows = []
    for coeffs, rhs in lp.equalities:
        cs, r = lower_row(coeffs, rhs)
        rows.append((cs, r, True))
    for coeffs, rhs in lp.inequalities:
        cs, r = lower_row(coeffs, rhs)
        rows.append((cs, r, False))
    upper_names = [n for n in lp.variables if n in lp.upper]
    for name in upper_names:
        cs, r = lower_row({name: mpq(1)}, lp.upper[name])
        rows.append((cs, r, False))
    obj, obj_shift = lower_row(lp.objective, ZERO)
    return RawLP(ncols, rows, obj), cols, upper_names, -obj_shift


def solve(lp):
    """Solve a LinearProgram exactly; Infeasible/Unbounded are reported."""
    raw, cols, upper_names, obj_const = _compile(lp)
    res = solve_raw(raw)
    if res.status != OPTIMAL:
        return LPResult(res.status)
    primal = {}
    for name in lp.variables:
        p, q, shift = cols[name]
        v = res.x[p] + shift
        if q is not None:
            v -= res.x[q]
        primal[name] = v
    neq = len(lp.equalities)
    nineq = len(lp.inequalities)
    dual_eq = res.duals[:neq]
    dual_ineq = res.duals[neq:neq + nineq]
    dual_upper = dict(zip(upper_names, res.duals[neq + nineq:]))
    objective = res.objective + obj_const
    out = LPResult(OPTIMAL, primal, objective, dual_eq, dual_ineq, dual_upper)
    if not verify_optimality(lp, out):
        raise CertificateError("optimal solve failed its duality certificate")
    return out


def verify_optimality(lp, result):
    """True iff the result's primal and dual are exactly feasible and tight."""
    if result.status != OPTIMAL:
        return False
    x = result.primal
    for name in lp.variables:
        lo = lp.lower.get(name)
        up = lp.upper.get(name)
        if lo is not None and x[name] < lo:
            return False
        if up is not None and x[name] > up:
            return False
    for coeffs, rhs in lp.equalities:
        if sum((a * x[n] for n, a in coeffs.items()), ZERO) != rhs:
            return False
    for coeffs, rhs in lp.inequalities:
        if sum((a * x[n] for n, a in coeffs.items()), ZERO) > rhs:
            return False
    if any(y > 0 for y in result.dual_ineq):
        return False
    if any(y > 0 for y in result.dual_upper.values()):
        return False
    # reduced costs: c - A^T y; >= 0 where lower-bounded, == 0 where free
    rc = {name: lp.objective.get(name, ZERO) for name in lp.variables}
    for (coeffs, _), y in zip(lp.equalities, result.dual_eq):
        if y:
            for n, a in coeffs.items():
                rc[n] -= y * a
    for (coeffs, _), y in zip(lp.inequalities, result.dual_ineq):
        if y:
            for n, a in coeffs.items():
                rc[n] -= y * a
    for name, y in result.dual_upper.items():
        rc[name] -= y
    dual_obj = ZERO
    for (_, rhs), y in zip(lp.equalities, result.dual_eq):
        dual_obj += y * rhs
    for (_, rhs), y in zip(lp.inequalities, result.dual_ineq):
        dual_obj += y * rhs
    for name, y in result.dual_upper.items():
        dual_obj += y * lp.upper[name]
    for name in lp.variables:
        lo = lp.lower.get(name)
        if lo is None:
            if rc[name] != 0:
                return False
        else:
            if rc[name] < 0:
                return False
            dual_obj += rc[name] * lo
    primal_obj = sum((a * x[n] for n, a in lp.objective.items()), ZERO)
    return primal_obj == result.objective == dual_obj
