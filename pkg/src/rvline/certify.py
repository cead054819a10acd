"""Closed forms, exact matching of sweep tables, and interval certification.

The certification argument: opt(v) and nextToopt(v) are nonincreasing in
v, so whenever opt(v) < nextToopt(v + dv) and the optimal strategy at v
and v + dv is the same, that strategy is optimal on the whole step
[v, v + dv].  Maximal runs of consecutive certified steps become
certified intervals, each annotated with the closed form it matches
exactly at every contained grid point.
"""

from dataclasses import dataclass
from typing import Optional

from gmpy2 import mpq

from .rational import isolate_root, rational

EXACT_LT = "exact_lt"
EXACT_GT = "exact_gt"
MARKER_SLOW_FORM = "marker_slow"
MARKER_FAST_FORM = "marker_fast"


def _poly(*coeffs):
    """ascending-degree integer coefficients -> evaluator"""
    cs = [mpq(c) for c in coeffs]

    def ev(v):
        acc = mpq(0)
        for c in reversed(cs):
            acc = acc * v + c
        return acc

    ev.coeffs = cs
    return ev


@dataclass(frozen=True)
class ClosedForm:
    """Rendezvous times and their sum as exact rational functions of v."""

    name: str
    z: Optional[object]
    times: tuple  # four (num, den) evaluator pairs
    total: tuple  # (num, den)
    validity: tuple  # claimed grid interval at n=1000, for reference

    def eval(self, v):
        v = rational(v)
        if not 0 <= v <= 1:
            raise ValueError("speed ratio must lie in [0, 1]")
        out = {}
        if self.z is not None:
            zn, zd = self.z
            out["z"] = zn(v) / zd(v)
        ts = []
        for num, den in self.times:
            d = den(v)
            if d == 0:
                raise ValueError(f"{self.name} undefined at v={v}")
            ts.append(num(v) / d)
        out["times"] = tuple(ts)
        n, d = self.total
        out["sum"] = n(v) / d(v)
        return out


_one = _poly(1)

FORMS = {
    EXACT_LT: ClosedForm(
        EXACT_LT,
        None,
        (
            (_one, _one),
            (_one, _one),
            (_poly(3, 1), _poly(1, 1)),
            (_poly(3, 8, 1), _poly(1, 2, 1)),
        ),
        (_poly(8, 16, 4), _poly(1, 2, 1)),
        (mpq(1, 1000), mpq(618, 1000)),
    ),
    EXACT_GT: ClosedForm(
        EXACT_GT,
        None,
        (
            (_one, _poly(1, 1)),
            (_poly(1, 3), _poly(1, 2, 1)),
            (_poly(3, 5), _poly(1, 2, 1)),
            (_poly(3, 14, 7), _poly(1, 3, 3, 1)),
        ),
        (_poly(8, 28, 16), _poly(1, 3, 3, 1)),
        (mpq(619, 1000), mpq(990, 1000)),
    ),
    MARKER_SLOW_FORM: ClosedForm(
        MARKER_SLOW_FORM,
        (_one, _poly(3, 1)),
        (
            (_poly(3), _poly(3, 1)),
            (_poly(3, 5), _poly(3, 4, 1)),
            (_poly(9, 12, 7), _poly(3, 7, 5, 1)),
            (_poly(9, 35, 27, 9), _poly(3, 10, 12, 6, 1)),
        ),
        (_poly(24, 76, 68, 24), _poly(3, 10, 12, 6, 1)),
        (mpq(17, 1000), mpq(1)),
    ),
    MARKER_FAST_FORM: ClosedForm(
        MARKER_FAST_FORM,
        (_one, _poly(1, 3)),
        (
            (_poly(3), _poly(1, 3)),
            (_poly(5, 3), _poly(1, 4, 3)),
            (_poly(5, 9), _poly(1, 4, 3)),
            (_poly(7, 3), _poly(1, 2, 1)),
        ),
        (_poly(20, 52, 24), _poly(1, 5, 7, 3)),
        (mpq(807, 1000), mpq(966, 1000)),
    ),
}

#: forms a variant's optimum may match, in matching priority order
VARIANT_FORMS = {
    "none": (EXACT_LT, EXACT_GT),
    "slow-marker": (MARKER_SLOW_FORM, EXACT_LT, EXACT_GT),
    "fast-marker": (EXACT_LT, EXACT_GT, MARKER_FAST_FORM),
}


def eval_closed_form(name, v):
    """Exact times (and drop time where defined) plus their sum."""
    if name not in FORMS:
        raise ValueError(f"unknown closed form {name!r}")
    return FORMS[name].eval(v)


def form_sum(name, v):
    return FORMS[name].eval(v)["sum"]


@dataclass(frozen=True)
class CertifiedInterval:
    v_lo: object
    v_hi: object
    signature: str
    closed_form: Optional[str]

    def __contains__(self, v):
        return self.v_lo <= v <= self.v_hi


def certify(table):
    """Maximal certified runs of a sweep table.

    A step from row k to k+1 is certified when opt(v_k) < nextToopt(v_{k+1})
    strictly and both rows carry the same strategy signature.
    """
    rows = table.rows
    intervals = []
    i = 0
    while i < len(rows):
        j = i
        while j + 1 < len(rows):
            nxt = rows[j + 1]
            if nxt.signature != rows[j].signature:
                break
            if nxt.next_to_opt_sum is None or not rows[j].opt_sum < nxt.next_to_opt_sum:
                break
            j += 1
        form = _matching_form(table.variant, rows[i:j + 1])
        intervals.append(
            CertifiedInterval(rows[i].v, rows[j].v, rows[i].signature, form)
        )
        i = j + 1
    return intervals


def _matching_form(variant, rows):
    for name in VARIANT_FORMS[variant]:
        if all(row.opt_sum == form_sum(name, row.v) for row in rows):
            return name
    return None


def crossover(name_a, name_b, bracket, width=mpq(1, 10**12)):
    """Exact enclosure of the speed at which two closed-form values cross.

    Clears denominators of the difference of the two sum expressions and
    isolates the root of the resulting polynomial by exact bisection.
    """
    fa, fb = FORMS[name_a], FORMS[name_b]

    def poly_mul(p, q):
        out = [mpq(0)] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] += a * b
        return out

    na, da = fa.total[0].coeffs, fa.total[1].coeffs
    nb, db = fb.total[0].coeffs, fb.total[1].coeffs
    # numerator of na/da - nb/db
    diff_num = [x - y for x, y in _pad(poly_mul(na, db), poly_mul(nb, da))]
    return isolate_root(diff_num, bracket, width)


def _pad(p, q):
    n = max(len(p), len(q))
    p = p + [mpq(0)] * (n - len(p))
    q = q + [mpq(0)] * (n - len(q))
    return zip(p, q)
