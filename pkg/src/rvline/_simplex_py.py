"""Pure-Python dense simplex kernel.

Operates on a tableau of exact rationals (lists of gmpy2.mpq rows, rhs in
the last column) with Bland's pivoting rule throughout, so every solve is
deterministic and cycling is impossible.  The compiled twin in
``_simplex_cy`` implements the identical pivot sequence; either kernel can
back the solver (see ``rvline.kernel``).
"""

KERNEL_NAME = "python"

OPTIMAL = 0
UNBOUNDED = 1


def pivot(T, zrow, basis, r, c):
    """Pivot the tableau on row r, column c (in place)."""
    prow = T[r]
    piv = prow[c]
    if piv != 1:
        inv = 1 / piv
        for k in range(len(prow)):
            if prow[k]:
                prow[k] *= inv
    for row in T:
        if row is prow:
            continue
        f = row[c]
        if f:
            for k in range(len(prow)):
                pk = prow[k]
                if pk:
                    row[k] -= f * pk
    f = zrow[c]
    if f:
        for k in range(len(prow)):
            pk = prow[k]
            if pk:
                zrow[k] -= f * pk
    basis[r] = c


def run(T, zrow, basis, nenter):
    """Pivot to optimality under Bland's rule.

    Columns with index >= nenter are never chosen to enter (used to lock
    out artificials).  Returns (OPTIMAL | UNBOUNDED, pivot count).
    """
    m = len(T)
    rhs = len(zrow) - 1
    count = 0
    while True:
        enter = -1
        for j in range(nenter):
            if zrow[j] < 0:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, count
        leave = -1
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][rhs] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED, count
        pivot(T, zrow, basis, leave, enter)
        count += 1
