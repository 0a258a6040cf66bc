"""Exact linear algebra over the rationals and small finite fields.

Everything here works on plain lists of lists of Fraction/int; matrices are
small (at most 6x6 apart from relation lattices), so clarity beats speed.
"""

from __future__ import annotations

from fractions import Fraction


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)]
            for i in range(n)]


def mat_vec(a, v):
    return [sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a))]


def transpose(a):
    return [list(col) for col in zip(*a)]


def identity(n, one=1):
    return [[one if i == j else one * 0 for j in range(n)] for i in range(n)]


def mat_inv(a):
    """Inverse of a square rational matrix by Gauss-Jordan. Raises ZeroDivisionError if singular."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def solve(a, b):
    """Solve a x = b exactly for a vector b."""
    inv = mat_inv(a)
    return mat_vec(inv, [Fraction(x) for x in b])


def det(a):
    """Exact determinant via fraction-free Bareiss for integer input, plain elimination otherwise."""
    n = len(a)
    m = [list(row) for row in a]
    if all(isinstance(x, int) for row in m for x in row):
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                piv = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
                if piv is None:
                    return 0
                m[k], m[piv] = m[piv], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[-1][-1]
    m = [[Fraction(x) for x in row] for row in a]
    d = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            d = -d
        d *= m[k][k]
        inv = Fraction(1) / m[k][k]
        for i in range(k + 1, n):
            if m[i][k] != 0:
                f = m[i][k] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return d


def rank(a):
    m = [[Fraction(x) for x in row] for row in a]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def kernel_mod_p(a, p):
    """Basis of the kernel of an integer matrix acting on (Z/p)^n, p prime.

    Returns a list of vectors with entries in {0, ..., p-1}.
    """
    rows = len(a)
    cols = len(a[0])
    m = [[x % p for x in row] for row in a]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] % p != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * cols
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-m[i][fc]) % p
        basis.append(v)
    return basis


def ext_gcd(a: int, b: int):
    """(g, x, y) with a x + b y = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hnf_rows(a):
    """Row-style Hermite normal form basis of the row span of an integer matrix.

    Returns the nonzero rows: a canonical basis of the generated lattice.
    """
    work = [list(map(int, row)) for row in a if any(row)]
    if not work:
        return []
    cols = len(work[0])
    basis = []
    for col in range(cols):
        while True:
            nz = [r for r in work if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            for r in nz[1:]:
                q = r[col] // p[col]
                for i in range(cols):
                    r[i] -= q * p[i]
        nz = [r for r in work if r[col] != 0]
        if nz:
            p = nz[0]
            if p[col] < 0:
                p = [-x for x in p]
            basis.append(p)
            work = [r for r in work if r[col] == 0 and any(r)]
    # reduce entries above each pivot for canonicity
    for i in reversed(range(len(basis))):
        piv = next(c for c, x in enumerate(basis[i]) if x != 0)
        for j in range(i):
            q = basis[j][piv] // basis[i][piv]
            if q:
                basis[j] = [x - q * y for x, y in zip(basis[j], basis[i])]
    return basis


def smith_normal_form(a):
    """Smith normal form of an integer matrix.

    Returns (d, u, v) with u a @ v = d, u and v unimodular, d diagonal with
    d[i][i] | d[i+1][i+1].
    """
    m = [list(map(int, row)) for row in a]
    rows, cols = len(m), len(m[0])
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, mult):
        m[dst] = [x + mult * y for x, y in zip(m[dst], m[src])]
        u[dst] = [x + mult * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, mult):
        for row in m:
            row[dst] += mult * row[src]
        for row in v:
            row[dst] += mult * row[src]

    n = min(rows, cols)
    for t in range(n):
        # move a nonzero pivot of minimal absolute value to (t, t)
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if m[i][j] != 0 and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            i, j = best
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            done = True
            for i in range(t + 1, rows):
                q = m[i][t] // m[t][t]
                if q != 0:
                    add_row(t, i, -q)
                if m[i][t] != 0:
                    done = False
            for j in range(t + 1, cols):
                q = m[t][j] // m[t][t]
                if q != 0:
                    add_col(t, j, -q)
                if m[t][j] != 0:
                    done = False
            if done:
                # ensure divisibility of the remaining block
                offender = None
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if m[i][j] % m[t][t] != 0:
                            offender = i
                            break
                    if offender is not None:
                        break
                if offender is None:
                    break
                add_row(offender, t, 1)
        if t < n and m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
    return m, u, v
