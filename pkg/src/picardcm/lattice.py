"""LLL reduction with exact arithmetic, and integer-relation search.

The reducer works on the Gram matrix only, with exact rational arithmetic;
vector input is converted to its exact Gram when the entries are rational,
and scaled/rounded to integers when they are floating point.  In the
floating-point case a verification pass at doubled precision checks the
reduction conditions on the true Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath as mp

from . import _linalg
from .errors import PrecisionTooLow, RankDeficient

DEFAULT_DELTA = Fraction(99, 100)


@dataclass
class LatticeBasis:
    """Row-vector basis, or a Gram matrix when gram_mode is set."""

    rows: list
    gram_mode: bool = False

    def dim(self) -> int:
        return len(self.rows)


def _is_exact(rows) -> bool:
    return all(isinstance(x, (int, Fraction)) for row in rows for x in row)


def _gram_of_rows(rows):
    n = len(rows)
    return [[sum(Fraction(rows[i][t]) * Fraction(rows[j][t]) for t in range(len(rows[i])))
             for j in range(n)] for i in range(n)]


def _round_to_int(x, scale):
    return int(mp.nint(mp.mpf(x) * scale))


class _GramLLL:
    """Textbook LLL driven purely by the (exact rational) Gram matrix."""

    def __init__(self, gram, delta: Fraction):
        self.n = len(gram)
        self.g = [[Fraction(x) for x in row] for row in gram]
        self.u = _linalg.identity(self.n)
        self.delta = Fraction(delta)
        self.mu = [[Fraction(0)] * self.n for _ in range(self.n)]
        self.gamma = [Fraction(0)] * self.n
        self._gso_from(0)

    def _gso_from(self, start):
        for i in range(start, self.n):
            for j in range(i):
                s = self.g[i][j]
                for t in range(j):
                    s -= self.mu[i][t] * self.mu[j][t] * self.gamma[t]
                if self.gamma[j] == 0:
                    raise RankDeficient("zero Gram-Schmidt norm")
                self.mu[i][j] = s / self.gamma[j]
            s = self.g[i][i]
            for t in range(i):
                s -= self.mu[i][t] ** 2 * self.gamma[t]
            if s <= 0:
                raise RankDeficient("Gram matrix is not positive definite")
            self.gamma[i] = s

    def _size_reduce_row(self, k):
        for j in range(k - 1, -1, -1):
            rq = round(self.mu[k][j])
            if rq == 0:
                continue
            g, u = self.g, self.u
            gkk_new = g[k][k] - 2 * rq * g[k][j] + rq * rq * g[j][j]
            for i in range(self.n):
                if i != k:
                    g[k][i] -= rq * g[j][i]
                    g[i][k] = g[k][i]
            g[k][k] = gkk_new
            u[k] = [a - rq * b for a, b in zip(u[k], u[j])]
            for t in range(j):
                self.mu[k][t] -= rq * self.mu[j][t]
            self.mu[k][j] -= rq

    def _swap(self, k):
        g, u = self.g, self.u
        g[k], g[k - 1] = g[k - 1], g[k]
        for row in g:
            row[k], row[k - 1] = row[k - 1], row[k]
        u[k], u[k - 1] = u[k - 1], u[k]
        self._gso_from(k - 1)

    def run(self):
        k = 1
        while k < self.n:
            self._size_reduce_row(k)
            if self.gamma[k] >= (self.delta - self.mu[k][k - 1] ** 2) * self.gamma[k - 1]:
                k += 1
            else:
                self._swap(k)
                k = max(k - 1, 1)
        return self.g, self.u


def lll_reduce(basis: LatticeBasis, delta=DEFAULT_DELTA):
    """LLL-reduce a basis; returns (reduced LatticeBasis, integer transform).

    transform @ input_rows == reduced rows, det(transform) = +-1.
    """
    delta = Fraction(delta).limit_denominator(10 ** 6)
    if not (Fraction(1, 4) < delta < 1):
        raise ValueError("delta must lie in (1/4, 1)")
    rows = basis.rows
    n = len(rows)

    if basis.gram_mode:
        gram = rows
        if _is_exact(gram):
            core = _GramLLL(gram, delta)
            g, u = core.run()
            return LatticeBasis(g, gram_mode=True), u
        return _lll_float_gram(gram, delta)

    if _is_exact(rows):
        if _linalg.rank(rows) < n:
            raise RankDeficient("input rows are linearly dependent")
        core = _GramLLL(_gram_of_rows(rows), delta)
        _, u = core.run()
        new_rows = [[sum(Fraction(u[i][j]) * Fraction(rows[j][t]) for j in range(n))
                     for t in range(len(rows[0]))] for i in range(n)]
        return LatticeBasis(new_rows), u

    # floating-point rows: scale, round, reduce exactly, verify on true Gram
    prec = mp.mp.prec
    scale = mp.mpf(2) ** 64
    for _ in range(4):
        int_rows = [[_round_to_int(x, scale) for x in row] for row in rows]
        if _linalg.rank(int_rows) == n:
            core = _GramLLL(_gram_of_rows(int_rows), delta)
            _, u = core.run()
            with mp.workprec(2 * prec):
                new_rows = [[mp.fsum(mp.mpf(u[i][j]) * mp.mpf(rows[j][t]) for j in range(n))
                             for t in range(len(rows[0]))] for i in range(n)]
                if _verify_float_reduction(new_rows, delta):
                    return LatticeBasis(new_rows), u
        scale *= mp.mpf(2) ** 32
    raise RankDeficient("could not certify a reduction of the floating-point input")


def _lll_float_gram(gram, delta):
    prec = mp.mp.prec
    scale = mp.mpf(2) ** 64
    n = len(gram)
    for _ in range(4):
        int_gram = [[_round_to_int(gram[i][j], scale) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i):
                m = (int_gram[i][j] + int_gram[j][i]) // 2
                int_gram[i][j] = int_gram[j][i] = m
        try:
            core = _GramLLL(int_gram, delta)
            _, u = core.run()
        except RankDeficient:
            scale *= mp.mpf(2) ** 32
            continue
        with mp.workprec(2 * prec):
            new_gram = [[mp.fsum(mp.mpf(u[i][a]) * mp.mpf(gram[a][b]) * mp.mpf(u[j][b])
                                 for a in range(n) for b in range(n))
                         for j in range(n)] for i in range(n)]
        return LatticeBasis(new_gram, gram_mode=True), u
    raise RankDeficient("Gram matrix could not be reduced at this precision")


def _verify_float_reduction(rows, delta, slack=1e-9):
    n = len(rows)
    gram = [[mp.fsum(rows[i][t] * rows[j][t] for t in range(len(rows[0])))
             for j in range(n)] for i in range(n)]
    mu = [[mp.mpf(0)] * n for _ in range(n)]
    gamma = [mp.mpf(0)] * n
    for i in range(n):
        for j in range(i):
            s = gram[i][j]
            for t in range(j):
                s -= mu[i][t] * mu[j][t] * gamma[t]
            mu[i][j] = s / gamma[j]
        s = gram[i][i]
        for t in range(i):
            s -= mu[i][t] ** 2 * gamma[t]
        if s <= 0:
            return False
        gamma[i] = s
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > mp.mpf("0.5") + slack:
                return False
    d = mp.mpf(delta.numerator) / delta.denominator
    for k in range(1, n):
        if gamma[k] < (d - mu[k][k - 1] ** 2) * gamma[k - 1] * (1 - slack):
            return False
    return True


# --------------------------------------------------------------------------


def integer_relation(values, bound: int, prec_bits: int | None = None):
    """Small integer vector a with sum(a_i * v_i) ~ 0, or None.

    Values may be real or complex mpmath numbers given at prec_bits working
    precision; the relation is found by LLL on the standard relation lattice
    with scaling 2^(3 prec/4) and checked against 2^(-prec/2).
    """
    if prec_bits is None:
        prec_bits = mp.mp.prec
    if prec_bits < 128:
        raise PrecisionTooLow("integer_relation requires at least 128 bits")
    n = len(values)
    vals = [mp.mpc(v) for v in values]
    scale = mp.mpf(2) ** (3 * prec_bits // 4)
    has_im = any(abs(mp.im(v)) > mp.mpf(2) ** (-prec_bits + 16) for v in vals)

    rows = []
    for i, v in enumerate(vals):
        row = [0] * n
        row[i] = 1
        row.append(_round_to_int(mp.re(v), scale))
        if has_im:
            row.append(_round_to_int(mp.im(v), scale))
        rows.append(row)

    reduced, _ = lll_reduce(LatticeBasis(rows), delta=DEFAULT_DELTA)
    tol = mp.mpf(2) ** (-(prec_bits // 2))
    for row in reduced.rows:
        a = [int(x) for x in row[:n]]
        if all(x == 0 for x in a):
            continue
        if max(abs(x) for x in a) > bound:
            continue
        with mp.workprec(2 * prec_bits):
            resid = abs(mp.fsum(ai * v for ai, v in zip(a, vals)))
        if resid < tol:
            if next(x for x in a if x != 0) < 0:
                a = [-x for x in a]
            return a
    return None
