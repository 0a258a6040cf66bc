#!/usr/bin/env python3
"""Generate the shipped JSON data files for the CM fields.

For each cubic this computes, with exact arithmetic:

* the maximal order of K0 (saturating the equation order at primes whose
  square divides the polynomial discriminant),
* the maximal order of K = K0(zeta_3) (saturating the tensor order, which
  can only be non-maximal at 3),
* a pair of independent units of K0 (by a small norm-form search, reduced
  by log-embedding size),

and writes src/picardcm/fields/<label>.json.  Ideal data for fields with
class number > 1 is produced separately by gen_ideal_data.py.

Usage: python3 tools/gen_field_data.py [label ...]
"""

import json
import os
import sys
from fractions import Fraction
from itertools import product

import mpmath as mp
import sympy

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from picardcm import _linalg  # noqa: E402

# (label, (c0, c1, c2), extras)
FIELDS = [
    ("nu3-3nu-1",        (-1, -3, 0),   {}),
    ("nu3-nu2-2nu+1",    (1, -2, -1),   {}),
    ("nu3-nu2-4nu-1",    (-1, -4, -1),  {}),
    ("nu3+nu2-10nu-8",   (-8, -10, 1),  {}),
    ("nu3-nu2-14nu-8",   (-8, -14, -1), {}),
    ("nu3-21nu-28",      (-28, -21, 0), {}),
    ("nu3-21nu+35",      (35, -21, 0),  {}),
    ("nu3-39nu+26",      (26, -39, 0),  {}),
    ("nu3-nu2-6nu+7",    (7, -6, -1),   {"model_radicand": 19}),
    ("nu3-nu2-12nu-11",  (-11, -12, -1), {"model_radicand": 37}),
    ("nu3-109nu-436",    (-436, -109, 0), {"model_radicand": 109}),
    ("nu3-nu2-42nu-80",  (-80, -42, -1), {"model_radicand": 127}),
    ("nu3-61nu-183",     (-183, -61, 0), {}),
    ("nu3-nu2-22nu-5",   (-5, -22, -1), {}),
]


def mult_matrix(basis_rows, elem, mul, binv=None):
    """Matrix of multiplication by elem on the order with the given basis."""
    n = len(basis_rows)
    if binv is None:
        binv = _linalg.mat_inv(_linalg.transpose(basis_rows))
    cols = []
    for b in basis_rows:
        prod = mul(elem, b)
        cols.append(_linalg.mat_vec(binv, prod))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def charpoly_is_integral(mat):
    """Faddeev-LeVerrier: integral characteristic polynomial test."""
    n = len(mat)
    m = [[Fraction(x) for x in row] for row in mat]
    am = [row[:] for row in m]
    coeffs = []
    for k in range(1, n + 1):
        c = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(c)
        if k == n:
            break
        for i in range(n):
            am[i][i] += c
        am = _linalg.mat_mul(m, am)
    return all(c.denominator == 1 for c in coeffs)


def order_disc(basis_rows, mul, trace):
    n = len(basis_rows)
    gram = [[trace(mul(basis_rows[i], basis_rows[j])) for j in range(n)]
            for i in range(n)]
    return _linalg.det(gram)


def saturate(basis_rows, mul, trace):
    """Enlarge an order basis until p-maximal at every p with p^2 | disc."""
    n = len(basis_rows)
    basis_rows = [[Fraction(x) for x in row] for row in basis_rows]
    while True:
        disc = order_disc(basis_rows, mul, trace)
        assert disc.denominator == 1
        primes = [int(p) for p, e in sympy.factorint(abs(int(disc))).items() if e >= 2]
        enlarged = False
        binv = _linalg.mat_inv(_linalg.transpose(basis_rows))
        for p in primes:
            for a in product(range(p), repeat=n):
                if not any(a):
                    continue
                elem = [sum(Fraction(a[i]) * basis_rows[i][t] for i in range(n)) / p
                        for t in range(n)]
                if trace(elem).denominator != 1:
                    continue
                if charpoly_is_integral(mult_matrix(basis_rows, elem, mul, binv)):
                    den = 1
                    for row in basis_rows + [elem]:
                        for x in row:
                            den = sympy.ilcm(den, x.denominator)
                    int_rows = [[int(x * den) for x in row]
                                for row in basis_rows + [elem]]
                    hnf = _linalg.hnf_rows(int_rows)
                    assert len(hnf) == n
                    basis_rows = [[Fraction(x, den) for x in row] for row in hnf]
                    enlarged = True
                    break
            if enlarged:
                break
        if not enlarged:
            return basis_rows, disc


def k0_ops(c0, c1, c2):
    red3 = (-Fraction(c0), -Fraction(c1), -Fraction(c2))
    red4 = (red3[2] * red3[0], red3[0] + red3[2] * red3[1], red3[1] + red3[2] * red3[2])

    def mul(a, b):
        c = [Fraction(0)] * 5
        for i in range(3):
            for j in range(3):
                c[i + j] += Fraction(a[i]) * Fraction(b[j])
        out = [c[0], c[1], c[2]]
        for k, red in ((3, red3), (4, red4)):
            for t in range(3):
                out[t] += c[k] * red[t]
        return out

    p1 = Fraction(-c2)
    p2 = Fraction(c2 * c2 - 2 * c1)

    def trace(a):
        return 3 * a[0] + p1 * a[1] + p2 * a[2]

    return mul, trace


def k_ops(c0, c1, c2):
    mul0, trace0 = k0_ops(c0, c1, c2)

    def mul(x, y):
        a1, b1 = x[:3], x[3:]
        a2, b2 = y[:3], y[3:]
        aa, bb = mul0(a1, a2), mul0(b1, b2)
        ab, ba = mul0(a1, b2), mul0(b1, a2)
        real = [p - q for p, q in zip(aa, bb)]
        zeta = [p + q - r for p, q, r in zip(ab, ba, bb)]
        return real + zeta

    def trace(x):
        return 2 * trace0(x[:3]) - trace0(x[3:])

    return mul, trace


def find_units(k0_basis, mul0, c0, c1, c2):
    """Two independent units of O_{K0}, smallish in log-embedding norm."""
    binv = _linalg.mat_inv(_linalg.transpose(k0_basis))
    gen_mats = [mult_matrix(k0_basis, b, mul0, binv) for b in k0_basis]
    units = []
    for bound in (2, 3, 5, 8, 13, 21, 34):
        for a in product(range(-bound, bound + 1), repeat=3):
            if not any(a):
                continue
            mat = [[sum(a[g] * gen_mats[g][i][j] for g in range(3))
                    for j in range(3)] for i in range(3)]
            nrm = (mat[0][0] * (mat[1][1] * mat[2][2] - mat[1][2] * mat[2][1])
                   - mat[0][1] * (mat[1][0] * mat[2][2] - mat[1][2] * mat[2][0])
                   + mat[0][2] * (mat[1][0] * mat[2][1] - mat[1][1] * mat[2][0]))
            if abs(nrm) != 1:
                continue
            x = [sum(Fraction(a[i]) * k0_basis[i][t] for i in range(3))
                 for t in range(3)]
            if x not in ([1, 0, 0], [-1, 0, 0]):
                units.append(x)
        if len(units) >= 8:
            break

    roots = sorted(mp.polyroots([1, c2, c1, c0], extraprec=100))

    def logvec(x):
        return [mp.log(abs(x[0] + x[1] * r + x[2] * r * r)) for r in roots]

    units.sort(key=lambda x: float(mp.norm(mp.matrix(logvec(x)))))
    chosen = []
    for u in units:
        if not chosen:
            if float(mp.norm(mp.matrix(logvec(u)))) > 1e-6:
                chosen.append(u)
            continue
        m = mp.matrix([logvec(chosen[0]), logvec(u)])
        # rank 2 test via 2x2 minors
        minors = [m[0, i] * m[1, j] - m[0, j] * m[1, i]
                  for i in range(3) for j in range(i + 1, 3)]
        if max(abs(x) for x in minors) > 1e-6:
            chosen.append(u)
        if len(chosen) == 2:
            break
    assert len(chosen) == 2, "unit search failed"
    return chosen


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def build_field(label, cubic, extras):
    c0, c1, c2 = cubic
    mul0, trace0 = k0_ops(c0, c1, c2)
    mulk, tracek = k_ops(c0, c1, c2)

    eq0 = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    k0_basis, disc0 = saturate(eq0, mul0, trace0)
    f0 = sympy.sqrt(abs(int(disc0)))
    assert f0.is_integer, f"disc(K0) = {disc0} not a square"
    f0 = int(f0)

    k_rows = [row + [Fraction(0)] * 3 for row in k0_basis]
    k_rows += [[Fraction(0)] * 3 + row for row in k0_basis]
    k_basis, disck = saturate(k_rows, mulk, tracek)

    expected = -3 * f0 ** 4 if f0 % 3 == 0 else -27 * f0 ** 4
    assert int(disck) == expected, (label, int(disck), expected)

    units = find_units(k0_basis, mul0, c0, c1, c2)
    unit_rows = [[frac_str(Fraction(x)) for x in u] + ["0", "0", "0"] for u in units]

    data = {
        "label": label,
        "cubic": list(cubic),
        "comment": f"conductor {f0}; disc(K) = {int(disck)}",
        "integral_basis": [[frac_str(x) for x in row] for row in k_basis],
        "fundamental_units": unit_rows,
    }
    data.update(extras)
    return data


def main(argv):
    wanted = set(argv[1:])
    outdir = os.path.join(os.path.dirname(__file__), "..", "src", "picardcm", "fields")
    os.makedirs(outdir, exist_ok=True)
    for label, cubic, extras in FIELDS:
        if wanted and label not in wanted:
            continue
        print(f"[{label}] computing ...", flush=True)
        data = build_field(label, cubic, extras)
        path = os.path.join(outdir, f"{label}.json")
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1)
        print(f"[{label}] wrote {path}: {data['comment']}")


if __name__ == "__main__":
    main(sys.argv)
