"""Principally polarized CM lattices.

A class is a pair (b, xi): a fractional ideal b of O_K given by a Z-basis,
and a purely imaginary xi in K making the pairing

    E_xi(x, y) = Tr_{K/Q}(xi * conj(x) * y)

integral and unimodular on b, with -xi^2 totally positive in K0 and
Im(phi(xi)) > 0 for every embedding phi of the CM type.  The symplectic
transform turns the integral Gram matrix into the standard J by an exact
integer change of basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from . import _linalg
from .cmfield import CMField, FieldElement
from .errors import (MissingIdealData, NoneFound, NotAntisymmetric,
                     NotUnimodular, ValidationFailed)

Q0 = Fraction(0)
Q1 = Fraction(1)

DEFAULT_HEIGHT_BOUND = 16
MAX_HEIGHT_BOUND = 128

# sign of Im(phi_k(sqrt(-3))) in CM embedding order: zeta images (w, w^2, w)
_SQRT_M3_IM_SIGNS = (1, -1, 1)


def standard_j(n: int = 3):
    j = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        j[i][n + i] = 1
        j[n + i][i] = -1
    return j


@dataclass
class PolarizedLattice:
    """A symplectic Z-basis of an ideal together with its polarization xi."""

    field: CMField
    basis: tuple          # 6 FieldElements, symplectic order (u1 u2 u3 v1 v2 v3)
    xi: FieldElement
    gram: list            # 6x6 integer matrix, equals J after symplectification
    symplectic: bool
    class_index: int = 0
    source: str = "enumerated"

    def basis_coords(self):
        return [list(b.coords) for b in self.basis]


def gram_matrix(basis, xi: FieldElement):
    """Exact pairing matrix E[i][j] = Tr(xi * conj(b_i) * b_j)."""
    fld = xi.field
    n = len(basis)
    out = [[Q0] * n for _ in range(n)]
    conj = [fld.conjugate(b) for b in basis]
    for i in range(n):
        row = conj[i] * xi
        for j in range(n):
            out[i][j] = fld.trace_Q(row * basis[j])
    return out


def _is_integral(mat) -> bool:
    return all(Fraction(x).denominator == 1 for row in mat for x in row)


def _as_int(mat):
    return [[int(x) for x in row] for row in mat]


def _xi_imaginary_part(field: CMField, xi: FieldElement):
    """u with xi = sqrt(-3) * u, or None if xi is not purely imaginary."""
    if field.conjugate(xi) != -xi:
        return None
    sqrt_m3 = field.one + 2 * field.zeta
    u = xi * sqrt_m3.inverse()
    return u if u.in_k0() else None


def _cm_positive(field: CMField, u: FieldElement) -> bool:
    """Im(phi_k(sqrt(-3) u)) > 0 for all k, decided exactly via signs of u."""
    signs = field.signs_at_roots(u)
    order = field.cm_root_order()
    return all(signs[order[k]] * _SQRT_M3_IM_SIGNS[k] > 0 for k in range(3))


def _check_ok_module(field: CMField, basis) -> bool:
    mat = [list(b.coords) for b in basis]
    try:
        inv = _linalg.mat_inv(_linalg.transpose(mat))
    except ZeroDivisionError:
        return False
    for g in field.integral_basis:
        for b in basis:
            coords = _linalg.mat_vec(inv, list((g * b).coords))
            if any(c.denominator != 1 for c in coords):
                return False
    return True


def _integrality_lattice(field: CMField, basis):
    """Basis of the rank-3 lattice of u in K0 with E_{sqrt(-3) u} integral on basis.

    Returns a list of three FieldElements xi_c = sqrt(-3) * u_c, LLL-reduced.
    """
    sqrt_m3 = field.one + 2 * field.zeta
    gens = [sqrt_m3, sqrt_m3 * field.nu, sqrt_m3 * field.nu * field.nu]
    grams = [gram_matrix(basis, g) for g in gens]
    # constraint rows: entry (i, j), i < j, of each generator Gram
    rows = []
    for i in range(6):
        for j in range(i + 1, 6):
            rows.append([grams[c][i][j] for c in range(3)])
    den = 1
    for row in rows:
        for x in row:
            den = den * x.denominator // _gcd(den, x.denominator)
    p = [[int(x * den) for x in row] for row in rows]
    d, _, v = _linalg.smith_normal_form(p)
    # solutions of P t = 0 mod den: with u P v = d, t = v y and y_i in (den/d_i) Z
    cols = _linalg.transpose(v)
    basis_vecs = []
    for i in range(3):
        di = d[i][i]
        assert di != 0, "pairing parametrization is degenerate"
        s = Fraction(den, di)
        basis_vecs.append([s * Fraction(c) for c in cols[i]])
    # LLL-reduce for a short search basis
    from .lattice import LatticeBasis, lll_reduce
    common = 1
    for vec in basis_vecs:
        for x in vec:
            common = common * x.denominator // _gcd(common, x.denominator)
    int_rows = [[int(x * common) for x in vec] for vec in basis_vecs]
    red, _ = lll_reduce(LatticeBasis(int_rows))
    out = []
    for row in red.rows:
        u_coords = [Fraction(int(x), common) for x in row]
        u = field.element(tuple(u_coords) + (Q0, Q0, Q0))
        out.append(sqrt_m3 * u)
    return out


def _gcd(a, b):
    a, b = abs(int(a)), abs(int(b))
    while b:
        a, b = b, a % b
    return a if a else 1


def candidate_xis(field: CMField, basis, height_bound: int = DEFAULT_HEIGHT_BOUND,
                  _raise_on_empty: bool = True):
    """All valid polarization elements with search coefficients up to height_bound.

    The search runs over the lattice of purely imaginary xi that make the
    pairing integral on the given basis; coefficients are taken over an
    LLL-reduced basis of that lattice.  Duplicates modulo unit norms are not
    removed here.
    """
    if not _check_ok_module(field, basis):
        raise ValidationFailed("basis spans an O_K-stable full-rank lattice")
    gens = _integrality_lattice(field, basis)
    gram_gens = [gram_matrix(basis, g) for g in gens]
    int_grams = []
    for g in gram_gens:
        if not _is_integral(g):
            raise AssertionError("integrality lattice construction failed")
        int_grams.append(_as_int(g))

    # numeric prefilter for the positivity signs (accepted candidates are
    # confirmed exactly; the margin keeps false rejections out of reach)
    order = field.cm_root_order()
    with mp.workprec(160):
        c0, c1, c2 = field.cubic
        roots = sorted(mp.re(r) for r in mp.polyroots([1, c2, c1, c0], extraprec=160))
        u_vals = []
        for g in gens:
            u = _xi_imaginary_part(field, g)
            poly = u.k0_part
            u_vals.append([
                float(sum(mp.mpf(c.numerator) / c.denominator * roots[order[k]] ** e
                          for e, c in enumerate(poly)))
                for k in range(3)])

    found = []
    rng = range(-height_bound, height_bound + 1)
    for t0 in rng:
        for t1 in rng:
            for t2 in rng:
                if t0 == 0 and t1 == 0 and t2 == 0:
                    continue
                vals = [t0 * u_vals[0][k] + t1 * u_vals[1][k] + t2 * u_vals[2][k]
                        for k in range(3)]
                if any(v * s < -1e-12 for v, s in zip(vals, _SQRT_M3_IM_SIGNS)):
                    continue
                e = [[t0 * int_grams[0][i][j] + t1 * int_grams[1][i][j]
                      + t2 * int_grams[2][i][j] for j in range(6)] for i in range(6)]
                if _linalg.det(e) != 1:
                    continue
                xi = gens[0] * t0 + gens[1] * t1 + gens[2] * t2
                u = _xi_imaginary_part(field, xi)
                if u is None or not _cm_positive(field, u):
                    continue
                minus_xi_sq = -(xi * xi)
                if not field.is_totally_positive(minus_xi_sq):
                    continue
                found.append(((t0, t1, t2), xi, e))
    found.sort(key=lambda item: item[0])
    if not found and _raise_on_empty:
        raise NoneFound(
            f"{field.label}: no polarization element with coefficients up to "
            f"{height_bound}")
    return found


def symplectic_transform(e):
    """Exact integer U with U^t E U = J, for antisymmetric unimodular integer E.

    Implemented by symplectic Gram-Schmidt over Z: split off hyperbolic
    planes with pairing one, project the rest into the orthogonal
    complement, recurse.
    """
    n = len(e)
    g = [[int(x) for x in row] for row in e]
    for i in range(n):
        for j in range(n):
            if g[i][j] != -g[j][i]:
                raise NotAntisymmetric("pairing matrix is not antisymmetric")
    if _linalg.det(g) != 1:
        raise NotUnimodular(f"pairing determinant is {_linalg.det(g)}, not 1")

    def pair(x, y):
        return sum(x[i] * g[i][j] * y[j] for i in range(n) for j in range(n))

    remaining = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    us, vs = [], []
    while remaining:
        u = remaining[0]
        others = remaining[1:]
        pairings = [pair(u, w) for w in others]
        # accumulate v with pair(u, v) = 1 via extended gcd
        v = None
        cur = 0
        for w, p in zip(others, pairings):
            if p == 0:
                continue
            if v is None:
                v, cur = list(w), p
            else:
                gg, a, b = _linalg.ext_gcd(cur, p)
                v = [a * x + b * y for x, y in zip(v, w)]
                cur = gg
            if abs(cur) == 1:
                break
        if v is None or abs(cur) != 1:
            raise NotUnimodular("cannot split a hyperbolic plane (form not unimodular)")
        if cur == -1:
            v = [-x for x in v]
        us.append(u)
        vs.append(v)
        projected = []
        for w in others:
            a, b = pair(w, v), pair(w, u)
            projected.append([wi - a * ui + b * vi for wi, ui, vi in zip(w, u, v)])
        remaining = _linalg.hnf_rows(projected)
    cols = us + vs
    u_mat = [[cols[j][i] for j in range(n)] for i in range(n)]
    check = _linalg.mat_mul(_linalg.mat_mul(_linalg.transpose(u_mat), g), u_mat)
    assert check == standard_j(n // 2), "symplectic Gram-Schmidt failed"
    return u_mat


def _apply_transform(basis, u_mat):
    n = len(basis)
    return tuple(
        sum((basis[i] * u_mat[i][j] for i in range(n)), basis[0].field.coerce(0))
        for j in range(n))


def _validate_ideal_entry(field: CMField, entry, class_index: int) -> PolarizedLattice:
    basis = [field.element(row) for row in entry["basis"]]
    xi = field.element(entry["xi"])
    if not _check_ok_module(field, basis):
        raise ValidationFailed("basis spans an O_K-stable full-rank lattice",
                               f"class {class_index}")
    u = _xi_imaginary_part(field, xi)
    if u is None:
        raise ValidationFailed("conj(xi) = -xi", f"class {class_index}")
    if not field.is_totally_positive(-(xi * xi)):
        raise ValidationFailed("-xi^2 totally positive in K0", f"class {class_index}")
    if not _cm_positive(field, u):
        raise ValidationFailed("Im(phi(xi)) > 0 for the CM type", f"class {class_index}")
    e = gram_matrix(basis, xi)
    if not _is_integral(e):
        raise ValidationFailed("E_xi integral on the basis", f"class {class_index}")
    e = _as_int(e)
    if _linalg.det(e) != 1:
        raise ValidationFailed("det(E_xi) = 1 (principal polarization)",
                               f"class {class_index}")
    u_mat = symplectic_transform(e)
    sym_basis = _apply_transform(basis, u_mat)
    return PolarizedLattice(field=field, basis=sym_basis, xi=xi,
                            gram=standard_j(), symplectic=True,
                            class_index=class_index, source="ideal_data")


def _unit_orbit_dedupe(field: CMField, found):
    """Group candidates equivalent under multiplication by squares of units.

    xi and xi*u^2 give isomorphic polarized lattices for any unit u of K0;
    grouping by the shipped units is safe (never merges distinct classes).
    """
    if not field.fundamental_units:
        return found
    gens = []
    for u in field.fundamental_units:
        u2 = u * u
        gens.extend([u2, u2.inverse()])
    by_xi = {item[1].coords: item for item in found}
    seen = set()
    reps = []
    for coords in sorted(by_xi, key=lambda c: by_xi[c][0]):
        if coords in seen:
            continue
        queue = [by_xi[coords][1]]
        seen.add(coords)
        while queue:
            xi = queue.pop()
            for g in gens:
                nxt = xi * g
                if nxt.coords in by_xi and nxt.coords not in seen:
                    seen.add(nxt.coords)
                    queue.append(nxt)
        reps.append(by_xi[coords])
    return reps


def enumerate_ppav(field: CMField, height_bound: int = DEFAULT_HEIGHT_BOUND):
    """One PolarizedLattice per isomorphism-class candidate.

    With ideal_data present each supplied (basis, xi) is validated and
    symplectified.  Otherwise the principal ideal with the integral basis is
    searched for xi, doubling the height bound a few times before giving up;
    unit-square orbits are merged, and any remaining duplicates are expected
    to be collapsed downstream by comparing curve invariants.
    """
    if field.ideal_data:
        return [_validate_ideal_entry(field, entry, k)
                for k, entry in enumerate(field.ideal_data)]

    basis = field.integral_basis
    bound = height_bound
    found = []
    while bound <= MAX_HEIGHT_BOUND:
        found = candidate_xis(field, basis, bound, _raise_on_empty=False)
        if found:
            break
        bound *= 2
    if not found:
        raise MissingIdealData(
            f"{field.label}: no polarization found up to height bound "
            f"{MAX_HEIGHT_BOUND}; if the class number exceeds 1, supply ideal_data")
    found = _unit_orbit_dedupe(field, found)
    out = []
    for k, (_t, xi, e) in enumerate(found):
        u_mat = symplectic_transform(e)
        sym_basis = _apply_transform(basis, u_mat)
        out.append(PolarizedLattice(field=field, basis=sym_basis, xi=xi,
                                    gram=standard_j(), symplectic=True,
                                    class_index=k, source="enumerated"))
    return out
