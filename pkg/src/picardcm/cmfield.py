"""Exact arithmetic in the sextic cyclic CM field K = K0(zeta_3).

K0 = Q[nu]/(nu^3 + c2 nu^2 + c1 nu + c0) is a totally real cyclic cubic and
K = K0(zeta_3).  Elements are stored by exact rational coordinates over the
fixed Q-basis

    (1, nu, nu^2, zeta, nu*zeta, nu^2*zeta),      zeta = zeta_3.

Three kinds of Galois data live here:

* ``apply_sigma``: the order-3 automorphism fixing zeta_3 and permuting the
  roots of the cubic (an exact 6x6 rational matrix),
* ``conjugate``: complex conjugation, fixing K0 and sending zeta -> -1 - zeta,
* the CM type Phi = (phi_1, phi_2, phi_3) with phi_{k+1} = phi_k o (sigma o conj).
  The composite sigma o conj generates the full Galois group Z/6; using it
  (rather than sigma alone) makes Phi primitive, which the abelian threefolds
  downstream require: the zeta_3 multiplier becomes diag(w, w^2, w) with w a
  primitive cube root of unity instead of a scalar matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath as mp

from . import _linalg
from .errors import NotCyclic, NotInK0, NotTotallyReal, PrecisionTooLow, Reducible

Q0 = Fraction(0)
Q1 = Fraction(1)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _isqrt_exact(n: int):
    """Integer square root if n is a perfect square, else None."""
    if n < 0:
        return None
    r = int(mp.libmp.isqrt(n))
    return r if r * r == n else None


# --------------------------------------------------------------------------
# exact univariate polynomial helpers (coefficient lists, low-to-high)

def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a, b):
    """Remainder of a modulo b over Q (b nonzero)."""
    a = [Fraction(c) for c in a]
    b = _poly_trim([Fraction(c) for c in b])
    while len(a) >= len(b):
        if a[-1] == 0:
            a.pop()
            continue
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a.pop()
    return _poly_trim(a)


def _poly_gcd(a, b):
    a, b = _poly_trim(a), _poly_trim(b)
    while b:
        a, b = b, _poly_rem(a, b)
    return a


def _sturm_chain(coeffs):
    chain = [_poly_trim(coeffs)]
    chain.append([i * c for i, c in enumerate(chain[0])][1:])
    while len(chain[-1]) > 1:
        r = _poly_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(chain, x):
    signs = []
    for p in chain:
        v = _poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def isolate_real_roots(coeffs) -> list[tuple[Fraction, Fraction]]:
    """Disjoint open isolating intervals for the simple real roots, ascending."""
    coeffs = [Fraction(c) for c in coeffs]
    chain = _sturm_chain(coeffs)
    bound = Fraction(1) + max(abs(c) for c in coeffs[:-1]) / abs(coeffs[-1])
    total = _sign_changes(chain, -bound) - _sign_changes(chain, bound)
    intervals = []

    def split(lo, hi, count):
        if count <= 0:
            return
        if count == 1:
            intervals.append((lo, hi))
            return
        mid = (lo + hi) / 2
        while _poly_eval(coeffs, mid) == 0:
            mid = (lo + mid) / 2
        left = _sign_changes(chain, lo) - _sign_changes(chain, mid)
        split(lo, mid, left)
        split(mid, hi, count - left)

    split(-bound, bound, total)
    return sorted(intervals)


def refine_root(coeffs, interval, width: Fraction):
    """Shrink an isolating interval by bisection until narrower than width."""
    coeffs = [Fraction(c) for c in coeffs]
    lo, hi = interval
    flo = _poly_eval(coeffs, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = _poly_eval(coeffs, mid)
        if fm == 0:
            # nudge: a rational midpoint hit the root exactly (cannot happen
            # for an irreducible cubic, but keep the bisection total)
            mid = (lo + mid) / 2
            fm = _poly_eval(coeffs, mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo, hi)


def _cubic_disc(c0: int, c1: int, c2: int) -> int:
    return (18 * c2 * c1 * c0 - 4 * c2 ** 3 * c0 + c2 ** 2 * c1 ** 2
            - 4 * c1 ** 3 - 27 * c0 ** 2)


def _has_rational_root(c0: int, c1: int, c2: int) -> bool:
    if c0 == 0:
        return True
    for d in range(1, abs(c0) + 1):
        if abs(c0) % d == 0:
            for r in (d, -d):
                if r ** 3 + c2 * r ** 2 + c1 * r + c0 == 0:
                    return True
    return False


# --------------------------------------------------------------------------


@dataclass
class CMFieldSpec:
    """Parsed JSON description of a field, before validation."""

    label: str
    cubic: tuple[int, int, int]                    # (c0, c1, c2)
    integral_basis: list[list[Fraction]] | None = None
    fundamental_units: list[list[Fraction]] | None = None
    ideal_data: list[dict] | None = None
    model_radicand: int | None = None              # w^3 = m for models over a cubic field

    @classmethod
    def from_dict(cls, data: dict) -> "CMFieldSpec":
        def mat(rows):
            return [[_to_fraction(x) for x in row] for row in rows]

        return cls(
            label=data["label"],
            cubic=tuple(int(c) for c in data["cubic"]),
            integral_basis=mat(data["integral_basis"]) if data.get("integral_basis") else None,
            fundamental_units=mat(data["fundamental_units"]) if data.get("fundamental_units") else None,
            ideal_data=data.get("ideal_data"),
            model_radicand=data.get("model_radicand"),
        )

    @classmethod
    def from_file(cls, path) -> "CMFieldSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class FieldElement:
    """An element of K with exact rational coordinates.

    Arithmetic never touches floating point; embeddings live on CMType.
    """

    __slots__ = ("field", "coords")

    def __init__(self, fld: "CMField", coords: Iterable):
        self.field = fld
        c = tuple(_to_fraction(x) for x in coords)
        if len(c) != 6:
            raise ValueError("field elements have six coordinates")
        self.coords = c

    @property
    def k0_part(self):
        return self.coords[:3]

    @property
    def zeta_part(self):
        return self.coords[3:]

    def in_k0(self) -> bool:
        return all(c == 0 for c in self.zeta_part)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __add__(self, other):
        other = self.field.coerce(other)
        return FieldElement(self.field, [a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other):
        other = self.field.coerce(other)
        return FieldElement(self.field, [a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        return FieldElement(self.field, [-a for a in self.coords])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, [a * other for a in self.coords])
        other = self.field.coerce(other)
        return self.field._mul(self, other)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return (-self) + other

    def inverse(self) -> "FieldElement":
        return self.field._inverse(self)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, [a / Fraction(other) for a in self.coords])
        other = self.field.coerce(other)
        return self * other.inverse()

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            try:
                other = self.field.coerce(other)
            except TypeError:
                return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        names = ("1", "nu", "nu^2", "z", "nu*z", "nu^2*z")
        terms = [f"{c}*{n}" for c, n in zip(self.coords, names) if c != 0]
        return " + ".join(terms) if terms else "0"


class CMField:
    """The sextic cyclic CM field attached to a totally real cyclic cubic."""

    def __init__(self, spec: CMFieldSpec):
        c0, c1, c2 = spec.cubic
        if _has_rational_root(c0, c1, c2):
            raise Reducible(f"{spec.label}: cubic has a rational root")
        disc = _cubic_disc(c0, c1, c2)
        if disc <= 0:
            raise NotTotallyReal(f"{spec.label}: discriminant {disc} <= 0")
        sq = _isqrt_exact(disc)
        if sq is None:
            raise NotCyclic(f"{spec.label}: discriminant {disc} is not a square")

        self.spec = spec
        self.label = spec.label
        self.cubic = (c0, c1, c2)
        self.disc_cubic = disc
        self.sqrt_disc = sq

        # reduction data: coordinates of nu^3 and nu^4 over (1, nu, nu^2)
        red3 = (-Fraction(c0), -Fraction(c1), -Fraction(c2))
        red4 = (red3[2] * red3[0],
                red3[0] + red3[2] * red3[1],
                red3[1] + red3[2] * red3[2])
        self._red = (red3, red4)

        self.one = FieldElement(self, (1, 0, 0, 0, 0, 0))
        self.nu = FieldElement(self, (0, 1, 0, 0, 0, 0))
        self.zeta = FieldElement(self, (0, 0, 0, 1, 0, 0))

        self._sigma_matrix = self._build_sigma()
        self.sigma_nu = FieldElement(
            self, _linalg.mat_vec(self._sigma_matrix, list(self.nu.coords)))

        # Tr(a (x) b) = Tr_{K0}(a) * Tr_{Q(zeta)}(b); power sums of the cubic
        p1 = Fraction(-c2)
        p2 = Fraction(c2 * c2 - 2 * c1)
        self._traces = (Fraction(6), 2 * p1, 2 * p2, Fraction(-3), -p1, -p2)

        self.uses_equation_order = spec.integral_basis is None
        if spec.integral_basis is not None:
            rows = spec.integral_basis
            if _linalg.det(rows) == 0:
                raise ValueError(f"{spec.label}: integral basis is singular")
            self.integral_basis = [FieldElement(self, row) for row in rows]
            self._check_order_closed(self.integral_basis)
        else:
            self.integral_basis = [
                FieldElement(self, [Q1 if i == j else Q0 for j in range(6)])
                for i in range(6)
            ]

        self.fundamental_units = [FieldElement(self, row)
                                  for row in (spec.fundamental_units or [])]
        self.ideal_data = spec.ideal_data or []
        self.model_radicand = spec.model_radicand
        self._root_intervals = None

    # -- multiplication -----------------------------------------------------

    def _mul_k0(self, a, b):
        red3, red4 = self._red
        c = [Q0] * 5
        for i in range(3):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(3):
                if b[j] != 0:
                    c[i + j] += ai * b[j]
        out = [c[0], c[1], c[2]]
        for k, red in ((3, red3), (4, red4)):
            if c[k] != 0:
                ck = c[k]
                for t in range(3):
                    out[t] += ck * red[t]
        return tuple(out)

    def _mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        a1, b1 = x.k0_part, x.zeta_part
        a2, b2 = y.k0_part, y.zeta_part
        # (a1 + b1 z)(a2 + b2 z) with z^2 = -1 - z
        aa = self._mul_k0(a1, a2)
        bb = self._mul_k0(b1, b2)
        ab = self._mul_k0(a1, b2)
        ba = self._mul_k0(b1, a2)
        real = tuple(p - q for p, q in zip(aa, bb))
        zeta = tuple(p + q - r for p, q, r in zip(ab, ba, bb))
        return FieldElement(self, real + zeta)

    def _inverse_k0(self, a):
        if all(c == 0 for c in a):
            raise ZeroDivisionError("division by zero in K0")
        cols = [self._mul_k0(a, e)
                for e in ((Q1, Q0, Q0), (Q0, Q1, Q0), (Q0, Q0, Q1))]
        mat = [[cols[j][i] for j in range(3)] for i in range(3)]
        return tuple(_linalg.solve(mat, [Q1, Q0, Q0]))

    def _inverse(self, x: FieldElement) -> FieldElement:
        if x.is_zero():
            raise ZeroDivisionError("division by zero in K")
        a, b = x.k0_part, x.zeta_part
        # N_{K/K0}(a + b z) = (a + b z)(a + b z^2) = a^2 - a b + b^2
        ab = self._mul_k0(a, b)
        norm = tuple(self._mul_k0(a, a)[i] - ab[i] + self._mul_k0(b, b)[i]
                     for i in range(3))
        ninv = self._inverse_k0(norm)
        conj_real = tuple(p - q for p, q in zip(a, b))
        conj_zeta = tuple(-q for q in b)
        return FieldElement(self, self._mul_k0(conj_real, ninv) + self._mul_k0(conj_zeta, ninv))

    def coerce(self, x) -> FieldElement:
        if isinstance(x, FieldElement):
            if x.field is not self:
                raise TypeError("element belongs to a different field")
            return x
        if isinstance(x, (int, Fraction)):
            return FieldElement(self, (Fraction(x), 0, 0, 0, 0, 0))
        if isinstance(x, (tuple, list)):
            return FieldElement(self, x)
        raise TypeError(f"cannot coerce {x!r} into {self.label}")

    def element(self, coords) -> FieldElement:
        return FieldElement(self, coords)

    # -- Galois action --------------------------------------------------------

    def _build_sigma(self):
        """sigma(nu) = (-(nu + c2) + sqrt(disc)/f'(nu)) / 2, extended to K fixing zeta.

        For a cyclic cubic, (r2 - r3) = sqrt(disc)/f'(r1), so the expression
        above is another root of the cubic written in the power basis.
        """
        c0, c1, c2 = self.cubic
        fprime = (Fraction(c1), Fraction(2 * c2), Fraction(3))
        fp_inv = self._inverse_k0(fprime)
        s_over_fp = tuple(self.sqrt_disc * c for c in fp_inv)
        sigma_nu = tuple((s - n) / 2 for s, n in
                         zip(s_over_fp, (Fraction(c2), Q1, Q0)))
        sq = self._mul_k0(sigma_nu, sigma_nu)
        cube = self._mul_k0(sq, sigma_nu)
        residue = [cube[i] + c2 * sq[i] + c1 * sigma_nu[i] for i in range(3)]
        residue[0] += c0
        assert all(c == 0 for c in residue), "sigma image is not a root"

        images_k0 = ((Q1, Q0, Q0), sigma_nu, sq)
        cols = [tuple(img) + (Q0,) * 3 for img in images_k0]
        cols += [(Q0,) * 3 + tuple(img) for img in images_k0]
        return [[cols[j][i] for j in range(6)] for i in range(6)]

    def apply_sigma(self, x: FieldElement) -> FieldElement:
        x = self.coerce(x)
        return FieldElement(self, _linalg.mat_vec(self._sigma_matrix, list(x.coords)))

    def conjugate(self, x: FieldElement) -> FieldElement:
        x = self.coerce(x)
        a, b = x.k0_part, x.zeta_part
        return FieldElement(self, tuple(p - q for p, q in zip(a, b)) + tuple(-q for q in b))

    def trace_Q(self, x: FieldElement) -> Fraction:
        x = self.coerce(x)
        return sum(c * t for c, t in zip(x.coords, self._traces))

    # -- exact sign decisions ---------------------------------------------------

    def root_intervals(self):
        """Exact isolating intervals of the cubic's real roots, ascending."""
        if self._root_intervals is None:
            c0, c1, c2 = self.cubic
            self._root_intervals = isolate_real_roots([c0, c1, c2, 1])
        return self._root_intervals

    def signs_at_roots(self, x: FieldElement) -> tuple[int, int, int]:
        """Exact signs of an element of K0 at the three real roots (ascending)."""
        x = self.coerce(x)
        if not x.in_k0():
            raise NotInK0(f"{x!r} has a nonzero zeta_3 component")
        poly = _poly_trim(list(x.k0_part))
        if not poly:
            return (0, 0, 0)
        c0, c1, c2 = self.cubic
        cubic = [Fraction(c0), Fraction(c1), Fraction(c2), Q1]
        common = _poly_gcd(cubic, poly)
        signs = []
        for iv in self.root_intervals():
            lo, hi = iv
            if len(common) > 1 and _poly_eval(common, lo) * _poly_eval(common, hi) <= 0:
                signs.append(0)
                continue
            width = hi - lo
            while True:
                s = self._definite_sign(poly, lo, hi)
                if s is not None:
                    signs.append(s)
                    break
                width /= 4
                lo, hi = refine_root(cubic, (lo, hi), width)
        return tuple(signs)

    @staticmethod
    def _definite_sign(poly, lo, hi):
        # mean-value bound: |p| > sup|p'| * (hi - lo) on the interval forces a sign
        b = max(abs(lo), abs(hi))
        deriv = sum(abs(i * c) * b ** (i - 1) for i, c in enumerate(poly) if i)
        margin = deriv * (hi - lo)
        v = _poly_eval(poly, (lo + hi) / 2)
        if v > margin:
            return 1
        if -v > margin:
            return -1
        return None

    def is_totally_positive(self, x: FieldElement) -> bool:
        return all(s > 0 for s in self.signs_at_roots(x))

    def cm_root_order(self) -> tuple[int, int, int]:
        """Permutation mapping CM embedding order to ascending root order.

        Entry k is the index (into the ascending root list) of the root used
        by phi_k: the largest root first, then its sigma-successors.  Decided
        exactly by interval arithmetic, so it matches CMType at any precision.
        """
        if getattr(self, "_cm_order", None) is None:
            ivs = self.root_intervals()
            order = [len(ivs) - 1]
            poly = list(self.sigma_nu.k0_part)
            for _ in range(2):
                order.append(self._image_root_index(poly, ivs[order[-1]]))
            assert sorted(order) == [0, 1, 2], "sigma does not permute the roots"
            self._cm_order = tuple(order)
        return self._cm_order

    def _image_root_index(self, poly, interval):
        c0, c1, c2 = self.cubic
        cubic = [Fraction(c0), Fraction(c1), Fraction(c2), Q1]
        ivs = self.root_intervals()
        lo, hi = interval
        while True:
            b = max(abs(lo), abs(hi))
            deriv = sum(abs(i * c) * b ** (i - 1) for i, c in enumerate(poly) if i)
            rad = deriv * (hi - lo)
            v = _poly_eval(poly, (lo + hi) / 2)
            vlo, vhi = v - rad, v + rad
            hits = [j for j, (a, c) in enumerate(ivs) if not (c < vlo or a > vhi)]
            if len(hits) == 1:
                return hits[0]
            lo, hi = refine_root(cubic, (lo, hi), (hi - lo) / 4)

    def _check_order_closed(self, basis):
        mat = [list(b.coords) for b in basis]
        inv = _linalg.mat_inv(_linalg.transpose(mat))
        for bi in basis:
            for bj in basis:
                coords = _linalg.mat_vec(inv, list((bi * bj).coords))
                if any(c.denominator != 1 for c in coords):
                    raise ValueError(
                        f"{self.label}: integral basis is not closed under multiplication")


# --------------------------------------------------------------------------
# complex embeddings


class CMType:
    """The ordered embedding triple (phi_1, phi_2, phi_3) at fixed precision.

    phi_1 sends nu to the largest real root and zeta_3 to exp(2 pi i/3); each
    successor is the predecessor composed with the order-6 Galois generator
    sigma o conj, so the zeta_3 images alternate between the two primitive
    cube roots of unity and the type is primitive.
    """

    def __init__(self, fld: CMField, prec_bits: int):
        if prec_bits < 64:
            raise PrecisionTooLow("prec_bits must be at least 64")
        self.field = fld
        self.prec_bits = prec_bits
        c0, c1, c2 = fld.cubic
        with mp.workprec(prec_bits + 32):
            roots = mp.polyroots([1, c2, c1, c0], maxsteps=400, extraprec=prec_bits)
            roots = sorted((mp.re(r) for r in roots), reverse=True)
            sep = min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:])
            if sep < mp.mpf(2) ** (-(prec_bits // 2)):
                raise PrecisionTooLow("root separation below 2^(-prec/2)")
            omega = (mp.mpf(-1) + mp.sqrt(mp.mpc(-3))) / 2

            sig = fld.sigma_nu.k0_part

            def sigma_image(r):
                val = (mp.mpf(sig[0].numerator) / sig[0].denominator
                       + mp.mpf(sig[1].numerator) / sig[1].denominator * r
                       + mp.mpf(sig[2].numerator) / sig[2].denominator * r * r)
                return min(roots, key=lambda t: abs(t - val))

            r1 = roots[0]
            r2 = sigma_image(r1)
            r3 = sigma_image(r2)
            self.nu_images = (r1, r2, r3)
            self.zeta_images = (omega, omega ** 2, omega)
            self._basis_images = []
            for k in range(3):
                r, z = self.nu_images[k], self.zeta_images[k]
                self._basis_images.append(
                    (mp.mpc(1), mp.mpc(r), mp.mpc(r * r), z, r * z, r * r * z))

    def embed(self, k: int, x: FieldElement):
        """phi_k(x) as an mpmath complex number."""
        imgs = self._basis_images[k]
        with mp.workprec(self.prec_bits + 32):
            acc = mp.mpc(0)
            for c, b in zip(x.coords, imgs):
                if c != 0:
                    acc += mp.mpf(c.numerator) / c.denominator * b
            return acc

    def all_embeddings(self, x: FieldElement):
        return tuple(self.embed(k, x) for k in range(3))


def parse_field(spec: CMFieldSpec | dict | str) -> CMField:
    """Build a CMField from a spec object, a dict, or a path to a JSON file."""
    if isinstance(spec, str):
        spec = CMFieldSpec.from_file(spec)
    elif isinstance(spec, dict):
        spec = CMFieldSpec.from_dict(spec)
    return CMField(spec)


def embeddings(fld: CMField, prec_bits: int) -> CMType:
    """The CM type of the field at the requested working precision."""
    return CMType(fld, prec_bits)


def apply_sigma(x: FieldElement) -> FieldElement:
    return x.field.apply_sigma(x)


def conjugate(x: FieldElement) -> FieldElement:
    return x.field.conjugate(x)


def trace_Q(x: FieldElement) -> Fraction:
    return x.field.trace_Q(x)


def is_totally_positive(x: FieldElement) -> bool:
    return x.field.is_totally_positive(x)
