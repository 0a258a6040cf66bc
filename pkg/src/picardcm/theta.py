"""Riemann theta constants with characteristics at arbitrary precision.

theta(z, Omega) = sum over n in Z^g of exp(pi i n^t Omega n + 2 pi i n^t z);
the characteristic version shifts the lattice by a rational vector x1 and
twists by x2.  Sums are truncated to the hypercube given by

    N > 1/2 + sqrt(1/4 - ln(eps) / (pi eta1)),

eta1 the smallest eigenvalue of Im(Omega), which bounds the tail by eps for
reduced arguments.  Characteristics are reduced into [0,1)^{2g} first and the
quasi-periodicity root of unity is multiplied back, so callers can work with
unreduced rational characteristics exactly.

The inner loop is table-driven: per-axis tables carry the diagonal and linear
parts of the exponent, pair tables carry the off-diagonal parts (built
incrementally along each row), and each summand costs g multiplications.
Summation order is lexicographic, deterministic at a fixed precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

_GUARD_BITS = 48


@dataclass(frozen=True)
class Characteristic:
    """A rational 2g-vector (x1, x2) indexing theta with characteristics."""

    x1: tuple
    x2: tuple

    def __post_init__(self):
        object.__setattr__(self, "x1", tuple(Fraction(v) for v in self.x1))
        object.__setattr__(self, "x2", tuple(Fraction(v) for v in self.x2))
        if len(self.x1) != len(self.x2):
            raise ValueError("halves must have equal length")

    @classmethod
    def from_vector(cls, vec) -> "Characteristic":
        vec = list(vec)
        g = len(vec) // 2
        return cls(tuple(vec[:g]), tuple(vec[g:]))

    @property
    def g(self) -> int:
        return len(self.x1)

    def vector(self):
        return self.x1 + self.x2

    def reduce(self):
        """(reduced characteristic in [0,1)^{2g}, integer part m)."""
        red1 = tuple(v - math.floor(v) for v in self.x1)
        red2 = tuple(v - math.floor(v) for v in self.x2)
        m1 = tuple(int(v - r) for v, r in zip(self.x1, red1))
        m2 = tuple(int(v - r) for v, r in zip(self.x2, red2))
        return Characteristic(red1, red2), (m1, m2)

    def __add__(self, other):
        return Characteristic(tuple(a + b for a, b in zip(self.x1, other.x1)),
                              tuple(a + b for a, b in zip(self.x2, other.x2)))

    def __sub__(self, other):
        return Characteristic(tuple(a - b for a, b in zip(self.x1, other.x1)),
                              tuple(a - b for a, b in zip(self.x2, other.x2)))

    def __neg__(self):
        return Characteristic(tuple(-a for a in self.x1), tuple(-a for a in self.x2))

    def scale(self, k) -> "Characteristic":
        k = Fraction(k)
        return Characteristic(tuple(k * a for a in self.x1), tuple(k * a for a in self.x2))


@dataclass
class ThetaParams:
    """Truncation target and working precision; N overrides the radius."""

    epsilon: str | float = "1e-50"
    prec_bits: int = 300
    N: int | None = None

    def eps_mpf(self):
        return mp.mpf(str(self.epsilon))

    def __post_init__(self):
        if not (0 < float(str(self.epsilon)) < 1):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.N is not None and self.N < 1:
            raise ValueError("N must be at least 1")


def truncation_radius(epsilon, eta1) -> int:
    """Smallest integer strictly exceeding 1/2 + sqrt(1/4 - ln(eps)/(pi eta1))."""
    with mp.workprec(96):
        eps = mp.mpf(str(epsilon))
        e1 = mp.mpf(str(eta1)) if not isinstance(eta1, mp.mpf) else eta1
        if not (0 < eps < 1) or e1 <= 0:
            raise ValueError("need 0 < eps < 1 and eta1 > 0")
        bound = mp.mpf("0.5") + mp.sqrt(mp.mpf("0.25") - mp.log(eps) / (mp.pi * e1))
        n = int(mp.floor(bound)) + 1
        return max(n, 1)


def _omega_rows(omega, g=None):
    if hasattr(omega, "omega"):          # PeriodMatrix
        m = omega.omega
    else:
        m = omega
    if isinstance(m, mp.matrix):
        return [[m[i, j] for j in range(m.cols)] for i in range(m.rows)]
    return [[mp.mpc(x) for x in row] for row in m]


def _eta1_arg(omega):
    if hasattr(omega, "eta1"):
        return omega.eta1
    rows = _omega_rows(omega)
    g = len(rows)
    y = mp.matrix(g)
    for i in range(g):
        for j in range(g):
            y[i, j] = mp.im(rows[i][j])
    return min(mp.eigsy(y, eigvals_only=True))


def _radius(params: ThetaParams, omega) -> int:
    if params.N is not None:
        return params.N
    return truncation_radius(params.epsilon, _eta1_arg(omega))


def _axis_range(n_radius: int, s: Fraction):
    """Integers n with |n + s| <= N + 1/2 (n + s covers the centered window)."""
    half = Fraction(2 * n_radius + 1, 2)
    lo = math.ceil(-half - s)
    hi = math.floor(half - s)
    return range(lo, hi + 1)


def _theta_sum(rows, n_radius: int, shift, linear, prec_bits: int):
    """sum over the hypercube of exp(pi i (n+s)^t Omega (n+s) + 2 pi i (n+s)^t c)."""
    g = len(rows)
    with mp.workprec(prec_bits + _GUARD_BITS):
        pi_i = mp.mpc(0, 1) * mp.pi
        two_pi_i = 2 * pi_i
        svals = []
        for j in range(g):
            sj = shift[j]
            svals.append([mp.mpf(n) + mp.mpf(sj.numerator) / sj.denominator
                          for n in _axis_range(n_radius, sj)])
        cvals = []
        for j in range(g):
            cj = linear[j]
            if isinstance(cj, Fraction):
                cj = mp.mpf(cj.numerator) / cj.denominator
            cvals.append(mp.mpc(cj))

        # per-axis tables: diagonal quadratic part + linear part
        axis = []
        for j in range(g):
            ojj = rows[j][j]
            tab = [mp.exp(pi_i * ojj * v * v + two_pi_i * v * cvals[j])
                   for v in svals[j]]
            axis.append(tab)

        # pair tables, rows built incrementally (ratio is constant along a row)
        pair = {}
        for j in range(g):
            for k in range(j + 1, g):
                ojk = rows[j][k]
                tab = []
                for vj in svals[j]:
                    ratio = mp.exp(two_pi_i * ojk * vj)
                    start = mp.exp(two_pi_i * ojk * vj * svals[k][0])
                    row_tab = [start]
                    for _ in range(len(svals[k]) - 1):
                        start = start * ratio
                        row_tab.append(start)
                    tab.append(row_tab)
                pair[(j, k)] = tab

        acc = mp.mpc(0)
        if g == 1:
            for t0 in axis[0]:
                acc += t0
        elif g == 2:
            p01 = pair[(0, 1)]
            for a, t0 in enumerate(axis[0]):
                row01 = p01[a]
                for b, t1 in enumerate(axis[1]):
                    acc += t0 * t1 * row01[b]
        elif g == 3:
            p01, p02, p12 = pair[(0, 1)], pair[(0, 2)], pair[(1, 2)]
            ax1, ax2 = axis[1], axis[2]
            n2 = len(ax2)
            for a, t0 in enumerate(axis[0]):
                row01, row02 = p01[a], p02[a]
                for b, t1 in enumerate(ax1):
                    tb = t0 * t1 * row01[b]
                    row12 = p12[b]
                    for c in range(n2):
                        acc += tb * ax2[c] * row02[c] * row12[c]
        else:
            import itertools
            ranges = [range(len(sv)) for sv in svals]
            for idx in itertools.product(*ranges):
                term = mp.mpc(1)
                for j in range(g):
                    term *= axis[j][idx[j]]
                for j in range(g):
                    for k in range(j + 1, g):
                        term *= pair[(j, k)][idx[j]][idx[k]]
                acc += term
        return +acc


def theta_raw(z, omega, params: ThetaParams):
    """theta(z, Omega) truncated to the hypercube; z should be reduced by the caller."""
    rows = _omega_rows(omega)
    g = len(rows)
    n_radius = _radius(params, omega)
    z = list(z)
    if len(z) != g:
        raise ValueError("z has wrong length")
    with mp.workprec(params.prec_bits + _GUARD_BITS):
        lin = [mp.mpc(v) for v in z]
        val = _theta_sum(rows, n_radius, [Fraction(0)] * g, lin, params.prec_bits)
        return +val


def theta_char(x: Characteristic, omega, params: ThetaParams):
    """theta[x](Omega) at z = 0 for an arbitrary rational characteristic.

    The characteristic is reduced into [0,1)^{2g} and the quasi-periodicity
    factor exp(2 pi i x1_red . m2) is multiplied back, so the value matches
    the unreduced characteristic exactly.
    """
    rows = _omega_rows(omega)
    g = len(rows)
    if x.g != g:
        raise ValueError("characteristic has wrong genus")
    n_radius = _radius(params, omega)
    red, (m1, m2) = x.reduce()
    phase_q = sum(a * m for a, m in zip(red.x1, m2)) % 2
    with mp.workprec(params.prec_bits + _GUARD_BITS):
        val = _theta_sum(rows, n_radius, list(red.x1), list(red.x2), params.prec_bits)
        if phase_q:
            val *= mp.expjpi(2 * mp.mpf(phase_q.numerator) / phase_q.denominator)
        return +val
