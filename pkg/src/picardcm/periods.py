"""Period matrices of the CM abelian threefolds and their Siegel reduction.

From a symplectic basis b_1..b_6 the 3x6 period matrix is
Pi = (Omega_1 | Omega_2) with Pi[k][j] = phi_k(b_j); the normalized matrix
Omega = Omega_2^(-1) Omega_1 lands in the Siegel upper half space H_3.
Reduction maximizes the smallest eigenvalue eta_1 of Im(Omega), which
controls the theta truncation radius: LLL on Im(Omega) does most of the
work, followed by a greedy search over Sp(6, Z) generators.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import mpmath as mp

from . import _linalg
from .cmfield import CMType
from .errors import (NotPositiveDefinite, NotSymmetric, NotSymplectic,
                     SingularDenominator, SingularOmega2)
from .lattice import LatticeBasis, lll_reduce
from .polarize import PolarizedLattice, standard_j

LOCAL_SEARCH_MAX_ACCEPTED = 500


@dataclass
class PeriodMatrix:
    omega1: mp.matrix
    omega2: mp.matrix
    omega: mp.matrix
    prec_bits: int
    lattice: PolarizedLattice | None = None
    phi: CMType | None = None
    gamma_applied: list | None = None      # cumulative symplectic transform
    swapped: bool = False

    @property
    def g(self) -> int:
        return self.omega.rows

    def im_omega(self) -> mp.matrix:
        n = self.g
        out = mp.matrix(n)
        for i in range(n):
            for j in range(n):
                out[i, j] = mp.im(self.omega[i, j])
        return out

    @property
    def eta1(self):
        return eta1(self)


def _symmetrize(m: mp.matrix) -> mp.matrix:
    n = m.rows
    out = mp.matrix(n)
    for i in range(n):
        for j in range(n):
            out[i, j] = (m[i, j] + m[j, i]) / 2
    return out


def _max_asym(m: mp.matrix):
    return max(abs(m[i, j] - m[j, i]) for i in range(m.rows) for j in range(m.rows))


def _cholesky_pd(y: mp.matrix, prec_bits: int) -> bool:
    try:
        with mp.workprec(2 * prec_bits):
            mp.cholesky(y)
        return True
    except ValueError:
        return False


def build_period_matrix(lat: PolarizedLattice, phi: CMType, prec_bits: int) -> PeriodMatrix:
    """Pi[k][j] = phi_k(b_j); Omega = Omega_2^(-1) Omega_1 in H_3."""
    if not lat.symplectic:
        raise ValueError("lattice basis must be symplectic (run symplectic_transform)")
    with mp.workprec(prec_bits + 32):
        cols = [[phi.embed(k, b) for k in range(3)] for b in lat.basis]

        def attempt(first, second):
            o1 = mp.matrix(3)
            o2 = mp.matrix(3)
            for j in range(3):
                for k in range(3):
                    o1[k, j] = cols[first[j]][k]
                    o2[k, j] = cols[second[j]][k]
            if abs(mp.det(o2)) < mp.mpf(2) ** (-prec_bits // 2):
                raise SingularOmega2("Omega_2 is numerically singular")
            return o1, o2, (o2 ** -1) * o1

        tol = mp.mpf(2) ** (-prec_bits + 24)
        last = None
        for swapped, (first, second) in enumerate((((0, 1, 2), (3, 4, 5)),
                                                   ((3, 4, 5), (0, 1, 2)))):
            try:
                o1, o2, omega = attempt(first, second)
            except SingularOmega2 as exc:
                last = exc
                continue
            if _max_asym(omega) >= tol:
                continue
            omega = _symmetrize(omega)
            if _cholesky_pd(_im_part(omega), prec_bits):
                return PeriodMatrix(omega1=o1, omega2=o2, omega=omega,
                                    prec_bits=prec_bits, lattice=lat, phi=phi,
                                    gamma_applied=_linalg.identity(6),
                                    swapped=bool(swapped))
        if last is not None:
            raise last
        raise NotSymmetric(
            "Omega failed symmetry/positivity for both half orderings; "
            "check the symplectic orientation of the basis")


def _im_part(m: mp.matrix) -> mp.matrix:
    n = m.rows
    out = mp.matrix(n)
    for i in range(n):
        for j in range(n):
            out[i, j] = mp.im(m[i, j])
    return out


def eta1(pm: PeriodMatrix):
    """Smallest eigenvalue of Im(Omega)."""
    with mp.workprec(pm.prec_bits + 32):
        y = pm.im_omega()
        if not _cholesky_pd(y, pm.prec_bits):
            raise NotPositiveDefinite("Im(Omega) is not positive definite")
        eigvals = mp.eigsy(y, eigvals_only=True)
        return min(eigvals)


def _eta1_of(y: mp.matrix):
    return min(mp.eigsy(y, eigvals_only=True))


def is_symplectic(gamma) -> bool:
    n = len(gamma) // 2
    j = standard_j(n)
    g = [[int(x) for x in row] for row in gamma]
    return _linalg.mat_mul(_linalg.mat_mul(_linalg.transpose(g), j), g) == j


def symplectic_apply(gamma, pm: PeriodMatrix) -> PeriodMatrix:
    """Omega' = (A Omega + B)(C Omega + D)^(-1) for gamma = [[A, B], [C, D]].

    The lattice provenance is transformed consistently: the new basis is
    b * gamma^t, which keeps the Gram matrix equal to J.
    """
    if not is_symplectic(gamma):
        raise NotSymplectic("gamma^t J gamma != J")
    g = pm.g
    with mp.workprec(pm.prec_bits + 32):
        a = mp.matrix([[gamma[i][j] for j in range(g)] for i in range(g)])
        b = mp.matrix([[gamma[i][j + g] for j in range(g)] for i in range(g)])
        c = mp.matrix([[gamma[i + g][j] for j in range(g)] for i in range(g)])
        d = mp.matrix([[gamma[i + g][j + g] for j in range(g)] for i in range(g)])
        denom = c * pm.omega + d
        if abs(mp.det(denom)) < mp.mpf(2) ** (-pm.prec_bits // 2):
            raise SingularDenominator("C Omega + D is singular")
        omega = (a * pm.omega + b) * (denom ** -1)
        tol = mp.mpf(2) ** (-pm.prec_bits + 24)
        if _max_asym(omega) >= tol:
            raise NotSymmetric("transformed Omega lost symmetry")
        omega = _symmetrize(omega)
        if not _cholesky_pd(_im_part(omega), pm.prec_bits):
            raise NotPositiveDefinite("transformed Im(Omega) not positive definite")

        new_lat = pm.lattice
        if new_lat is not None:
            gt = _linalg.transpose([[int(x) for x in row] for row in gamma])
            new_basis = tuple(
                sum((new_lat.basis[i] * gt[i][j] for i in range(2 * g)),
                    new_lat.field.coerce(0))
                for j in range(2 * g))
            new_lat = replace(new_lat, basis=new_basis)
        # new half-period blocks: Pi' = Pi * gamma^t
        pi = mp.matrix(g, 2 * g)
        for k in range(g):
            for j in range(g):
                pi[k, j] = pm.omega1[k, j]
                pi[k, j + g] = pm.omega2[k, j]
        gt_m = mp.matrix([[gamma[j][i] for j in range(2 * g)] for i in range(2 * g)])
        pi2 = pi * gt_m
        o1 = mp.matrix(g)
        o2 = mp.matrix(g)
        for k in range(g):
            for j in range(g):
                o1[k, j] = pi2[k, j]
                o2[k, j] = pi2[k, j + g]
        # symplectic actions compose on the left: gamma_total = gamma * previous
        prev = pm.gamma_applied if pm.gamma_applied is not None else _linalg.identity(2 * g)
        total = _linalg.mat_mul([[int(x) for x in row] for row in gamma],
                                [[int(x) for x in row] for row in prev])
        return PeriodMatrix(omega1=o1, omega2=o2, omega=omega,
                            prec_bits=pm.prec_bits, lattice=new_lat, phi=pm.phi,
                            gamma_applied=total, swapped=pm.swapped)


def _translation_gamma(b, g=3):
    i = _linalg.identity(g)
    z = [[0] * g for _ in range(g)]
    out = []
    for r in range(g):
        out.append(i[r] + list(b[r]))
    for r in range(g):
        out.append(z[r] + i[r])
    return out


def _gl_gamma(v, g=3):
    """diag(V, V^-t): acts as Omega -> V Omega V^t."""
    vt_inv = _linalg.mat_inv(_linalg.transpose(v))
    vt_inv = [[int(x) for x in row] for row in vt_inv]
    out = []
    z = [0] * g
    for r in range(g):
        out.append(list(v[r]) + z)
    for r in range(g):
        out.append(z + list(vt_inv[r]))
    return out


def _inversion_gamma(g=3):
    i = _linalg.identity(g)
    z = [[0] * g for _ in range(g)]
    out = []
    for r in range(g):
        out.append(list(z[r]) + i[r])
    for r in range(g):
        out.append([-x for x in i[r]] + z[r])
    return out


def siegel_reduce(pm: PeriodMatrix):
    """Sp(6, Z)-equivalent Omega with eta_1 at least as large, plus the transform.

    Strategy: (a) LLL on Im(Omega) lifted to diag(V, V^-t), (b) integer
    translation normalizing Re(Omega), (c) greedy inversion moves, repeated
    until no improvement.
    """
    g = pm.g
    current = pm
    total = _linalg.identity(2 * g)
    accepted = 0
    with mp.workprec(pm.prec_bits + 32):
        start_eta = _eta1_of(current.im_omega())
        best_eta = start_eta
        improved = True
        while improved and accepted < LOCAL_SEARCH_MAX_ACCEPTED:
            improved = False
            # (a) LLL on the imaginary part
            y = current.im_omega()
            _, v = lll_reduce(LatticeBasis(
                [[y[i, j] for j in range(g)] for i in range(g)], gram_mode=True),
                delta=0.75)
            gamma = _gl_gamma(v, g)
            try:
                cand = symplectic_apply(gamma, current)
                cand_eta = _eta1_of(cand.im_omega())
            except (SingularDenominator, NotPositiveDefinite, NotSymmetric):
                cand_eta = None
            if cand_eta is not None and cand_eta > best_eta * (1 + mp.mpf(2) ** (-current.prec_bits // 2)):
                current, best_eta = cand, cand_eta
                total = _linalg.mat_mul(gamma, total)
                accepted += 1
                improved = True
            # (b) translation normalizing the real part (eta1-neutral)
            bmat = [[-int(mp.nint(mp.re(current.omega[i, j]))) for j in range(g)]
                    for i in range(g)]
            bmat = [[(bmat[i][j] + bmat[j][i]) // 2 for j in range(g)] for i in range(g)]
            if any(bmat[i][j] for i in range(g) for j in range(g)):
                gamma = _translation_gamma(bmat, g)
                current = symplectic_apply(gamma, current)
                total = _linalg.mat_mul(gamma, total)
            # (c) inversion move
            gamma = _inversion_gamma(g)
            try:
                cand = symplectic_apply(gamma, current)
                cand_eta = _eta1_of(cand.im_omega())
            except (SingularDenominator, NotPositiveDefinite, NotSymmetric):
                cand_eta = None
            if cand_eta is not None and cand_eta > best_eta * (1 + mp.mpf(2) ** (-current.prec_bits // 2)):
                current, best_eta = cand, cand_eta
                total = _linalg.mat_mul(gamma, total)
                accepted += 1
                improved = True
        if best_eta < start_eta:
            return pm, _linalg.identity(2 * g)
    return current, total
