"""Recovery of the Picard curve from a CM period matrix.

Pipeline: the zeta_3 multiplication gives an exact symplectic matrix M; the
Riemann constant is the unique M-fixed odd half-characteristic Delta; the
branch images live in (1/3) Ker_{F_3}(1 - M) and are located through the 15
vanishing theta constants; lambda and mu then come from cubed theta ratios
twisted by exact roots of unity.

All characteristic arithmetic is carried on unreduced exact rationals: the
root-of-unity factors depend on the representatives, and reduction happens
only inside theta_char with the quasi-periodicity factor multiplied back.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, permutations

import mpmath as mp

from . import _linalg
from .errors import (DenominatorThetaZero, NoValidAssignment,
                     NotStableUnderZeta3, NotUnique, VerificationFailed,
                     WrongKernelDimension, WrongZeroCount)
from .periods import PeriodMatrix
from .polarize import PolarizedLattice, standard_j
from .theta import Characteristic, ThetaParams, theta_char

ZERO_GAP_MIN = mp.mpf(10) ** 6


@dataclass
class RhoAction:
    """The zeta_3 endomorphism in analytic, rational, and characteristic form."""

    R: tuple                 # diag entries diag(phi_k(zeta_3))
    Zmat: list               # 6x6 integer, column j = coords of zeta_3 * b_j
    M: list                  # symplectic representation, M = Zmat^t

    @property
    def char_linear(self):
        """Linear part of the characteristic action of M: [[D, -C], [-B, A]].

        Equals (M^t)^(-1); for the order-3 action this is Zmat^2, whose fixed
        space mod 3 coincides with that of Zmat.
        """
        a = [row[:3] for row in self.M[:3]]
        b = [row[3:] for row in self.M[:3]]
        c = [row[:3] for row in self.M[3:]]
        d = [row[3:] for row in self.M[3:]]
        top = [d[i] + [-x for x in c[i]] for i in range(3)]
        bot = [[-x for x in b[i]] + a[i] for i in range(3)]
        return top + bot

    @property
    def char_shift_doubled(self):
        """Twice the affine shift: (diag(C D^t), diag(A B^t)), an integer vector."""
        a = [row[:3] for row in self.M[:3]]
        b = [row[3:] for row in self.M[:3]]
        c = [row[:3] for row in self.M[3:]]
        d = [row[3:] for row in self.M[3:]]
        cdt = _linalg.mat_mul(c, _linalg.transpose(d))
        abt = _linalg.mat_mul(a, _linalg.transpose(b))
        return [cdt[i][i] for i in range(3)] + [abt[i][i] for i in range(3)]

    def act(self, x):
        """Affine action of M on a rational characteristic vector.

        The symplectic theta transformation sends x to
        (D x1 - C x2 + diag(C D^t)/2, -B x1 + A x2 + diag(A B^t)/2);
        since M fixes Omega, this action permutes the vanishing characteristics
        and fixes the Riemann constant mod 1.
        """
        lin = _linalg.mat_vec(self.char_linear, [Fraction(v) for v in x])
        return [l + Fraction(s, 2) for l, s in zip(lin, self.char_shift_doubled)]


@dataclass
class BranchConfig:
    delta: Characteristic
    zero_locus: frozenset
    D0: Characteristic
    D1: Characteristic
    Dlam: Characteristic
    Dmu: Characteristic
    group: tuple             # the 27 kernel characteristics
    alternates: list = dc_field(default_factory=list)


@dataclass
class CurveModel:
    lam: mp.mpc
    mu: mp.mpc
    eps_lambda: mp.mpc
    eps_mu: mp.mpc
    eps_lambda_angle: Fraction
    eps_mu_angle: Fraction
    g2: mp.mpc
    g3: mp.mpc
    g4: mp.mpc
    j1: mp.mpc | None
    j2: mp.mpc | None
    degenerate: bool
    recognized: dict = dc_field(default_factory=dict)

    def weighted_tuple(self):
        return (self.g2, self.g3, self.g4)


def rho_matrices(lat: PolarizedLattice, pm: PeriodMatrix) -> RhoAction:
    """Exact zeta_3 matrices plus numerical verification of the defining equation."""
    fld = lat.field
    basis_mat = [list(b.coords) for b in lat.basis]
    binv = _linalg.mat_inv(_linalg.transpose(basis_mat))
    zcols = []
    for b in lat.basis:
        coords = _linalg.mat_vec(binv, list((fld.zeta * b).coords))
        if any(c.denominator != 1 for c in coords):
            raise NotStableUnderZeta3(
                f"{fld.label}: zeta_3 * b_j leaves the lattice")
        zcols.append([int(c) for c in coords])
    zmat = [[zcols[j][i] for j in range(6)] for i in range(6)]
    m = _linalg.transpose(zmat)

    ident = _linalg.identity(6)
    mm = _linalg.mat_mul(m, m)
    if [[mm[i][j] + m[i][j] + ident[i][j] for j in range(6)] for i in range(6)] \
            != [[0] * 6 for _ in range(6)]:
        raise VerificationFailed("M^2 + M + Id != 0")
    if _linalg.mat_mul(mm, m) != ident:
        raise VerificationFailed("M^3 != Id")
    j = standard_j()
    if _linalg.mat_mul(_linalg.mat_mul(_linalg.transpose(m), j), m) != j:
        raise VerificationFailed("M is not symplectic")

    r = tuple(pm.phi.zeta_images) if pm.phi is not None else None
    if r is not None:
        _verify_block_equation(r, pm, zmat)
    return RhoAction(R=r, Zmat=zmat, M=m)


def _verify_block_equation(r, pm: PeriodMatrix, zmat):
    """diag(O2^-1 R O2, conj) [[Omega, I], [conj, I]] = [[Omega, I], [conj, I]] M^t."""
    p = pm.prec_bits
    with mp.workprec(p + 32):
        o2 = pm.omega2
        s = (o2 ** -1) * mp.diag(list(r)) * o2
        om = pm.omega
        big_p = mp.matrix(6)
        for i in range(3):
            for j in range(3):
                big_p[i, j] = om[i, j]
                big_p[i + 3, j] = mp.conj(om[i, j])
            big_p[i, i + 3] = 1
            big_p[i + 3, i + 3] = 1
        lhs = mp.matrix(6)
        for i in range(3):
            for j in range(3):
                lhs[i, j] = s[i, j]
                lhs[i + 3, j + 3] = mp.conj(s[i, j])
        lhs = lhs * big_p
        mt = mp.matrix([[zmat[i][j] for j in range(6)] for i in range(6)])
        rhs = big_p * mt
        resid = max(abs(lhs[i, j] - rhs[i, j]) for i in range(6) for j in range(6))
        if resid > mp.mpf(2) ** (-p + 40):
            raise VerificationFailed(
                f"zeta_3 block equation residual {mp.nstr(resid, 5)} too large")


def _half_char(bits) -> Characteristic:
    return Characteristic.from_vector([Fraction(b, 2) for b in bits])


def riemann_constant(rho: RhoAction) -> Characteristic:
    """The unique odd half-characteristic fixed by the zeta_3 action mod 1."""
    lin = rho.char_linear
    shift2 = rho.char_shift_doubled
    survivors = []
    for code in range(64):
        bits = [(code >> t) & 1 for t in range(6)]
        if (sum(bits[i] * bits[3 + i] for i in range(3)) % 2) != 1:
            continue
        # act(bits/2) = bits/2 mod 1  <=>  L bits + 2*shift = bits mod 2
        img = _linalg.mat_vec(lin, bits)
        if all((img[i] + shift2[i] - bits[i]) % 2 == 0 for i in range(6)):
            survivors.append(bits)
    if len(survivors) != 1:
        raise NotUnique([_half_char(b) for b in survivors])
    return _half_char(survivors[0])


def kernel_one_minus_m(rho: RhoAction):
    """All 27 vectors of Ker_{F_3}(1 - M) acting on characteristics, sorted.

    The kernel is taken for the linear part of the characteristic action,
    which has the same mod-3 fixed space as the point-coordinate action.
    """
    lin = rho.char_linear
    one_minus = [[(1 if i == j else 0) - lin[i][j] for j in range(6)]
                 for i in range(6)]
    basis = _linalg.kernel_mod_p(one_minus, 3)
    if len(basis) != 3:
        raise WrongKernelDimension(
            f"kernel of (1 - M) over F_3 has dimension {len(basis)}, expected 3")
    vecs = set()
    for a in range(3):
        for b in range(3):
            for c in range(3):
                v = tuple((a * basis[0][t] + b * basis[1][t] + c * basis[2][t]) % 3
                          for t in range(6))
                vecs.add(v)
    assert len(vecs) == 27
    return sorted(vecs)


def _third_char(v) -> Characteristic:
    return Characteristic.from_vector([Fraction(x, 3) for x in v])


def zero_locus(rho: RhoAction, delta: Characteristic, pm: PeriodMatrix,
               params: ThetaParams):
    """The 15 kernel characteristics z with theta[z + Delta](Omega) = 0.

    Zeros are separated from non-zeros by the largest gap in sorted log
    magnitudes; the gap must exceed 10^6 and the zero side must sit at the
    truncation-error scale, otherwise WrongZeroCount carries the profile so
    the caller can escalate precision.
    """
    vecs = kernel_one_minus_m(rho)
    mags = []
    for v in vecs:
        val = theta_char(_third_char(v) + delta, pm, params)
        mags.append((abs(val), v))
    ordered = sorted(mags, key=lambda t: t[0])
    eps = params.eps_mpf()
    best_ratio, split = mp.mpf(0), None
    for i in range(len(ordered) - 1):
        lo = ordered[i][0]
        hi = ordered[i + 1][0]
        ratio = hi / lo if lo > 0 else mp.inf
        if ratio > best_ratio:
            best_ratio, split = ratio, i + 1
    profile = [mp.nstr(m, 8) for m, _ in ordered]
    if split != 15:
        raise WrongZeroCount(
            f"magnitude gap splits zeros at {split}, expected 15", profile)
    if best_ratio < ZERO_GAP_MIN:
        raise WrongZeroCount(
            f"zero/nonzero magnitude gap {mp.nstr(best_ratio, 5)} below 1e6", profile)
    if ordered[14][0] > 10 ** 6 * eps:
        raise WrongZeroCount(
            f"zero-side magnitude {mp.nstr(ordered[14][0], 5)} above truncation scale",
            profile)
    return frozenset(_third_char(v) for _, v in ordered[:15])


def assign_branches(zl, rho: RhoAction, delta: Characteristic, pm: PeriodMatrix,
                    params: ThetaParams) -> BranchConfig:
    """Quadruples (D0, D1, Dlam, Dmu) consistent with the zero locus.

    A candidate is an ordered quadruple of distinct nonzero kernel elements
    summing to zero mod 1 whose 15 pairwise sums (over the five branch
    points, infinity included as 0) reproduce the zero locus exactly.  The
    first quadruple in lexicographic order is returned; the rest are kept as
    alternates for invariance testing.
    """
    if len(zl) != 15:
        raise WrongZeroCount(f"|Z| = {len(zl)}, expected 15", None)
    vecs = kernel_one_minus_m(rho)
    nonzero = [v for v in vecs if any(v)]
    zset = {tuple(int(x * 3) % 3 for x in z.vector()) for z in zl}

    def pair_sums(quad):
        pts = [(0,) * 6] + list(quad)
        out = set()
        for i in range(5):
            for j in range(i, 5):
                out.add(tuple((pts[i][t] + pts[j][t]) % 3 for t in range(6)))
        return out

    accepted = []
    for combo in combinations(nonzero, 3):
        s = tuple((-(combo[0][t] + combo[1][t] + combo[2][t])) % 3 for t in range(6))
        if not any(s) or s in combo:
            continue
        quad_set = sorted([combo[0], combo[1], combo[2], s])
        sums = pair_sums(quad_set)
        if len(sums) != 15 or sums != zset:
            continue
        for perm in permutations(quad_set):
            accepted.append(perm)
    if not accepted:
        raise NoValidAssignment(
            "no branch quadruple reproduces the zero locus")
    accepted = sorted(set(accepted))
    quads = [tuple(_third_char(v) for v in quad) for quad in accepted]
    first = quads[0]
    return BranchConfig(delta=delta, zero_locus=zl,
                        D0=first[0], D1=first[1], Dlam=first[2], Dmu=first[3],
                        group=tuple(_third_char(v) for v in vecs),
                        alternates=quads)


def _dot(a, b) -> Fraction:
    return sum(x * y for x, y in zip(a, b))


def _root_of_unity(angle_q: Fraction, prec_bits: int):
    """exp(pi i * angle_q) for an exact rational angle."""
    angle_q = angle_q % 2
    with mp.workprec(prec_bits + 32):
        return mp.expjpi(mp.mpf(angle_q.numerator) / angle_q.denominator)


def _branch_ratio(d_one: Characteristic, d_var: Characteristic,
                  cfg: BranchConfig, pm, params, use_correction: bool):
    """epsilon * (theta[a1]/theta[a2])^3 for the pair (P_1, P_var)."""
    delta, d0 = cfg.delta, cfg.D0
    arg_num = d_one + d_var.scale(2) - d0 - delta
    arg_den = d_one.scale(2) + d_var - d0 - delta
    angle = 6 * (_dot((d_var - d_one).x1, d0.x2)
                 + _dot((d_one + d_var.scale(2) - delta).x1,
                        (delta.scale(2) - (d_one + d_var).scale(3)).x2))
    num = theta_char(arg_num, pm, params)
    den = theta_char(arg_den, pm, params)
    eps = params.eps_mpf()
    with mp.workprec(params.prec_bits + 32):
        if abs(den) < mp.sqrt(eps):
            raise DenominatorThetaZero(
                f"denominator theta constant {mp.nstr(abs(den), 5)} too small")
        value = (num / den) ** 3
        if use_correction:
            value *= _root_of_unity(angle, params.prec_bits)
    return value, (angle % 2 if use_correction else Fraction(0))


def lambda_mu(cfg: BranchConfig, pm: PeriodMatrix, params: ThetaParams,
              use_correction: bool = True):
    """(lambda, mu, eps_lambda, eps_mu) from the cubed theta-ratio formulas.

    mu uses the same formula with the roles of P_lambda and P_mu exchanged.
    With use_correction False the root-of-unity factors are dropped (for the
    regression against the uncorrected formula).
    """
    lam, ang_l = _branch_ratio(cfg.D1, cfg.Dlam, cfg, pm, params, use_correction)
    mu, ang_m = _branch_ratio(cfg.D1, cfg.Dmu, cfg, pm, params, use_correction)
    eps_l = _root_of_unity(ang_l, params.prec_bits)
    eps_m = _root_of_unity(ang_m, params.prec_bits)
    return lam, mu, eps_l, eps_m, ang_l, ang_m


def epsilon_of_divisor(arg: Characteristic, d0: Characteristic,
                       delta: Characteristic) -> Fraction:
    """Exact angle q with eps(D) = exp(pi i q), from the divisor form."""
    return (6 * _dot((arg - d0 - delta).x1, d0.x2)) % 2


def lambda_via_corollary(cfg: BranchConfig, pm: PeriodMatrix, params: ThetaParams):
    """lambda as a ratio of two divisor evaluations (consistency oracle).

    Evaluates phi(D) = E eps(D) (theta[alpha(D) - alpha(P0) - Delta] /
    theta[alpha(D) - Delta])^3 at D = P1 + 2 P_lam and D = 2 P1 + P_lam;
    the constant E cancels in the quotient.
    """
    delta, d0 = cfg.delta, cfg.D0

    def phi_of(arg):
        q = epsilon_of_divisor(arg, d0, delta)
        num = theta_char(arg - d0 - delta, pm, params)
        den = theta_char(arg - delta, pm, params)
        if abs(den) < mp.sqrt(params.eps_mpf()):
            raise DenominatorThetaZero("corollary denominator too small")
        return _root_of_unity(q, params.prec_bits) * (num / den) ** 3

    d_a = cfg.D1 + cfg.Dlam.scale(2)
    d_b = cfg.D1.scale(2) + cfg.Dlam
    with mp.workprec(params.prec_bits + 32):
        return phi_of(d_a) / phi_of(d_b)


def curve_invariants(lam, mu, prec_bits: int = 300):
    """Depressed-quartic coefficients and absolute invariants of the curve.

    f(x) = x (x-1) (x-lambda) (x-mu) shifted by (1 + lambda + mu)/4 gives
    y^3 = x^4 + g2 x^2 + g3 x + g4; then j1 = g3^2/g2^3 and j2 = g4/g2^2.
    When g2 vanishes (below the relative threshold) the invariants are
    flagged degenerate and only the weighted tuple (g2 : g3 : g4) is valid.
    """
    with mp.workprec(prec_bits + 32):
        lam = mp.mpc(lam)
        mu = mp.mpc(mu)
        e1 = 1 + lam + mu
        e2 = lam + mu + lam * mu
        e3 = lam * mu
        s = e1 / 4
        g2 = 6 * s ** 2 - 3 * e1 * s + e2
        g3 = 4 * s ** 3 - 3 * e1 * s ** 2 + 2 * e2 * s - e3
        g4 = s ** 4 - e1 * s ** 3 + e2 * s ** 2 - e3 * s
        scale = max(abs(g2) ** mp.mpf("0.5"), abs(g3) ** (mp.mpf(1) / 3),
                    abs(g4) ** mp.mpf("0.25"), mp.mpf("1e-30"))
        degenerate = abs(g2) < scale ** 2 * mp.mpf(2) ** (-prec_bits // 3)
        j1 = j2 = None
        if not degenerate:
            j1 = g3 ** 2 / g2 ** 3
            j2 = g4 / g2 ** 2
        return g2, g3, g4, j1, j2, degenerate


def _valid_branch_values(lam, mu, prec_bits):
    tol = mp.mpf(2) ** (-prec_bits // 4)
    for v in (lam, mu):
        if not mp.isfinite(v) or abs(v) < tol or abs(v - 1) < tol:
            return False
    return abs(lam - mu) >= tol


@dataclass
class SolveResult:
    model: CurveModel
    config: BranchConfig
    quad_used: tuple
    rho: RhoAction
    params: ThetaParams
    escalations: int = 0


def solve_from_period_matrix(pm: PeriodMatrix, params: ThetaParams,
                             use_correction: bool = True,
                             max_escalations: int = 3) -> SolveResult:
    """Full solve: rho, Delta, zero locus, branch assignment, lambda/mu, model.

    On an unclear zero/nonzero separation the precision is doubled and the
    truncation target squared, up to max_escalations times.
    """
    lat = pm.lattice
    if lat is None:
        raise ValueError("period matrix lacks lattice provenance")
    escalations = 0
    current_pm, current_params = pm, params
    while True:
        try:
            return _solve_once(current_pm, current_params, use_correction,
                               escalations)
        except WrongZeroCount:
            if escalations >= max_escalations:
                raise
            escalations += 1
            new_prec = current_params.prec_bits * 2
            new_eps = mp.mpf(str(current_params.epsilon)) ** 2
            current_params = ThetaParams(epsilon=mp.nstr(new_eps, 8),
                                         prec_bits=new_prec)
            from .periods import build_period_matrix
            current_pm = build_period_matrix(
                lat, _rebuild_phi(lat, new_prec), new_prec)


def _rebuild_phi(lat, prec_bits):
    from .cmfield import CMType
    return CMType(lat.field, prec_bits)


def _solve_once(pm: PeriodMatrix, params: ThetaParams, use_correction: bool,
                escalations: int) -> SolveResult:
    rho = rho_matrices(pm.lattice, pm)
    delta = riemann_constant(rho)
    zl = zero_locus(rho, delta, pm, params)
    cfg = assign_branches(zl, rho, delta, pm, params)
    last_exc = None
    for quad in cfg.alternates:
        trial = BranchConfig(delta=cfg.delta, zero_locus=cfg.zero_locus,
                             D0=quad[0], D1=quad[1], Dlam=quad[2], Dmu=quad[3],
                             group=cfg.group, alternates=cfg.alternates)
        try:
            lam, mu, eps_l, eps_m, ang_l, ang_m = lambda_mu(
                trial, pm, params, use_correction)
        except DenominatorThetaZero as exc:
            last_exc = exc
            continue
        if not _valid_branch_values(lam, mu, params.prec_bits):
            continue
        g2, g3, g4, j1, j2, degenerate = curve_invariants(
            lam, mu, params.prec_bits)
        model = CurveModel(lam=lam, mu=mu, eps_lambda=eps_l, eps_mu=eps_m,
                           eps_lambda_angle=ang_l, eps_mu_angle=ang_m,
                           g2=g2, g3=g3, g4=g4, j1=j1, j2=j2,
                           degenerate=degenerate)
        return SolveResult(model=model, config=trial, quad_used=quad, rho=rho,
                           params=params, escalations=escalations)
    if last_exc is not None:
        raise NoValidAssignment(f"all quadruples rejected: {last_exc}")
    raise NoValidAssignment("no quadruple produced valid branch values")
