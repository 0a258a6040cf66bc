"""Exception hierarchy shared by all picardcm modules."""


class PicardCMError(Exception):
    """Base class for all errors raised by this package."""


# --- field construction -------------------------------------------------

class Reducible(PicardCMError):
    """The defining cubic factors over the rationals."""


class NotTotallyReal(PicardCMError):
    """The defining cubic has non-real roots (discriminant <= 0)."""


class NotCyclic(PicardCMError):
    """The cubic is totally real but its discriminant is not a square."""


class NotInK0(PicardCMError):
    """Element expected to lie in the real cubic subfield does not."""


class PrecisionTooLow(PicardCMError):
    """Requested precision cannot separate roots / support the search."""


# --- polarization -------------------------------------------------------

class NoneFound(PicardCMError):
    """No polarization element found within the search bound."""


class NotUnimodular(PicardCMError):
    """Pairing matrix does not have determinant one."""


class NotAntisymmetric(PicardCMError):
    """Pairing matrix is not antisymmetric."""


class MissingIdealData(PicardCMError):
    """Field has class number > 1 but no ideal data was supplied."""


class ValidationFailed(PicardCMError):
    """A supplied (basis, xi) pair violates a polarization condition."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        super().__init__(f"polarization condition violated: {condition}"
                         + (f" ({detail})" if detail else ""))


# --- lattice ------------------------------------------------------------

class RankDeficient(PicardCMError):
    """Input vectors are linearly dependent."""


# --- period matrices ----------------------------------------------------

class NotSymmetric(PicardCMError):
    """Normalized period matrix failed the symmetry tolerance."""


class SingularOmega2(PicardCMError):
    """Second half-period block is numerically singular."""


class NotPositiveDefinite(PicardCMError):
    """Imaginary part of the period matrix is not positive definite."""


class NotSymplectic(PicardCMError):
    """Integer matrix does not satisfy g^t J g = J."""


class SingularDenominator(PicardCMError):
    """C*Omega + D is singular in a symplectic action."""


# --- Picard solver ------------------------------------------------------

class NotStableUnderZeta3(PicardCMError):
    """Lattice is not stable under multiplication by zeta_3."""


class VerificationFailed(PicardCMError):
    """A numerical postcondition check failed beyond tolerance."""


class NotUnique(PicardCMError):
    """Riemann constant search did not produce exactly one candidate."""

    def __init__(self, survivors):
        self.survivors = survivors
        super().__init__(f"expected a unique fixed odd characteristic, got "
                         f"{len(survivors)}: {survivors}")


class WrongKernelDimension(PicardCMError):
    """Kernel of (1 - M) over F_3 does not have dimension 3."""


class WrongZeroCount(PicardCMError):
    """Theta zero locus does not have 15 elements."""

    def __init__(self, message, profile=None):
        self.profile = profile
        super().__init__(message)


class NoValidAssignment(PicardCMError):
    """No branch-point quadruple is consistent with the zero locus."""


class DenominatorThetaZero(PicardCMError):
    """A denominator theta value is too close to zero."""


# --- recognition / verification -----------------------------------------

class NotRecognized(PicardCMError):
    """Invariants lack exact forms required for reconstruction."""


class BadReduction(PicardCMError):
    """Prime divides the discriminant (or is 3): no good reduction."""
