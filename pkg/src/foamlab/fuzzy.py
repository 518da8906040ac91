"""Triangular fuzzy moduli and deterministic foam constitutive relations.

A triangular fuzzy modulus (e1, e2, e3) is evaluated in double parametric
form: alpha indexes the membership cut (alpha=1 is the crisp peak) and beta
selects the position between the lower and upper branch. Shear modulus,
Poisson's ratio, and mass density of the foam stay deterministic functions
of the relative density; only Young's modulus carries the fuzzy band.
"""

from dataclasses import dataclass

from .errors import DomainError

# cell-wall matrix defaults (aluminium): shear modulus MPa, Poisson, kg/m^3
G0_DEFAULT = 23731.0
NU0_DEFAULT = 0.3
RHO0_DEFAULT = 2700.0


@dataclass(frozen=True)
class FuzzyTriangular:
    """Triangular fuzzy number, e1 <= e2 <= e3 (moduli in MPa)."""

    e1: float
    e2: float
    e3: float

    def __post_init__(self):
        if not (self.e1 <= self.e2 <= self.e3):
            raise DomainError(f"fuzzy triple must be ordered: {self}")
        if self.e1 <= 0:
            raise DomainError(f"fuzzy modulus must be positive: {self}")


@dataclass(frozen=True)
class FoamConstants:
    """Density-linked deterministic foam properties."""

    mu: float
    G: float      # MPa
    nu: float
    rho: float    # kg/m^3


def make_fuzzy(e2: float, r: float) -> FuzzyTriangular:
    """Build a symmetric triangular fuzzy modulus from a relative error band.

    e2 is the crisp (FE-homogenized) value; r is the relative half-width,
    e.g. 0.0592 for the regressor's mean error. r >= 1 would produce a
    non-positive lower limit.
    """
    if e2 <= 0:
        raise DomainError(f"e2 must be positive, got {e2}")
    if not (0.0 <= r < 1.0):
        raise DomainError(f"invalid error band r={r}, need 0 <= r < 1")
    return FuzzyTriangular((1.0 - r) * e2, e2, (1.0 + r) * e2)


def eval_fuzzy(f: FuzzyTriangular, alpha: float, beta: float) -> float:
    """Evaluate the double parametric form at (alpha, beta).

    alpha=1 returns e2 for any beta; (0, 0) returns e1 and (0, 1) returns e3.
    The result is clamped to [e1, e3] so rounding can never escape the
    support interval.
    """
    if not (0.0 <= alpha <= 1.0) or not (0.0 <= beta <= 1.0):
        raise DomainError(f"alpha, beta must lie in [0, 1], got {alpha}, {beta}")
    e1, e2, e3 = f.e1, f.e2, f.e3
    v = (e1 - e3) * alpha * beta + (e3 - e1) * beta + (e2 - e1) * alpha + e1
    return min(max(v, e1), e3)


def foam_constants(
    mu: float,
    G0: float = G0_DEFAULT,
    nu0: float = NU0_DEFAULT,
    rho0: float = RHO0_DEFAULT,
) -> FoamConstants:
    """Deterministic shear modulus, Poisson's ratio, and density of the foam.

    The shear relation uses the empirical closed-cell prefactor 0.75*0.4886
    taken as-is; its provenance is the calibration literature and it is not
    re-derived here.
    """
    if not (0.0 <= mu <= 1.0):
        raise DomainError(f"relative density must lie in [0, 1], got {mu}")
    G = G0 * (0.75 * 0.4886) * (1.0 + nu0) * (0.5 * mu * mu + 0.3 * mu)
    nu = nu0 + 3.0 * (1.0 - 5.0 * nu0) * (1.0 - nu0 * nu0) * (1.0 - mu) / (2.0 * (7.0 - 5.0 * nu0))
    rho = mu * rho0
    return FoamConstants(mu=mu, G=G, nu=nu, rho=rho)
