"""Mid-span point-load bending of the three-layer FG porous Timoshenko beam.

The layup is symmetric: two thin high-density faces (thickness h_T/6 each)
around a thick low-density core. Layer Young's moduli are triangular fuzzy
numbers evaluated in double parametric form; shear modulus and Poisson's
ratio stay deterministic in the layer density. The deflection is found by
Ritz minimization of the total energy over polynomial trial fields on a
hinged-hinged span, and independently by the closed-form layered Timoshenko
solution used as the oracle. Beam units are SI (m, N); moduli enter in MPa
and deflections are reported in mm.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from .errors import ConditioningError, DomainError, InvalidConfigError
from .fuzzy import FuzzyTriangular, eval_fuzzy, foam_constants, make_fuzzy

PAPER_ERROR_BAND = 0.0592
PAPER_E2_HIGH = 1693.92   # MPa, mean homogenized modulus at mu = 13.81 %
PAPER_E2_LOW = 865.98     # MPa, at mu = 6.92 %


@dataclass(frozen=True)
class BeamScenario:
    """Three-layer FG beam with fuzzy layer moduli and Ritz settings."""

    L: float = 2.0
    b: float = 0.1
    h_T: float = 0.1
    P: float = 100.0
    mu_high: float = 0.1381
    mu_low: float = 0.0692
    E_high: FuzzyTriangular = None
    E_low: FuzzyTriangular = None
    boundary: str = "H-H"
    n_terms: int = 10

    def __post_init__(self):
        if self.L <= 0 or self.b <= 0 or self.h_T <= 0:
            raise InvalidConfigError("L, b, h_T must be positive")
        if self.P < 0:
            raise InvalidConfigError(f"P must be non-negative, got {self.P}")
        if self.n_terms < 4:
            raise InvalidConfigError(f"n_terms must be >= 4, got {self.n_terms}")
        if self.boundary != "H-H":
            raise InvalidConfigError("only hinged-hinged (H-H) supports are implemented")
        if not (0.0 <= self.mu_high <= 1.0 and 0.0 <= self.mu_low <= 1.0):
            raise InvalidConfigError("layer densities must lie in [0, 1]")
        if self.E_high is None:
            object.__setattr__(self, "E_high", make_fuzzy(PAPER_E2_HIGH, PAPER_ERROR_BAND))
        if self.E_low is None:
            object.__setattr__(self, "E_low", make_fuzzy(PAPER_E2_LOW, PAPER_ERROR_BAND))

    @property
    def h_high(self) -> float:
        # layer rule: h_H = h_L / 4 = h_T / 6
        return self.h_T / 6.0

    def z_breaks(self) -> np.ndarray:
        h = self.h_T
        return np.array([-h / 2, -h / 2 + self.h_high, h / 2 - self.h_high, h / 2])


def paper_scenario(error_band: float = PAPER_ERROR_BAND, n_terms: int = 10) -> BeamScenario:
    return BeamScenario(
        E_high=make_fuzzy(PAPER_E2_HIGH, error_band),
        E_low=make_fuzzy(PAPER_E2_LOW, error_band),
        n_terms=n_terms,
    )


@dataclass(frozen=True)
class SectionStiffness:
    """Through-thickness stiffness integrals, SI units."""

    A11: float   # N
    B11: float   # N*m
    D11: float   # N*m^2
    S55: float   # N


def section_stiffnesses(scn: BeamScenario, alpha1: float, beta1: float,
                        alpha2: float, beta2: float) -> SectionStiffness:
    """Integrate layer stiffnesses; (alpha1, beta1) drives the high-density
    faces and (alpha2, beta2) the low-density core."""
    EH = eval_fuzzy(scn.E_high, alpha1, beta1)
    EL = eval_fuzzy(scn.E_low, alpha2, beta2)
    cH = foam_constants(scn.mu_high)
    cL = foam_constants(scn.mu_low)
    # plane-stress-like stiffness E~/(1 - nu^2), MPa -> Pa
    Estar = np.array([
        EH / (1.0 - cH.nu**2),
        EL / (1.0 - cL.nu**2),
        EH / (1.0 - cH.nu**2),
    ]) * 1e6
    Gs = np.array([cH.G, cL.G, cH.G]) * 1e6
    z = scn.z_breaks()
    A11 = scn.b * float(np.sum(Estar * np.diff(z)))
    B11 = scn.b * float(np.sum(Estar * np.diff(z**2) / 2.0))
    D11 = scn.b * float(np.sum(Estar * np.diff(z**3) / 3.0))
    S55 = scn.b * float(np.sum(Gs * np.diff(z)))
    return SectionStiffness(A11=A11, B11=B11, D11=D11, S55=S55)


# ---------------------------------------------------------------------------
# Ritz solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RitzSolution:
    delta_mm: float
    coeffs_u: np.ndarray
    coeffs_w: np.ndarray
    coeffs_phi: np.ndarray


def _basis(xi: np.ndarray, n: int):
    """Trial polynomials on xi in [0, 1] and their xi-derivatives.

    The admissible spans are xi(1-xi)*xi^(j-1) for u and w (hinged ends) and
    xi^(j-1) for phi. Shifted Legendre polynomials represent the same spans
    with a well-conditioned Gram matrix.
    """
    s = 2.0 * xi - 1.0
    V = legendre.legvander(s, n - 1)
    dV = np.zeros_like(V)
    for j in range(1, n):
        c = np.zeros(j + 1)
        c[j] = 1.0
        dV[:, j] = legendre.legval(s, legendre.legder(c)) * 2.0
    g = xi * (1.0 - xi)
    dg = 1.0 - 2.0 * xi
    W = g[:, None] * V
    dW = dg[:, None] * V + g[:, None] * dV
    return W, dW, V, dV


def ritz_solution(scn: BeamScenario, alpha1: float = 1.0, beta1: float = 1.0,
                  alpha2: float = 1.0, beta2: float = 1.0) -> RitzSolution:
    """Minimize the total energy over the polynomial trial fields.

    Exact Gauss quadrature (n_terms + 4 points covers every polynomial
    product); the point-load work is evaluated exactly at xi = 1/2. Returns
    the mid-span deflection in mm, positive downward under positive P.
    """
    sec = section_stiffnesses(scn, alpha1, beta1, alpha2, beta2)
    n = scn.n_terms
    L, P = scn.L, scn.P

    npts = n + 4
    xg, wg = np.polynomial.legendre.leggauss(npts)
    xi = 0.5 * (xg + 1.0)
    wq = 0.5 * wg
    W, dW, V, dV = _basis(xi, n)
    U, dU = W, dW    # u shares the hinged-end prefix with w

    def stiff(dA, dB, fac):
        # int fac * (dA/dx)(dB/dx) dx = fac/L * int dA' dB' dxi
        return (dA * wq[:, None]).T @ dB * (fac / L)

    K = np.zeros((3 * n, 3 * n))
    K[:n, :n] = stiff(dU, dU, sec.A11)
    K[:n, 2 * n:] = stiff(dU, dV, sec.B11)
    K[2 * n:, :n] = K[:n, 2 * n:].T
    K[n:2 * n, n:2 * n] = stiff(dW, dW, sec.S55)
    K[2 * n:, 2 * n:] = stiff(dV, dV, sec.D11) + (V * wq[:, None]).T @ V * (sec.S55 * L)
    Kwp = (dW * wq[:, None]).T @ V * sec.S55   # int S55 * w' * phi dx
    K[n:2 * n, 2 * n:] = Kwp
    K[2 * n:, n:2 * n] = Kwp.T

    f = np.zeros(3 * n)
    Vm = legendre.legvander(np.array([0.0]), n - 1)[0]   # xi = 1/2 -> s = 0
    wm = 0.25 * Vm                                       # xi(1-xi) = 1/4
    f[n:2 * n] = P * wm

    try:
        coef = np.linalg.solve(K, f)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"Ritz system is singular: {exc}") from exc
    if not np.all(np.isfinite(coef)):
        raise ConditioningError("Ritz system produced a non-finite solution")

    delta_m = float(wm @ coef[n:2 * n])
    return RitzSolution(
        delta_mm=delta_m * 1000.0,
        coeffs_u=coef[:n].copy(),
        coeffs_w=coef[n:2 * n].copy(),
        coeffs_phi=coef[2 * n:].copy(),
    )


def ritz_deflection(scn: BeamScenario, alpha1: float = 1.0, beta1: float = 1.0,
                    alpha2: float = 1.0, beta2: float = 1.0) -> float:
    return ritz_solution(scn, alpha1, beta1, alpha2, beta2).delta_mm


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def closed_form_homogeneous(P: float, L: float, E_prime_mpa: float,
                            I_prime_m4: float) -> float:
    """Shear-rigid simply supported point-load deflection PL^3/48E'I', mm."""
    if E_prime_mpa <= 0 or I_prime_m4 <= 0 or L <= 0:
        raise DomainError("E', I', L must be positive")
    if P < 0:
        raise DomainError("P must be non-negative")
    return P * L**3 / (48.0 * E_prime_mpa * 1e6 * I_prime_m4) * 1000.0


def closed_form_layered(P: float, L: float, D11: float, S55: float) -> float:
    """Simply supported Timoshenko point-load deflection, bending + shear, mm.

    Independent oracle for the Ritz solver on the symmetric layup.
    """
    if D11 <= 0 or S55 <= 0 or L <= 0:
        raise DomainError("D11, S55, L must be positive")
    if P < 0:
        raise DomainError("P must be non-negative")
    return (P * L**3 / (48.0 * D11) + P * L / (4.0 * S55)) * 1000.0


# ---------------------------------------------------------------------------
# fuzzy sweeps
# ---------------------------------------------------------------------------

SWEEP_LAYERS = ("high", "low", "both")


@dataclass
class DeflectionGrid:
    """Mid-span deflections over the (alpha, beta) grid, mm."""

    alphas: np.ndarray
    betas: np.ndarray
    values: np.ndarray       # (n_alpha, n_beta)
    which: str
    moduli_high: np.ndarray  # MPa used per cell
    moduli_low: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha"] + [f"{b:g}" for b in self.betas])
        for i, a in enumerate(self.alphas):
            w.writerow([f"{a:g}"] + [f"{v:.3f}" for v in self.values[i]])
        return buf.getvalue()

    def save_csv(self, path):
        with open(path, "w") as f:
            f.write(self.to_csv())

    def to_record(self, scn: BeamScenario) -> dict:
        return {
            "which": self.which,
            "alphas": self.alphas.tolist(),
            "betas": self.betas.tolist(),
            "deflection_mm": self.values.tolist(),
            "modulus_high_mpa": self.moduli_high.tolist(),
            "modulus_low_mpa": self.moduli_low.tolist(),
            "scenario": {
                "L_m": scn.L,
                "b_m": scn.b,
                "h_T_m": scn.h_T,
                "P_N": scn.P,
                "mu_high": scn.mu_high,
                "mu_low": scn.mu_low,
                "E_high_mpa": [scn.E_high.e1, scn.E_high.e2, scn.E_high.e3],
                "E_low_mpa": [scn.E_low.e1, scn.E_low.e2, scn.E_low.e3],
                "n_terms": scn.n_terms,
                "boundary": scn.boundary,
            },
        }


def _step_points(step: float) -> np.ndarray:
    k = 1.0 / step
    if abs(k - round(k)) > 1e-9:
        raise InvalidConfigError(f"step {step} does not divide 1 evenly")
    return np.linspace(0.0, 1.0, int(round(k)) + 1)


def fuzzy_sweep(scn: BeamScenario, which: str, alpha_step: float = 0.1,
                beta_step: float = 0.25) -> DeflectionGrid:
    """Sweep the selected layer's (alpha, beta) grid, other layer crisp.

    which="both" moves (alpha1, beta1) and (alpha2, beta2) together, matching
    the combined-uncertainty table layout.
    """
    if which not in SWEEP_LAYERS:
        raise InvalidConfigError(f"which must be one of {SWEEP_LAYERS}, got {which!r}")
    alphas = _step_points(alpha_step)
    betas = _step_points(beta_step)
    vals = np.zeros((len(alphas), len(betas)))
    eh = np.zeros_like(vals)
    el = np.zeros_like(vals)
    for i, a in enumerate(alphas):
        for j, b in enumerate(betas):
            if which == "high":
                p = (a, b, 1.0, 1.0)
            elif which == "low":
                p = (1.0, 1.0, a, b)
            else:
                p = (a, b, a, b)
            vals[i, j] = ritz_deflection(scn, *p)
            eh[i, j] = eval_fuzzy(scn.E_high, p[0], p[1])
            el[i, j] = eval_fuzzy(scn.E_low, p[2], p[3])
    return DeflectionGrid(
        alphas=alphas, betas=betas, values=vals, which=which,
        moduli_high=eh, moduli_low=el,
    )
