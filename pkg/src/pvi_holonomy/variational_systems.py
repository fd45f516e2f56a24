"""First and second variational equations along the leaf ``mu = 0, t = c``.

The E1 system acts on ``(eta1, xi1)`` (transverse ``t`` and ``mu``
components); the E2 system on ``(eta2, xi2, u1, v1)`` with
``u1 = xi1 eta1`` and ``v1 = xi1**2``.  The second-order coefficients use the
expansion ``t = c + eps eta1 + eps^2 eta2``, ``mu = eps xi1 + eps^2 xi2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic_paths import BranchState, Path, integrate_form
from .elliptic_curve import CurveForm, Periods
from .pvi_model import PviParameters, eval_polys

__all__ = [
    "E1System",
    "E2System",
    "TriangularE2",
    "ClosedFormT",
    "build_e1",
    "build_e2",
    "triangularize",
    "closed_form_X",
    "closed_form_T",
    "mon1_coordinates",
]


def _check_c(c) -> complex:
    c = complex(c)
    if c == 0 or c == 1:
        raise ValueError(f"degenerate c = {c}")
    return c


@dataclass(frozen=True)
class E1System:
    c: complex

    def a(self, lam):
        c = self.c
        return (3 * lam**2 - 2 * (1 + c) * lam + c) / (2 * lam * (lam - 1) * (lam - c))

    def b(self, lam):
        c = self.c
        return c * (c - 1) / (2 * lam * (lam - 1) * (lam - c))

    def matrix(self, lam, y=None) -> np.ndarray:
        return np.array([[0, self.b(lam)], [0, self.a(lam)]], dtype=complex)

    __call__ = matrix

    def trace(self, lam, y=None):
        return self.a(lam)


def build_e1(c) -> E1System:
    return E1System(_check_c(c))


@dataclass(frozen=True)
class E2System:
    c: complex
    params: PviParameters

    def coefficients(self, lam) -> dict:
        """``a, b, d, e, f, g`` at ``lam`` (all evaluated at ``t = c``)."""
        c = self.c
        E, F, E_l, F_l = eval_polys(c, lam, self.params)
        cc = c * (c - 1)
        E2 = E * E
        return {
            "a": E_l / (2 * E),
            "b": cc / (2 * E),
            "d": (2 * E * F_l - E_l * F) / (4 * E2),
            "e": (-(2 * lam - 1) * E + lam * (lam - 1) * E_l) / (2 * E2),
            "f": -cc * F / (4 * E2),
            "g": ((2 * c - 1) * E + cc * lam * (lam - 1)) / (2 * E2),
        }

    def matrix(self, lam, y=None) -> np.ndarray:
        k = self.coefficients(lam)
        a, b = k["a"], k["b"]
        return np.array([
            [0, b, k["g"], k["f"]],
            [0, a, k["e"], k["d"]],
            [0, 0, a, b],
            [0, 0, 0, 2 * a],
        ], dtype=complex)

    __call__ = matrix

    def trace(self, lam, y=None):
        return 4 * self.coefficients(lam)["a"]


def build_e2(c, params: PviParameters) -> E2System:
    return E2System(_check_c(c), params)


TRI_KEYS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class TriangularE2:
    """E2 after ``sigma2 = xi2 / y``, ``u2 = u1 / y``, ``v2 = v1 / y^2``.

    ``forms[(i, j)]`` is the 1-form ``a_ij dlam`` (zero-based indices).
    """

    system: E2System
    forms: dict

    @property
    def c(self) -> complex:
        return self.system.c

    def matrix(self, lam, y) -> np.ndarray:
        m = np.zeros((4, 4), dtype=complex)
        for (i, j), form in self.forms.items():
            m[i, j] = form(lam, y)
        return m

    __call__ = matrix

    @staticmethod
    def gauge(lam, y, c) -> np.ndarray:
        """``D`` with ``(eta2, sigma2, u2, v2) = D (eta2, xi2, u1, v1)``."""
        return np.diag([1.0, 1 / y, 1 / y, 1 / (lam * (lam - 1) * (lam - c))]).astype(complex)


def triangularize(sys: E2System) -> TriangularE2:
    c = sys.c
    co = sys.coefficients

    def E(lam):
        return lam * (lam - 1) * (lam - c)

    forms = {
        (0, 1): CurveForm(lambda lam, y: y * co(lam)["b"], "omega12", residue_free=True),
        (0, 2): CurveForm(lambda lam, y: y * co(lam)["g"], "omega13"),
        (0, 3): CurveForm(lambda lam, y: E(lam) * co(lam)["f"], "omega14"),
        (1, 2): CurveForm(lambda lam, y: co(lam)["e"] + 0 * lam, "omega23"),
        (1, 3): CurveForm(lambda lam, y: y * co(lam)["d"], "omega24"),
    }
    forms[(2, 3)] = CurveForm(forms[(0, 1)].func, "omega34", residue_free=True)
    return TriangularE2(sys, forms)


@dataclass(frozen=True)
class ClosedFormT:
    which: str
    matrix: np.ndarray


def closed_form_X(c, p, lam, branch: BranchState, path: Path | None = None,
                  tol: float = 1e-12) -> np.ndarray:
    """``[[int_p^lam c(c-1) dlam / (2y), 1], [y(lam), 0]]`` along ``path`` (default: straight)."""
    c = _check_c(c)
    if path is None:
        path = Path.line(p, lam) if lam != p else Path(())
    if not path.segments:
        return np.array([[0, 1], [branch.y, 0]], dtype=complex)
    k = c * (c - 1) / 2
    q = integrate_form(lambda x, y: k / y, path, branch, tol)
    return np.array([[q.value, 1], [q.branch.y, 0]], dtype=complex)


def closed_form_T(c, periods: Periods) -> dict:
    """The generators in the limit normalisation ``alpha_0 = 0``."""
    out = {}
    for key, alpha in (("T0", 0), ("T1", periods.pi1), ("Tc", periods.pi2)):
        out[key] = ClosedFormT(key, np.array([[-1, 0], [alpha, 1]], dtype=complex))
    return out


def mon1_coordinates(matrix, periods: Periods, tol: float = 1e-8) -> tuple:
    """``(p, q, sign)`` with ``matrix = [[sign, 0], [p Pi1 + q Pi2, 1]]``; raises if not of that form."""
    m = np.asarray(matrix)
    sign = int(round(m[0, 0].real))
    if sign not in (1, -1) or abs(m[0, 0] - sign) > tol or abs(m[0, 1]) > tol or abs(m[1, 1] - 1) > tol:
        raise ValueError("matrix is not of the form [[+-1, 0], [x, 1]]")
    basis = np.array([[periods.pi1.real, periods.pi2.real], [periods.pi1.imag, periods.pi2.imag]])
    pq = np.linalg.solve(basis, [m[1, 0].real, m[1, 0].imag])
    p, q = (int(round(v)) for v in pq)
    if abs(p * periods.pi1 + q * periods.pi2 - m[1, 0]) > tol * max(1.0, abs(m[1, 0])):
        raise ValueError("lower-left entry is not in the period lattice")
    return p, q, sign
