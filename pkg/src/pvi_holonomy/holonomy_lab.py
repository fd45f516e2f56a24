"""Holonomy of the Painleve VI foliation along the leaf at infinity ``mu = 0``.

Transversal coordinates at ``lam = lam*`` are ``(dt, mu) = (t - c, mu)``.
Paths act left to right and germs compose right to left:
``h_{g1 g2} = h_{g2} o h_{g1}``.

The order-2 jet of the holonomy along a loop is read from one continuation of
the second variational system in ``(eta2, xi2, u1, v1)``: with monodromy
``M`` the jet is ``x -> M[:2, :2] x + M[:2, 2:] (dt mu, mu^2)``.  Setting
``eps = 1`` in ``t = c + eps eta1 + eps^2 eta2`` identifies ``(eta1, xi1)``
with the offset and makes the second-order data start at zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .analytic_paths import ContinuationError, Loop, integrate_along, ode_continue
from .elliptic_curve import DEFAULT_RADIUS_FACTOR, default_basepoint, generator_loops
from .monodromy_engine import sample_words
from .pvi_model import PviParameters, TangencyError, eval_polys, foliation_rhs
from .variational_systems import build_e2

__all__ = [
    "Jet2",
    "TransversalFrame",
    "HolonomyReport",
    "holonomy_jet",
    "generator_jets",
    "word_jet",
    "holonomy_nonlinear",
    "check_involutivity",
    "RamificationFit",
    "ramification_exponent",
    "check_virtual_commutativity_jets",
]

MONOMIALS = ("dt^2", "dt*mu", "mu^2")


def _monomials(x) -> np.ndarray:
    dt, mu = x[0], x[1]
    return np.array([dt * dt, dt * mu, mu * mu])


def _square_map(L: np.ndarray) -> np.ndarray:
    """Matrix sending the monomials of ``x`` to the monomials of ``L x``."""
    (a, b), (c, d) = L
    return np.array([
        [a * a, 2 * a * b, b * b],
        [a * c, a * d + b * c, b * d],
        [c * c, 2 * c * d, d * d],
    ])


@dataclass(frozen=True)
class Jet2:
    linear: np.ndarray
    quad: np.ndarray  # (2, 3) over MONOMIALS

    def __post_init__(self):
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=complex).reshape(2, 2))
        object.__setattr__(self, "quad", np.asarray(self.quad, dtype=complex).reshape(2, 3))

    @classmethod
    def identity(cls) -> "Jet2":
        return cls(np.eye(2), np.zeros((2, 3)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return self.linear @ x + self.quad @ _monomials(x)

    def compose(self, inner: "Jet2") -> "Jet2":
        """``self o inner`` truncated at degree 2."""
        L = self.linear @ inner.linear
        Q = self.linear @ inner.quad + self.quad @ _square_map(inner.linear)
        return Jet2(L, Q)

    __matmul__ = compose

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.linear.ravel(), self.quad.ravel()])

    def distance(self, other: "Jet2") -> float:
        return float(np.max(np.abs(self.coefficients() - other.coefficients())))

    @property
    def dt2_residual(self) -> float:
        """Size of the ``dt^2`` column, which must vanish."""
        return float(np.max(np.abs(self.quad[:, 0])))


@dataclass(frozen=True)
class TransversalFrame:
    c: complex
    lam_star: complex

    def __post_init__(self):
        c = complex(self.c)
        lam = complex(self.lam_star)
        if min(abs(lam), abs(lam - 1), abs(lam - c)) < 1e-12:
            raise ValueError("cross-section sits on a singular point")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "lam_star", lam)

    @classmethod
    def default(cls, c) -> "TransversalFrame":
        return cls(c, default_basepoint(c))

    def loops(self, radius_factor: float = DEFAULT_RADIUS_FACTOR) -> dict:
        return generator_loops(self.c, self.lam_star, radius_factor)


def holonomy_jet(c, params: PviParameters, loop: Loop, frame: TransversalFrame,
                 tol: float = 1e-12) -> Jet2:
    if abs(loop.basepoint - frame.lam_star) > 1e-12:
        raise ValueError("loop is not based at the cross-section")
    if not loop.path.segments:
        return Jet2.identity()
    M = ode_continue(build_e2(c, params).matrix, loop.path, np.eye(4), tol)
    B = M[:2, 2:]
    quad = np.column_stack([np.zeros(2), B[:, 0], B[:, 1]])
    return Jet2(M[:2, :2], quad)


def generator_jets(c, params: PviParameters, frame: TransversalFrame, tol: float = 1e-12,
                   radius_factor: float = DEFAULT_RADIUS_FACTOR) -> dict:
    return {k: holonomy_jet(c, params, lp, frame, tol) for k, lp in frame.loops(radius_factor).items()}


def word_jet(jets: dict, word: Sequence[str]) -> Jet2:
    """Jet of the loop traversing ``word[0]`` first."""
    out = Jet2.identity()
    for letter in word:
        out = jets[letter].compose(out)
    return out


def holonomy_nonlinear(c, params: PviParameters, loop: Loop, frame: TransversalFrame,
                       initial, tol: float = 1e-12) -> np.ndarray:
    """Lift ``loop`` into the leaf through ``(lam*, mu, c + dt)``; returns the end ``(dt, mu)``."""
    dt0, mu0 = (complex(v) for v in initial)
    if mu0 == 0:
        return np.array([dt0, 0j])
    c = complex(c)

    def rhs(lam, z, y):
        mu, t = z[0], z[1]
        d_mu, d_t = foliation_rhs(lam, mu, t, params)
        return np.array([d_mu, d_t])

    try:
        z, _ = integrate_along(rhs, loop.path, np.array([mu0, c + dt0]), tol)
    except (TangencyError, ContinuationError) as exc:
        raise ContinuationError(f"leaf lift failed; offset too large? ({exc})") from exc
    return np.array([z[1] - c, z[0]])


@dataclass
class HolonomyReport:
    c: complex
    kappas: tuple
    lam_star: complex
    tolerances: dict
    involutivity: dict = field(default_factory=dict)
    commutativity: dict = field(default_factory=dict)
    ramification: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        sections = [self.involutivity, self.commutativity, self.ramification]
        return all(s.get("passed", True) for s in sections)


def check_involutivity(c, params: PviParameters, frame: TransversalFrame,
                       offsets: Sequence = ((0.0, 1e-3),), tol: float = 1e-6,
                       nonlinear_tol: float = 1e-8, ode_tol: float = 1e-12,
                       jets: dict | None = None, nonlinear: bool = True) -> dict:
    """Squares of the generator holonomies, at jet level and along the leaf."""
    loops = frame.loops()
    if jets is None:
        jets = {k: holonomy_jet(c, params, lp, frame, ode_tol) for k, lp in loops.items()}
    out = {"generators": {}, "tol_jet": tol, "tol_nonlinear": nonlinear_tol}
    ok = True
    flags = []
    if params.kappa0 == 0:
        flags.append("kappa0 = 0: nonlinear lift near a0 is outside the proof hypothesis")
    for key, jet in jets.items():
        dev = jet.compose(jet).distance(Jet2.identity())
        eig = sorted(np.linalg.eigvals(jet.linear), key=lambda z: z.real)
        rec = {"jet_square_deviation": dev, "eigenvalues": [complex(e) for e in eig],
               "dt2_residual": jet.dt2_residual, "jet_passed": dev < tol}
        ok &= dev < tol
        if nonlinear:
            dists = []
            twice = loops[key].then(loops[key])
            for x in offsets:
                x = np.asarray(x, dtype=complex)
                back = holonomy_nonlinear(c, params, twice, frame, x, ode_tol)
                dists.append(float(np.max(np.abs(back - x))))
            rec["nonlinear_return"] = dists
            rec["nonlinear_passed"] = max(dists) < nonlinear_tol
            ok &= rec["nonlinear_passed"]
        out["generators"][key] = rec
    out["flags"] = flags
    out["passed"] = bool(ok)
    return out


@dataclass(frozen=True)
class RamificationFit:
    exponent: float
    half_window_exponent: float
    control_exponent: float
    mu: np.ndarray
    shifted: np.ndarray

    @property
    def stable(self) -> bool:
        return abs(self.exponent - self.half_window_exponent) <= 0.05


def _leaf_towards_a0(c, params: PviParameters, mu0: float, mu_end: float, z0: complex,
                     samples: int, tol: float):
    """Leaf with ``lam = -kappa0 mu + z0 mu^2`` at ``mu = mu0``, followed in ``log mu``."""
    k0 = params.kappa0
    G = params.G

    def rhs(s, state):
        mu = math.exp(s)
        lam, t = state
        E, F, E_l, F_l = eval_polys(t, lam, params)
        den = E_l + F_l * mu + G * mu * mu
        if den == 0:
            raise TangencyError("leaf is tangent to mu = const")
        return [(2 * E + F * mu) / den, mu * t * (t - 1) / den]

    s_grid = np.linspace(math.log(mu0), math.log(mu_end), samples)
    lam0 = -k0 * mu0 + z0 * mu0**2
    sol = solve_ivp(rhs, (s_grid[0], s_grid[-1]), [complex(lam0), complex(c)], method="DOP853",
                    t_eval=s_grid, rtol=tol, atol=tol * 1e-6)
    if not sol.success:
        raise ContinuationError(f"leaf integration towards a0 failed: {sol.message}")
    return np.exp(s_grid), sol.y[0]


def _slope(mu, val) -> float:
    x, y = np.log(np.abs(mu)), np.log(np.abs(val))
    return float(np.polyfit(x, y, 1)[0])


def ramification_exponent(c, params: PviParameters, mu0: float = 1e-2, mu_end: float = 1e-6,
                          z0: complex = 1.0, samples: int = 60, tol: float = 1e-12) -> RamificationFit:
    """Slope of ``log |lam + kappa0 mu|`` against ``log |mu|`` along one leaf into ``a0``."""
    if params.kappa0 == 0:
        raise ValueError("ramification fit needs kappa0 != 0")
    if mu_end >= mu0 or mu0 / mu_end < 100:
        raise ValueError("insufficient dynamic range in mu")
    mu, lam = _leaf_towards_a0(c, params, mu0, mu_end, z0, samples, tol)
    shifted = lam + params.kappa0 * mu
    if np.any(shifted == 0):
        raise ValueError("projection vanishes on the sample")
    full = _slope(mu, shifted)
    half = samples // 2
    half_fit = _slope(mu[half:], shifted[half:])
    control = _slope(mu, lam + (params.kappa0 + 1) * mu)
    return RamificationFit(full, half_fit, control, mu, shifted)


def check_virtual_commutativity_jets(jets: dict, length_bound: int = 8, samples: int = 100,
                                     seed: int = 0, tol: float = 1e-5,
                                     parity: str = "even") -> dict:
    """Max coefficient of ``jet(u) o jet(v) - jet(v) o jet(u)`` over seeded word pairs."""
    worst, witness = 0.0, None
    sign_ok = True
    for u, v in sample_words(tuple(jets), length_bound, samples, seed, parity):
        ju, jv = word_jet(jets, u), word_jet(jets, v)
        dev = ju.compose(jv).distance(jv.compose(ju))
        for w, j in ((u, ju), (v, jv)):
            det = np.linalg.det(j.linear)
            sign_ok &= abs(det - (-1) ** len(w)) < 1e-6
        if dev > worst:
            worst, witness = dev, ("".join(u), "".join(v))
    return {
        "parity": parity,
        "length_bound": length_bound,
        "samples": samples,
        "seed": seed,
        "tol": tol,
        "max_deviation": worst,
        "witness": witness,
        "det_sign_matches_parity": bool(sign_ok),
        "passed": worst < tol,
    }
