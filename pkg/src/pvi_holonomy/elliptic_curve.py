"""The elliptic curve ``S_c: y^2 = lam (lam - 1)(lam - c)``.

Cycles are realised as products of keyhole loops from one common basepoint:
``cycle01`` runs around 1 and then around 0, ``cycle0c`` around c and then
around 0.  With this orientation the loop integral of the holomorphic form
over ``cycle01`` is exactly the difference ``alpha_1 - alpha_0`` read off
the monodromy matrices ``[[-1, 0], [alpha_k, 1]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analytic_paths import (
    ArcSegment,
    BranchError,
    BranchState,
    GeometryError,
    Loop,
    Path,
    _route,
    build_puncture_loop,
    continue_sqrt,
    cubic,
    gauss_rule,
    integrate_form,
    winding_number,
)

__all__ = [
    "EllipticCurve",
    "CurveForm",
    "Cycle",
    "Periods",
    "LiftedLoop",
    "ResidueError",
    "REFERENCE_POINT",
    "default_basepoint",
    "reference_branch",
    "generator_loops",
    "make_cycle",
    "holomorphic_form",
    "second_kind_form",
    "LegendrePairing",
    "legendre_pairing",
    "fundamental_periods",
    "period_of_form",
    "residues_on_curve",
    "lift_loop",
    "agm",
    "complete_k",
    "agm_period_oracle",
    "integral_to_branch_point",
]

REFERENCE_POINT = -1.0 + 0j
DEFAULT_RADIUS_FACTOR = 0.4


class ResidueError(ValueError):
    """A form declared residue-free has a residue on ``S_c``."""


@dataclass(frozen=True)
class EllipticCurve:
    c: complex

    def __post_init__(self):
        c = complex(self.c)
        if abs(c) < 1e-12 or abs(c - 1) < 1e-12:
            raise GeometryError(f"degenerate curve: c = {c}")
        object.__setattr__(self, "c", c)

    @property
    def branch_points(self) -> tuple:
        return (0j, 1 + 0j, self.c)


@dataclass(frozen=True)
class CurveForm:
    """``func(lam, y) dlam``; ``func`` must accept numpy arrays."""

    func: Callable
    name: str = "form"
    residue_free: bool = False

    def __call__(self, lam, y):
        return self.func(lam, y)


@dataclass(frozen=True)
class Cycle:
    id: str
    loop: Loop
    branch: BranchState


@dataclass(frozen=True)
class Periods:
    pi1: complex
    pi2: complex

    def __post_init__(self):
        if self.pi1 == 0 or abs((self.pi2 / self.pi1).imag) < 1e-12:
            raise GeometryError("periods are linearly dependent over R")

    @property
    def tau(self) -> complex:
        return self.pi2 / self.pi1


@dataclass(frozen=True)
class LiftedLoop:
    loop: Loop
    start: BranchState
    end: BranchState
    closes: bool


def default_basepoint(c) -> complex:
    """A point on ``|lam| = min(1, |c|)/4`` kept away from the segments joining 0, 1, c."""
    c = complex(c)
    rho = min(1.0, abs(c)) / 4
    segs = [(0j, 1 + 0j), (0j, c), (1 + 0j, c)]

    def clearance(z):
        out = math.inf
        for a, b in segs:
            d = b - a
            s = min(1.0, max(0.0, ((z - a) * d.conjugate()).real / abs(d) ** 2))
            out = min(out, abs(z - (a + s * d)))
        return out

    angles = [math.pi / 2, -math.pi / 2, 3 * math.pi / 4, -3 * math.pi / 4, math.pi,
              math.pi / 4, -math.pi / 4]
    best = max(angles, key=lambda th: round(clearance(rho * complex(math.cos(th), math.sin(th))), 12))
    return complex(rho * math.cos(best), rho * math.sin(best))


def reference_branch(c, basepoint) -> BranchState:
    """Branch of ``y`` at ``basepoint``: continuation of the principal root at -1."""
    c = complex(c)
    ref = REFERENCE_POINT if abs(cubic(c, REFERENCE_POINT)) > 1e-8 else -2.0 + 0j
    start = BranchState.principal(c, ref)
    p = complex(basepoint)
    if p == ref:
        return start
    roots = [0j, 1 + 0j, c]
    clear = 0.25 * min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:])
    pts = _route(ref, p, roots, 2 * clear) + [p]
    return continue_sqrt(start, Path.polyline(pts))


def generator_loops(c, basepoint=None, radius_factor: float = DEFAULT_RADIUS_FACTOR) -> dict:
    """Keyhole loops ``{'0', '1', 'c'}`` around the punctures 0, 1, c."""
    c = complex(c)
    p = default_basepoint(c) if basepoint is None else complex(basepoint)
    pts = (0j, 1 + 0j, c)
    dmin = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    out = {}
    for key, idx in (("0", 0), ("1", 1), ("c", 2)):
        r = radius_factor * min(0.5 * dmin, abs(p - pts[idx]))
        out[key] = build_puncture_loop(pts, idx, p, r)
    return out


def make_cycle(curve: EllipticCurve, cycle_id: str, basepoint=None,
               radius_factor: float = DEFAULT_RADIUS_FACTOR) -> Cycle:
    p = default_basepoint(curve.c) if basepoint is None else complex(basepoint)
    loops = generator_loops(curve.c, p, radius_factor)
    if cycle_id == "cycle01":
        loop = loops["1"].then(loops["0"])
    elif cycle_id == "cycle0c":
        loop = loops["c"].then(loops["0"])
    else:
        raise ValueError(f"unknown cycle {cycle_id!r}")
    return Cycle(cycle_id, loop, reference_branch(curve.c, p))


def holomorphic_form(c) -> CurveForm:
    """``c (c - 1) dlam / (2 y)``."""
    k = complex(c) * (complex(c) - 1) / 2
    return CurveForm(lambda lam, y: k / y, "omega12", residue_free=True)


def second_kind_form() -> CurveForm:
    """``lam dlam / (2 y)``: no residues, a double pole at infinity."""
    return CurveForm(lambda lam, y: 0.5 * lam / y, "lam-over-2y", residue_free=True)


@dataclass(frozen=True)
class LegendrePairing:
    """``raw = Pi1 Sigma2 - Pi2 Sigma1``.

    ``raw`` carries the ``c (c - 1)`` prefactor of the periods, so only
    ``normalized = sign(Im tau) raw / (c (c - 1))`` is independent of ``c``;
    it equals ``2 pi i``.  The sign fixes the orientation of the cycle basis.
    """

    c: complex
    periods: Periods
    sigma1: complex
    sigma2: complex

    @property
    def raw(self) -> complex:
        return self.periods.pi1 * self.sigma2 - self.periods.pi2 * self.sigma1

    @property
    def normalized(self) -> complex:
        orient = 1.0 if self.periods.tau.imag > 0 else -1.0
        return orient * self.raw / (self.c * (self.c - 1))


def legendre_pairing(c, tol: float = 1e-12, basepoint=None,
                     radius_factor: float = DEFAULT_RADIUS_FACTOR) -> LegendrePairing:
    curve = EllipticCurve(c)
    cycles = [make_cycle(curve, cid, basepoint, radius_factor) for cid in ("cycle01", "cycle0c")]
    pis = [period_of_form(curve, holomorphic_form(curve.c), cy, tol, check_residues=False) for cy in cycles]
    sig = [period_of_form(curve, second_kind_form(), cy, tol) for cy in cycles]
    return LegendrePairing(curve.c, Periods(*pis), *sig)


def period_of_form(curve: EllipticCurve, form: CurveForm, cycle: Cycle, tol: float = 1e-12,
                   min_panels: int = 1, check_residues: bool = True) -> complex:
    """Loop integral of ``form`` over ``cycle`` on the branch fixed at its basepoint."""
    if check_residues and form.residue_free:
        res = residues_on_curve(curve, form)
        bad = {k: v for k, v in res.items() if abs(v) > 1e-9}
        if bad:
            raise ResidueError(f"{form.name} has residues {bad}")
    return integrate_form(form, cycle.loop.path, cycle.branch, tol, min_panels).value


def fundamental_periods(c, tol: float = 1e-12, basepoint=None,
                        radius_factor: float = DEFAULT_RADIUS_FACTOR, min_panels: int = 1) -> Periods:
    curve = EllipticCurve(c)
    form = holomorphic_form(curve.c)
    pis = [
        period_of_form(curve, form, make_cycle(curve, cid, basepoint, radius_factor), tol,
                       min_panels, check_residues=False)
        for cid in ("cycle01", "cycle0c")
    ]
    return Periods(*pis)


def residues_on_curve(curve: EllipticCurve, form: CurveForm, radius: float = 1e-2,
                      tol: float = 1e-13) -> dict:
    """Residues of ``form`` on ``S_c`` at the three finite ramification points.

    A circle traversed twice around a ramification point is a simple loop
    around it on ``S_c``; the residue is that integral over ``2 pi i``.
    """
    out = {}
    for e in curve.branch_points:
        start = e + radius
        path = Path((ArcSegment(e, radius, 0.0, 4 * math.pi),))
        br = BranchState.principal(curve.c, start)
        out[e] = integrate_form(form, path, br, tol).value / (2j * math.pi)
    return out


def lift_loop(curve: EllipticCurve, loop: Loop, branch: BranchState | None = None) -> LiftedLoop:
    """Lift ``loop`` to ``S_c``; ``closes`` iff the square root returns to its start value."""
    if branch is None:
        branch = reference_branch(curve.c, loop.basepoint)
    end = continue_sqrt(branch, loop.path)
    closes = abs(end.y - branch.y) < abs(end.y + branch.y)
    parity = sum(winding_number(loop.path, e) for e in curve.branch_points) % 2
    if closes != (parity == 0):
        raise BranchError("square-root continuation disagrees with the winding parity")
    return LiftedLoop(loop, branch, end, closes)


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------


def agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 4e-16 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return a


def complete_k(m: float) -> float:
    """Complete elliptic integral of the first kind, parameter ``m = k^2`` in (0, 1)."""
    return math.pi / (2 * agm(1.0, math.sqrt(1.0 - m)))


def agm_period_oracle(c: float, basepoint=None) -> complex:
    """``Pi_1`` for real ``0 < c < 1`` from the AGM.

    ``Pi_1 = 2 * int_{0 -> p -> 1} omega``; the path is pushed onto the real
    axis and passes ``c`` on the side of the basepoint, giving
    ``sigma c (c - 1) 2 (K(c) + i s K(1 - c))`` with ``s = sign Im p`` and
    ``sigma`` the sign of ``y`` on ``(0, c)`` as seen from ``p``.
    """
    c = float(c)
    if not 0 < c < 1:
        raise ValueError("AGM oracle needs 0 < c < 1")
    p = default_basepoint(c) if basepoint is None else complex(basepoint)
    side = 1.0 if p.imag > 0 else -1.0
    yp = reference_branch(c, p)
    probe = continue_sqrt(yp, Path.line(p, c / 2)).y
    sigma = 1.0 if probe.real > 0 else -1.0
    return sigma * c * (c - 1) * 2 * (complete_k(c) + 1j * side * complete_k(1 - c))


def integral_to_branch_point(c, branch: BranchState, target: complex = 0j, form_numerator=None,
                             n_panels: int = 32) -> complex:
    """``int_p^e g(lam) dlam / y`` along the straight line to the branch point ``e``.

    Uses ``lam = e + (p - e) w^2`` which removes the square-root endpoint
    singularity.  ``form_numerator`` defaults to ``c (c - 1) / 2``.
    """
    c = complex(c)
    p = branch.lam
    e = complex(target)
    if form_numerator is None:
        k = c * (c - 1) / 2
        form_numerator = lambda lam: k + 0 * lam  # noqa: E731
    roots = [r for r in (0j, 1 + 0j, c) if abs(r - e) > 1e-14]
    x, w, _ = gauss_rule()

    def rule(npan):
        edges = np.linspace(1.0, 0.0, npan + 1)
        ws = np.concatenate([a + (b - a) * x for a, b in zip(edges, edges[1:])])
        lam = e + (p - e) * ws**2
        phi_sq = (p - e) * np.prod([lam - r for r in roots], axis=0)
        phi = np.empty_like(phi_sq)
        prev = branch.y  # phi(1) = y(p)
        for i, v in enumerate(np.sqrt(phi_sq)):
            cand = v if abs(v - prev) <= abs(v + prev) else -v
            if abs(2 * cand) < 10 * abs(cand - prev):
                raise BranchError("branch-point integral: continuation too coarse")
            phi[i] = prev = cand
        weights = np.concatenate([np.abs(b - a) * w for a, b in zip(edges, edges[1:])])
        # orientation w: 1 -> 0 contributes the minus sign
        return -np.sum(weights * 2 * (p - e) * form_numerator(lam) / phi)

    coarse, fine = rule(n_panels // 2), rule(n_panels)
    if abs(coarse - fine) > 1e-10 * max(1.0, abs(fine)):
        raise BranchError("branch-point integral did not converge")
    return complex(fine)
