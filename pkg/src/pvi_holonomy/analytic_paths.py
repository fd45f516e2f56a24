"""Complex-path primitives.

Paths are finite sequences of line segments and circular arcs, each
parametrised over ``s in [0, 1]``.  On top of them this module provides
square-root branch continuation for ``y**2 = lam (lam - 1)(lam - c)``,
adaptive Gauss-Legendre quadrature of 1-forms and continuation of linear
(or nonlinear) ODEs along paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy.integrate import solve_ivp

__all__ = [
    "GeometryError",
    "QuadratureError",
    "BranchError",
    "ContinuationError",
    "LineSegment",
    "ArcSegment",
    "Path",
    "Loop",
    "BranchState",
    "SegmentTrack",
    "Quadrature",
    "build_puncture_loop",
    "winding_number",
    "default_exclusion_radius",
    "cubic",
    "track_segment",
    "continue_sqrt",
    "panels",
    "integrate_form",
    "integrate_along",
    "ode_continue",
    "continue_fundamental",
]

# panel order for all Gauss-Legendre work
PANEL_NODES = 16
MAX_DEPTH = 48


class GeometryError(ValueError):
    """Loop or path geometry cannot satisfy the requested constraints."""


class QuadratureError(RuntimeError):
    pass


class BranchError(RuntimeError):
    """Square-root continuation failed (step collapse near a root)."""


class ContinuationError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# segments and paths
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LineSegment:
    start: complex
    end: complex

    def point(self, s):
        return self.start + np.asarray(s) * (self.end - self.start)

    def deriv(self, s):
        return np.broadcast_to(self.end - self.start, np.shape(s)).astype(complex)

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def distance_to(self, q: complex) -> float:
        d = self.end - self.start
        if d == 0:
            return abs(q - self.start)
        s = ((q - self.start) * d.conjugate()).real / abs(d) ** 2
        s = min(1.0, max(0.0, s))
        return abs(q - (self.start + s * d))


@dataclass(frozen=True)
class ArcSegment:
    """``center + radius * exp(i (theta0 + sweep * s))``."""

    center: complex
    radius: float
    theta0: float
    sweep: float

    def point(self, s):
        return self.center + self.radius * np.exp(1j * (self.theta0 + self.sweep * np.asarray(s)))

    def deriv(self, s):
        return 1j * self.sweep * (self.point(s) - self.center)

    def reversed(self) -> "ArcSegment":
        return ArcSegment(self.center, self.radius, self.theta0 + self.sweep, -self.sweep)

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.point(1.0))

    @property
    def length(self) -> float:
        return abs(self.sweep) * self.radius

    def distance_to(self, q: complex) -> float:
        w = q - self.center
        if abs(self.sweep) >= 2 * math.pi:
            return abs(abs(w) - self.radius)
        phi = (math.atan2(w.imag, w.real) - self.theta0) % (2 * math.pi)
        inside = phi <= self.sweep if self.sweep > 0 else (phi == 0 or phi >= 2 * math.pi + self.sweep)
        if inside:
            return abs(abs(w) - self.radius)
        return min(abs(q - self.start), abs(q - self.end))


Segment = LineSegment | ArcSegment


@dataclass(frozen=True)
class Path:
    segments: tuple = ()

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for a, b in zip(segs, segs[1:]):
            scale = max(1.0, abs(a.end))
            if abs(a.end - b.start) > 1e-12 * scale:
                raise GeometryError(f"path is discontinuous at {a.end} -> {b.start}")

    @property
    def start(self) -> complex:
        return complex(self.segments[0].start)

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].end)

    @property
    def is_closed(self) -> bool:
        return bool(self.segments) and abs(self.end - self.start) <= 1e-12 * max(1.0, abs(self.start))

    def __add__(self, other: "Path") -> "Path":
        if not self.segments:
            return other
        if not other.segments:
            return self
        return Path(self.segments + other.segments)

    def reversed(self) -> "Path":
        return Path(tuple(seg.reversed() for seg in reversed(self.segments)))

    def distance_to(self, q: complex) -> float:
        return min((seg.distance_to(q) for seg in self.segments), default=math.inf)

    def check_clearance(self, punctures: Iterable[complex], radius: float) -> None:
        for q in punctures:
            if self.distance_to(q) <= radius:
                raise GeometryError(f"path passes within {radius:g} of puncture {q}")

    @classmethod
    def line(cls, a: complex, b: complex) -> "Path":
        return cls((LineSegment(complex(a), complex(b)),))

    @classmethod
    def polyline(cls, points: Sequence[complex]) -> "Path":
        pts = [complex(p) for p in points]
        return cls(tuple(LineSegment(a, b) for a, b in zip(pts, pts[1:])))


def winding_number(path: Path, q: complex) -> int:
    """Winding number of a closed path about ``q`` by discrete argument summation."""
    total = 0.0
    for seg in path.segments:
        n = 64
        while True:
            z = seg.point(np.linspace(0.0, 1.0, n + 1)) - q
            if np.any(z == 0):
                raise GeometryError(f"path passes through {q}")
            steps = np.angle(z[1:] / z[:-1])
            if np.max(np.abs(steps)) < math.pi / 4:
                break
            n *= 4
            if n > 1 << 22:
                raise GeometryError(f"path passes too close to {q}")
        total += steps.sum()
    return int(round(total / (2 * math.pi)))


@dataclass(frozen=True)
class Loop:
    path: Path
    basepoint: complex
    punctures: tuple = ()
    winding: dict = field(default=None, compare=False)

    def __post_init__(self):
        if not self.path.is_closed or abs(self.path.start - self.basepoint) > 1e-12 * max(1.0, abs(self.basepoint)):
            raise GeometryError("loop path is not closed at its basepoint")
        object.__setattr__(self, "punctures", tuple(complex(p) for p in self.punctures))
        if self.winding is None:
            w = {q: winding_number(self.path, q) for q in self.punctures}
            object.__setattr__(self, "winding", w)

    def then(self, other: "Loop") -> "Loop":
        """Traverse ``self`` first, then ``other``."""
        if abs(self.basepoint - other.basepoint) > 1e-12 * max(1.0, abs(self.basepoint)):
            raise GeometryError("loops have different basepoints")
        w = {q: self.winding.get(q, 0) + other.winding.get(q, 0) for q in self.punctures}
        return Loop(self.path + other.path, self.basepoint, self.punctures, w)

    def inverse(self) -> "Loop":
        w = {q: -k for q, k in self.winding.items()}
        return Loop(self.path.reversed(), self.basepoint, self.punctures, w)

    def winding_vector(self) -> tuple:
        return tuple(self.winding[q] for q in self.punctures)

    @classmethod
    def concat(cls, loops: Sequence["Loop"]) -> "Loop":
        out = loops[0]
        for lp in loops[1:]:
            out = out.then(lp)
        return out


def _min_pairwise(points: Sequence[complex]) -> float:
    pts = list(points)
    return min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])


def default_exclusion_radius(punctures: Sequence[complex]) -> float:
    return 1e-3 * _min_pairwise(punctures)


def _route(p: complex, z: complex, obstacles, radius: float, depth: int = 0) -> list:
    """Waypoints from ``p`` towards ``z`` keeping ``radius / 2`` clear of obstacles.

    An obstacle too close to the straight spoke is passed on the left of the
    direction of travel, at distance ``radius``.
    """
    seg = LineSegment(p, z)
    d = (z - p) / abs(z - p)
    span = abs(z - p)

    def interior(q):
        # obstacles nearest to an endpoint cannot be avoided by a detour
        t = ((q - p) * d.conjugate()).real
        return 0 < t < span

    hits = [q for q in obstacles if interior(q) and seg.distance_to(q) < 0.5 * radius]
    if not hits:
        return [p]
    if depth > 8:
        raise GeometryError("cannot route a spoke around the punctures")
    q = min(hits, key=lambda h: ((h - p) * d.conjugate()).real)
    w = q + 1j * d * radius
    return _route(p, w, obstacles, radius, depth + 1) + _route(w, z, obstacles, radius, depth + 1)


def build_puncture_loop(punctures, index, basepoint, radius, exclusion=None) -> Loop:
    """Keyhole loop: spoke to a circle around ``punctures[index]``, one positive turn, spoke back."""
    pts = tuple(complex(p) for p in punctures)
    z = pts[index]
    p = complex(basepoint)
    dmin = _min_pairwise(pts) if len(pts) > 1 else math.inf
    if exclusion is None:
        exclusion = 1e-3 * dmin if len(pts) > 1 else 1e-3 * radius
    if not radius > 0 or radius >= 0.5 * dmin:
        raise GeometryError(f"radius {radius} must lie in (0, {0.5 * dmin})")
    if abs(p - z) <= radius:
        raise GeometryError("basepoint lies inside the loop circle")
    for q in pts:
        if abs(p - q) <= exclusion:
            raise GeometryError(f"basepoint within exclusion radius of {q}")
    others = [q for i, q in enumerate(pts) if i != index]
    waypoints = _route(p, z, others, radius)
    u = (waypoints[-1] - z) / abs(waypoints[-1] - z)
    foot = z + radius * u
    theta = math.atan2(u.imag, u.real)
    spoke = Path.polyline(waypoints + [foot])
    circle = Path((ArcSegment(z, radius, theta, 2 * math.pi),))
    path = spoke + circle + spoke.reversed()
    if others:
        path.check_clearance(others, exclusion)
    loop = Loop(path, p, pts)
    expected = tuple(1 if i == index else 0 for i in range(len(pts)))
    if loop.winding_vector() != expected:
        raise GeometryError(f"keyhole loop has winding {loop.winding_vector()}, expected {expected}")
    return loop


# --------------------------------------------------------------------------
# square-root branch of E(c, lam) = lam (lam - 1)(lam - c)
# --------------------------------------------------------------------------


def cubic(c, lam):
    return lam * (lam - 1) * (lam - c)


def _cubic_dlog_half(c, lam):
    e = lam * (lam - 1) * (lam - c)
    de = 3 * lam**2 - 2 * (1 + c) * lam + c
    return de / (2 * e)


@dataclass(frozen=True)
class BranchState:
    c: complex
    lam: complex
    y: complex

    def residual(self) -> float:
        return abs(self.y**2 - cubic(self.c, self.lam))

    def check(self, rtol: float = 1e-10) -> None:
        scale = max(1.0, abs(cubic(self.c, self.lam)))
        if self.residual() > rtol * scale:
            raise BranchError(f"y^2 != E at lam={self.lam}")

    def negated(self) -> "BranchState":
        return BranchState(self.c, self.lam, -self.y)

    @classmethod
    def principal(cls, c: complex, lam: complex) -> "BranchState":
        return cls(complex(c), complex(lam), complex(np.sqrt(complex(cubic(c, lam)))))


def _closest_root(c, lam, ref):
    r = np.sqrt(np.asarray(cubic(c, lam), dtype=complex))
    flip = np.abs(r - ref) > np.abs(r + ref)
    return np.where(flip, -r, r)


@dataclass(frozen=True)
class SegmentTrack:
    """Accepted continuation nodes of ``y`` along one segment.

    Any parameter between two nodes is resolved by picking the root of
    ``E`` closest to the value at the left node; the stepping rule makes
    that choice unambiguous.
    """

    c: complex
    segment: object
    s: np.ndarray
    y: np.ndarray

    def sqrt_at(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 1)
        return _closest_root(self.c, self.segment.point(s), self.y[idx])

    @property
    def end_value(self) -> complex:
        return complex(self.y[-1])


def track_segment(c, seg, y0: complex, h0: float = 1 / 16, hmin: float = 1e-13) -> SegmentTrack:
    """Continue ``y`` along ``seg`` by nearest-root selection with rejection.

    A step is rejected when the two candidate roots are closer than ten
    times the step's movement of ``y``.
    """
    s_nodes = [0.0]
    y_nodes = [complex(y0)]
    s, y, h = 0.0, complex(y0), h0
    while s < 1.0:
        h = min(h, 1.0 - s)
        if h < hmin:
            raise BranchError(f"square-root continuation stalled at lam={complex(seg.point(s))}")
        ok = True
        y_new = None
        for frac in (0.5, 1.0):
            cand = complex(_closest_root(c, seg.point(s + frac * h), y))
            if abs(2 * cand) < 10 * abs(cand - y):
                ok = False
                break
            y_new = cand
        if not ok:
            h *= 0.5
            continue
        s = 1.0 if s + h >= 1.0 else s + h
        y = y_new
        s_nodes.append(s)
        y_nodes.append(y)
        h *= 2.0
    return SegmentTrack(complex(c), seg, np.array(s_nodes), np.array(y_nodes))


def continue_sqrt(branch: BranchState, path: Path) -> BranchState:
    """Continuous continuation of ``branch.y`` along ``path``."""
    _check_branch_start(branch, path)
    y = branch.y
    for seg in path.segments:
        y = track_segment(branch.c, seg, y).end_value
    return BranchState(branch.c, path.end, y)


def _check_branch_start(branch: BranchState, path: Path) -> None:
    if abs(branch.lam - path.start) > 1e-12 * max(1.0, abs(path.start)):
        raise BranchError(f"branch is at {branch.lam}, path starts at {path.start}")
    branch.check()


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def gauss_rule(n: int = PANEL_NODES):
    """Nodes/weights on [0, 1] plus the cumulative integration matrix."""
    x, w = legendre.leggauss(n)
    vander = legendre.legvander(x, n - 1)
    anti = np.empty((n, n))
    anti[:, 0] = x + 1.0
    for k in range(1, n):
        ek1 = np.zeros(k + 2)
        ek1[k + 1] = 1.0
        ekm = np.zeros(k)
        ekm[k - 1] = 1.0
        anti[:, k] = (legendre.legval(x, ek1) - legendre.legval(x, ekm)) / (2 * k + 1)
    cum = anti @ np.linalg.inv(vander)
    return (x + 1) / 2, w / 2, cum / 2


@dataclass(frozen=True)
class Panel:
    a: float
    b: float
    values: np.ndarray  # (k, n): integrand values times dlam/ds at the nodes

    @property
    def integrals(self) -> np.ndarray:
        _, w, _ = gauss_rule(self.values.shape[1])
        return (self.b - self.a) * (self.values @ w)


def _eval_forms(forms, seg, track, s):
    lam = seg.point(s)
    y = track.sqrt_at(s) if track is not None else None
    dl = seg.deriv(s)
    return np.array([np.broadcast_to(f(lam, y), lam.shape) * dl for f in forms], dtype=complex)


def panels(forms, seg, track, tol: float, min_panels: int = 1, n: int = PANEL_NODES) -> list:
    """Adaptive panel decomposition of one segment, accepted jointly for all forms."""
    xs, w, _ = gauss_rule(n)
    eps = np.finfo(float).eps

    def rule(a, b):
        vals = _eval_forms(forms, seg, track, a + (b - a) * xs)
        return vals, (b - a) * (vals @ w)

    out = []
    edges = np.linspace(0.0, 1.0, min_panels + 1)
    stack = [(edges[i], edges[i + 1], 0, None) for i in range(min_panels)][::-1]
    while stack:
        a, b, depth, whole = stack.pop()
        if whole is None:
            whole = rule(a, b)
        m = 0.5 * (a + b)
        left, right = rule(a, m), rule(m, b)
        err = np.abs(whole[1] - left[1] - right[1])
        scale = (b - a) * (np.abs(left[0]) @ w + np.abs(right[0]) @ w)
        if np.all(err <= np.maximum(tol * (b - a), 200 * eps * scale)):
            out.append(Panel(a, m, left[0]))
            out.append(Panel(m, b, right[0]))
            continue
        if depth >= MAX_DEPTH:
            raise QuadratureError(f"no convergence near lam={complex(seg.point(m))}")
        stack.append((m, b, depth + 1, right))
        stack.append((a, m, depth + 1, left))
    return out


@dataclass(frozen=True)
class Quadrature:
    value: complex
    error: float
    branch: BranchState | None


def integrate_form(form: Callable, path: Path, branch: BranchState | None = None,
                   tol: float = 1e-12, min_panels: int = 1) -> Quadrature:
    """Integrate ``form(lam, y) dlam`` along ``path``.

    ``y`` is the continuation of ``branch``; pass ``branch=None`` for forms
    that do not involve the square root (``y`` is then ``None``).
    """
    if branch is not None:
        _check_branch_start(branch, path)
    total = 0j
    err = 0.0
    y = branch.y if branch is not None else None
    for seg in path.segments:
        track = track_segment(branch.c, seg, y) if branch is not None else None
        for pn in panels([form], seg, track, tol, min_panels):
            total += pn.integrals[0]
        err += tol
        if track is not None:
            y = track.end_value
    out_branch = BranchState(branch.c, path.end, y) if branch is not None else None
    return Quadrature(complex(total), err, out_branch)


# --------------------------------------------------------------------------
# ODE continuation
# --------------------------------------------------------------------------


def integrate_along(rhs: Callable, path: Path, z0, tol: float = 1e-12,
                    branch: BranchState | None = None):
    """Integrate ``dz/dlam = rhs(lam, z, y)`` along ``path``.

    With a branch, ``y`` is carried as an extra state component obeying
    ``dy/dlam = E'/(2E) y`` and snapped back to the nearest root of ``E``
    at every segment end.  Returns ``(z_end, branch_end)``.
    """
    z = np.asarray(z0, dtype=complex).ravel()
    shape = np.shape(z0)
    n = z.size
    if branch is not None:
        _check_branch_start(branch, path)
        c = branch.c
        y = branch.y
    else:
        c = y = None
    for seg in path.segments:
        if branch is not None:
            def fun(s, state, seg=seg):
                lam = complex(seg.point(s))
                dl = complex(seg.deriv(s))
                yy = state[n]
                out = np.empty(n + 1, dtype=complex)
                out[:n] = rhs(lam, state[:n], yy) * dl
                out[n] = _cubic_dlog_half(c, lam) * yy * dl
                return out
            state0 = np.append(z, y)
        else:
            def fun(s, state, seg=seg):
                lam = complex(seg.point(s))
                return rhs(lam, state, None) * complex(seg.deriv(s))
            state0 = z
        scale = max(1.0, float(np.max(np.abs(state0))))
        sol = solve_ivp(fun, (0.0, 1.0), state0, method="DOP853", rtol=tol,
                        atol=tol * 1e-2 * scale)
        if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
            raise ContinuationError(f"ODE step failure on segment ending at {seg.end}: {sol.message}")
        end = sol.y[:, -1]
        if branch is not None:
            z = end[:n]
            lam_end = complex(seg.end)
            snapped = complex(_closest_root(c, lam_end, end[n]))
            if abs(snapped - end[n]) > 1e-6 * max(1.0, abs(snapped)):
                raise BranchError(f"branch drifted off the curve at lam={lam_end}")
            y = snapped
        else:
            z = end
    out_branch = BranchState(c, path.end, y) if branch is not None else None
    return z.reshape(shape), out_branch


def continue_fundamental(system: Callable, path: Path, initial, tol: float = 1e-12,
                         branch: BranchState | None = None):
    """Continue a fundamental matrix of ``X' = A(lam, y) X``; returns ``(X_end, branch_end)``."""
    init = np.asarray(initial, dtype=complex)
    k = init.shape[0]
    cols = init.shape[1]

    def rhs(lam, z, y):
        return (system(lam, y) @ z.reshape(k, cols)).ravel()

    z, br = integrate_along(rhs, path, init, tol, branch)
    return z.reshape(k, cols), br


def ode_continue(system: Callable, path: Path, initial, tol: float = 1e-12,
                 branch: BranchState | None = None) -> np.ndarray:
    """Matrix obtained by continuing ``initial`` along ``path`` under ``X' = A X``."""
    return continue_fundamental(system, path, initial, tol, branch)[0]
