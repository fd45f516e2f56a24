"""Numeric monodromy of linear systems on the punctured lambda-line.

Native convention: identity-normalised monodromy at the loop basepoint, so
that traversing ``g1`` and then ``g2`` gives ``M_{g2} M_{g1}``.  The
conversion ``T = X(p)^{-1} M X(p)`` produces the right-action matrices with
``continuation(X) = X T``; in that normalisation ``g1`` then ``g2`` gives
``T_{g1} T_{g2}``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic_paths import (
    BranchState,
    GeometryError,
    Loop,
    build_puncture_loop,
    integrate_form,
    ode_continue,
)
from .elliptic_curve import (
    DEFAULT_RADIUS_FACTOR,
    default_basepoint,
    integral_to_branch_point,
    reference_branch,
)
from .pvi_model import PviParameters
from .variational_systems import build_e1, build_e2, closed_form_X, triangularize

__all__ = [
    "LinearSystemOnSphere",
    "MonodromyRep",
    "GroupCheckReport",
    "e1_on_sphere",
    "e2_on_sphere",
    "triangular_e2_on_sphere",
    "numeric_monodromy",
    "trace_integral",
    "to_right_normalization",
    "limit_shift",
    "e1_normalized_generators",
    "monodromy_representation",
    "word_matrix",
    "sample_words",
    "check_virtual_commutativity",
    "deviation_from_identity",
]


@dataclass(frozen=True)
class LinearSystemOnSphere:
    """``X' = A(lam, y) X``; ``multivalued`` systems need a branch of ``y``."""

    punctures: tuple
    order: int
    coefficient: Callable
    multivalued: bool = False
    c: complex | None = None
    trace: Callable | None = None
    name: str = "system"

    def __call__(self, lam, y=None):
        return self.coefficient(lam, y)

    def trace_at(self, lam, y=None):
        if self.trace is not None:
            return self.trace(lam, y)
        return np.trace(self.coefficient(lam, y))


def _pts(c) -> tuple:
    return (0j, 1 + 0j, complex(c))


def e1_on_sphere(c) -> LinearSystemOnSphere:
    s = build_e1(c)
    return LinearSystemOnSphere(_pts(c), 2, s.matrix, False, s.c, s.trace, "E1")


def e2_on_sphere(c, params: PviParameters) -> LinearSystemOnSphere:
    s = build_e2(c, params)
    return LinearSystemOnSphere(_pts(c), 4, s.matrix, False, s.c, s.trace, "E2")


def triangular_e2_on_sphere(c, params: PviParameters) -> LinearSystemOnSphere:
    t = triangularize(build_e2(c, params))
    return LinearSystemOnSphere(_pts(c), 4, t.matrix, True, t.c, lambda lam, y: 0j, "E2-triangular")


def deviation_from_identity(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - np.eye(m.shape[0]))))


def _branch_for(sys: LinearSystemOnSphere, loop: Loop, branch):
    if not sys.multivalued:
        return None
    return branch if branch is not None else reference_branch(sys.c, loop.basepoint)


def numeric_monodromy(sys: LinearSystemOnSphere, loop: Loop, tol: float = 1e-12,
                      branch: BranchState | None = None) -> np.ndarray:
    if not loop.path.segments:
        return np.eye(sys.order, dtype=complex)
    br = _branch_for(sys, loop, branch)
    return ode_continue(sys.coefficient, loop.path, np.eye(sys.order), tol, br)


def trace_integral(sys: LinearSystemOnSphere, loop: Loop, tol: float = 1e-12,
                   branch: BranchState | None = None) -> complex:
    """``oint trace A``; ``det M`` must equal its exponential."""
    br = _branch_for(sys, loop, branch)
    return integrate_form(lambda lam, y: sys.trace_at(lam, y) + 0 * lam, loop.path, br, tol).value


def to_right_normalization(M, X_at_basepoint) -> np.ndarray:
    X = np.asarray(X_at_basepoint, dtype=complex)
    if abs(np.linalg.det(X)) < 1e-300:
        raise np.linalg.LinAlgError("X(p) is singular")
    return np.linalg.solve(X, np.asarray(M) @ X)


def limit_shift(c, branch: BranchState) -> np.ndarray:
    """``K`` with ``X_0 = X_p K`` where ``X_0`` integrates from the branch point 0.

    ``K^{-1} T K`` is then the right-normalised matrix in the ``p -> 0``
    limit: every lower-left entry drops by ``2 int_p^0 omega`` and
    ``alpha_0`` becomes 0.
    """
    s = integral_to_branch_point(c, branch, 0j)
    return np.array([[1, 0], [-s, 1]], dtype=complex)


@dataclass(frozen=True)
class MonodromyRep:
    basepoint: complex
    loops: dict
    matrices: dict
    normalization: str = "identity"
    system: str = ""

    def __post_init__(self):
        for k, m in self.matrices.items():
            if abs(np.linalg.det(m)) < 1e-12:
                raise ValueError(f"generator {k} is singular")

    @property
    def labels(self) -> tuple:
        return tuple(self.matrices)

    def word(self, w: Sequence[str]) -> np.ndarray:
        return word_matrix(self.matrices, w, self.normalization)


def word_matrix(matrices: dict, word: Sequence[str], normalization: str = "identity") -> np.ndarray:
    """Monodromy of the loop traversing ``word[0]`` first."""
    n = next(iter(matrices.values())).shape[0]
    out = np.eye(n, dtype=complex)
    for letter in word:
        m = matrices[letter]
        out = m @ out if normalization == "identity" else out @ m
    return out


def monodromy_representation(sys: LinearSystemOnSphere, basepoint=None,
                             radius_factor: float = DEFAULT_RADIUS_FACTOR, tol: float = 1e-12,
                             labels: Sequence[str] = ("0", "1", "c"),
                             branch: BranchState | None = None,
                             det_tol: float = 1e-8) -> MonodromyRep:
    """Generator monodromies from one common basepoint and branch."""
    pts = sys.punctures
    if len(labels) != len(pts):
        raise ValueError("one label per puncture")
    p = complex(basepoint) if basepoint is not None else (
        default_basepoint(sys.c) if sys.c is not None else complex(np.mean(pts)) + 0.5j)
    dmin = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    if sys.multivalued and branch is None:
        branch = reference_branch(sys.c, p)
    loops, mats = {}, {}
    for idx, key in enumerate(labels):
        r = radius_factor * min(0.5 * dmin, abs(p - pts[idx]))
        if r <= 0:
            raise GeometryError("basepoint coincides with a puncture")
        loop = build_puncture_loop(pts, idx, p, r)
        M = numeric_monodromy(sys, loop, tol, branch)
        expected = cmath.exp(trace_integral(sys, loop, tol, branch))
        if abs(np.linalg.det(M) - expected) > det_tol * max(1.0, abs(expected)):
            raise ValueError(f"determinant check failed around {key}")
        loops[key], mats[key] = loop, M
    return MonodromyRep(p, loops, mats, "identity", sys.name)


def e1_normalized_generators(c, basepoint=None, tol: float = 1e-12,
                        radius_factor: float = DEFAULT_RADIUS_FACTOR, limit: bool = True) -> dict:
    """``T0, T1, Tc`` from numeric E1 monodromy in the right-action normalisation.

    With ``limit`` the ``p -> 0`` convention ``alpha_0 = 0`` is applied.
    """
    sys = e1_on_sphere(c)
    rep = monodromy_representation(sys, basepoint, radius_factor, tol)
    br = reference_branch(sys.c, rep.basepoint)
    X = closed_form_X(sys.c, rep.basepoint, rep.basepoint, br)
    out = {}
    K = limit_shift(sys.c, br) if limit else np.eye(2, dtype=complex)
    for key, M in rep.matrices.items():
        T = to_right_normalization(M, X)
        out["T" + key] = np.linalg.solve(K, T @ K)
    return out


# --------------------------------------------------------------------------
# virtual commutativity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupCheckReport:
    length_bound: int
    samples: int
    seed: int
    tol: float
    max_deviation: float
    passed: bool
    witness: tuple | None = None
    parity: str = "even"
    notes: dict = field(default_factory=dict)


def sample_words(labels: Sequence[str], length_bound: int, count: int, seed: int,
                 parity: str = "even") -> list:
    """Seeded pairs of words of the requested parity and length ``<= length_bound``."""
    rng = np.random.default_rng(seed)
    start = 2 if parity == "even" else 1
    lengths = list(range(start, length_bound + 1, 2))
    if not lengths:
        raise ValueError("length bound too small for the requested parity")
    labels = list(labels)

    def one():
        n = int(rng.choice(lengths))
        return tuple(labels[i] for i in rng.integers(0, len(labels), n))

    return [(one(), one()) for _ in range(count)]


def check_virtual_commutativity(rep: MonodromyRep, length_bound: int = 12, samples: int = 200,
                                seed: int = 0, tol: float = 1e-7,
                                parity: str = "even") -> GroupCheckReport:
    worst, witness = 0.0, None
    for u, v in sample_words(rep.labels, length_bound, samples, seed, parity):
        U, V = rep.word(u), rep.word(v)
        comm = U @ V @ np.linalg.inv(U) @ np.linalg.inv(V)
        dev = deviation_from_identity(comm)
        if dev > worst:
            worst, witness = dev, ("".join(u), "".join(v))
    passed = worst < tol
    return GroupCheckReport(length_bound, samples, seed, tol, worst, passed,
                            None if passed else witness, parity)
