"""Chen iterated integrals of length at most three.

Convention: for a word ``(w1, ..., wn)`` the first form is outermost, i.e.
``int w1 w2 = int f1(x) (int_p^x f2) dx``.  With that convention the Chen
rule for a path ``alpha`` followed by ``beta`` reads

    S2[i, j]    = A2 + B2 + B1[i] A1[j]
    S3[i, j, k] = A3 + B3 + B2[i, j] A1[k] + B1[i] A2[j, k]

where ``A`` refers to ``alpha`` and ``B`` to ``beta``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic_paths import (
    BranchError,
    BranchState,
    Path,
    gauss_rule,
    integrate_along,
    integrate_form,
    panels,
    track_segment,
    _check_branch_start,
)
from .elliptic_curve import (
    CurveForm,
    EllipticCurve,
    LiftedLoop,
    ResidueError,
    residues_on_curve,
)
from .variational_systems import TRI_KEYS, TriangularE2

__all__ = [
    "FormWord",
    "Signature",
    "YMatrix",
    "path_signature",
    "chen_concatenate",
    "iterated_integral",
    "iterated_integral_ode",
    "y_matrix",
    "ReductionRecord",
    "reduce_exact",
    "h_function",
    "e2_monodromy_iterated",
    "EllipticPrediction",
    "elliptic_reduction",
]


@dataclass(frozen=True)
class FormWord:
    forms: tuple

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        if not 1 <= len(self.forms) <= 3:
            raise ValueError("words must have length 1, 2 or 3")

    def __len__(self) -> int:
        return len(self.forms)


@dataclass(frozen=True)
class Signature:
    """All iterated integrals of length <= 3 of ``k`` forms along one path."""

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray

    @classmethod
    def identity(cls, k: int) -> "Signature":
        return cls(np.zeros(k, complex), np.zeros((k, k), complex), np.zeros((k, k, k), complex))

    @property
    def size(self) -> int:
        return self.s1.shape[0]

    def word(self, idx: Sequence[int]) -> complex:
        idx = tuple(idx)
        return complex({1: self.s1, 2: self.s2, 3: self.s3}[len(idx)][idx])

    def then(self, other: "Signature") -> "Signature":
        return chen_concatenate(self, other)

    def max_diff(self, other: "Signature") -> float:
        return max(float(np.max(np.abs(a - b))) for a, b in
                   ((self.s1, other.s1), (self.s2, other.s2), (self.s3, other.s3)))


def chen_concatenate(first: Signature, second: Signature) -> Signature:
    """Signature of ``first``'s path followed by ``second``'s."""
    if first.size != second.size:
        raise ValueError("signatures over different form lists")
    a1, a2, a3 = first.s1, first.s2, first.s3
    b1, b2, b3 = second.s1, second.s2, second.s3
    s1 = a1 + b1
    s2 = a2 + b2 + np.multiply.outer(b1, a1)
    s3 = a3 + b3 + np.multiply.outer(b2, a1) + np.multiply.outer(b1, a2)
    return Signature(s1, s2, s3)


def _panel_signature(values: np.ndarray, a: float, b: float) -> Signature:
    # values: (k, n) integrand samples in the panel parameter
    _, w, cum = gauss_rule(values.shape[1])
    L = b - a
    wv = values * (w * L)
    I1 = (L * cum) @ values.T  # (n, k): running integral of each form
    s1 = wv.sum(axis=1)
    s2 = wv @ I1
    inner = values.T[:, :, None] * I1[:, None, :]  # (n, k, k): f_j * I1_k
    I2 = np.einsum("mn,njk->mjk", L * cum, inner)
    s3 = np.einsum("in,njk->ijk", wv, I2)
    return Signature(s1, s2, s3)


def path_signature(forms: Sequence, path: Path, branch: BranchState | None = None,
                   tol: float = 1e-12, min_panels: int = 2):
    """``(Signature, end_branch)`` for ``forms`` along ``path``."""
    forms = list(forms)
    k = len(forms)
    sig = Signature.identity(k)
    if branch is not None:
        _check_branch_start(branch, path)
    y = branch.y if branch is not None else None
    for seg in path.segments:
        track = track_segment(branch.c, seg, y) if branch is not None else None
        for pn in panels(forms, seg, track, tol, min_panels):
            sig = chen_concatenate(sig, _panel_signature(pn.values, pn.a, pn.b))
        if track is not None:
            y = track.end_value
    end = BranchState(branch.c, path.end, y) if branch is not None else None
    return sig, end


def iterated_integral(word, path: Path, branch: BranchState | None = None,
                      tol: float = 1e-12) -> complex:
    if not isinstance(word, FormWord):
        word = FormWord(word)
    if len(word) == 1:
        return integrate_form(word.forms[0], path, branch, tol).value
    sig, _ = path_signature(word.forms, path, branch, tol)
    return sig.word(range(len(word)))


def iterated_integral_ode(word, path: Path, branch: BranchState | None = None,
                          tol: float = 1e-12) -> complex:
    """Independent oracle: the nested integrals as an ODE sweep (innermost first)."""
    forms = list(word.forms if isinstance(word, FormWord) else word)
    n = len(forms)

    def rhs(lam, z, y):
        out = np.empty(n, dtype=complex)
        out[n - 1] = forms[n - 1](lam, y)
        for m in range(n - 1):
            out[m] = forms[m](lam, y) * z[m + 1]
        return out

    z, _ = integrate_along(rhs, path, np.zeros(n, complex), tol, branch)
    return complex(z[0])


# --------------------------------------------------------------------------
# Y matrix of the triangular system
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class YMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if np.any(np.diag(m) != 1) or np.any(np.tril(m, -1) != 0):
            raise ValueError("Y must be upper unitriangular")

    def entry(self, i: int, j: int) -> complex:
        """One-based access, ``entry(1, 4) == Y14``."""
        return complex(self.matrix[i - 1, j - 1])


def _y_from_signature(sig: Signature) -> np.ndarray:
    index = {key: n for n, key in enumerate(TRI_KEYS)}
    Y = np.eye(4, dtype=complex)
    for (i, j), n in index.items():
        Y[i, j] += sig.s1[n]
        for m in range(i + 1, j):
            Y[i, j] += sig.s2[index[(i, m)], index[(m, j)]]
            for q in range(m + 1, j):
                Y[i, j] += sig.s3[index[(i, m)], index[(m, q)], index[(q, j)]]
    return Y


def _tri_forms(tri: TriangularE2) -> list:
    return [tri.forms[key] for key in TRI_KEYS]


def y_matrix(tri: TriangularE2, path: Path, branch: BranchState, tol: float = 1e-12) -> YMatrix:
    """``Y = I + int J + int J^2 + int J^3`` from ``path.start`` to ``path.end``."""
    if not path.segments:
        return YMatrix(np.eye(4, dtype=complex))
    sig, _ = path_signature(_tri_forms(tri), path, branch, tol)
    return YMatrix(_y_from_signature(sig))


def e2_monodromy_iterated(tri: TriangularE2, lifted: LiftedLoop, tol: float = 1e-12) -> np.ndarray:
    """Monodromy of the triangular E2 system along a loop that closes on ``S_c``."""
    if not lifted.closes:
        raise BranchError("loop does not close on S_c; square it first")
    return y_matrix(tri, lifted.loop.path, lifted.start, tol).matrix


# --------------------------------------------------------------------------
# exact-form reductions
# --------------------------------------------------------------------------


def h_function(c):
    c = complex(c)
    return lambda lam: -0.5 / (lam - c)


@dataclass(frozen=True)
class ReductionRecord:
    lhs: complex
    rhs: complex

    @property
    def difference(self) -> complex:
        return self.lhs - self.rhs


def reduce_exact(tri: TriangularE2, form, path: Path, branch: BranchState | None = None,
                 tol: float = 1e-12) -> ReductionRecord:
    """Both sides of ``int w23 w = h(lam) int w - int h w`` along ``path``."""
    h = h_function(tri.c)
    w23 = tri.forms[(1, 2)]
    if branch is None:
        from .elliptic_curve import reference_branch
        branch = reference_branch(tri.c, path.start)
    sig, _ = path_signature([w23, form, lambda lam, y: h(lam) * form(lam, y)], path, branch, tol)
    lhs = sig.s2[0, 1]
    rhs = h(path.end) * sig.s1[1] - sig.s1[2]
    return ReductionRecord(complex(lhs), complex(rhs))


@dataclass(frozen=True)
class EllipticPrediction:
    """Predicted vs directly integrated loop values."""

    name: str
    predicted: complex
    direct: complex

    @property
    def deviation(self) -> float:
        return abs(self.predicted - self.direct)


def _reduced_forms(tri: TriangularE2, params) -> dict:
    c = tri.c
    h = h_function(c)
    w12, w13, w24 = tri.forms[(0, 1)], tri.forms[(0, 2)], tri.forms[(1, 3)]
    from .pvi_model import eval_polys

    def phi(lam, y):
        F = eval_polys(c, lam, params)[1]
        return F / (2 * y)

    return {
        "y13": CurveForm(lambda lam, y: h(lam) * w12(lam, y) + w13(lam, y), "y13-reduced", True),
        "y24": CurveForm(lambda lam, y: w24(lam, y) - h(lam) * w12(lam, y), "y24-reduced", True),
        "phi_w12": CurveForm(lambda lam, y: phi(lam, y) * w12(lam, y), "phi-w12"),
        "h_w12": CurveForm(lambda lam, y: h(lam) * w12(lam, y), "h-w12"),
        "phi": phi,
    }


def elliptic_reduction(tri: TriangularE2, lifted: LiftedLoop, tol: float = 1e-12,
                       check_residues: bool = True) -> dict:
    """Predictions of ``Y13``, ``Y24`` and the ``Y14`` combination from single periods.

    ``Y14`` minus ``int w14`` is predicted as
    ``k Pi^2 / 2 + int phi w12 - phi(P) Pi + Pi (int h w12 + int w13)`` with
    ``k = (1 - 2c) / (c (c - 1))`` and ``phi = F / (2 y)``.
    """
    if not lifted.closes:
        raise BranchError("loop does not close on S_c")
    c = tri.c
    params = tri.system.params
    red = _reduced_forms(tri, params)
    if check_residues:
        curve = EllipticCurve(c)
        for key in ("y13", "y24"):
            bad = {e: r for e, r in residues_on_curve(curve, red[key]).items() if abs(r) > 1e-8}
            if bad:
                raise ResidueError(f"{red[key].name} has residues {bad}")
    path, br = lifted.loop.path, lifted.start
    P, yP = br.lam, br.y
    h = h_function(c)
    single = [tri.forms[(0, 1)], tri.forms[(0, 2)], red["y13"], red["y24"], red["phi_w12"], red["h_w12"]]
    s = [integrate_form(f, path, br, tol).value for f in single]
    pi, i13, r13, r24, iphi, ihw = s
    kprime = (1 - 2 * c) / (c * (c - 1))
    pred = {
        "Y13": r13 - h(P) * pi,
        "Y24": r24 + h(P) * pi,
        "Y14comb": kprime * pi**2 / 2 + iphi - red["phi"](P, yP) * pi + pi * (ihw + i13),
    }
    Y = e2_monodromy_iterated(tri, lifted, tol)
    sig, _ = path_signature([tri.forms[(0, 3)]], path, br, tol)
    direct = {"Y13": Y[0, 2], "Y24": Y[1, 3], "Y14comb": Y[0, 3] - sig.s1[0]}
    return {k: EllipticPrediction(k, complex(pred[k]), complex(direct[k])) for k in pred}
