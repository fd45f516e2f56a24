"""Painleve VI data: parameters, the polynomials E and F, chart transitions
and the foliation along the vertical leaf ``mu = 0`` in chart W2."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

__all__ = [
    "PviParameters",
    "derive_parameters",
    "eval_polys",
    "Chart",
    "ChartPoint",
    "ChartDomainError",
    "TangencyError",
    "chart_transition",
    "foliation_rhs",
    "foliation_rhs_t",
    "singular_points",
]


class ChartDomainError(ValueError):
    """Point lies outside the overlap of the two charts."""


class TangencyError(ZeroDivisionError):
    """``2E + F mu`` vanishes: the leaf is tangent to the fibre ``lam = const``."""


@dataclass(frozen=True)
class PviParameters:
    kappa0: complex
    kappa1: complex
    kappat: complex
    kappainf: complex
    eps: complex = field(init=False)
    kappa: complex = field(init=False)
    alpha: complex = field(init=False)
    beta: complex = field(init=False)
    gamma: complex = field(init=False)
    delta: complex = field(init=False)
    G: complex = field(init=False)

    def __post_init__(self):
        k0, k1, kt, ki = (complex(v) for v in (self.kappa0, self.kappa1, self.kappat, self.kappainf))
        for name, v in zip(("kappa0", "kappa1", "kappat", "kappainf"), (k0, k1, kt, ki)):
            object.__setattr__(self, name, v)
        s = k0 + k1 + kt + 1
        derived = {
            "eps": -(s + ki),
            "kappa": 0.5 * (s**2 - ki**2),
            "alpha": 0.5 * ki**2,
            "beta": 0.5 * k0**2,
            "gamma": 0.5 * k1**2,
            "delta": 0.5 * kt**2,
        }
        derived["G"] = -0.5 * derived["eps"] * (s - ki)
        for k, v in derived.items():
            object.__setattr__(self, k, v)

    @property
    def kappas(self) -> tuple:
        return (self.kappa0, self.kappa1, self.kappat, self.kappainf)

    @property
    def hirzebruch_trivial(self) -> bool:
        """True when eps != 0 (the surface is P1 x P1); recorded only."""
        return self.eps != 0


def derive_parameters(kappa0, kappa1, kappat, kappainf) -> PviParameters:
    return PviParameters(kappa0, kappa1, kappat, kappainf)


def eval_polys(t, lam, params: PviParameters):
    """Return ``(E, F, E_lam, F_lam)`` at ``(t, lam)``; numpy-broadcastable."""
    k0, k1, kt = params.kappa0, params.kappa1, params.kappat
    E = lam * (lam - 1) * (lam - t)
    F = k0 * (lam - 1) * (lam - t) + k1 * lam * (lam - t) + (kt + 1) * lam * (lam - 1)
    E_l = 3 * lam**2 - 2 * (1 + t) * lam + t
    F_l = k0 * (2 * lam - 1 - t) + k1 * (2 * lam - t) + (kt + 1) * (2 * lam - 1)
    return E, F, E_l, F_l


class Chart(enum.Enum):
    W1 = 1
    W2 = 2
    W3 = 3
    W4 = 4


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    lam: complex
    mu: complex


def _inv(x, what):
    if x == 0:
        raise ChartDomainError(f"{what} is zero: point is off the chart overlap")
    return 1 / x


def _to_w1(p: ChartPoint, eps) -> tuple:
    if p.chart is Chart.W1:
        return p.lam, p.mu
    if p.chart is Chart.W2:
        return p.lam, _inv(p.mu, "mu2")
    if p.chart is Chart.W4:
        p = ChartPoint(Chart.W3, p.lam, _inv(p.mu, "mu4"))
    # W3 -> W1; the map (lam, mu) -> (1/lam, eps lam - lam^2 mu) is an involution
    lam1 = _inv(p.lam, "lam3")
    return lam1, eps * p.lam - p.lam**2 * p.mu


def _from_w1(lam1, mu1, target: Chart, eps) -> ChartPoint:
    if target is Chart.W1:
        return ChartPoint(Chart.W1, lam1, mu1)
    if target is Chart.W2:
        return ChartPoint(Chart.W2, lam1, _inv(mu1, "mu1"))
    lam3 = _inv(lam1, "lam1")
    mu3 = eps * lam1 - lam1**2 * mu1
    if target is Chart.W3:
        return ChartPoint(Chart.W3, lam3, mu3)
    return ChartPoint(Chart.W4, lam3, _inv(mu3, "mu3"))


def chart_transition(p: ChartPoint, target: Chart, params: PviParameters | None = None,
                     eps: complex | None = None) -> ChartPoint:
    """Change coordinates of ``p`` to chart ``target``, routed through W1."""
    if eps is None:
        eps = params.eps
    if p.chart is target:
        return p
    return _from_w1(*_to_w1(p, eps), target, eps)


def foliation_rhs(lam, mu, t, params: PviParameters, check: bool = True):
    """``(dmu/dlam, dt/dlam)`` of the foliation in chart W2."""
    E, F, E_l, F_l = eval_polys(t, lam, params)
    den = 2 * E + F * mu
    if check and abs(den) <= 1e-13 * (abs(2 * E) + abs(F * mu)) + 1e-300:
        raise TangencyError(f"2E + F mu vanishes at lam={lam}, mu={mu}, t={t}")
    num_mu = (E_l + F_l * mu + params.G * mu**2) * mu
    return num_mu / den, t * (t - 1) * mu / den


def foliation_rhs_t(lam, mu, t, params: PviParameters):
    """The t-parametrised field in chart W2: ``(dlam/dt, dmu/dt)``."""
    E, F, E_l, F_l = eval_polys(t, lam, params)
    w = t * (t - 1)
    return (2 * E + F * mu) / (w * mu), (E_l + F_l * mu + params.G * mu**2) / w


def singular_points(t) -> dict:
    if t == 0 or t == 1:
        raise ValueError("t must differ from 0 and 1")
    return {
        "a0": ChartPoint(Chart.W2, 0j, 0j),
        "a1": ChartPoint(Chart.W2, 1 + 0j, 0j),
        "at": ChartPoint(Chart.W2, complex(t), 0j),
        "ainf": ChartPoint(Chart.W4, 0j, 0j),
    }
