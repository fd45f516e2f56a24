"""Batch driver: ``pvi-holonomy {periods,e1,e2,holonomy,group,verify-all}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 numeric failure (quadrature, branch tracking or ODE continuation).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import orbifold_group as og
from .analytic_paths import BranchError, ContinuationError, GeometryError, QuadratureError
from .elliptic_curve import (
    EllipticCurve,
    agm_period_oracle,
    default_basepoint,
    fundamental_periods,
    legendre_pairing,
    lift_loop,
    make_cycle,
)
from .holonomy_lab import (
    TransversalFrame,
    check_involutivity,
    check_virtual_commutativity_jets,
    generator_jets,
    ramification_exponent,
)
from .iterated_integrals import e2_monodromy_iterated, elliptic_reduction
from .monodromy_engine import (
    check_virtual_commutativity,
    deviation_from_identity,
    e1_on_sphere,
    e1_normalized_generators,
    e2_on_sphere,
    monodromy_representation,
    numeric_monodromy,
)
from .pvi_model import PviParameters
from .variational_systems import build_e2, closed_form_T, triangularize

SCHEMA_VERSION = "1.0"

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# default pass thresholds; --tol-report overrides all of them
THRESHOLDS = {
    "period_oracle": 1e-10,
    "period_self_consistency": 1e-11,
    "legendre": 1e-8,
    "e1_closed_form": 1e-7,
    "e1_involution": 1e-8,
    "e1_commutator": 1e-7,
    "e2_involution": 1e-6,
    "e2_commutator": 1e-6,
    "e2_routes_agree": 1e-7,
    "e2_reduction": 1e-6,
    "e2_word_commutator": 1e-5,
    "jet_involution": 1e-6,
    "nonlinear_involution": 1e-8,
    "jet_commutator": 1e-5,
    "ramification_lo": 1.9,
    "ramification_hi": 2.1,
}

NUMERIC_ERRORS = (QuadratureError, ContinuationError, BranchError, np.linalg.LinAlgError,
                  FloatingPointError, ZeroDivisionError)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    c: complex = 0.5 + 0j
    kappa0: complex = 1 / 3 + 0j
    kappa1: complex = 1 / 5 + 0j
    kappat: complex = 1 / 7 + 0j
    kappa_inf: complex = 1 / 2 + 0j
    tol_quad: float = 1e-12
    tol_ode: float = 1e-12
    tol_report: float | None = None
    radius_factor: float = 0.4
    basepoint: complex | None = None
    word_len: int = 8
    samples: int = 100
    seed: int = 0
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        c = complex(self.c)
        if abs(c) < 1e-12 or abs(c - 1) < 1e-12:
            raise ConfigError(f"c must differ from 0 and 1 (got {c})")
        for name in ("tol_quad", "tol_ode"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.tol_report is not None and not self.tol_report > 0:
            raise ConfigError("tol_report must be positive")
        if not 0 < self.radius_factor <= 0.5:
            raise ConfigError("radius_factor must lie in (0, 0.5]")
        if self.word_len < 2:
            raise ConfigError("word_len must be at least 2")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")

    @property
    def params(self) -> PviParameters:
        return PviParameters(self.kappa0, self.kappa1, self.kappat, self.kappa_inf)

    @property
    def point(self) -> complex:
        return default_basepoint(self.c) if self.basepoint is None else complex(self.basepoint)

    def threshold(self, key: str) -> float:
        if self.tol_report is not None and not key.startswith("ramification"):
            return self.tol_report
        return THRESHOLDS[key]


def parse_complex(text: str) -> complex:
    """``"re,im"`` or ``"re"``."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) not in (1, 2) or not all(parts):
        raise ConfigError(f"malformed complex value {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"malformed complex value {text!r}") from exc
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"non-finite complex value {text!r}")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


_COMPLEX = {"c", "kappa0", "kappa1", "kappat", "kappa_inf", "basepoint"}
_FLOAT = {"tol_quad", "tol_ode", "tol_report", "radius_factor"}
_INT = {"word_len", "samples", "seed"}
_STR = {"out", "format"}


def _coerce(key: str, value: str):
    if key in _COMPLEX:
        return parse_complex(value)
    try:
        if key in _FLOAT:
            return float(value)
        if key in _INT:
            return int(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if key in _STR:
        return value
    raise ConfigError(f"unknown config key {key!r}")


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _coerce(key, value)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for f in dataclasses.fields(RunConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            values[f.name] = _coerce(f.name, raw) if isinstance(raw, str) else raw
    return RunConfig(**values)


# --------------------------------------------------------------------------
# report helpers
# --------------------------------------------------------------------------


def encode(obj):
    """JSON-ready form: complex -> [re, im], arrays -> nested lists of those."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()] if obj.ndim else encode(obj.item())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


@dataclass
class Suite:
    name: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def check(self, name: str, value: float, tol: float, passed: bool | None = None, **extra):
        ok = bool(value < tol) if passed is None else bool(passed)
        self.checks.append({"name": name, "value": float(value), "tol": tol, "passed": ok, **extra})

    @property
    def passed(self) -> bool:
        return all(ch["passed"] for ch in self.checks)

    def report(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": self.checks, "data": self.data}


def _config_dict(cfg: RunConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d.pop("out")
    return d


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------


def cmd_periods(cfg: RunConfig) -> dict:
    s = Suite("periods")
    c = complex(cfg.c)
    p = cfg.point
    P = fundamental_periods(c, cfg.tol_quad, p, cfg.radius_factor)
    s.data.update({"pi1": P.pi1, "pi2": P.pi2, "tau": P.tau, "basepoint": p})
    s.check("independence |Im(Pi2/Pi1)| > 1e-12", abs(P.tau.imag), 1e-12, abs(P.tau.imag) > 1e-12)
    if c.imag == 0 and 0 < c.real < 1:
        oracle = agm_period_oracle(c.real, p)
        s.data["agm_oracle_pi1"] = oracle
        s.check("Pi1 vs AGM oracle", abs(P.pi1 - oracle), cfg.threshold("period_oracle"))
    fine = fundamental_periods(c, cfg.tol_quad, p, cfg.radius_factor, min_panels=2)
    dev = max(abs(P.pi1 - fine.pi1), abs(P.pi2 - fine.pi2))
    s.check("doubled-depth self-consistency", dev, cfg.threshold("period_self_consistency"))
    lp = legendre_pairing(c, cfg.tol_quad, p, cfg.radius_factor)
    s.data["legendre_raw"] = lp.raw
    s.data["legendre_normalized"] = lp.normalized
    s.check("oriented Legendre pairing / (c(c-1)) = 2 pi i", abs(lp.normalized - 2j * math.pi),
            cfg.threshold("legendre"))
    return s.report()


def cmd_e1(cfg: RunConfig) -> dict:
    s = Suite("e1")
    c = complex(cfg.c)
    p = cfg.point
    P = fundamental_periods(c, cfg.tol_quad, p, cfg.radius_factor)
    T = e1_normalized_generators(c, p, cfg.tol_ode, cfg.radius_factor)
    ref = {k: v.matrix for k, v in closed_form_T(c, P).items()}
    dev = max(float(np.max(np.abs(T[k] - ref[k]))) for k in ref)
    s.data["right_normalized"] = T
    s.check("closed-form T0, T1, Tc (p -> 0 convention)", dev, cfg.threshold("e1_closed_form"))
    rep = monodromy_representation(e1_on_sphere(c), p, cfg.radius_factor, cfg.tol_ode)
    s.data["identity_normalized"] = rep.matrices
    tol = cfg.threshold("e1_involution")
    for k, m in rep.matrices.items():
        s.check(f"M{k}^2 = I", deviation_from_identity(m @ m), tol)
    s.check("(M0 M1 Mc)^2 = I", deviation_from_identity(np.linalg.matrix_power(rep.word("01c"), 2)), tol)
    g = check_virtual_commutativity(rep, cfg.word_len, cfg.samples, cfg.seed,
                                    cfg.threshold("e1_commutator"))
    s.check("even-word commutators", g.max_deviation, g.tol, g.passed, witness=g.witness,
            length_bound=g.length_bound, samples=g.samples, seed=g.seed)
    return s.report()


def _commutator_loop(curve, p, radius_factor):
    a = make_cycle(curve, "cycle01", p, radius_factor)
    b = make_cycle(curve, "cycle0c", p, radius_factor)
    loop = a.loop.then(b.loop).then(a.loop.inverse()).then(b.loop.inverse())
    return a, b, loop


def cmd_e2(cfg: RunConfig) -> dict:
    s = Suite("e2")
    c = complex(cfg.c)
    p = cfg.point
    params = cfg.params
    sys_ = e2_on_sphere(c, params)
    rep = monodromy_representation(sys_, p, cfg.radius_factor, cfg.tol_ode)
    tol = cfg.threshold("e2_involution")
    for k, m in rep.matrices.items():
        s.check(f"M{k}^2 = I", deviation_from_identity(m @ m), tol)
    s.check("(M0 M1 Mc)^2 = I", deviation_from_identity(np.linalg.matrix_power(rep.word("01c"), 2)), tol)

    curve = EllipticCurve(c)
    tri = triangularize(build_e2(c, params))
    a, b, comm = _commutator_loop(curve, p, cfg.radius_factor)
    lifted = lift_loop(curve, comm, a.branch)
    M_ode = numeric_monodromy(sys_, comm, cfg.tol_ode)
    M_it = e2_monodromy_iterated(tri, lifted, cfg.tol_quad)
    D = tri.gauge(p, a.branch.y, c)
    M_ode_tri = D @ M_ode @ np.linalg.inv(D)
    tol = cfg.threshold("e2_commutator")
    s.check("commutator loop (ODE) = I", deviation_from_identity(M_ode), tol)
    s.check("commutator loop (iterated integrals) = I", deviation_from_identity(M_it), tol)
    s.check("ODE vs iterated integrals", float(np.max(np.abs(M_ode_tri - M_it))),
            cfg.threshold("e2_routes_agree"))
    tol = cfg.threshold("e2_reduction")
    for cyc in (a, b):
        lf = lift_loop(curve, cyc.loop, cyc.branch)
        for key, pred in elliptic_reduction(tri, lf, cfg.tol_quad).items():
            s.check(f"{cyc.id} {key}: elliptic reduction vs direct", pred.deviation, tol,
                    predicted=encode(pred.predicted), direct=encode(pred.direct))
    g = check_virtual_commutativity(rep, cfg.word_len, cfg.samples, cfg.seed,
                                    cfg.threshold("e2_word_commutator"))
    s.check("even-word commutators", g.max_deviation, g.tol, g.passed, witness=g.witness,
            length_bound=g.length_bound, samples=g.samples, seed=g.seed)
    return s.report()


def cmd_holonomy(cfg: RunConfig) -> dict:
    s = Suite("holonomy")
    c = complex(cfg.c)
    params = cfg.params
    frame = TransversalFrame(c, cfg.point)
    jets = generator_jets(c, params, frame, cfg.tol_ode, cfg.radius_factor)
    inv = check_involutivity(c, params, frame, offsets=((0.0, 1e-3), (1e-4, 1e-3)),
                             tol=cfg.threshold("jet_involution"),
                             nonlinear_tol=cfg.threshold("nonlinear_involution"),
                             ode_tol=cfg.tol_ode, jets=jets, nonlinear=params.kappa0 != 0)
    for k, rec in inv["generators"].items():
        s.check(f"jet h{k}^2 = id", rec["jet_square_deviation"], inv["tol_jet"])
        if "nonlinear_return" in rec:
            s.check(f"nonlinear h{k}^2 return distance", max(rec["nonlinear_return"]),
                    inv["tol_nonlinear"])
    s.data["flags"] = inv["flags"]
    s.data["generator_jets"] = {k: {"linear": j.linear, "quad": j.quad} for k, j in jets.items()}
    even = check_virtual_commutativity_jets(jets, cfg.word_len, cfg.samples, cfg.seed,
                                            cfg.threshold("jet_commutator"))
    s.check("even-word jet commutators", even["max_deviation"], even["tol"], even["passed"],
            witness=even["witness"])
    odd = check_virtual_commutativity_jets(jets, cfg.word_len, cfg.samples, cfg.seed,
                                           cfg.threshold("jet_commutator"), parity="odd")
    s.check("odd-word control exceeds tolerance", odd["max_deviation"], odd["tol"],
            not odd["passed"], witness=odd["witness"])
    s.check("det sign of linear part matches word parity", 0.0, 1.0,
            even["det_sign_matches_parity"] and odd["det_sign_matches_parity"])
    if params.kappa0 != 0:
        fit = ramification_exponent(c, params)
        lo, hi = THRESHOLDS["ramification_lo"], THRESHOLDS["ramification_hi"]
        s.check("ramification exponent in [1.9, 2.1]", fit.exponent, hi,
                lo <= fit.exponent <= hi, interval=[lo, hi])
        s.check("exponent stable under half window", abs(fit.exponent - fit.half_window_exponent), 0.05)
        s.data["control_exponent"] = fit.control_exponent
    else:
        s.data["flags"].append("kappa0 = 0: ramification fit skipped")
    return s.report()


def cmd_group(cfg: RunConfig) -> dict:
    s = Suite("group")
    ex = og.relation_invariance_exhaustive(10)
    s.check("relator insertion, all words of length <= 10", ex.failures, 1, ex.passed,
            words=ex.words, insertions=ex.insertions, witness=ex.witness)
    rnd = og.relation_invariance_random(10_000, 30, cfg.seed)
    s.check("relator insertion, random", rnd.failures, 1, rnd.passed, count=rnd.insertions,
            witness=rnd.witness)
    ker = og.kernel_commutators_random(1000, 24, cfg.seed)
    s.check("kernel commutators, even words <= 24", ker.failures, 1, ker.passed, count=ker.words,
            witness=ker.witness)
    P = fundamental_periods(complex(cfg.c), cfg.tol_quad, cfg.point, cfg.radius_factor)
    T = closed_form_T(cfg.c, P)
    dev = max(float(np.max(np.abs(og.realize(og.reduce(l), P) - T[k].matrix)))
              for l, k in zip("abc", ("T0", "T1", "Tc")))
    s.check("realize(a, b, c) = (T0, T1, Tc)", dev, 1e-15, dev == 0)
    s.data["model"] = "Z^2 x| Z_2; faithfulness assumed, not proved"
    return s.report()


SUITES = {
    "periods": cmd_periods,
    "e1": cmd_e1,
    "e2": cmd_e2,
    "holonomy": cmd_holonomy,
    "group": cmd_group,
}


def cmd_verify_all(cfg: RunConfig) -> dict:
    reports = [fn(cfg) for fn in SUITES.values()]
    failing = [r["suite"] for r in reports if not r["passed"]]
    return {"suite": "verify-all", "passed": not failing, "failing_suites": failing, "suites": reports}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(encode(doc), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "check", "value", "tol", "passed"])
    suites = doc["report"].get("suites", [doc["report"]])
    for rep in suites:
        for ch in rep.get("checks", []):
            w.writerow([rep["suite"], ch["name"], repr(ch["value"]), repr(ch["tol"]), ch["passed"]])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--c", help='complex "re,im" or "re" (default 0.5)')
    common.add_argument("--kappa0")
    common.add_argument("--kappa1")
    common.add_argument("--kappat")
    common.add_argument("--kappa-inf", dest="kappa_inf")
    common.add_argument("--basepoint", help="loop basepoint (default: automatic)")
    common.add_argument("--tol-quad", dest="tol_quad")
    common.add_argument("--tol-ode", dest="tol_ode")
    common.add_argument("--tol-report", dest="tol_report", help="override every pass threshold")
    common.add_argument("--radius-factor", dest="radius_factor")
    common.add_argument("--word-len", dest="word_len")
    common.add_argument("--samples")
    common.add_argument("--seed")
    common.add_argument("--config", help="flat key = value file; flags win")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    parser = argparse.ArgumentParser(prog="pvi-holonomy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*SUITES, "verify-all"):
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        cfg = build_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fn = cmd_verify_all if args.command == "verify-all" else SUITES[args.command]
    try:
        report = fn(cfg)
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure in {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": _config_dict(cfg),
           "thresholds": THRESHOLDS if cfg.tol_report is None else {"all": cfg.tol_report},
           "report": report}
    text = render(doc, cfg.format)
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report["passed"] else EXIT_FAIL
