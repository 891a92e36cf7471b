"""Seeded randomized suites that check the Hessian-energy inequalities and identities.

Each suite draws independent cases from ``numpy.random.default_rng([seed,
case, attempt])``, so results do not depend on execution order or on the
number of worker processes. A case passes when ``margin >= -tolerance``,
where the tolerance comes from the quadrature error model rather than zero.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .energy import energy_diag, mixed_energy, symmetry_residual
from .exceptions import ConeMembershipError, ConfigError, DegenerateConeError
from .funcspace import (
    FunctionSpec,
    LinearCombination,
    Perturbed,
    QuadraticForm,
    RadialPoly,
    check_boundary_vanishing,
    check_membership,
    from_json,
    random_admissible,
    random_polynomial,
    random_psh,
    real_hessian,
)
from .quadrature import QuadratureScheme, RadialGauss, scheme_from_config
from .symfun import (
    algebraic_lemma_check,
    cone_check,
    garding_superadditivity_check,
    lemma_mk_check,
    newton_tensor,
    polarized_s_k,
    random_cone_vector,
    s_k,
    signed_root,
    symmetric,
)

MAX_ATTEMPTS = 100
EQUALITY_FACTOR = 10.0
GARDING_TOL = 1e-10
DIV_TOL = 1e-8
DIV_STEP = 1e-2
DIV_RATIO_BAND = (3.5, 4.5)
DIV_RATIO_FLOOR = 1e-9
DIV_QUADRATIC_TOL = 1e-12
DIV_ROUNDOFF_TOL = 1e-10

DEFAULT_SAMPLES = {
    "hoelder": 50,
    "convexity": 50,
    "cauchy_schwarz": 50,
    "poincare_complex": 50,
    "poincare_real": 50,
    "divergence": 100,
    "symmetry": 30,
    "garding": 200,
}
SUITE_NAMES = tuple(DEFAULT_SAMPLES)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    n: int
    k: int
    m: int | None = None
    samples: int | None = None
    seed: int = 0
    richness: str = "radial"
    quadrature: QuadratureScheme = field(default_factory=RadialGauss)
    space: str = "complex"
    degree: int = 4
    tolerance: float | None = None

    def __post_init__(self):
        if self.suite not in DEFAULT_SAMPLES:
            raise ConfigError(f"suite: unknown suite {self.suite!r}; expected one of {', '.join(SUITE_NAMES)}")
        for name in ("n", "k", "seed", "degree"):
            if not isinstance(getattr(self, name), (int, np.integer)) or isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name}: must be an integer")
        if not 1 <= self.n <= 8:
            raise ConfigError(f"n: must satisfy 1 <= n <= 8 (got n={self.n})")
        if self.k < 1:
            raise ConfigError(f"k: must be >= 1 (got k={self.k})")
        if self.k > self.n:
            raise ConfigError(f"k: must satisfy k <= n (got k={self.k}, n={self.n})")
        if self.m is not None and not 0 <= self.m < self.k:
            raise ConfigError(f"m: must satisfy 0 <= m < k (got m={self.m}, k={self.k})")
        if self.samples is None:
            object.__setattr__(self, "samples", DEFAULT_SAMPLES[self.suite])
        if self.samples < 1:
            raise ConfigError(f"samples: must be >= 1 (got {self.samples})")
        if self.richness not in ("radial", "perturbed"):
            raise ConfigError(f"richness: must be 'radial' or 'perturbed' (got {self.richness!r})")
        if self.space not in ("complex", "real"):
            raise ConfigError(f"space: must be 'complex' or 'real' (got {self.space!r})")
        if self.suite == "poincare_complex" and self.space != "complex":
            object.__setattr__(self, "space", "complex")
        if self.suite in ("poincare_real", "divergence"):
            object.__setattr__(self, "space", "real")
        if self.suite == "divergence":
            if not 2 <= self.degree <= 4:
                raise ConfigError(f"degree: must be 2, 3 or 4 (got {self.degree})")
            if self.n > 6:
                raise ConfigError(f"n: divergence suite is limited to n <= 6 (got n={self.n})")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError("tolerance: must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        if not isinstance(d, dict):
            raise ConfigError("suite config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__} | {"samples"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
        for req in ("suite", "n", "k"):
            if req not in d:
                raise ConfigError(f"{req}: missing required field")
        kwargs = dict(d)
        if "quadrature" in kwargs:
            kwargs["quadrature"] = scheme_from_config(kwargs["quadrature"])
        if "tolerance" in kwargs and kwargs["tolerance"] is not None:
            try:
                kwargs["tolerance"] = float(kwargs["tolerance"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("tolerance: must be a number") from exc
        return cls(**kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quadrature"] = self.quadrature.to_config()
        return d


def load_configs(data) -> list[SuiteConfig]:
    """Parse one config object, a list of them, or ``{"suites": [...]}``."""
    if isinstance(data, dict) and "suites" in data:
        data = data["suites"]
    items = data if isinstance(data, list) else [data]
    if not items:
        raise ConfigError("suites: empty configuration")
    return [SuiteConfig.from_dict(item) for item in items]


# ---------------------------------------------------------------------------
# reports


@dataclass
class CaseResult:
    case_id: int
    margin: float
    tolerance: float
    status: str
    spec_digest: str
    inputs: dict
    extras: dict = field(default_factory=dict)
    regenerated: int = 0


@dataclass
class SuiteReport:
    config: dict
    cases: int
    violations: int
    aborted: int
    skipped: int
    regenerated: int
    min_margin: float | None
    median_margin: float | None
    tolerance: float | None
    worst: dict | None
    equality: list
    equality_failures: int
    extras: dict
    rows: list
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.aborted == 0 and self.equality_failures == 0

    def payload(self) -> dict:
        """Deterministic part of the report (everything but timing)."""
        return {
            "config": self.config,
            "cases": self.cases,
            "violations": self.violations,
            "aborted": self.aborted,
            "skipped": self.skipped,
            "regenerated": self.regenerated,
            "min_margin": self.min_margin,
            "median_margin": self.median_margin,
            "tolerance": self.tolerance,
            "worst": self.worst,
            "equality": self.equality,
            "equality_failures": self.equality_failures,
            "extras": self.extras,
            "passed": self.passed,
        }

    def to_dict(self) -> dict:
        return {**self.payload(), "elapsed_seconds": self.elapsed}

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["case_id", "margin", "tolerance", "status", "spec_digest"])
        for r in self.rows:
            writer.writerow([r.case_id, repr(r.margin), repr(r.tolerance), r.status, r.spec_digest])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# input (de)serialization for replay


def _serialize(value):
    if isinstance(value, FunctionSpec):
        return {"function": value.to_dict()}
    if isinstance(value, np.ndarray):
        return {"vector": [float(x) for x in value]}
    if isinstance(value, (list, tuple)):
        return [_serialize(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _deserialize(value):
    if isinstance(value, dict) and "function" in value:
        return from_json(value["function"])
    if isinstance(value, dict) and "vector" in value:
        return np.array(value["vector"], dtype=float)
    if isinstance(value, list):
        return [_deserialize(v) for v in value]
    return value


def serialize_inputs(sample: dict) -> dict:
    return {k: _serialize(v) for k, v in sample.items()}


def deserialize_inputs(data: dict) -> dict:
    return {k: _deserialize(v) for k, v in data.items()}


def digest(inputs: dict) -> str:
    return hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# shared helpers


class _Recorder:
    """Wraps an energy functional so the suites can read back quadrature error estimates."""

    def __init__(self, fn: Callable):
        self.fn = fn
        self.tau_rel = 0.0

    def __call__(self, *args):
        e = self.fn(*args)
        self.tau_rel = max(self.tau_rel, e.tau_rel)
        return e.value


def _admissible(u: FunctionSpec, k: int, boundary: bool = True) -> bool:
    if boundary and not check_boundary_vanishing(u):
        return False
    return check_membership(u, k).passed


def _order_m(cfg: SuiteConfig, index: int) -> int:
    return cfg.m if cfg.m is not None else index % cfg.k


def _tau(cfg: SuiteConfig, recorded: float) -> float:
    return cfg.tolerance if cfg.tolerance is not None else recorded


def _zero(space: str, n: int) -> FunctionSpec:
    return FunctionSpec(space, n, QuadraticForm(((0.0,) * n,) * n))


def _unit_potential(space: str, n: int) -> FunctionSpec:
    # Hessian = identity: |z|^2 - 1 in C^n, (|x|^2 - 1)/2 in R^n
    return FunctionSpec(space, n, RadialPoly((1.0,) if space == "complex" else (0.5,)))


def _eq_rng(cfg: SuiteConfig) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, 2 ** 31 - 1])


def _equality_entry(name: str, margin: float, tol: float) -> dict:
    return {"name": name, "margin": margin, "tolerance": tol, "passed": bool(abs(margin) <= tol)}


# ---------------------------------------------------------------------------
# Hoelder-type inequality for the mixed energy


def _hoelder_sample(cfg, rng, index):
    return {"u": [random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness) for _ in range(cfg.k + 1)]}


def _hoelder_check(cfg, s):
    return all(_admissible(u, cfg.k) for u in s["u"])


def _hoelder_margin(cfg, specs):
    f = _Recorder(lambda *a: mixed_energy(a, cfg.quadrature))
    margins = algebraic_lemma_check(f, specs)
    value = f(*specs)
    scale = max(abs(value), abs(margins.hoelder_margin + value))
    return margins.hoelder_margin, _tau(cfg, f.tau_rel) * scale


def _hoelder_eval(cfg, s, index):
    margin, tol = _hoelder_margin(cfg, s["u"])
    return margin, tol, {}


def _hoelder_equality(cfg):
    rng = _eq_rng(cfg)
    u = random_admissible(rng, cfg.n, cfg.k, cfg.space, "radial")
    out = []
    margin, tol = _hoelder_margin(cfg, [u] * (cfg.k + 1))
    out.append(_equality_entry("all_equal", margin, EQUALITY_FACTOR * tol))
    scaled = [u.scaled(float(c)) for c in rng.uniform(0.5, 2.0, cfg.k + 1)]
    margin, tol = _hoelder_margin(cfg, scaled)
    out.append(_equality_entry("proportional", margin, EQUALITY_FACTOR * tol))
    return out


# ---------------------------------------------------------------------------
# convexity of the (k-m+1)-th root of the mixed lower energy


def _convexity_sample(cfg, rng, index):
    m = _order_m(cfg, index)
    return {
        "m": m,
        "u": random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness),
        "v": random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness),
        "w": [random_psh(rng, cfg.n, cfg.k, cfg.space, cfg.richness) for _ in range(m)],
    }


def _convexity_check(cfg, s):
    return (_admissible(s["u"], cfg.k) and _admissible(s["v"], cfg.k)
            and all(_admissible(w, cfg.k, boundary=False) for w in s["w"]))


def _convexity_margin(cfg, u, v, ws, m):
    p = cfg.k - m + 1
    f = _Recorder(lambda *a: mixed_energy(list(a) + list(ws), cfg.quadrature))
    # zero slots (v = 0) give values at roundoff level on either side of 0
    floor = 1e-9 * max(1.0, abs(f(*([u] * p))))
    margins = algebraic_lemma_check(f, [u] + [v] * (p - 1), u, v, add=lambda a, b: a + b, tol=floor)
    scale = signed_root(f(*([u] * p)), p) + signed_root(f(*([v] * p)), p)
    return margins.minkowski_margin, _tau(cfg, f.tau_rel) * max(scale, 0.0), margins.hoelder_margin


def _convexity_eval(cfg, s, index):
    margin, tol, hoelder = _convexity_margin(cfg, s["u"], s["v"], s["w"], s["m"])
    return margin, tol, {"m": s["m"], "hoelder_margin": hoelder}


def _convexity_equality(cfg):
    rng = _eq_rng(cfg)
    m = cfg.m if cfg.m is not None else cfg.k - 1
    u = random_admissible(rng, cfg.n, cfg.k, cfg.space, "radial")
    ws = [random_psh(rng, cfg.n, cfg.k, cfg.space, "radial") for _ in range(m)]
    out = []
    margin, tol, _ = _convexity_margin(cfg, u, _zero(cfg.space, cfg.n), ws, m)
    out.append(_equality_entry("v_zero", margin, EQUALITY_FACTOR * tol))
    margin, tol, _ = _convexity_margin(cfg, u, u, ws, m)
    out.append(_equality_entry("u_equals_v", margin, EQUALITY_FACTOR * tol))
    return out


# ---------------------------------------------------------------------------
# Cauchy-Schwarz for the mixed energy (complex F_k or real G_k)


def _cs_sample(cfg, rng, index):
    return {
        "u0": random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness),
        "u1": random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness),
        "v": [random_psh(rng, cfg.n, cfg.k, cfg.space, cfg.richness) for _ in range(cfg.k - 1)],
    }


def _cs_check(cfg, s):
    return (_admissible(s["u0"], cfg.k) and _admissible(s["u1"], cfg.k)
            and all(_admissible(v, cfg.k, boundary=False) for v in s["v"]))


def _cs_margin(cfg, u0, u1, vs):
    f = _Recorder(lambda *a: mixed_energy(list(a) + list(vs), cfg.quadrature))
    f00, f11, f01 = f(u0, u0), f(u1, u1), f(u0, u1)
    scale = max(abs(f00 * f11), f01 * f01)
    return f00 * f11 - f01 * f01, _tau(cfg, f.tau_rel) * scale


def _cs_eval(cfg, s, index):
    margin, tol = _cs_margin(cfg, s["u0"], s["u1"], s["v"])
    return margin, tol, {}


def _cs_equality(cfg):
    rng = _eq_rng(cfg)
    u = random_admissible(rng, cfg.n, cfg.k, cfg.space, "radial")
    vs = [random_psh(rng, cfg.n, cfg.k, cfg.space, "radial") for _ in range(cfg.k - 1)]
    out = []
    margin, tol = _cs_margin(cfg, u, u, vs)
    out.append(_equality_entry("u0_equals_u1", margin, EQUALITY_FACTOR * tol))
    margin, tol = _cs_margin(cfg, u, u.scaled(float(rng.uniform(0.5, 2.0))), vs)
    out.append(_equality_entry("proportional", margin, EQUALITY_FACTOR * tol))
    return out


# ---------------------------------------------------------------------------
# Poincare-type chain with the explicit solution v of S_k(Hess v) = 1


def _poincare_sample(cfg, rng, index):
    return {"m": _order_m(cfg, index), "u": random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness)}


def _poincare_check(cfg, s):
    return _admissible(s["u"], cfg.k)


def poincare_chain(cfg: SuiteConfig, u: FunctionSpec, m: int) -> dict:
    """Evaluate both links of the chain I_m[u] <= C F_k[u, u^m, v^(k-m)] <= C I_k[u]^a I_k[v]^b."""
    k, scheme = cfg.k, cfg.quadrature
    v = _unit_potential(cfg.space, cfg.n)
    # slack of Hess v = identity; Lemma constant C = eps^-(k-m)
    eps = cone_check(np.ones(cfg.n), k).slack
    const = eps ** (-(k - m))
    rec = _Recorder(lambda *a: mixed_energy(a, scheme))
    diag = _Recorder(lambda w, j: energy_diag(w, j, scheme))
    i_m = diag(u, m)
    i_k_u, i_k_v = diag(u, k), diag(v, k)
    mixed = rec(*([u] * (m + 1) + [v] * (k - m)))
    bound = const * i_k_u ** ((m + 1) / (k + 1)) * i_k_v ** ((k - m) / (k + 1))
    tau = _tau(cfg, max(rec.tau_rel, diag.tau_rel))
    scale = max(abs(i_m), abs(const * mixed), abs(bound))
    ratio = signed_root(i_m, m + 1) / signed_root(i_k_u, k + 1) if i_k_u > 0 else math.inf
    return {
        "I_m": i_m, "I_k": i_k_u, "I_k_v": i_k_v, "mixed": mixed, "constant": const,
        "margin_mixed": const * mixed - i_m, "margin_hoelder": bound - i_m,
        "tolerance": tau * scale, "ratio": ratio,
        "chain_constant": (const * i_k_v ** ((k - m) / (k + 1))) ** (1.0 / (m + 1)),
    }


def _poincare_eval(cfg, s, index):
    c = poincare_chain(cfg, s["u"], s["m"])
    margin = min(c["margin_mixed"], c["margin_hoelder"])
    return margin, c["tolerance"], {"m": s["m"], "ratio": c["ratio"], "chain_constant": c["chain_constant"],
                                    "margin_mixed": c["margin_mixed"], "margin_hoelder": c["margin_hoelder"]}


def _poincare_equality(cfg):
    m = cfg.m if cfg.m is not None else 0
    v = _unit_potential(cfg.space, cfg.n)
    out = []
    c = poincare_chain(cfg, v, m)
    out.append(_equality_entry("u_equals_v_mixed", c["margin_mixed"], EQUALITY_FACTOR * c["tolerance"]))
    out.append(_equality_entry("u_equals_v_hoelder", c["margin_hoelder"], EQUALITY_FACTOR * c["tolerance"]))
    c2 = poincare_chain(cfg, v.scaled(2.5), m)
    out.append(_equality_entry("u_scaled_v", min(c2["margin_mixed"], c2["margin_hoelder"]),
                               EQUALITY_FACTOR * c2["tolerance"]))
    u = random_admissible(_eq_rng(cfg), cfg.n, cfg.k, cfg.space, "radial")
    r1, r2 = poincare_chain(cfg, u, m)["ratio"], poincare_chain(cfg, u.scaled(3.0), m)["ratio"]
    out.append(_equality_entry("ratio_scale_invariance", r2 - r1, 1e-9 * max(1.0, abs(r1))))
    return out


def _poincare_extras(cfg, rows):
    ratios = [r.extras["ratio"] for r in rows if "ratio" in r.extras]
    consts = [r.extras["chain_constant"] for r in rows if "chain_constant" in r.extras]
    if not ratios:
        return {}
    return {"sup_ratio": max(ratios), "chain_constant_min": min(consts),
            "sup_within_chain_constant": bool(all(r.extras["ratio"] <= r.extras["chain_constant"] * (1 + 1e-9)
                                                  for r in rows if "ratio" in r.extras))}


# ---------------------------------------------------------------------------
# divergence-free Newton tensor of Hessians


def random_polynomial_function(rng: np.random.Generator, n: int, degree: int) -> FunctionSpec:
    """Random real polynomial function of exact total degree ``degree`` in 2..4 (not necessarily convex)."""
    q = symmetric(rng.standard_normal((n, n)))
    base = QuadraticForm(tuple(tuple(float(x) for x in row) for row in q),
                         tuple(float(x) for x in rng.standard_normal(n)), float(rng.standard_normal()))
    if degree == 2:
        return FunctionSpec("real", n, base)
    bump = random_polynomial(rng, n, degree - 2)
    return FunctionSpec("real", n, Perturbed(base, bump, 1.0))


def newton_divergence(specs, x: np.ndarray, h: float) -> tuple[np.ndarray, float]:
    """Row divergence sum_j d_j T^{ij} at x by central differences; also a magnitude scale."""
    n = x.size
    shifts = np.concatenate([x + h * np.eye(n), x - h * np.eye(n)])
    field_ = newton_tensor([real_hessian(s, shifts) for s in specs], n)
    plus, minus = field_[:n], field_[n:]
    # terms[i, j] = (T^{ij}(x + h e_j) - T^{ij}(x - h e_j)) / 2h
    j = np.arange(n)
    terms = (plus[j, :, j] - minus[j, :, j]).T / (2.0 * h)
    scale = float(np.abs(terms).sum(axis=1).max())
    return terms.sum(axis=1), max(scale, float(np.abs(field_).max()))


def _divergence_sample(cfg, rng, index):
    specs = [random_polynomial_function(rng, cfg.n, cfg.degree) for _ in range(cfg.k - 1)]
    direction = rng.standard_normal(cfg.n)
    x = direction / np.linalg.norm(direction) * rng.uniform(0.0, 0.8)
    return {"u": specs, "x": x}


def _divergence_eval(cfg, s, index):
    specs, x = s["u"], s["x"]
    r1, scale = newton_divergence(specs, x, DIV_STEP)
    r2, _ = newton_divergence(specs, x, DIV_STEP / 2)
    extrap = (4.0 * r2 - r1) / 3.0
    tol = _tau(cfg, DIV_TOL) * scale
    margin = -float(np.abs(extrap).max())
    extras = {"raw_residual": float(np.abs(r1).max()), "scale": scale}
    if np.abs(r1).max() > DIV_RATIO_FLOOR * scale:
        ratio = float(np.abs(r1).max() / np.abs(r2).max())
        extras["ratio"] = ratio
        extras["ratio_ok"] = bool(DIV_RATIO_BAND[0] <= ratio <= DIV_RATIO_BAND[1])
    return margin, tol, extras


def _divergence_equality(cfg):
    rng = _eq_rng(cfg)
    out = []
    x = rng.uniform(-0.4, 0.4, cfg.n)
    quad = [random_polynomial_function(rng, cfg.n, 2) for _ in range(cfg.k - 1)]
    r, scale = newton_divergence(quad, x, DIV_STEP)
    out.append(_equality_entry("quadratic", float(np.abs(r).max()), DIV_QUADRATIC_TOL))
    if cfg.n >= 2:
        cubic = [random_polynomial_function(rng, cfg.n, 3)]
        r, scale = newton_divergence(cubic, x, DIV_STEP)
        out.append(_equality_entry("cubic_k2", float(np.abs(r).max()), DIV_ROUNDOFF_TOL * max(1.0, scale)))
    return out


def _divergence_extras(cfg, rows):
    ratios = [r.extras["ratio"] for r in rows if "ratio" in r.extras]
    out = {"ratio_cases": len(ratios)}
    if ratios:
        out.update(ratio_min=min(ratios), ratio_max=max(ratios))
    return out


# ---------------------------------------------------------------------------
# symmetry of the mixed energy under slot permutations


def _symmetry_sample(cfg, rng, index):
    specs = [random_admissible(rng, cfg.n, cfg.k, cfg.space, cfg.richness) for _ in range(cfg.k + 1)]
    perm = [int(p) for p in rng.permutation(cfg.k + 1)]
    return {"u": specs, "permutation": perm}


def _symmetry_check(cfg, s):
    return all(_admissible(u, cfg.k) for u in s["u"])


def _symmetry_eval(cfg, s, index):
    residual = symmetry_residual(s["u"], cfg.quadrature, s["permutation"])
    return -residual, _tau(cfg, _scheme_tau(cfg, s["u"])), {}


def _scheme_tau(cfg, specs) -> float:
    return max(mixed_energy(specs, cfg.quadrature).tau_rel, cfg.quadrature.tau)


def _symmetry_equality(cfg):
    u = random_admissible(_eq_rng(cfg), cfg.n, cfg.k, cfg.space, "radial")
    tau = _tau(cfg, cfg.quadrature.tau)
    others = [random_admissible(np.random.default_rng([cfg.seed, 7, j]), cfg.n, cfg.k, cfg.space, "radial")
              for j in range(cfg.k)]
    ident = symmetry_residual([u] + others, cfg.quadrature, list(range(cfg.k + 1)))
    equal = symmetry_residual([u] * (cfg.k + 1), cfg.quadrature, list(range(cfg.k, -1, -1)))
    return [_equality_entry("identity_permutation", ident, 0.0),
            _equality_entry("all_equal", equal, EQUALITY_FACTOR * tau)]


# ---------------------------------------------------------------------------
# Garding superadditivity and the cone-slack bound


def _garding_sample(cfg, rng, index):
    return {"m": _order_m(cfg, index),
            "lam": random_cone_vector(rng, cfg.n, cfg.k),
            "a": random_cone_vector(rng, cfg.n, cfg.k),
            "b": random_cone_vector(rng, cfg.n, cfg.k)}


def _garding_margins(cfg, lam, a, b, m):
    p = cfg.k - m
    tol = _tau(cfg, GARDING_TOL)
    sup = garding_superadditivity_check(lam, a, b, m, cfg.k)
    sup_scale = max(1.0, abs(signed_root(polarized_s_k(*([lam] * m + [a + b] * p)), p)))
    extras = {"m": m, "superadditivity": sup / sup_scale}
    margins = [sup / sup_scale]
    try:
        res = lemma_mk_check(lam, a, m, cfg.k, tol)
        mk = res.margin / max(1.0, abs(res.margin + float(s_k(lam, m))))
        extras.update(lemma_mk=mk, bound_constant=res.bound_constant)
        margins.append(mk)
    except DegenerateConeError:
        extras["lemma_mk"] = "skipped"
    return min(margins), tol, extras


def _garding_eval(cfg, s, index):
    return _garding_margins(cfg, s["lam"], s["a"], s["b"], s["m"])


def _garding_equality(cfg):
    rng = _eq_rng(cfg)
    out = []
    lam = random_cone_vector(rng, cfg.n, cfg.k)
    b = random_cone_vector(rng, cfg.n, cfg.k)
    for m in range(cfg.k):
        margin = garding_superadditivity_check(lam, 2.0 * b, b, m, cfg.k)
        out.append(_equality_entry(f"proportional_m{m}", margin, EQUALITY_FACTOR * GARDING_TOL))
    a = random_cone_vector(rng, cfg.n, cfg.k)
    margin = garding_superadditivity_check(lam, a, b, cfg.k - 1, cfg.k)
    scale = abs(polarized_s_k(*([lam] * (cfg.k - 1) + [a + b])))
    out.append(_equality_entry("linear_last_slot", margin, EQUALITY_FACTOR * GARDING_TOL * max(1.0, scale)))
    boundary = np.ones(cfg.n)
    boundary[0] = 0.0
    if cfg.k == cfg.n:
        try:
            lemma_mk_check(lam, boundary, 0, cfg.k)
            out.append({"name": "boundary_mu_skip", "margin": 0.0, "tolerance": 0.0, "passed": False})
        except DegenerateConeError:
            out.append({"name": "boundary_mu_skip", "margin": 0.0, "tolerance": 0.0, "passed": True,
                        "skipped": True})
    return out


# ---------------------------------------------------------------------------
# registry and runner


@dataclass(frozen=True)
class _Suite:
    sample: Callable
    evaluate: Callable
    equality: Callable
    check: Callable | None = None
    extras: Callable | None = None


SUITES: dict[str, _Suite] = {
    "hoelder": _Suite(_hoelder_sample, _hoelder_eval, _hoelder_equality, _hoelder_check),
    "convexity": _Suite(_convexity_sample, _convexity_eval, _convexity_equality, _convexity_check),
    "cauchy_schwarz": _Suite(_cs_sample, _cs_eval, _cs_equality, _cs_check),
    "poincare_complex": _Suite(_poincare_sample, _poincare_eval, _poincare_equality, _poincare_check,
                               _poincare_extras),
    "poincare_real": _Suite(_poincare_sample, _poincare_eval, _poincare_equality, _poincare_check,
                            _poincare_extras),
    "divergence": _Suite(_divergence_sample, _divergence_eval, _divergence_equality, None, _divergence_extras),
    "symmetry": _Suite(_symmetry_sample, _symmetry_eval, _symmetry_equality, _symmetry_check),
    "garding": _Suite(_garding_sample, _garding_eval, _garding_equality),
}


def case_rng(seed: int, index: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng([seed, index, attempt])


def run_case(cfg: SuiteConfig, index: int) -> CaseResult:
    """Draw (regenerating inadmissible draws) and evaluate one case."""
    suite = SUITES[cfg.suite]
    regenerated = 0
    for attempt in range(MAX_ATTEMPTS):
        try:
            sample = suite.sample(cfg, case_rng(cfg.seed, index, attempt), index)
        except ConeMembershipError:
            regenerated += 1
            continue
        if suite.check is None or suite.check(cfg, sample):
            break
        regenerated += 1
    else:
        return CaseResult(index, math.nan, math.nan, "aborted", "", {}, {}, regenerated)
    inputs = serialize_inputs(sample)
    margin, tol, extras = suite.evaluate(cfg, sample, index)
    status = "pass" if margin >= -tol and extras.get("ratio_ok", True) else "violation"
    return CaseResult(index, float(margin), float(tol), status, digest(inputs), inputs, extras, regenerated)


def replay_case(cfg: SuiteConfig, inputs: dict, index: int = 0) -> float:
    """Re-evaluate the margin of serialized case inputs (e.g. a report's worst case)."""
    return float(SUITES[cfg.suite].evaluate(cfg, deserialize_inputs(inputs), index)[0])


def _case_worker(args):
    cfg, index = args
    return run_case(cfg, index)


def run_suite(cfg: SuiteConfig, jobs: int = 1) -> SuiteReport:
    start = time.perf_counter()
    suite = SUITES[cfg.suite]
    tasks = [(cfg, i) for i in range(cfg.samples)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_case_worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_case_worker(t) for t in tasks]
    rows.sort(key=lambda r: r.case_id)
    done = [r for r in rows if r.status != "aborted"]
    margins = [r.margin for r in done]
    worst = None
    if done:
        w = min(done, key=lambda r: (r.margin + r.tolerance, r.case_id))
        worst = {"case_id": w.case_id, "margin": w.margin, "tolerance": w.tolerance, "inputs": w.inputs}
    equality = suite.equality(cfg)
    extras = suite.extras(cfg, done) if suite.extras else {}
    skipped = sum(1 for r in done if r.extras.get("lemma_mk") == "skipped")
    return SuiteReport(
        config=cfg.to_dict(),
        cases=len(rows),
        violations=sum(1 for r in rows if r.status == "violation"),
        aborted=sum(1 for r in rows if r.status == "aborted"),
        skipped=skipped,
        regenerated=sum(r.regenerated for r in rows),
        min_margin=min(margins) if margins else None,
        median_margin=statistics.median(margins) if margins else None,
        tolerance=max((r.tolerance for r in done), default=None),
        worst=worst,
        equality=equality,
        equality_failures=sum(1 for e in equality if not e["passed"]),
        extras=extras,
        rows=rows,
        elapsed=time.perf_counter() - start,
    )


def with_seed(cfg: SuiteConfig, seed: int) -> SuiteConfig:
    return replace(cfg, seed=seed)
