"""Hessian energy integrals on the unit ball.

All integrals are against Lebesgue measure with the pointwise integrand
``(-u_0) * S~_k(Hess u_1, ..., Hess u_k)``, where Hess is the complex Hessian
d^2u/dz_j dzbar_k in C^n and the ordinary Hessian in R^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exceptions import BoundaryConditionError, InvalidInputError, OrderError
from .funcspace import FunctionSpec, RadialPoly, check_boundary_vanishing, hessian, radial_spectrum
from .quadrature import QuadratureScheme, RadialGauss, Rule, scheme_from_config
from .symfun import _sum_principal_minors, polarize, s_k

RESIDUAL_FLOOR = 1e-300


@dataclass(frozen=True)
class EnergyValue:
    value: float
    tau: float
    scheme: QuadratureScheme
    tau_rel: float

    def to_dict(self) -> dict:
        return {"value": self.value, "tau": self.tau, "scheme": self.scheme.to_config()}


def _finish(terms: np.ndarray, tau_rel: float, scheme) -> EnergyValue:
    # fsum is exactly rounded, so the result does not depend on node order
    value = math.fsum(terms)
    tau = tau_rel * math.fsum(np.abs(terms))
    return EnergyValue(value, tau, scheme, tau_rel)


def _validate(specs: Sequence[FunctionSpec], space: str | None) -> tuple[str, int]:
    if not specs:
        raise InvalidInputError("need at least the weight function u_0")
    kinds = {(s.space, s.n) for s in specs}
    if len(kinds) > 1:
        raise InvalidInputError(f"all functions must share one space, got {sorted(kinds)}")
    sp, n = kinds.pop()
    if space is not None and sp != space:
        raise InvalidInputError(f"expected {space}-space functions, got {sp}")
    k = len(specs) - 1
    if k > n:
        raise OrderError(f"order k={k} exceeds n={n}")
    return sp, n


def _select_rule(specs: Sequence[FunctionSpec], scheme: QuadratureScheme) -> Rule:
    u0, slots = specs[0], specs[1:]
    space, n, d = u0.space, u0.n, u0.dim
    if isinstance(scheme, RadialGauss):
        if all(s.is_radial for s in specs):
            return scheme.radial_rule(space, n)
        degree = u0.degree + sum(max(s.degree - 2, 0) for s in slots)
        angular = u0.angular_degree + sum(min(s.angular_degree + 2, max(s.degree - 2, 0)) for s in slots)
        return scheme.ball_rule(d, degree, angular)
    return scheme.ball_rule(d)


_RULE_POINTS: dict[tuple, np.ndarray] = {}


def _rule_for(specs: Sequence[FunctionSpec], scheme) -> Rule:
    rule = _select_rule(specs, scheme)
    _RULE_POINTS.setdefault(rule.key, rule.points)
    return rule


@lru_cache(maxsize=64)
def _hessian_at(spec: FunctionSpec, rule_key: tuple) -> np.ndarray:
    return hessian(spec, _RULE_POINTS[rule_key])


@lru_cache(maxsize=64)
def _value_at(spec: FunctionSpec, rule_key: tuple) -> np.ndarray:
    return spec.variant.value(_RULE_POINTS[rule_key], spec.complex)


def _mixed(specs: Sequence[FunctionSpec], scheme, space: str | None) -> EnergyValue:
    scheme = scheme_from_config(scheme) if isinstance(scheme, dict) else scheme
    _validate(specs, space)
    rule = _rule_for(specs, scheme)
    weight = -_value_at(specs[0], rule.key)
    slots = specs[1:]
    k = len(slots)
    if k == 0:
        return _finish(rule.weights * weight, rule.tau, scheme)
    distinct, counts = [], []
    for s in slots:
        if s in distinct:
            counts[distinct.index(s)] += 1
        else:
            distinct.append(s)
            counts.append(1)
    hess = [_hessian_at(s, rule.key) for s in distinct]
    n = specs[0].n
    pol = np.real(polarize(hess, counts, lambda x: _sum_principal_minors(x, k))) / math.comb(n, k)
    return _finish(rule.weights * weight * pol, rule.tau, scheme)


def mixed_energy_complex(specs: Sequence[FunctionSpec], scheme: QuadratureScheme | None = None) -> EnergyValue:
    """F_k[u_0, ..., u_k] with k = len(specs) - 1."""
    return _mixed(list(specs), scheme or RadialGauss(), "complex")


def mixed_energy_real(specs: Sequence[FunctionSpec], scheme: QuadratureScheme | None = None) -> EnergyValue:
    """G_k[u_0, ..., u_k] with k = len(specs) - 1."""
    return _mixed(list(specs), scheme or RadialGauss(), "real")


def mixed_energy(specs: Sequence[FunctionSpec], scheme: QuadratureScheme | None = None) -> EnergyValue:
    """F_k or G_k depending on the space of the arguments."""
    return _mixed(list(specs), scheme or RadialGauss(), None)


def _energy_diag(u: FunctionSpec, k: int, scheme, space: str) -> EnergyValue:
    scheme = scheme or RadialGauss()
    if u.space != space:
        raise InvalidInputError(f"expected a {space}-space function")
    if not 0 <= k <= u.n:
        raise OrderError(f"order k={k} outside [0, {u.n}]")
    if isinstance(scheme, RadialGauss) and isinstance(u.variant, RadialPoly):
        # 1-D path through the closed-form radial spectrum
        rule = scheme.radial_rule(u.space, u.n)
        t = np.einsum("ij,ij->i", rule.points, rule.points)
        sk = s_k(radial_spectrum(u, t), k)
        return _finish(rule.weights * (-u.variant.phi(t)) * sk, rule.tau, scheme)
    return _mixed([u] * (k + 1), scheme, space)


def energy_Ik(u: FunctionSpec, k: int, scheme: QuadratureScheme | None = None) -> EnergyValue:
    """I_k[u] = F_k[u, ..., u]; k = 0 gives the plain integral of -u."""
    return _energy_diag(u, k, scheme, "complex")


def energy_Jk(u: FunctionSpec, k: int, scheme: QuadratureScheme | None = None) -> EnergyValue:
    """J_k[u] = G_k[u, ..., u]."""
    return _energy_diag(u, k, scheme, "real")


def energy_diag(u: FunctionSpec, k: int, scheme: QuadratureScheme | None = None) -> EnergyValue:
    """I_k or J_k depending on the space of ``u``."""
    return _energy_diag(u, k, scheme, u.space)


def mixed_lower_energy(u: FunctionSpec, vs: Sequence[FunctionSpec], k: int,
                       scheme: QuadratureScheme | None = None) -> EnergyValue:
    """Integral of (-u) S~_k(Hess u x (k-m), Hess v_1, ..., Hess v_m), m = len(vs)."""
    m = len(vs)
    if not 0 <= m < k:
        raise OrderError(f"need 0 <= m < k, got m={m}, k={k}")
    return _mixed([u] * (k - m + 1) + list(vs), scheme or RadialGauss(), None)


def symmetry_residual(specs: Sequence[FunctionSpec], scheme: QuadratureScheme | None,
                      permutation: Sequence[int], boundary_tol: float = 1e-12) -> float:
    """Relative change of the mixed energy when its k+1 slots are permuted."""
    specs = list(specs)
    perm = list(permutation)
    if sorted(perm) != list(range(len(specs))):
        raise InvalidInputError(f"{perm} is not a permutation of {len(specs)} slots")
    for i, s in enumerate(specs):
        if not check_boundary_vanishing(s, boundary_tol):
            raise BoundaryConditionError(f"argument {i} does not vanish on the unit sphere")
    if perm == list(range(len(specs))):
        return 0.0
    base = mixed_energy(specs, scheme).value
    permuted = mixed_energy([specs[p] for p in perm], scheme).value
    return abs(permuted - base) / max(abs(base), RESIDUAL_FLOOR)
