"""Smooth test functions on the unit ball of C^n or R^n.

Every function is a global polynomial formula, so values and Hessians are
exact anywhere and finite differences need no boundary stencils.

Points are real arrays of shape ``(..., d)``. In complex space ``d = 2n``
with layout ``(x_1..x_n, y_1..y_n)`` for ``z_j = x_j + i y_j``; complex
``(..., n)`` arrays are accepted and converted. ``t`` denotes ``|z|^2`` or
``|x|^2`` throughout.

JSON schema (round-trips through :func:`to_json` / :func:`from_json`)::

    {"space": "complex" | "real", "n": N, "variant": V}
    V = {"type": "radial_poly", "coeffs": [b1, ..., bM], "shift": c?}
          phi(t) = sum_m b_m (t^m - 1) + c
      | {"type": "quadratic_form", "matrix": [[..]] | {"re": [[..]], "im": [[..]]},
         "linear": [..]?, "shift": c?}
          complex: sum_jk Q_jk z_j conj(z_k) + b.w + c   (complex Hessian = Q)
          real:    x^T Q x / 2 + b.x + c                   (Hessian = Q)
      | {"type": "perturbed", "base": V, "bump": {"exponents": [[..]], "coeffs": [..]},
         "amplitude": eps}
          base + eps * p(w) * (t - 1)
      | {"type": "linear_combination", "specs": [V, ...], "weights": [w, ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Union

import numpy as np

from .exceptions import InvalidInputError
from .symfun import hermitian, s_k_all, s_k_matrix, symmetric

FD_STEP = 1e-4
MEMBERSHIP_TOL = 1e-9


# ---------------------------------------------------------------------------
# real polynomials in the ambient coordinates


@dataclass(frozen=True)
class Polynomial:
    exponents: tuple[tuple[int, ...], ...]
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.exponents) != len(self.coeffs):
            raise InvalidInputError("polynomial exponents and coeffs differ in length")
        if len({len(e) for e in self.exponents}) > 1:
            raise InvalidInputError("polynomial exponents have inconsistent dimension")

    @property
    def dim(self) -> int | None:
        return len(self.exponents[0]) if self.exponents else None

    @property
    def degree(self) -> int:
        return max((sum(e) for e, c in zip(self.exponents, self.coeffs) if c != 0.0), default=0)

    @cached_property
    def _terms(self):
        return [(c, [(a, p) for a, p in enumerate(e) if p]) for e, c in zip(self.exponents, self.coeffs) if c != 0.0]

    def __call__(self, w: np.ndarray) -> np.ndarray:
        out = np.zeros(w.shape[:-1])
        for c, factors in self._terms:
            mono = c
            for a, p in factors:
                mono = mono * (w[..., a] if p == 1 else w[..., a] ** p)
            out = out + mono
        return out

    def derivative(self, axis: int) -> "Polynomial":
        exps, coeffs = [], []
        for e, c in zip(self.exponents, self.coeffs):
            if e[axis] > 0 and c != 0.0:
                de = list(e)
                de[axis] -= 1
                exps.append(tuple(de))
                coeffs.append(c * e[axis])
        if not exps:
            exps, coeffs = [tuple([0] * len(self.exponents[0]))], [0.0]
        return Polynomial(tuple(exps), tuple(coeffs))

    @cached_property
    def _grad_polys(self):
        return [self.derivative(a) for a in range(self.dim)]

    @cached_property
    def _hess_polys(self):
        return [[g.derivative(b) for b in range(self.dim)] for g in self._grad_polys]

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return np.stack([g(w) for g in self._grad_polys], axis=-1)

    def hessian(self, w: np.ndarray) -> np.ndarray:
        return np.stack([np.stack([h(w) for h in row], axis=-1) for row in self._hess_polys], axis=-2)

    def to_dict(self) -> dict:
        return {"exponents": [list(e) for e in self.exponents], "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, d: dict) -> "Polynomial":
        return cls(tuple(tuple(int(x) for x in e) for e in d["exponents"]),
                   tuple(float(c) for c in d["coeffs"]))


def _t(w):
    return np.einsum("...i,...i->...", w, w)


# ---------------------------------------------------------------------------
# function variants
#
# Each variant evaluates on real ambient coordinates w of shape (..., d) and
# reports a total degree and an angular-degree bound, which the quadrature
# uses to pick an exact product rule.


@dataclass(frozen=True)
class RadialPoly:
    coeffs: tuple[float, ...]
    shift: float = 0.0

    def phi(self, t, order: int = 0):
        """phi(t) or its first/second derivative in t."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t) if order else np.full_like(t, self.shift)
        for m, b in enumerate(self.coeffs, start=1):
            if order == 0:
                out = out + b * (t ** m - 1.0)
            elif m >= order:
                out = out + b * math.perm(m, order) * t ** (m - order)
        return out

    def value(self, w, cplx):
        return self.phi(_t(w))

    def real_hessian(self, w, cplx):
        t = _t(w)
        d1, d2 = self.phi(t, 1), self.phi(t, 2)
        eye = np.eye(w.shape[-1])
        return 2.0 * d1[..., None, None] * eye + 4.0 * d2[..., None, None] * w[..., :, None] * w[..., None, :]

    @property
    def degree(self):
        return 2 * max((m for m, b in enumerate(self.coeffs, 1) if b != 0.0), default=0)

    angular_degree = 0
    is_radial = True

    def to_dict(self):
        d = {"type": "radial_poly", "coeffs": list(self.coeffs)}
        if self.shift != 0.0:
            d["shift"] = self.shift
        return d


@dataclass(frozen=True)
class QuadraticForm:
    matrix: tuple[tuple[complex, ...], ...]
    linear: tuple[float, ...] = ()
    shift: float = 0.0

    @cached_property
    def _q(self):
        q = np.array(self.matrix, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise InvalidInputError("quadratic_form matrix must be square")
        if not np.allclose(q, q.conj().T, rtol=0, atol=1e-14 * max(1.0, np.abs(q).max(initial=0))):
            raise InvalidInputError("quadratic_form matrix must be Hermitian/symmetric")
        return q

    def _real_block(self, cplx):
        q = self._q
        if not cplx:
            return q.real
        p, r = q.real, q.imag
        # Re sum Q_jk z_j conj(z_k) = x^T P x + y^T P y + 2 x^T R y
        return 2.0 * np.block([[p, r], [r.T, p]])

    def value(self, w, cplx):
        h = self._real_block(cplx)
        out = 0.5 * np.einsum("...i,ij,...j->...", w, h, w) + self.shift
        if self.linear:
            out = out + w @ np.asarray(self.linear, dtype=float)
        return out

    def real_hessian(self, w, cplx):
        h = self._real_block(cplx)
        return np.broadcast_to(h, w.shape[:-1] + h.shape).copy()

    @property
    def degree(self):
        if np.any(self._q != 0):
            return 2
        return 1 if any(c != 0.0 for c in self.linear) else 0

    @property
    def angular_degree(self):
        return self.degree

    @property
    def is_radial(self):
        q = self._q
        return not any(self.linear) and np.array_equal(q, q[0, 0] * np.eye(q.shape[0]))

    def to_dict(self):
        q = self._q
        mat = q.real.tolist() if not np.any(q.imag) else {"re": q.real.tolist(), "im": q.imag.tolist()}
        d = {"type": "quadratic_form", "matrix": mat}
        if self.linear:
            d["linear"] = list(self.linear)
        if self.shift != 0.0:
            d["shift"] = self.shift
        return d


@dataclass(frozen=True)
class Perturbed:
    base: "Variant"
    bump: Polynomial
    amplitude: float

    def value(self, w, cplx):
        return self.base.value(w, cplx) + self.amplitude * self.bump(w) * (_t(w) - 1.0)

    def real_hessian(self, w, cplx):
        h = self.base.real_hessian(w, cplx)
        if self.amplitude == 0.0:
            return h
        eps = self.amplitude
        cross = (2.0 * eps) * self.bump.gradient(w)[..., :, None] * w[..., None, :]
        h += cross
        h += np.swapaxes(cross, -1, -2)
        diag = np.einsum("...ii->...i", h)
        diag += (2.0 * eps) * self.bump(w)[..., None]
        if self.bump.degree >= 2:
            h += (eps * (_t(w) - 1.0))[..., None, None] * self.bump.hessian(w)
        return h

    @property
    def degree(self):
        if self.amplitude == 0.0:
            return self.base.degree
        return max(self.base.degree, self.bump.degree + 2)

    @property
    def angular_degree(self):
        if self.amplitude == 0.0:
            return self.base.angular_degree
        return max(self.base.angular_degree, self.bump.degree)

    @property
    def is_radial(self):
        return self.base.is_radial and (self.amplitude == 0.0 or not any(self.bump.coeffs))

    def to_dict(self):
        return {"type": "perturbed", "base": self.base.to_dict(), "bump": self.bump.to_dict(),
                "amplitude": self.amplitude}


@dataclass(frozen=True)
class LinearCombination:
    specs: tuple["Variant", ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.specs) != len(self.weights):
            raise InvalidInputError("linear_combination needs one weight per spec")
        if any(w < 0 for w in self.weights):
            raise InvalidInputError("linear_combination weights must be non-negative")

    def _active(self):
        return [(w, s) for w, s in zip(self.weights, self.specs) if w != 0.0]

    def value(self, w, cplx):
        out = np.zeros(w.shape[:-1])
        for c, s in self._active():
            out = out + c * s.value(w, cplx)
        return out

    def real_hessian(self, w, cplx):
        out = np.zeros(w.shape[:-1] + (w.shape[-1], w.shape[-1]))
        for c, s in self._active():
            out = out + c * s.real_hessian(w, cplx)
        return out

    @property
    def degree(self):
        return max((s.degree for _, s in self._active()), default=0)

    @property
    def angular_degree(self):
        return max((s.angular_degree for _, s in self._active()), default=0)

    @property
    def is_radial(self):
        return all(s.is_radial for _, s in self._active())

    def to_dict(self):
        return {"type": "linear_combination", "specs": [s.to_dict() for s in self.specs],
                "weights": list(self.weights)}


Variant = Union[RadialPoly, QuadraticForm, Perturbed, LinearCombination]


@dataclass(frozen=True)
class FunctionSpec:
    space: str
    n: int
    variant: Variant = field(repr=True)

    def __post_init__(self):
        if self.space not in ("complex", "real"):
            raise InvalidInputError(f"space must be 'complex' or 'real', got {self.space!r}")
        if int(self.n) < 1:
            raise InvalidInputError("n must be >= 1")

    @property
    def complex(self) -> bool:
        return self.space == "complex"

    @property
    def dim(self) -> int:
        """Real ambient dimension."""
        return 2 * self.n if self.complex else self.n

    @property
    def degree(self) -> int:
        return self.variant.degree

    @property
    def angular_degree(self) -> int:
        return self.variant.angular_degree

    @property
    def is_radial(self) -> bool:
        return bool(self.variant.is_radial)

    def scaled(self, c: float) -> "FunctionSpec":
        return FunctionSpec(self.space, self.n, LinearCombination((self.variant,), (float(c),)))

    def __add__(self, other: "FunctionSpec") -> "FunctionSpec":
        if (self.space, self.n) != (other.space, other.n):
            raise InvalidInputError("cannot add functions on different spaces")
        return FunctionSpec(self.space, self.n, LinearCombination((self.variant, other.variant), (1.0, 1.0)))

    def to_dict(self) -> dict:
        return {"space": self.space, "n": self.n, "variant": self.variant.to_dict()}


# ---------------------------------------------------------------------------
# serialization


def _variant_from_dict(d: dict) -> Variant:
    kind = d.get("type")
    if kind == "radial_poly":
        return RadialPoly(tuple(float(c) for c in d["coeffs"]), float(d.get("shift", 0.0)))
    if kind == "quadratic_form":
        mat = d["matrix"]
        if isinstance(mat, dict):
            q = np.array(mat["re"], dtype=float) + 1j * np.array(mat["im"], dtype=float)
            rows = tuple(tuple(complex(x) for x in row) for row in q)
        else:
            rows = tuple(tuple(float(x) for x in row) for row in mat)
        return QuadraticForm(rows, tuple(float(x) for x in d.get("linear", ())), float(d.get("shift", 0.0)))
    if kind == "perturbed":
        return Perturbed(_variant_from_dict(d["base"]), Polynomial.from_dict(d["bump"]), float(d["amplitude"]))
    if kind == "linear_combination":
        return LinearCombination(tuple(_variant_from_dict(s) for s in d["specs"]),
                                 tuple(float(w) for w in d["weights"]))
    raise InvalidInputError(f"unknown function variant type {kind!r}")


def from_json(data) -> FunctionSpec:
    """Parse a FunctionSpec from a JSON string or an already-decoded dict."""
    d = json.loads(data) if isinstance(data, (str, bytes)) else data
    try:
        spec = FunctionSpec(d["space"], int(d["n"]), _variant_from_dict(d["variant"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed function spec: {exc}") from exc
    _check_dims(spec)
    return spec


def to_json(spec: FunctionSpec) -> str:
    return json.dumps(spec.to_dict())


def _check_dims(spec: FunctionSpec) -> None:
    def walk(v):
        if isinstance(v, QuadraticForm):
            if v._q.shape[0] != spec.n:
                raise InvalidInputError(f"quadratic_form matrix is {v._q.shape[0]}x{v._q.shape[0]}, n={spec.n}")
            if v.linear and len(v.linear) != spec.dim:
                raise InvalidInputError(f"linear term must have length {spec.dim}")
        elif isinstance(v, Perturbed):
            if v.bump.dim not in (None, spec.dim):
                raise InvalidInputError(f"bump polynomial must be in {spec.dim} variables")
            walk(v.base)
        elif isinstance(v, LinearCombination):
            for s in v.specs:
                walk(s)

    walk(spec.variant)


# ---------------------------------------------------------------------------
# evaluation and Hessians


def as_points(u: FunctionSpec, points) -> np.ndarray:
    """Real ambient coordinates for ``points`` (complex (.., n) arrays are split into x, y)."""
    p = np.asarray(points)
    if np.iscomplexobj(p):
        if p.shape[-1] != u.n or not u.complex:
            raise InvalidInputError(f"complex points must have last axis n={u.n} in complex space")
        p = np.concatenate([p.real, p.imag], axis=-1)
    p = np.asarray(p, dtype=float)
    if p.ndim == 0 or p.shape[-1] != u.dim:
        raise InvalidInputError(f"point dimension {p.shape[-1:]} does not match {u.space}({u.n})")
    return p


def evaluate(u: FunctionSpec, points):
    """Exact value of ``u`` at one point or a batch."""
    w = as_points(u, points)
    out = u.variant.value(w, u.complex)
    return float(out) if np.ndim(out) == 0 else out


def _fd_hessian(u: FunctionSpec, w: np.ndarray, h: float) -> np.ndarray:
    d = w.shape[-1]
    f = lambda x: u.variant.value(x, u.complex)  # noqa: E731
    f0 = f(w)
    out = np.empty(w.shape[:-1] + (d, d))
    eye = np.eye(d) * h
    for a in range(d):
        out[..., a, a] = (f(w + eye[a]) - 2.0 * f0 + f(w - eye[a])) / h ** 2
        for b in range(a + 1, d):
            val = (f(w + eye[a] + eye[b]) - f(w + eye[a] - eye[b])
                   - f(w - eye[a] + eye[b]) + f(w - eye[a] - eye[b])) / (4.0 * h ** 2)
            out[..., a, b] = out[..., b, a] = val
    return out


def ambient_hessian(u: FunctionSpec, points, method: str = "analytic", h: float = FD_STEP) -> np.ndarray:
    """Real Hessian in the ambient coordinates (2n x 2n in complex space)."""
    w = as_points(u, points)
    if method == "analytic":
        return symmetric(u.variant.real_hessian(w, u.complex))
    if method == "fd":
        return symmetric(_fd_hessian(u, w, h))
    raise InvalidInputError(f"unknown Hessian method {method!r}")


def complexify(hess: np.ndarray, n: int) -> np.ndarray:
    """Complex Hessian d^2u/dz_j dzbar_k from the real 2n x 2n Hessian."""
    xx, yy = hess[..., :n, :n], hess[..., n:, n:]
    xy, yx = hess[..., :n, n:], hess[..., n:, :n]
    return hermitian(0.25 * ((xx + yy) + 1j * (xy - yx)))


def complex_hessian(u: FunctionSpec, points, method: str = "analytic", h: float = FD_STEP) -> np.ndarray:
    if not u.complex:
        raise InvalidInputError("complex_hessian needs a complex-space function")
    return complexify(ambient_hessian(u, points, method, h), u.n)


def real_hessian(u: FunctionSpec, points, method: str = "analytic", h: float = FD_STEP) -> np.ndarray:
    if u.complex:
        raise InvalidInputError("real_hessian needs a real-space function")
    return ambient_hessian(u, points, method, h)


def hessian(u: FunctionSpec, points, method: str = "analytic") -> np.ndarray:
    """Complex Hessian in complex space, real Hessian in real space."""
    return complex_hessian(u, points, method) if u.complex else real_hessian(u, points, method)


def radial_spectrum(u: FunctionSpec, t) -> np.ndarray:
    """Closed-form Hessian eigenvalues of a radial polynomial at |.|^2 = t.

    complex: (phi', ..., phi', phi' + t phi''); real: (2phi', ..., 2phi', 2phi' + 4t phi'').
    """
    v = u.variant
    if not isinstance(v, RadialPoly):
        raise InvalidInputError("radial_spectrum needs a radial_poly function")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidInputError("t must be non-negative")
    d1, d2 = v.phi(t, 1), v.phi(t, 2)
    if u.complex:
        flat, top = d1, d1 + t * d2
    else:
        flat, top = 2.0 * d1, 2.0 * d1 + 4.0 * t * d2
    out = np.repeat(flat[..., None], u.n, axis=-1)
    out[..., -1] = top
    return out


def ray_points(u: FunctionSpec, t) -> np.ndarray:
    """Points sqrt(t) * e_1; radial integrands only need these representatives."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w = np.zeros(t.shape + (u.dim,))
    w[..., 0] = np.sqrt(t)
    return w


# ---------------------------------------------------------------------------
# admissibility


class MembershipReport(NamedTuple):
    k: int
    min_slack: float
    worst_point: tuple
    passed: bool


def check_membership(u: FunctionSpec, k: int, sampler=None, tol: float = MEMBERSHIP_TOL) -> MembershipReport:
    """Worst Gamma_k slack of the Hessian spectrum over the closed ball.

    Radial functions are sampled along a ray (their spectrum depends on t
    only); others at the sampler's membership nodes, which include the
    unit sphere.
    """
    from .quadrature import RadialGauss

    sampler = sampler or RadialGauss()
    if not 1 <= k <= u.n:
        raise InvalidInputError(f"order k={k} outside [1, {u.n}]")
    if u.is_radial:
        w = ray_points(u, sampler.membership_radii())
    else:
        w = sampler.membership_points(u.dim)
    hess = hessian(u, w)
    vals = np.stack([s_k_matrix(hess, j) for j in range(1, k + 1)], axis=-1)
    least = vals.min(axis=-1)
    i = int(np.argmin(least))
    min_slack = float(least[i])
    return MembershipReport(k, min_slack, tuple(float(x) for x in w[i]), min_slack >= -tol)


def spectrum_membership(lam, k: int, tol: float = MEMBERSHIP_TOL) -> bool:
    return bool(np.all(s_k_all(lam, k) >= -tol))


@lru_cache(maxsize=None)
def sphere_samples(d: int, count: int = 1000, seed: int = 0) -> np.ndarray:
    """Product-of-angles lattice on S^{d-1} plus seeded random points."""
    from .quadrature import sphere_rule

    degree = 1
    lattice = sphere_rule(d, degree)[0]
    while lattice.shape[0] < count // 2 and degree < 64:
        degree += 1
        lattice = sphere_rule(d, degree)[0]
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([lattice, g])


def check_boundary_vanishing(u: FunctionSpec, tol: float = 1e-12) -> bool:
    """True when |u| <= tol on at least 10^3 points of the unit sphere."""
    w = sphere_samples(u.dim)
    return bool(np.max(np.abs(u.variant.value(w, u.complex))) <= tol)


# ---------------------------------------------------------------------------
# random generators


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_radial_variant(rng: np.random.Generator, max_terms: int = 4) -> RadialPoly:
    m = int(rng.integers(1, max_terms + 1))
    return RadialPoly(tuple(float(x) for x in rng.exponential(1.0, m)))


def random_polynomial(rng: np.random.Generator, dim: int, degree: int) -> Polynomial:
    """Dense random polynomial with standard-normal coefficients, total degree <= degree."""
    exps = [e for e in _exponents(dim, degree)]
    coeffs = tuple(float(x) for x in rng.standard_normal(len(exps)))
    return Polynomial(tuple(exps), coeffs)


@lru_cache(maxsize=None)
def _exponents(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    out = []

    def rec(prefix, left, remaining):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for a in range(left + 1):
            rec(prefix + [a], left - a, remaining - 1)

    rec([], degree, dim)
    return tuple(sorted(out, key=lambda e: (sum(e), tuple(-x for x in e))))


def random_admissible(seed, n: int, k: int, space: str = "complex", richness: str = "radial",
                      sampler=None) -> FunctionSpec:
    """Random member of P^0_k on the unit ball, reproducible from ``seed``.

    radial: phi(t) = sum b_m (t^m - 1) with up to four exponential(1)
    coefficients, which is plurisubharmonic (convex) and hence k-admissible.
    perturbed: adds eps * p(w) * (t - 1) with a random affine p, halving eps
    from 0.5 until the membership check passes; below 1e-6 it falls back to
    the radial base.
    """
    rng = _rng(seed)
    base = random_radial_variant(rng)
    spec = FunctionSpec(space, n, base)
    if richness == "radial":
        return spec
    if richness != "perturbed":
        raise InvalidInputError(f"unknown richness {richness!r}")
    bump = random_polynomial(rng, spec.dim, 1)
    eps = 0.5
    while eps >= 1e-6:
        cand = FunctionSpec(space, n, Perturbed(base, bump, eps))
        if check_membership(cand, k, sampler).passed:
            return cand
        eps *= 0.5
    return spec


def random_psh(seed, n: int, k: int, space: str = "complex", richness: str = "radial",
               sampler=None) -> FunctionSpec:
    """Random member of P_k without a boundary condition: an admissible function plus a random constant."""
    rng = _rng(seed)
    u = random_admissible(rng, n, k, space, richness, sampler)
    lift = float(rng.uniform(0.0, 2.0))
    return FunctionSpec(space, n, LinearCombination((u.variant, QuadraticForm(((0.0,) * n,) * n, (), lift)),
                                                    (1.0, 1.0)))
