"""Quadrature schemes on the unit ball of R^d (d = 2n for C^n).

``RadialGauss`` integrates radial integrands with a 1-D Gauss-Legendre rule
in t = |z|^2 (complex) or r = |x| (real). Non-radial polynomial integrands
are handled by tensoring a Gauss-Legendre rule in r with an exact
hyperspherical product rule on S^{d-1}; node counts come from the
integrand's degree bounds, so such integrals are exact up to roundoff as
long as the radial count stays within ``nodes``.

``Grid`` uses centers of an axis-aligned lattice of R^d cells over
[-1, 1]^d that fall strictly inside the ball. Its error is dominated by
boundary cells and is modelled as max(1e-3, 10/R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np
from scipy.special import roots_jacobi

from .exceptions import ConfigError

RADIAL_TAU = 1e-10
INEXACT_TAU = 1e-6


class Rule(NamedTuple):
    key: tuple
    points: np.ndarray
    weights: np.ndarray
    tau: float


def sphere_area(d: int) -> float:
    """Surface measure of S^{d-1} in R^d (S^0 counts two points)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@lru_cache(maxsize=None)
def gauss_legendre_01(count: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def sphere_rule(d: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^{d-1}, exact for polynomials of degree <= ``degree``.

    s = (u, sqrt(1-u^2) s') with s' in S^{d-2} and surface element
    (1-u^2)^((d-3)/2) du ds'; u uses Gauss-Jacobi nodes, the circle uses
    ``degree + 1`` equally spaced angles.
    """
    degree = max(int(degree), 0)
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        q = degree + 1
        theta = 2.0 * math.pi * np.arange(q) / q
        return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.full(q, 2.0 * math.pi / q)
    alpha = (d - 3) / 2.0
    u, wu = roots_jacobi(degree // 2 + 1, alpha, alpha)
    inner, winner = sphere_rule(d - 1, degree)
    scale = np.sqrt(1.0 - u ** 2)
    pts = np.concatenate([
        np.repeat(u, inner.shape[0])[:, None],
        (scale[:, None, None] * inner[None, :, :]).reshape(-1, d - 1),
    ], axis=1)
    return pts, np.outer(wu, winner).ravel()


@lru_cache(maxsize=32)
def _product_ball_rule(d: int, radial_count: int, angular_degree: int) -> tuple[np.ndarray, np.ndarray]:
    r, wr = gauss_legendre_01(radial_count)
    s, ws = sphere_rule(d, angular_degree)
    pts = (r[:, None, None] * s[None, :, :]).reshape(-1, d)
    wts = np.outer(wr * r ** (d - 1), ws).ravel()
    return pts, wts


@lru_cache(maxsize=8)
def _grid_cells(d: int, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    c = -1.0 + (2.0 * np.arange(resolution) + 1.0) / resolution
    pts = c[:, None]
    for _ in range(d - 1):
        # prune as coordinates are appended: partial |x|^2 only grows
        pts = np.concatenate([np.repeat(pts, resolution, axis=0), np.tile(c, pts.shape[0])[:, None]], axis=1)
        pts = pts[np.einsum("ij,ij->i", pts, pts) < 1.0]
    pts = pts[np.einsum("ij,ij->i", pts, pts) < 1.0]
    return pts, np.full(pts.shape[0], (2.0 / resolution) ** d)


def _radial_count(degree: int, d: int) -> int:
    # integrand along a ray has degree <= ``degree``; the Jacobian adds r^(d-1)
    return max(1, math.ceil((degree + d) / 2))


@dataclass(frozen=True)
class RadialGauss:
    nodes: int = 64
    kind = "radial_gauss"

    def __post_init__(self):
        if int(self.nodes) < 1:
            raise ConfigError("quadrature.nodes: must be >= 1")

    @property
    def tau(self) -> float:
        return RADIAL_TAU

    def radial_rule(self, space: str, n: int) -> Rule:
        """Nodes along the ray t*e_1 (points in ambient coordinates) with volume weights."""
        x, w = gauss_legendre_01(self.nodes)
        if space == "complex":
            d = 2 * n
            # dV = pi^n/(n-1)! t^(n-1) dt on C^n
            pts = np.zeros((self.nodes, d))
            pts[:, 0] = np.sqrt(x)
            wts = w * x ** (n - 1) * math.pi ** n / math.factorial(n - 1)
        else:
            d = n
            pts = np.zeros((self.nodes, d))
            pts[:, 0] = x
            wts = w * x ** (n - 1) * sphere_area(n)
        return Rule(("radial", space, n, self.nodes), pts, wts, RADIAL_TAU)

    def ball_rule(self, d: int, degree: int, angular_degree: int) -> Rule:
        needed = _radial_count(degree, d)
        count = min(needed, self.nodes)
        pts, wts = _product_ball_rule(d, count, angular_degree)
        tau = RADIAL_TAU if needed <= self.nodes else INEXACT_TAU
        return Rule(("ball", d, count, angular_degree), pts, wts, tau)

    def membership_radii(self) -> np.ndarray:
        """Values of t used to test radial functions: Gauss nodes plus both ends."""
        x, _ = gauss_legendre_01(self.nodes)
        return np.concatenate([[0.0], x, [1.0]])

    def membership_points(self, d: int) -> np.ndarray:
        return _membership_points(d)

    def to_config(self) -> dict:
        return {"kind": self.kind, "nodes": self.nodes}


@lru_cache(maxsize=None)
def _membership_points(d: int) -> np.ndarray:
    r, _ = gauss_legendre_01(6)
    radii = np.concatenate([[0.0], r, [1.0]])
    s, _ = sphere_rule(d, 5 if d > 4 else 7)
    pts = (radii[:, None, None] * s[None, :, :]).reshape(-1, d)
    return np.unique(pts, axis=0)


@dataclass(frozen=True)
class Grid:
    resolution: int = 48
    kind = "grid"

    def __post_init__(self):
        if int(self.resolution) < 2:
            raise ConfigError("quadrature.resolution: must be >= 2")

    @property
    def tau(self) -> float:
        return max(1e-3, 10.0 / self.resolution)

    def ball_rule(self, d: int, degree: int = 0, angular_degree: int = 0) -> Rule:
        pts, wts = _grid_cells(d, self.resolution)
        return Rule(("grid", d, self.resolution), pts, wts, self.tau)

    def membership_radii(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution + 1)

    def membership_points(self, d: int) -> np.ndarray:
        from .funcspace import sphere_samples

        return np.vstack([_grid_cells(d, self.resolution)[0], sphere_samples(d)])

    def to_config(self) -> dict:
        return {"kind": self.kind, "resolution": self.resolution}


QuadratureScheme = Union[RadialGauss, Grid]


def scheme_from_config(cfg) -> QuadratureScheme:
    """Build a scheme from ``{"kind": "radial_gauss", "nodes": N}`` or ``{"kind": "grid", "resolution": R}``."""
    if isinstance(cfg, (RadialGauss, Grid)):
        return cfg
    if not isinstance(cfg, dict):
        raise ConfigError("quadrature: expected an object with a 'kind' field")
    kind = cfg.get("kind")
    extra = set(cfg) - {"kind", "nodes", "resolution"}
    if extra:
        raise ConfigError(f"quadrature: unknown field(s) {sorted(extra)}")
    try:
        if kind == "radial_gauss":
            return RadialGauss(int(cfg.get("nodes", 64)))
        if kind == "grid":
            return Grid(int(cfg.get("resolution", 48)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature: {exc}") from exc
    raise ConfigError(f"quadrature.kind: unknown scheme {kind!r}")


def parse_scheme(text: str) -> QuadratureScheme:
    """Parse the CLI form ``KIND:PARAM``, e.g. ``radial_gauss:64`` or ``grid:48``."""
    kind, _, param = text.partition(":")
    if kind == "radial_gauss":
        return scheme_from_config({"kind": kind, **({"nodes": param} if param else {})})
    if kind == "grid":
        return scheme_from_config({"kind": kind, **({"resolution": param} if param else {})})
    raise ConfigError(f"quadrature: unknown scheme {kind!r}")
