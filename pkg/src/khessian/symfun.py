"""Normalized elementary symmetric functions, polarizations and Garding cones.

Normalization: ``S_k(x) = e_k(x) / C(n, k)`` so that ``S_k(1, ..., 1) = 1``.
Spectrum vectors are 1-D float arrays; Hermitian and symmetric matrices are
``(..., n, n)`` arrays (complex dtype marks the Hermitian kind). Most
functions broadcast over leading batch axes so that quadrature code can
evaluate thousands of nodes at once.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    CapacityError,
    ConeMembershipError,
    DegenerateConeError,
    HypothesisViolationError,
    InvalidInputError,
    OrderError,
)

KRONECKER_MAX_N = 6
SLACK_TOL = 1e-12


# ---------------------------------------------------------------------------
# construction helpers


def spectrum(values, n: int | None = None) -> np.ndarray:
    """Validate and return a spectrum vector as a float array."""
    lam = np.asarray(values, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidInputError(f"spectrum must be a non-empty 1-D vector, got shape {lam.shape}")
    if n is not None and lam.size != n:
        raise InvalidInputError(f"spectrum has length {lam.size}, expected {n}")
    if not np.all(np.isfinite(lam)):
        raise InvalidInputError("spectrum entries must be finite")
    return lam


def hermitian(a) -> np.ndarray:
    """Return the Hermitian part ``(A + A^H) / 2`` as a complex array (exactly Hermitian)."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def symmetric(a) -> np.ndarray:
    """Return the symmetric part ``(A + A^T) / 2`` as a real array."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _check_order(k: int, n: int, lo: int = 0) -> None:
    if not isinstance(k, (int, np.integer)) or k < lo or k > n:
        raise OrderError(f"order k={k} outside [{lo}, {n}]")


# ---------------------------------------------------------------------------
# S_k on vectors


def elementary_symmetric(lam, kmax: int | None = None) -> np.ndarray:
    """Unnormalized e_0..e_kmax along the last axis, by the usual product recurrence."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    kmax = n if kmax is None else kmax
    e = np.zeros(lam.shape[:-1] + (kmax + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        x = lam[..., i]
        for j in range(min(i + 1, kmax), 0, -1):
            e[..., j] += x * e[..., j - 1]
    return e


def s_k(lam, k: int):
    """Normalized k-th elementary symmetric function of the last axis of ``lam``.

    Returns a float for a single vector and an array for a batch.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0 or lam.shape[-1] == 0:
        raise InvalidInputError("spectrum must be a non-empty vector")
    if not np.all(np.isfinite(lam)):
        raise InvalidInputError("spectrum entries must be finite")
    n = lam.shape[-1]
    _check_order(k, n)
    out = elementary_symmetric(lam, k)[..., k] / math.comb(n, k)
    return float(out) if out.ndim == 0 else out


def s_k_all(lam, kmax: int) -> np.ndarray:
    """Stack of S_1..S_kmax along a new last axis."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    _check_order(kmax, n)
    e = elementary_symmetric(lam, kmax)[..., 1:]
    return e / np.array([math.comb(n, j) for j in range(1, kmax + 1)])


# ---------------------------------------------------------------------------
# S_k on matrices via principal minors


@lru_cache(maxsize=None)
def _principal_index(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=np.intp).reshape(-1, k)


def _det(m: np.ndarray) -> np.ndarray:
    # closed forms for the small sizes that dominate quadrature cost
    k = m.shape[-1]
    if k == 1:
        return m[..., 0, 0]
    if k == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if k == 3:
        return (
            m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
        )
    return np.linalg.det(m)


def _sum_principal_minors(a: np.ndarray, k: int) -> np.ndarray:
    n = a.shape[-1]
    if k == 0:
        return np.ones(a.shape[:-2], dtype=a.dtype)
    if k == 1:
        return np.trace(a, axis1=-2, axis2=-1)
    idx = _principal_index(n, k)
    sub = a[..., idx[:, :, None], idx[:, None, :]]
    return _det(sub).sum(axis=-1)


def _check_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] == 0:
        raise InvalidInputError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix entries must be finite")
    return a


def s_k_matrix(a, k: int):
    """S_k of the eigenvalues of a Hermitian/symmetric matrix, as (sum of k x k principal minors) / C(n, k)."""
    a = _check_matrix(a)
    n = a.shape[-1]
    _check_order(k, n)
    out = _sum_principal_minors(a, k) / math.comb(n, k)
    out = np.real(out)
    return float(out) if out.ndim == 0 else out


def s_k_matrix_eig(a, k: int):
    """Eigenvalue route for S_k(A); cross-check only."""
    a = _check_matrix(a)
    _check_order(k, a.shape[-1])
    return s_k(np.linalg.eigvalsh(a), k)


# ---------------------------------------------------------------------------
# complete polarization


def _group_by_identity(args: Sequence) -> tuple[list, list[int]]:
    distinct, counts, seen = [], [], {}
    for a in args:
        key = id(a)
        if key in seen:
            counts[seen[key]] += 1
        else:
            seen[key] = len(distinct)
            distinct.append(a)
            counts.append(1)
    return distinct, counts


def polarize(distinct: Sequence[np.ndarray], counts: Sequence[int], evaluate: Callable):
    """Subset formula for the complete polarization with repeated arguments.

    ``distinct[i]`` fills ``counts[i]`` slots. Subsets T of the k slots are
    grouped by how many copies of each distinct argument they contain, so the
    sum ``(1/k!) sum_T (-1)^(k-|T|) S_k(sum_{i in T} A_i)`` is evaluated with
    binomial multiplicities instead of 2^k terms. ``evaluate(x)`` must return
    the degree-k form S_k(x).
    """
    k = sum(counts)
    total = 0.0
    for c in itertools.product(*(range(m + 1) for m in counts)):
        size = sum(c)
        if size == 0:
            continue
        mult = math.prod(math.comb(m, ci) for m, ci in zip(counts, c))
        x = sum(ci * a for ci, a in zip(c, distinct) if ci)
        total = total + ((-1) ** (k - size) * mult) * evaluate(x)
    return total / math.factorial(k)


def _matrix_kind(mats: Sequence) -> tuple[int, bool]:
    if not mats:
        raise InvalidInputError("at least one matrix is required")
    kinds = {np.iscomplexobj(m) for m in mats}
    if len(kinds) > 1:
        raise InvalidInputError("cannot mix Hermitian (complex) and real symmetric arguments")
    dims = {m.shape[-2:] for m in mats}
    if len(dims) > 1:
        raise InvalidInputError(f"mismatched matrix dimensions {sorted(dims)}")
    return mats[0].shape[-1], kinds.pop()


def polarized_sk_subsets(*mats):
    """Complete polarization of S_k (k = number of arguments) by inclusion-exclusion over subsets.

    Arguments passed as the *same object* are recognised as repeats and
    evaluated with grouped multiplicities; the result is identical to the
    plain 2^k-term sum.
    """
    mats = [_check_matrix(m) for m in mats]
    distinct_raw, counts = _group_by_identity(mats)
    n, _ = _matrix_kind(distinct_raw)
    k = len(mats)
    _check_order(k, n, lo=1)
    out = polarize(distinct_raw, counts, lambda x: _sum_principal_minors(x, k))
    out = np.real(out) / math.comb(n, k)
    return float(out) if np.ndim(out) == 0 else out


def polarized_s_k(*vectors):
    """Complete polarization of S_k on spectrum vectors (k = number of arguments)."""
    if not vectors:
        raise InvalidInputError("at least one vector is required")
    distinct, counts = _group_by_identity(vectors)
    distinct = [np.asarray(v, dtype=float) for v in distinct]
    n = distinct[0].shape[-1]
    if any(v.shape[-1] != n for v in distinct):
        raise InvalidInputError("mismatched spectrum lengths")
    k = len(vectors)
    _check_order(k, n, lo=1)
    out = polarize(distinct, counts, lambda x: s_k(x, k))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# generalized Kronecker delta


def _permutation_sign(perm: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        j, length = start, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def kronecker_delta(upper: Sequence[int], lower: Sequence[int]) -> int:
    """Generalized Kronecker delta: sign of the permutation taking ``upper`` to ``lower``, else 0."""
    upper, lower = tuple(upper), tuple(lower)
    if len(upper) != len(lower):
        raise InvalidInputError("multi-indices must have equal length")
    if len(set(upper)) != len(upper) or len(set(lower)) != len(lower):
        return 0
    if sorted(upper) != sorted(lower):
        return 0
    position = {v: i for i, v in enumerate(upper)}
    return _permutation_sign([position[v] for v in lower])


@lru_cache(maxsize=None)
def _kronecker_support(n: int, k: int):
    """Nonzero entries of delta^{I}_{J} for length-k multi-indices over n values.

    Returns (upper, lower, sign) arrays sorted by the last (upper, lower)
    pair, which the Newton tensor uses to reduce by segment.
    """
    perms = list(itertools.permutations(range(k)))
    signs = [kronecker_delta(range(k), p) for p in perms]
    upper, lower, sign = [], [], []
    for tup in itertools.permutations(range(n), k):
        for p, s in zip(perms, signs):
            upper.append(tup)
            lower.append(tuple(tup[q] for q in p))
            sign.append(s)
    upper = np.array(upper, dtype=np.intp).reshape(-1, k)
    lower = np.array(lower, dtype=np.intp).reshape(-1, k)
    sign = np.array(sign, dtype=float)
    order = np.lexsort((lower[:, -1], upper[:, -1]))
    return upper[order], lower[order], sign[order]


def _kronecker_products(mats: Sequence[np.ndarray], upper, lower) -> np.ndarray:
    prod = None
    for m, a in enumerate(mats):
        term = a[..., upper[:, m], lower[:, m]]
        prod = term if prod is None else prod * term
    return prod


def polarized_sk_kronecker(*mats, keep_imag: bool = False):
    """Polarized S_k through the generalized Kronecker delta sum.

    ``(1/(k! C(n,k))) sum delta^{i1..ik}_{j1..jk} A1[i1,j1] ... Ak[ik,jk]``; only the
    nonzero support of the delta is enumerated. Size-guarded to n <= 6.
    """
    mats = [_check_matrix(m) for m in mats]
    n, _ = _matrix_kind(mats)
    k = len(mats)
    _check_order(k, n, lo=1)
    if n > KRONECKER_MAX_N:
        raise CapacityError(f"Kronecker-delta polarization limited to n <= {KRONECKER_MAX_N}, got n={n}")
    upper, lower, sign = _kronecker_support(n, k)
    total = (_kronecker_products(mats, upper, lower) * sign).sum(axis=-1)
    total = total / (math.factorial(k) * math.comb(n, k))
    if not keep_imag:
        total = np.real(total)
    return total.item() if np.ndim(total) == 0 else total


def newton_tensor(mats: Sequence, n: int | None = None) -> np.ndarray:
    """Full Newton tensor T[i, j] = d S~_k(A_1..A_{k-1}, B) / d B[i, j], k = len(mats) + 1.

    Computed from the Kronecker-delta support with the last index pair held
    fixed. Broadcasts over batch axes of the matrices; ``n`` is needed only
    when ``mats`` is empty (k = 1).
    """
    mats = [_check_matrix(m) for m in mats]
    if mats:
        n, _ = _matrix_kind(mats)
    elif n is None:
        raise InvalidInputError("n is required when no matrices are given")
    k = len(mats) + 1
    _check_order(k, n, lo=1)
    if n > KRONECKER_MAX_N:
        raise CapacityError(f"Newton tensor limited to n <= {KRONECKER_MAX_N}, got n={n}")
    scale = 1.0 / (math.factorial(k) * math.comb(n, k))
    if k == 1:
        return np.eye(n) * scale
    upper, lower, sign = _kronecker_support(n, k)
    vals = _kronecker_products(mats, upper, lower) * sign
    flat = upper[:, -1] * n + lower[:, -1]
    starts = np.flatnonzero(np.r_[True, flat[1:] != flat[:-1]])
    out = np.zeros(vals.shape[:-1] + (n * n,), dtype=vals.dtype)
    out[..., flat[starts]] = np.add.reduceat(vals, starts, axis=-1)
    return scale * out.reshape(vals.shape[:-1] + (n, n))


def newton_tensor_entry(mats: Sequence, i: int, j: int, n: int | None = None):
    """Single entry of :func:`newton_tensor` (0-based indices)."""
    t = newton_tensor(mats, n)
    if not (0 <= i < t.shape[-1] and 0 <= j < t.shape[-1]):
        raise InvalidInputError(f"index ({i}, {j}) out of range")
    return t[..., i, j]


# ---------------------------------------------------------------------------
# Garding cone


class ConeSlack(NamedTuple):
    k: int
    member: bool
    slack: float


def in_cone(mu, k: int) -> bool:
    """Closed-cone membership: S_j(mu) >= 0 for j = 1..k."""
    return bool(np.all(s_k_all(mu, k) >= 0.0))


def cone_check(mu, k: int) -> ConeSlack:
    """Membership in Gamma_k and the largest eps with mu - eps*e still in Gamma_k.

    The slack is found by bisection on [0, max(mu)] to absolute tolerance
    1e-12; the returned value is the lower end of the final bracket, so
    ``mu - slack*e`` is always a member.
    """
    mu = spectrum(mu)
    _check_order(k, mu.size, lo=1)
    if not in_cone(mu, k):
        return ConeSlack(k, False, 0.0)
    hi = float(mu.max())
    if hi <= 0.0:
        return ConeSlack(k, True, 0.0)
    if in_cone(mu - hi, k):
        return ConeSlack(k, True, hi)
    lo = 0.0
    while hi - lo > SLACK_TOL:
        mid = 0.5 * (lo + hi)
        if in_cone(mu - mid, k):
            lo = mid
        else:
            hi = mid
    return ConeSlack(k, True, lo)


def random_cone_vector(rng: np.random.Generator, n: int, k: int, max_tries: int = 100) -> np.ndarray:
    """Rejection sample from N(e, I) until the draw lies in Gamma_k."""
    for _ in range(max_tries):
        x = 1.0 + rng.standard_normal(n)
        if in_cone(x, k):
            return x
    raise ConeMembershipError(f"no Gamma_{k} sample in {max_tries} draws (n={n})")


def signed_root(x: float, p: int) -> float:
    return math.copysign(abs(x) ** (1.0 / p), x)


class LemmaMkResult(NamedTuple):
    bound_constant: float
    holds: bool
    margin: float


def lemma_mk_check(lam, mu, m: int, k: int, tol: float = 1e-10) -> LemmaMkResult:
    """Check S_m(lam) <= C * S~_k(lam x m, mu x (k-m)) with C = slack(mu)^-(k-m).

    ``holds`` compares the signed margin against ``-tol`` scaled by the size of
    the right-hand side.
    """
    lam, mu = spectrum(lam), spectrum(mu)
    if lam.size != mu.size:
        raise InvalidInputError("lam and mu must have equal length")
    _check_order(k, lam.size, lo=1)
    if not 0 <= m < k:
        raise OrderError(f"need 0 <= m < k, got m={m}, k={k}")
    for name, v in (("lam", lam), ("mu", mu)):
        if not in_cone(v, k):
            raise ConeMembershipError(f"{name} is not in Gamma_{k}")
    eps = cone_check(mu, k).slack
    if eps <= 0.0:
        raise DegenerateConeError("mu has zero cone slack; the bound needs an interior point")
    const = eps ** (-(k - m))
    rhs = const * polarized_s_k(*([lam] * m + [mu] * (k - m)))
    margin = rhs - s_k(lam, m)
    return LemmaMkResult(const, margin >= -tol * max(1.0, abs(rhs)), margin)


def garding_superadditivity_check(lam, a, b, m: int, k: int) -> float:
    """Margin of superadditivity of x -> S~_k(lam x m, x x (k-m))^(1/(k-m)) at the pair (a, b)."""
    lam, a, b = spectrum(lam), spectrum(a), spectrum(b)
    if not lam.size == a.size == b.size:
        raise InvalidInputError("vectors must have equal length")
    _check_order(k, lam.size, lo=1)
    if not 0 <= m < k:
        raise OrderError(f"need 0 <= m < k, got m={m}, k={k}")
    for name, v in (("lam", lam), ("a", a), ("b", b)):
        if not in_cone(v, k):
            raise ConeMembershipError(f"{name} is not in Gamma_{k}")
    p = k - m

    def f(x):
        return signed_root(polarized_s_k(*([lam] * m + [x] * p)), p)

    return f(a + b) - f(a) - f(b)


class AlgebraicLemmaMargins(NamedTuple):
    hoelder_margin: float
    minkowski_margin: float | None


def algebraic_lemma_check(f: Callable, points: Sequence, x=None, y=None,
                          add: Callable | None = None, tol: float = 0.0) -> AlgebraicLemmaMargins:
    """Margins of the two conclusions of the algebraic lemma for a symmetric k-ary ``f``.

    hoelder: prod_j f(x_j, ..., x_j)^(1/k) - f(x_1, ..., x_k)
    minkowski: f(x,..,x)^(1/k) + f(y,..,y)^(1/k) - f(x+y,..,x+y), only when x, y are given.
    ``add`` builds x + y for non-numeric points. A value of f below ``-tol``
    raises :class:`HypothesisViolationError`.
    """
    k = len(points)
    if k == 0:
        raise InvalidInputError("need at least one point")

    def call(*args):
        val = float(f(*args))
        if val < -tol:
            raise HypothesisViolationError(f"f returned negative value {val!r}")
        return val

    def diag_root(p):
        return signed_root(call(*([p] * k)), k)

    hoelder = math.prod(diag_root(p) for p in points) - call(*points)
    minkowski = None
    if x is not None and y is not None:
        xy = add(x, y) if add is not None else x + y
        minkowski = diag_root(x) + diag_root(y) - diag_root(xy)
    return AlgebraicLemmaMargins(hoelder, minkowski)
