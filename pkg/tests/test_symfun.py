import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from khessian.exceptions import (
    CapacityError,
    ConeMembershipError,
    DegenerateConeError,
    HypothesisViolationError,
    InvalidInputError,
    OrderError,
)
from khessian.symfun import (
    algebraic_lemma_check,
    cone_check,
    garding_superadditivity_check,
    hermitian,
    in_cone,
    kronecker_delta,
    lemma_mk_check,
    newton_tensor,
    newton_tensor_entry,
    polarized_s_k,
    polarized_sk_kronecker,
    polarized_sk_subsets,
    random_cone_vector,
    s_k,
    s_k_all,
    s_k_matrix,
    s_k_matrix_eig,
    symmetric,
)

SETTINGS = settings(max_examples=60, deadline=None)


# --- independent oracles -------------------------------------------------

def brute_s_k(lam, k):
    n = len(lam)
    total = sum(math.prod(c) for c in itertools.combinations(lam, k))
    return total / math.comb(n, k)


def brute_polarization(vectors):
    """Coefficient of t_1...t_k in e_k(sum t_j lam_j), i.e. a sum over injective index maps."""
    k, n = len(vectors), len(vectors[0])
    total = 0.0
    for idx in itertools.permutations(range(n), k):
        total += math.prod(vectors[j][idx[j]] for j in range(k))
    return total / (math.factorial(k) * math.comb(n, k))


def brute_minor_sum(a, k):
    n = a.shape[0]
    return sum(np.linalg.det(a[np.ix_(c, c)]) for c in itertools.combinations(range(n), k)) / math.comb(n, k)


def rand_herm(rng, n):
    return hermitian(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def rand_sym(rng, n):
    return symmetric(rng.standard_normal((n, n)))


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


dims = st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n)))


# --- s_k -----------------------------------------------------------------

def test_s_k_examples():
    assert s_k([1, 1, 1], 2) == pytest.approx(1.0)
    assert s_k([3, 1, 2], 2) == pytest.approx(11 / 3, abs=1e-15)
    assert s_k([4.0, -2.0, 7.0], 0) == 1.0


def test_s_k_order_range():
    with pytest.raises(OrderError):
        s_k([1.0, 2.0], 3)
    with pytest.raises(OrderError):
        s_k([1.0, 2.0], -1)


def test_s_k_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        s_k([1.0, np.nan], 1)


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_s_k_matches_brute_force(nk, seed):
    n, k = nk
    lam = np.random.default_rng(seed).standard_normal(n)
    assert rel(s_k(lam, k), brute_s_k(lam, k)) < 1e-12
    np.testing.assert_allclose(s_k_all(lam, n), [brute_s_k(lam, j) for j in range(1, n + 1)], rtol=1e-12, atol=1e-14)


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_s_k_symmetric_and_normalized(nk, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal(n)
    assert rel(s_k(rng.permutation(lam), k), s_k(lam, k)) < 1e-12
    assert s_k(np.ones(n), k) == pytest.approx(1.0, rel=1e-14)


def test_s_k_batched():
    lam = np.array([[1.0, 2.0, 3.0], [0.5, -1.0, 4.0]])
    np.testing.assert_allclose(s_k(lam, 2), [brute_s_k(row, 2) for row in lam])


# --- matrices ------------------------------------------------------------

def test_s_k_matrix_examples():
    for k in range(4):
        assert s_k_matrix(np.eye(3), k) == pytest.approx(1.0)
    assert s_k_matrix(np.diag([1.0, 2.0]), 2) == pytest.approx(2.0)
    a = rand_herm(np.random.default_rng(1), 4)
    assert s_k_matrix(a, 4) == pytest.approx(np.linalg.det(a).real, rel=1e-12)


def test_s_k_matrix_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        s_k_matrix(np.array([[1.0, np.inf], [np.inf, 1.0]]), 1)


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1), st.booleans())
def test_s_k_matrix_minors_vs_eigen(nk, seed, cplx):
    n, k = nk
    rng = np.random.default_rng(seed)
    a = rand_herm(rng, n) if cplx else rand_sym(rng, n)
    ref = brute_minor_sum(a, k).real
    assert rel(s_k_matrix(a, k), ref) < 1e-10
    assert rel(s_k_matrix_eig(a, k), s_k(np.linalg.eigvalsh(a), k)) < 1e-10
    assert rel(s_k_matrix(a, k), s_k_matrix_eig(a, k)) < 1e-10


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1), st.booleans())
def test_s_k_matrix_conjugation_invariant(nk, seed, cplx):
    n, k = nk
    rng = np.random.default_rng(seed)
    a = rand_herm(rng, n) if cplx else rand_sym(rng, n)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0))
    b = q @ a @ q.conj().T
    scale = max(1.0, float(np.abs(np.linalg.eigvalsh(a)).max()) ** k)
    assert abs(s_k_matrix(b, k) - s_k_matrix(a, k)) <= 1e-9 * scale


def test_hermitian_storage_exact():
    a = rand_herm(np.random.default_rng(3), 4)
    assert np.array_equal(a, a.conj().T)
    s = rand_sym(np.random.default_rng(3), 4)
    assert np.array_equal(s, s.T)


# --- polarization --------------------------------------------------------

def test_polarization_examples():
    a, b = 0.7, 2.9
    assert polarized_sk_subsets(np.eye(2), np.diag([a, b])) == pytest.approx((a + b) / 2)
    d1, d2 = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
    assert polarized_sk_subsets(d1, d2) == pytest.approx(5.0)
    assert polarized_sk_kronecker(d1, d2) == pytest.approx(5.0)
    m = rand_sym(np.random.default_rng(0), 4)
    assert polarized_sk_kronecker(m) == pytest.approx(np.trace(m) / 4)


def test_polarization_input_errors():
    with pytest.raises(InvalidInputError):
        polarized_sk_subsets(np.eye(2), np.eye(3))
    with pytest.raises(InvalidInputError):
        polarized_sk_subsets(np.eye(2), np.eye(2) * (1 + 1j))
    with pytest.raises(OrderError):
        polarized_sk_subsets(np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(CapacityError):
        polarized_sk_kronecker(*[np.eye(7)] * 2)


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_polarization_vectors_vs_brute(nk, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    vecs = [rng.standard_normal(n) for _ in range(k)]
    ref = brute_polarization(vecs)
    assert rel(polarized_s_k(*vecs), ref) < 1e-10
    assert rel(polarized_sk_subsets(*[np.diag(v) for v in vecs]), ref) < 1e-10


@settings(max_examples=200, deadline=None)
@given(dims, st.integers(0, 2 ** 32 - 1), st.booleans())
def test_subsets_match_kronecker(nk, seed, cplx):
    n, k = nk
    rng = np.random.default_rng(seed)
    mats = [rand_herm(rng, n) if cplx else rand_sym(rng, n) for _ in range(k)]
    a = polarized_sk_subsets(*mats)
    b = polarized_sk_kronecker(*mats)
    assert rel(b, a) < 1e-10
    if cplx:
        assert abs(polarized_sk_kronecker(*mats, keep_imag=True).imag) <= 1e-12 * max(1.0, abs(a))


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1), st.booleans())
def test_polarization_diagonal(nk, seed, cplx):
    n, k = nk
    rng = np.random.default_rng(seed)
    a = rand_herm(rng, n) if cplx else rand_sym(rng, n)
    assert rel(polarized_sk_subsets(*[a] * k), s_k_matrix(a, k)) < 1e-12


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_polarization_multilinear(nk, seed, alpha, beta):
    n, k = nk
    rng = np.random.default_rng(seed)
    mats = [rand_sym(rng, n) for _ in range(k)]
    a, b = rand_sym(rng, n), rand_sym(rng, n)
    slot = int(rng.integers(k))
    def at(x):
        args = list(mats)
        args[slot] = x
        return polarized_sk_subsets(*args)
    lhs = at(alpha * a + beta * b)
    rhs = alpha * at(a) + beta * at(b)
    scale = max(1.0, abs(alpha * at(a)), abs(beta * at(b)))
    assert abs(lhs - rhs) <= 1e-10 * scale


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_polarization_symmetric(nk, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    mats = [rand_herm(rng, n) for _ in range(k)]
    perm = rng.permutation(k)
    assert polarized_sk_subsets(*[mats[p] for p in perm]) == pytest.approx(polarized_sk_subsets(*mats), rel=1e-12,
                                                                              abs=1e-12)
    assert rel(polarized_sk_kronecker(*[mats[p] for p in perm]), polarized_sk_kronecker(*mats)) < 1e-10


# --- Kronecker delta and Newton tensor -----------------------------------

def test_kronecker_examples():
    assert kronecker_delta((1, 2), (1, 2)) == 1
    assert kronecker_delta((1, 2), (2, 1)) == -1
    assert kronecker_delta((1, 1), (1, 2)) == 0


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 5) for k in range(1, min(n, 3) + 1)])
def test_kronecker_exhaustive(n, k):
    for up in itertools.product(range(1, n + 1), repeat=k):
        for lo in itertools.product(range(1, n + 1), repeat=k):
            d = kronecker_delta(up, lo)
            if len(set(up)) < k or len(set(lo)) < k or sorted(up) != sorted(lo):
                assert d == 0
                continue
            perm = [up.index(x) for x in lo]
            inversions = sum(perm[i] > perm[j] for i in range(k) for j in range(i + 1, k))
            assert d == (-1) ** inversions
            for i, j in itertools.combinations(range(k), 2):
                sw = list(lo)
                sw[i], sw[j] = sw[j], sw[i]
                assert kronecker_delta(up, sw) == -d


def test_newton_tensor_examples():
    a, b = 2.0, 5.0
    np.testing.assert_allclose(newton_tensor([np.diag([a, b])]), [[b / 2, 0], [0, a / 2]])
    np.testing.assert_allclose(newton_tensor([], 3), np.eye(3) / 3)
    m = rand_sym(np.random.default_rng(4), 2)
    t = newton_tensor([m])
    assert np.sum(m * t) == pytest.approx(s_k_matrix(m, 2))
    assert newton_tensor_entry([m], 0, 1) == pytest.approx(t[0, 1])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.integers(0, 2 ** 32 - 1))
def test_newton_contraction(nk, seed):
    n, k = nk
    rng = np.random.default_rng(seed)
    mats = [rand_sym(rng, n) for _ in range(k - 1)]
    b = rand_sym(rng, n)
    lhs = float(np.sum(b * newton_tensor(mats, n)))
    assert rel(lhs, polarized_sk_subsets(*mats, b)) < 1e-10


def test_newton_tensor_is_derivative():
    # finite-difference derivative of the polarization in the last slot
    rng = np.random.default_rng(5)
    mats = [rand_sym(rng, 4) for _ in range(2)]
    t = newton_tensor(mats)
    h = 1e-6
    for i, j in [(0, 0), (1, 3), (2, 2)]:
        e = np.zeros((4, 4))
        e[i, j] = 1.0
        base = rand_sym(rng, 4)
        fd = (polarized_sk_kronecker(*mats, base + h * e) - polarized_sk_kronecker(*mats, base - h * e)) / (2 * h)
        assert fd == pytest.approx(t[i, j], abs=1e-7)


# --- cones ---------------------------------------------------------------

def test_cone_examples():
    for k in (1, 2, 3):
        c = cone_check([1.0, 1.0, 1.0], k)
        assert c.member and c.slack == pytest.approx(1.0, abs=1e-12)
    c = cone_check([-1.0, 2.0, 2.0], 2)
    assert c.member and c.slack == 0.0
    assert not cone_check([-1.0, -1.0], 1).member
    assert cone_check([-1.0, -1.0], 1).slack == 0.0


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1), st.floats(0.0, 5.0))
def test_cone_shift_monotone(nk, seed, t):
    n, k = nk
    mu = random_cone_vector(np.random.default_rng(seed), n, k)
    base = cone_check(mu, k)
    shifted = cone_check(mu + t, k)
    assert base.member and shifted.member
    assert shifted.slack == pytest.approx(base.slack + t, abs=1e-10)


@SETTINGS
@given(dims, st.integers(0, 2 ** 32 - 1))
def test_cone_membership_definition(nk, seed):
    n, k = nk
    mu = np.random.default_rng(seed).standard_normal(n) + 0.3
    expected = all(brute_s_k(mu, j) >= 0 for j in range(1, k + 1))
    assert in_cone(mu, k) == expected


def test_lemma_mk_examples():
    e = np.ones(3)
    res = lemma_mk_check(e, e, 1, 2)
    assert res.bound_constant == pytest.approx(1.0) and res.holds and abs(res.margin) < 1e-12
    assert lemma_mk_check(np.zeros(3), e, 1, 2).holds
    with pytest.raises(DegenerateConeError):
        lemma_mk_check(e, [-1.0, 2.0, 2.0], 0, 2)
    with pytest.raises(ConeMembershipError):
        lemma_mk_check([-1.0, -1.0, -1.0], e, 0, 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_lemma_mk_random(seed):
    rng = np.random.default_rng(seed)
    lam, mu = random_cone_vector(rng, 3, 2), random_cone_vector(rng, 3, 2)
    assert lemma_mk_check(lam, mu, 1, 2).holds


def test_garding_examples():
    e = np.ones(3)
    assert garding_superadditivity_check(e, e, e, 1, 2) == pytest.approx(0.0, abs=1e-14)
    assert garding_superadditivity_check(e, e, e, 0, 2) == pytest.approx(0.0, abs=1e-14)
    rng = np.random.default_rng(9)
    lam, a, b = (random_cone_vector(rng, 4, 3) for _ in range(3))
    assert abs(garding_superadditivity_check(lam, a, b, 2, 3)) < 1e-12 * max(1.0, abs(s_k(a + b, 1)))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_garding_random(seed):
    rng = np.random.default_rng(seed)
    lam, a, b = (random_cone_vector(rng, 4, 3) for _ in range(3))
    assert garding_superadditivity_check(lam, a, b, 1, 3) >= -1e-10


def test_algebraic_lemma_on_product():
    # f(x_1..x_k) = prod <x_j, w>: Cauchy-Schwarz holds with equality so Hoelder is tight
    w = np.array([1.0, 2.0])
    f = lambda *xs: math.prod(float(x @ w) for x in xs)
    pts = [np.array([1.0, 0.5]), np.array([0.2, 0.3]), np.array([2.0, 1.0])]
    m = algebraic_lemma_check(f, pts, pts[0], np.zeros(2))
    assert m.hoelder_margin == pytest.approx(0.0, abs=1e-12)
    assert m.minkowski_margin == pytest.approx(0.0, abs=1e-12)
    m = algebraic_lemma_check(f, [pts[1]] * 3)
    assert m.hoelder_margin == pytest.approx(0.0, abs=1e-15)


def test_algebraic_lemma_negative_value():
    with pytest.raises(HypothesisViolationError):
        algebraic_lemma_check(lambda a, b: -1.0, [1.0, 2.0])
