import itertools

import numpy as np
import pytest

from levi6 import smallalg as sa
from levi6.scalar_field import ZERO, Chart, is_zero, parse_expr

rng = np.random.default_rng(2024)


def random_antisym(n=4):
    X = rng.normal(size=(n, n))
    return X - X.T


def brute_pf(A):
    # sum over the three perfect matchings of {1, 2, 3, 4}
    return A[0][1] * A[2][3] - A[0][2] * A[1][3] + A[0][3] * A[1][2]


# -- Pfaffians -------------------------------------------------------------


def test_pfaffian_examples():
    assert sa.pfaffian(sa.antisym({(1, 2): 1, (3, 4): 1})) == 1
    A = sa.antisym({(1, 3): -1, (2, 4): -1})
    assert sa.pfaffian(A) == -1
    assert np.linalg.det(np.array(A, dtype=float)) == pytest.approx(1)
    assert sa.pfaffian(sa.antisym({})) == 0


def test_polar_examples():
    J = sa.antisym({(1, 2): 1, (3, 4): 1})
    assert sa.polar_pfaffian(J, J) == 2
    A, B = sa.antisym({(1, 3): -1}), sa.antisym({(2, 4): -1})
    assert sa.polar_pfaffian(A, B) == -1
    assert sa.polar_pfaffian(A, B) == brute_pf(np.add(A, B)) - brute_pf(A) - brute_pf(B)
    assert sa.polar_pfaffian(random_antisym(), sa.antisym({})) == 0


def test_antisym_rejects_bad_indices():
    with pytest.raises(ValueError):
        sa.antisym({(2, 1): 1})


def test_pfaffian_squared_is_determinant():
    for _ in range(1000):
        A = random_antisym()
        pf = sa.pfaffian(A)
        assert pf * pf == pytest.approx(np.linalg.det(A), rel=1e-10, abs=1e-12)


def test_polarization_identity():
    for _ in range(100):
        A, B = random_antisym(), random_antisym()
        s, t = rng.normal(size=2)
        lhs = sa.pfaffian(s * A + t * B)
        rhs = s * s * sa.pfaffian(A) + s * t * sa.polar_pfaffian(A, B) + t * t * sa.pfaffian(B)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_polar_is_symmetric_and_doubles_on_diagonal():
    A, B = random_antisym(), random_antisym()
    assert sa.polar_pfaffian(A, B) == pytest.approx(sa.polar_pfaffian(B, A))
    assert sa.polar_pfaffian(A, A) == pytest.approx(2 * sa.pfaffian(A))


def test_pfaffian_transforms_by_determinant():
    for _ in range(50):
        A, h = random_antisym(), rng.normal(size=(4, 4))
        assert sa.pfaffian(h.T @ A @ h) == pytest.approx(np.linalg.det(h) * sa.pfaffian(A), rel=1e-9)


def test_dual_form_identity():
    for _ in range(50):
        A = random_antisym()
        D = np.array(sa.dual_form(A))
        assert np.allclose(A @ D, -sa.pfaffian(A) * np.eye(4))


def test_dual_columns_span_kernel_of_simple_form():
    a, b = rng.normal(size=(2, 4))
    A = np.outer(a, b) - np.outer(b, a)
    D = np.array(sa.dual_form(A))
    assert np.allclose(A @ D, 0)
    assert np.linalg.matrix_rank(D) == 2


def test_same_formulas_on_exprs_and_complex():
    ch = Chart(("x", "y", "u", "v", "p", "q"))
    P = lambda t: parse_expr(t, ch)  # noqa: E731
    A = sa.antisym({(1, 2): P("x"), (3, 4): P("y"), (1, 3): P("u")}, ZERO)
    assert is_zero(sa.pfaffian(A) - P("x*y"), ch)
    Z = random_antisym() + 1j * random_antisym()
    assert sa.pfaffian(Z) ** 2 == pytest.approx(np.linalg.det(Z), rel=1e-10)


# -- quadratic roots -------------------------------------------------------


def test_roots_of_definite_form():
    r = sa.quadratic_roots(sa.QuadraticForm(-1, 0, -1))
    assert r.kind == "complex"
    assert r.roots[0] == pytest.approx((1, 1j))
    assert r.roots[1] == pytest.approx((1, -1j))


def test_roots_of_split_form():
    q = sa.QuadraticForm(0, -1, 0)
    r = sa.quadratic_roots(q)
    assert r.kind == "real"
    assert set(r.roots) == {(1.0, 0.0), (0.0, 1.0)}


def test_double_root():
    r = sa.quadratic_roots(sa.QuadraticForm(1, 0, 0))
    assert r.kind == "degenerate"
    assert r.roots == ((0.0, 1.0),)


def test_a_zero_has_root_at_1_0():
    r = sa.quadratic_roots(sa.QuadraticForm(0, 2, 3))
    assert (1.0, 0.0) in r.roots
    assert sa.QuadraticForm(0, 2, 3)(*r.roots[1]) == pytest.approx(0, abs=1e-12)


def test_zero_polynomial():
    with pytest.raises(sa.ZeroPolynomialError):
        sa.quadratic_roots(sa.QuadraticForm(0, 0, 0))


def test_roots_satisfy_q_and_are_normalized():
    for _ in range(300):
        q = sa.QuadraticForm(*rng.normal(size=3))
        r = sa.quadratic_roots(q)
        for psi in r.roots:
            assert abs(q(*psi)) <= 1e-12 * (abs(q.a) + abs(q.b) + abs(q.c)) * 10
            assert max(abs(psi[0]), abs(psi[1])) == pytest.approx(1)
        if r.kind == "complex":
            assert r.roots[1] == tuple(np.conj(r.roots[0]))


def test_degeneracy_threshold_is_scale_invariant():
    for scale in (1e-6, 1.0, 1e6):
        q = sa.QuadraticForm(scale, 2 * scale, scale * (1 + 1e-12))
        assert sa.quadratic_roots(q, tol=1e-9).kind == "degenerate"


# -- elimination -----------------------------------------------------------


def test_solve_identity():
    assert np.allclose(sa.solve_linear(np.eye(4), np.eye(4)[1]), np.eye(4)[1])


def test_solve_inconsistent_zero():
    with pytest.raises(sa.InconsistentError):
        sa.solve_linear(np.zeros((4, 4)), np.ones(4))


def test_solve_rank_deficient():
    M = np.ones((4, 4))
    with pytest.raises(sa.RankDeficientError):
        sa.solve_linear(M, M @ np.ones(4))


def test_solve_overdetermined():
    M = rng.normal(size=(8, 4))
    x = rng.normal(size=4)
    assert np.allclose(sa.solve_linear(M, M @ x), x)
    with pytest.raises(sa.InconsistentError):
        sa.solve_linear(M, M @ x + rng.normal(size=8))


def test_solve_complex():
    M = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.allclose(sa.solve_linear(M, M @ x), x)


def test_null_space():
    M = rng.normal(size=(2, 4))
    N = sa.null_space(M)
    assert N.shape == (4, 2) and np.allclose(M @ N, 0)


# -- kernels of simple forms -----------------------------------------------


def test_kernel_of_coordinate_form():
    K = sa.two_form_kernel(sa.antisym({(1, 2): 1}))
    assert np.allclose(K[:2], 0)
    assert np.linalg.matrix_rank(K[2:]) == 2


def test_kernel_of_flat_elliptic_root_form():
    L1 = np.array(sa.antisym({(1, 3): -1, (2, 4): -1}), dtype=float)
    L2 = np.array(sa.antisym({(1, 4): 1, (2, 3): -1}), dtype=float)
    omega = L1 + 1j * L2
    w = np.array([1, 1j, 0, 0])
    assert np.allclose(w @ omega, 0)
    K = sa.two_form_kernel(omega)
    # e1 + i e2 lies in the span of the computed kernel
    assert np.linalg.matrix_rank(np.column_stack([K, w]), tol=1e-9) == 2


def test_not_simple_and_zero_forms():
    with pytest.raises(sa.NotSimpleError):
        sa.two_form_kernel(sa.antisym({(1, 2): 1, (3, 4): 1}))
    with pytest.raises(sa.ZeroFormError):
        sa.two_form_kernel(np.zeros((4, 4)))


def test_random_simple_complex_forms():
    for _ in range(100):
        a, b = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
        omega = np.outer(a, b) - np.outer(b, a)
        K = sa.two_form_kernel(omega)
        norm = np.linalg.norm(omega)
        for v in K.T:
            assert np.linalg.norm(v @ omega) <= 1e-9 * norm * np.linalg.norm(v)
        minors = [abs(K[i, 0] * K[j, 1] - K[j, 0] * K[i, 1]) for i, j in itertools.combinations(range(4), 2)]
        assert max(minors) > 1e-6
