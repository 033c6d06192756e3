import itertools

import numpy as np
import pytest

from levi6.distribution import Structure6, VectorField, combine, frobenius_integrable, levi_form
from levi6.hyperbolic import (
    NotHyperbolicError,
    S_minus_general,
    S_plus_general,
    SplittingError,
    adapted_coefficients,
    hyperbolic_flatness_verdict,
    hyperbolic_invariants,
    hyperbolic_splitting,
    orientation_form,
    root_covectors,
)
from levi6.pde_frontend import CAUCHY_RIEMANN, DECOUPLED, from_equations
from levi6.scalar_field import ZERO, const, evaluate_many, parse_expr, sample_points

COUPLED = {"u_y": "v^2", "v_x": "0"}
PTS = sample_points(40, seed=31)


def span_distance(A, B):
    """Largest sine of a principal angle between column spans of A and B."""
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    return np.linalg.norm(qb - qa @ (qa.T @ qb), 2)


def chart_span(split, frames, pts):
    """Chart-coordinate columns of the given frame-coefficient fields, shape (n, 6, k)."""
    F = split.structure.frame_values(pts)
    return F @ split.values(list(frames), pts)


@pytest.fixture(scope="module")
def flat():
    return hyperbolic_invariants(from_equations(DECOUPLED), PTS)


@pytest.fixture(scope="module")
def coupled():
    return hyperbolic_invariants(from_equations(COUPLED), PTS)


def test_roots_of_flat_model():
    s = from_equations(DECOUPLED)
    roots = root_covectors(levi_form(s), s.chart, PTS)
    vals = [evaluate_many(list(r), s.chart, PTS[:1])[:, 0] for r in roots]
    normalized = {tuple(v / np.abs(v).max() * np.sign(v[np.argmax(np.abs(v))])) for v in vals}
    assert normalized == {(1.0, 0.0), (0.0, 1.0)}


def test_flat_splitting_is_the_product(flat):
    s = flat.structure
    Dx, Dy, dp, ds = (X.values(PTS) for X in s.h_frame)
    factor_x = np.stack([Dx, dp], axis=2)
    factor_y = np.stack([Dy, ds], axis=2)
    hp = chart_span(flat.split, flat.split.h_plus, PTS)
    hm = chart_span(flat.split, flat.split.h_minus, PTS)
    got = []
    for p in range(len(PTS)):
        got.append((span_distance(hp[p], factor_y[p]) + span_distance(hm[p], factor_x[p]),
                    span_distance(hp[p], factor_x[p]) + span_distance(hm[p], factor_y[p])))
    got = np.array(got)
    # one labeling matches at every point, and it is the same one everywhere
    assert (got[:, 0].max() <= 1e-9) != (got[:, 1].max() <= 1e-9)


def test_labels_swap_with_orientation(flat):
    s = flat.structure.with_orientation(-1)
    split = hyperbolic_splitting(s, PTS)
    a = chart_span(flat.split, flat.split.h_plus, PTS)
    b = chart_span(split, split.h_minus, PTS)
    assert max(span_distance(a[p], b[p]) for p in range(len(PTS))) <= 1e-9


def test_orientation_form_matches_chart(flat):
    sp = flat.split
    form = orientation_form(sp.structure, sp.h_plus, sp.h_minus, (sp.bracket_plus, sp.bracket_minus), PTS)
    assert np.all(np.sign(form) == sp.structure.orientation)


def test_mixed_brackets_stay_in_H(flat, coupled):
    assert flat.mixed_bracket_residual() <= 1e-9
    assert coupled.mixed_bracket_residual() <= 1e-9


def test_mixed_brackets_tensorial_spot_check(coupled):
    sp = coupled.split
    s = sp.structure
    g = parse_expr("1 + x*v + sin(p)", s.chart)
    h = parse_expr("exp(u) - y", s.chart)
    xi = [g * c for c in sp.h_plus[0]]
    eta = [h * a + b for a, b in zip(sp.h_minus[0], sp.h_minus[1])]
    vals = evaluate_many(s.bracket(xi, eta, components=(4, 5)), s.chart, PTS)
    assert np.abs(vals).max() <= 1e-9


def test_Q_splits_and_T_rank(flat, coupled):
    for inv in (flat, coupled):
        assert np.all(np.abs(inv.q_split_determinant()) > 1e-9)
        assert inv.t_rank() == (3, 3)


def test_H_is_direct_sum(coupled):
    sp = coupled.split
    V = sp.values([*sp.h_plus, *sp.h_minus], PTS)[:, :4, :]
    assert np.all(np.abs(np.linalg.det(V)) > 1e-9)


def test_flat_obstructions_vanish(flat):
    assert flat.max_S() == (0.0, 0.0)
    assert flat.integrable() == (True, True)
    assert hyperbolic_flatness_verdict(flat.structure, PTS)


def test_coupled_obstruction_matches_frobenius(coupled):
    mp, mm = coupled.max_S()
    assert max(mp, mm) >= 1e-3
    ip, im = coupled.integrable()
    assert (mp > 1e-9) == (not ip)
    assert (mm > 1e-9) == (not im)
    assert not hyperbolic_flatness_verdict(coupled.structure, PTS)


def test_S_plus_against_adapted_basis_solve(coupled):
    sp = coupled.split
    Sp, _ = coupled.S_values()
    for i, xi in enumerate(sp.t_plus):
        for j, eta in enumerate(sp.h_plus):
            V = sp.structure.bracket(xi, eta)
            coeffs = adapted_coefficients(sp, V, PTS)
            assert np.allclose(coeffs[:, 5], Sp[:, i, j], atol=1e-9)


def test_S_pm_descend(coupled):
    sp = coupled.split
    s = sp.structure
    g = parse_expr("x - u*p", s.chart)
    for xi, eta in itertools.product(sp.t_plus, sp.h_plus):
        # shift xi by a function multiple of an H- field and a T+ field
        moved = [a + g * b + c for a, b, c in zip(xi, sp.h_minus[1], sp.h_plus[0])]
        d = S_plus_general(sp, moved, eta) - S_plus_general(sp, xi, eta)
        assert np.abs(evaluate_many([d], s.chart, PTS)).max() <= 1e-9
    for xi, eta in itertools.product(sp.t_minus, sp.h_minus):
        moved = [a + g * b for a, b in zip(xi, sp.h_plus[0])]
        d = S_minus_general(sp, moved, eta) - S_minus_general(sp, xi, eta)
        assert np.abs(evaluate_many([d], s.chart, PTS)).max() <= 1e-9


def test_T_frames_through_frobenius_checker(coupled):
    sp = coupled.split
    assert not frobenius_integrable(sp.chart_fields(sp.t_plus), sp.structure, PTS)
    assert frobenius_integrable(sp.chart_fields(sp.t_minus), sp.structure, PTS)


def test_splitting_invariant_under_frame_changes(coupled):
    s = coupled.structure
    rng = np.random.default_rng(8)
    ref_p = chart_span(coupled.split, coupled.split.h_plus, PTS[:15])
    ref_m = chart_span(coupled.split, coupled.split.h_minus, PTS[:15])
    for _ in range(4):
        G = rng.integers(-9, 10, size=(4, 4)) / 10 + 2 * np.eye(4)
        G2 = rng.integers(-9, 10, size=(2, 2)) / 10 + 2 * np.eye(2)
        P = rng.integers(-9, 10, size=(2, 4)) / 10
        h = tuple(combine(s.chart, [const(x) for x in G[i]], s.h_frame) for i in range(4))
        comp = tuple(combine(s.chart, [const(x) for x in list(G2[i]) + list(P[i])],
                             s.complement + s.h_frame) for i in range(2))
        split = hyperbolic_splitting(Structure6(s.chart, h, comp), PTS[:15])
        hp = chart_span(split, split.h_plus, PTS[:15])
        hm = chart_span(split, split.h_minus, PTS[:15])
        for p in range(15):
            assert span_distance(hp[p], ref_p[p]) <= 1e-9
            assert span_distance(hm[p], ref_m[p]) <= 1e-9


def test_elliptic_input_rejected():
    with pytest.raises(NotHyperbolicError):
        hyperbolic_splitting(from_equations(CAUCHY_RIEMANN), PTS)
    with pytest.raises(NotHyperbolicError):
        hyperbolic_flatness_verdict(from_equations(CAUCHY_RIEMANN), PTS)


def test_degenerate_input_rejected():
    ch = from_equations(DECOUPLED).chart
    d = [VectorField.coordinate(ch, n) for n in ch.names]
    with pytest.raises(NotHyperbolicError):
        hyperbolic_splitting(Structure6(ch, (d[0], d[1], d[4], d[5]), (d[2], d[3])), PTS)


def test_kernel_sections_reject_rank_deficient_forms():
    from levi6.hyperbolic import kernel_sections
    ch = from_equations(DECOUPLED).chart
    with pytest.raises(SplittingError):
        kernel_sections([[ZERO] * 4 for _ in range(4)], ch, PTS)
