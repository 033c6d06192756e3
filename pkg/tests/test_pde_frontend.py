import numpy as np
import pytest

from levi6.distribution import ELLIPTIC, HYPERBOLIC, classify
from levi6.elliptic import flatness_verdict
from levi6.pde_frontend import (
    CAUCHY_RIEMANN,
    DECOUPLED,
    MalformedSystemError,
    build_jet_structure,
    certify,
    contact_pairings,
    from_equations,
    solved_system,
)
from levi6.scalar_field import Chart, UnknownIdentifierError, is_zero, parse_expr, sample_points


def field_texts(X):
    return X.texts()


def test_cauchy_riemann_frame():
    s = from_equations(CAUCHY_RIEMANN)
    assert s.chart.names == ("x", "y", "u", "v", "p", "q")
    Dx, Dy, dp, dq = s.h_frame
    assert field_texts(Dx) == ["1", "0", "p", "-q", "0", "0"]
    assert field_texts(Dy) == ["0", "1", "q", "p", "0", "0"]
    assert field_texts(dp) == ["0", "0", "0", "0", "1", "0"]
    assert field_texts(dq) == ["0", "0", "0", "0", "0", "1"]
    assert [field_texts(f) for f in s.complement] == [["0", "0", "1", "0", "0", "0"],
                                                      ["0", "0", "0", "1", "0", "0"]]
    assert classify(s, np.zeros(6)).variant == ELLIPTIC


def test_decoupled_frame():
    s = from_equations(DECOUPLED)
    assert s.chart.names == ("x", "y", "u", "v", "p", "s")
    Dx, Dy, dp, ds = s.h_frame
    assert field_texts(Dx) == ["1", "0", "p", "0", "0", "0"]
    assert field_texts(Dy) == ["0", "1", "0", "s", "0", "0"]
    assert classify(s, np.zeros(6)).variant == HYPERBOLIC


def test_perturbed_cr():
    s = from_equations({"v_x": "-q + u^2", "v_y": "p"})
    assert classify(s, np.zeros(6)).variant == ELLIPTIC
    assert not flatness_verdict(s, sample_points(20, seed=0))


def test_long_and_short_jet_names_agree():
    a = from_equations({"v_x": "-u_y", "v_y": "u_x"})
    b = from_equations({"r": "-q", "s": "p"})
    assert a.chart == b.chart
    assert all(X.components == Y.components for X, Y in zip(a.h_frame, b.h_frame))


@pytest.mark.parametrize("eqs", [
    CAUCHY_RIEMANN, DECOUPLED,
    {"u_x": "v*q", "v_y": "sin(r) + x"},
    {"u_x": "r^2", "u_y": "exp(r*s)"},
    {"v_x": "u + y*s", "u_y": "p/(2 + cos(v))"},
])
def test_contact_pairings_vanish(eqs):
    sys = solved_system(eqs)
    s = build_jet_structure(sys)
    assert certify(sys, s)
    assert len(contact_pairings(sys, s)) == 8


def test_frame_is_unit_triangular_up_to_permutation():
    s = from_equations({"u_x": "v*q", "v_y": "sin(r) + x"})
    F = s.frame_values(sample_points(5, seed=1))
    # columns D_x, D_y, d_j1, d_j2, d_u, d_v; rows reordered to (x, y, j1, j2, u, v)
    G = F[:, [0, 1, 4, 5, 2, 3], :]
    assert np.allclose(np.diagonal(G, axis1=1, axis2=2), 1)
    assert np.allclose(np.triu(G, 1), 0)


def test_explicit_chart_renames_coordinates():
    ch = Chart(("t", "z", "a", "b", "m", "n"))
    s = from_equations({"v_x": "-u_y", "v_y": "u_x"}, chart=ch)
    assert s.chart.names == ch.names
    assert field_texts(s.h_frame[0]) == ["1", "0", "m", "-n", "0", "0"]


def test_orientation_is_passed_through():
    assert from_equations(CAUCHY_RIEMANN, orientation=-1).orientation == -1


def test_rhs_may_not_use_solved_variables():
    with pytest.raises(MalformedSystemError):
        solved_system({"v_x": "-u_y + v_y", "v_y": "u_x"})
    with pytest.raises(MalformedSystemError):
        solved_system({"r": "-q + s", "s": "p"})


def test_malformed_systems():
    with pytest.raises(MalformedSystemError):
        solved_system({"v_x": "0"})
    with pytest.raises(MalformedSystemError):
        solved_system({"w_x": "0", "v_y": "0"})
    with pytest.raises(MalformedSystemError):
        solved_system({"v_x": "0", "r": "1"})


def test_unknown_identifiers_in_rhs():
    with pytest.raises(UnknownIdentifierError):
        solved_system({"v_x": "-q + zeta", "v_y": "p"})


def test_any_pair_of_jets_is_allowed():
    sys = solved_system({"u_x": "1", "u_y": "v"})
    assert sys.unsolved == ("v_x", "v_y")
    assert sys.chart.names[4:] == ("r", "s")
    jets = sys.jet_values()
    assert is_zero(jets["u_y"] - parse_expr("v", sys.chart), sys.chart)
