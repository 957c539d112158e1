import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coronalab.corona import (
    CoronaError, CoronaProblem, certify_lower_bound, corona_data, delta, koszul_solve,
    lam_wedge, sample_points, standard_generators, t2_solve,
)
from coronalab.fields import PolyHolo, SmoothField, dbar_fd
from coronalab.kernels import KernelConstants, SolverRule

PTS = sample_points(2, 6, 0.7, seed=11)
# calibrated n = 2, N = 3 constants (see test_kernels for the calibration itself)
C3 = KernelConstants(2, 3.0, (-1 / (4 * np.pi ** 2), -3 / (4 * np.pi ** 2)))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       st.dictionaries(st.sampled_from([(0, 1), (0, 2), (1, 2), (0, 1, 2)]), st.floats(-2, 2), min_size=1))
def test_delta_squares_to_zero(v, x):
    assert all(abs(c) < 1e-12 for c in delta(v, delta(v, x)).values())


def test_delta_of_G_is_one():
    data = corona_data(standard_generators(3))
    G = data.G_lambda(PTS)
    gv = [g(PTS) for g in data.g]
    out = delta(gv, {I: c for (I, _), c in G.items()})
    assert np.allclose(out[()], 1.0, atol=1e-14)


def test_delta_leibniz_on_grade_two():
    v = [0.3, -1.2, 2.0]
    a, b = {(0,): 1.5, (2,): -0.5}, {(1,): 2.0, (2,): 0.25}
    lhs = delta(v, lam_wedge(a, b))
    da, db = delta(v, a)[()], delta(v, b)[()]
    rhs = {}
    for k, c in b.items():
        rhs[k] = rhs.get(k, 0) + da * c
    for k, c in a.items():
        rhs[k] = rhs.get(k, 0) - db * c
    assert all(abs(lhs.get(k, 0) - rhs.get(k, 0)) < 1e-14 for k in set(lhs) | set(rhs))


def test_omega123_forms_agree():
    data = corona_data(standard_generators(3))
    assert np.max(np.abs(data.omega123_det(PTS) - data.omega123_cyclic(PTS))) < 1e-14


def test_omega_identities_against_finite_differences():
    data = corona_data(standard_generators(2))
    om = data.omega_closed(PTS)
    g1, g2 = data.g
    G1 = SmoothField(lambda z: data.values(z)[0][..., 0], 2)
    G2 = SmoothField(lambda z: data.values(z)[0][..., 1], 2)
    assert np.max(np.abs(dbar_fd(G1, PTS) + g2(PTS)[:, None] * om)) < 1e-6
    assert np.max(np.abs(dbar_fd(G2, PTS) - g1(PTS)[:, None] * om)) < 1e-6
    assert np.allclose(data.omega(PTS), om, atol=1e-13)


def test_closed_form_partials_match_fd():
    data = corona_data(standard_generators(2))
    _, _, dGbar = data.values(PTS)
    for i in range(2):
        Gi = SmoothField(lambda z, i=i: data.values(z)[0][..., i], 2)
        assert np.max(np.abs(dbar_fd(Gi, PTS) - dGbar[:, i, :])) < 1e-8


def test_lower_bound_certificate():
    lo, cert = certify_lower_bound(standard_generators(2))
    assert lo == pytest.approx(0.45, abs=0.02) and cert > 0


def test_common_zero_is_rejected():
    with pytest.raises(CoronaError):
        corona_data([PolyHolo.parse("z1", 2), PolyHolo.parse("z2", 2)], delta_min=0.1)


def test_constants_must_match_problem():
    prob = CoronaProblem(standard_generators(2), PolyHolo.parse("1", 2), 2, N=4.0, constants=C3)
    with pytest.raises(CoronaError):
        koszul_solve(prob, PTS)


@pytest.fixture(scope="module")
def light_problem():
    return CoronaProblem(standard_generators(2), PolyHolo.parse("z1", 2), 2, N=3.0,
                         rule=SolverRule(3, 6), constants=C3)


def test_exact_reproduction_and_koszul_equals_t2(light_problem):
    F = koszul_solve(light_problem, PTS)
    T = t2_solve(light_problem, PTS)
    g = np.stack([gj(PTS) for gj in light_problem.g], axis=-1)
    assert np.max(np.abs(np.sum(g * F, axis=-1) - PTS[:, 0])) < 1e-12
    assert np.max(np.abs(F - T)) < 1e-10
