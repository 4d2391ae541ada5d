import math

import numpy as np
import pytest

from sbwehrl import polynomial as P
from sbwehrl.coupling import Coupling
from sbwehrl.gaussian_moments import GaussianForm
from sbwehrl.husimi import (
    husimi_of, marginal, purity, single_mode_density, slice, slice_extent, slice_grid,
)
from sbwehrl.quadrature import QuadratureSpec, integrate_gaussian, integrate_gaussian_polar
from sbwehrl.sbs_state import SBState, excited_state, ground_state

STATES = [(a, b) for a in range(4) for b in range(4)]


def test_ground_origin_value():
    d = husimi_of(ground_state(0.0))
    assert d(np.zeros(4)) == pytest.approx(1 / math.pi ** 2)
    assert d(np.zeros(4)) == pytest.approx(0.101321, abs=1e-6)


def test_ground_matches_closed_form():
    eta = 0.8
    c = Coupling(eta)
    d = husimi_of(ground_state(eta))
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 4))
    u1, u2, v1, v2 = x.T
    z1, z2 = u1 + 1j * v1, u2 + 1j * v2
    expect = (c.sech ** 2 / math.pi ** 2 * np.exp(-abs(z1) ** 2 - abs(z2) ** 2)
              * np.exp(c.tau * 2 * (z1 * z2).real))
    assert np.allclose(d(x), expect, rtol=1e-12)


def test_unnormalised_state_rejected():
    with pytest.raises(ValueError):
        husimi_of(ground_state(0.5).scaled(2.0))


@pytest.mark.parametrize("n", [0, 1, 3])
def test_single_mode_level(n):
    state = SBState(Coupling(0.0), {(n, 0): 1.0}, 1 / math.sqrt(math.factorial(n)))
    m = marginal(husimi_of(state), 1)
    ref = single_mode_density(n)
    for x, p in [(0.3, -0.2), (1.5, 0.4), (-2.0, 1.0)]:
        # x = sqrt(2) u, p = -sqrt(2) v; both densities are per unit d^2 z = du dv
        u, v = x / math.sqrt(2), -p / math.sqrt(2)
        assert m(np.array([u, v])) == pytest.approx(ref(x, p), rel=1e-12)


@pytest.mark.parametrize("n1,n2", [(0, 0), (1, 2), (3, 3)])
def test_nonnegative(n1, n2):
    d = husimi_of(excited_state(0.9, n1, n2))
    x = np.random.default_rng(1).normal(scale=2.0, size=(10_000, 4))
    assert np.all(d(x) >= 0)


@pytest.mark.parametrize("eta", [0.0, 0.5, 1.5])
def test_normalisation(eta):
    for n1, n2 in STATES:
        d = husimi_of(excited_state(eta, n1, n2))
        assert d.total_mass() == pytest.approx(1.0, abs=1e-8)


def test_normalisation_by_quadrature():
    d = husimi_of(excited_state(0.5, 2, 1))
    scale = math.exp(d.log_prefactor + d.form.log_norm)
    res = integrate_gaussian(lambda x: P.evaluate(d.poly, x), d.form, QuadratureSpec(8, 16))
    assert scale * res.value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("eta", [0.0, 0.7, 2.0])
def test_ground_marginal(eta):
    c = Coupling(eta)
    m = marginal(husimi_of(ground_state(eta)), 1)
    pts = np.array([[0.0, 0.0], [0.4, -1.0], [2.0, 1.0]])
    r2 = (pts ** 2).sum(axis=1)
    expect = c.sech ** 2 / math.pi * np.exp(-c.sech ** 2 * r2)
    assert np.allclose(m(pts), expect, rtol=1e-12)


@pytest.mark.parametrize("eta", [0.3, 1.0, 2.5])
def test_first_excited_other_marginal(eta):
    c = Coupling(eta)
    m = marginal(husimi_of(excited_state(eta, 1, 0)), 2)
    pts = np.array([[0.0, 0.0], [0.4, -1.0], [2.0, 1.0]])
    r2 = (pts ** 2).sum(axis=1)
    expect = c.sech ** 4 / math.pi * np.exp(-c.sech ** 2 * r2) * (c.tau ** 2 * r2 + 1)
    assert np.allclose(m(pts), expect, rtol=1e-12)


def test_marginal_against_numeric_integration():
    eta = 0.9
    d = husimi_of(excited_state(eta, 2, 1))
    m = marginal(d, 1)
    rng = np.random.default_rng(5)
    for u1, v1 in rng.normal(size=(20, 2)):
        # integrate over (u2, v2) against the conditional weight exp(-|y - mu|^2)
        cond = GaussianForm.from_qmatrix(np.eye(2))
        mu = np.array([Coupling(eta).tau * u1, -Coupling(eta).tau * v1])

        def fn(y):
            pts = np.column_stack([np.full(len(y), u1), y[:, 0] + mu[0],
                                   np.full(len(y), v1), y[:, 1] + mu[1]])
            return d(pts) * np.exp(np.sum(y ** 2, axis=1))

        val = math.pi * integrate_gaussian(fn, cond, QuadratureSpec(16, 32)).value
        assert val == pytest.approx(float(m(np.array([u1, v1]))), rel=1e-9, abs=1e-12)


def test_marginal_mass():
    d = husimi_of(excited_state(1.5, 3, 2))
    for keep in (1, 2):
        assert marginal(d, keep).total_mass() == pytest.approx(1.0, abs=1e-8)


def test_marginal_swap_symmetry():
    for n in (1, 2, 3):
        a = marginal(husimi_of(excited_state(0.6, n, 0)), 1)
        b = marginal(husimi_of(excited_state(0.6, 0, n)), 2)
        pts = np.random.default_rng(n).normal(size=(30, 2))
        assert np.allclose(a(pts), b(pts), rtol=1e-12)


def test_marginal_of_product_state_factorises():
    d = husimi_of(excited_state(0.0, 2, 1))
    pts = np.random.default_rng(2).normal(size=(10, 2))
    ref = marginal(husimi_of(excited_state(0.0, 2, 0)), 1)
    assert np.allclose(marginal(d, 1)(pts), ref(pts), rtol=1e-12)


@pytest.mark.parametrize("eta", [0.0, 1.0, 2.0])
def test_purity(eta):
    c = Coupling(eta)
    d = husimi_of(ground_state(eta))
    assert purity(d) == pytest.approx(c.sech ** 2, abs=1e-12)
    assert purity(marginal(d, 1)) == pytest.approx(c.sech ** 2, abs=1e-12)
    assert 0 < purity(d) <= 1 + 1e-12
    if eta == 0.0:
        assert purity(d) == pytest.approx(1.0, abs=1e-10)
    else:
        assert purity(d) < 1 - 1e-10


def test_purity_of_marginal_by_quadrature():
    m = marginal(husimi_of(excited_state(0.8, 1, 0)), 2)
    # int m^2 = Z * E[m^2 exp(x^T Q x)] under the marginal's own weight
    res = integrate_gaussian_polar(lambda x: m(x) ** 2 * np.exp(m.form.quadratic(x)), m.form)
    assert 2 * math.pi * math.exp(m.form.log_norm) * res.value == pytest.approx(purity(m), rel=1e-9)


def test_slice_decoupled_shape():
    d = husimi_of(ground_state(0.0))
    s0 = slice(d, (0.0, 0.0))
    s1 = slice(d, (0.7, -0.4))
    u = np.linspace(-2, 2, 7)
    ratio = s1(u, u[::-1]) / s0(u, u[::-1])
    assert np.allclose(ratio, ratio[0])


def test_slice_peak_follows_fixed_point():
    eta = 3.0
    d = husimi_of(ground_state(eta))
    uu, vv, vals = slice_grid(d, (1.0, -1.0))
    i = np.unravel_index(np.argmax(vals), vals.shape)
    cell = uu[1, 0] - uu[0, 0]
    assert abs(uu[i] - math.tanh(3)) <= cell and abs(vv[i] - math.tanh(3)) <= cell
    # the exact maximiser is (tanh 3, tanh 3)
    peak = slice(d, (1.0, -1.0))(math.tanh(3), math.tanh(3))
    assert peak >= vals.max()


def test_slice_at_origin_peaks_at_origin():
    d = husimi_of(ground_state(1.3))
    uu, vv, vals = slice_grid(d, (0.0, 0.0), grid=51)
    i = np.unravel_index(np.argmax(vals), vals.shape)
    assert uu[i] == pytest.approx(0.0, abs=1e-12) and vv[i] == pytest.approx(0.0, abs=1e-12)


def test_slice_grid_validation_and_extent():
    d = husimi_of(ground_state(2.0))
    with pytest.raises(ValueError):
        slice_grid(d, (0, 0), grid=0)
    assert slice_extent(d, (3.0, 4.0)) == pytest.approx(4 + 5 * math.tanh(2.0))
