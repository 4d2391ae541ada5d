import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbwehrl import polynomial as P
from sbwehrl.gaussian_moments import GaussianForm, coupled_form, moment, polynomial_expectation
from sbwehrl.husimi import husimi_of
from sbwehrl.quadrature import (
    ENV_WORKERS, McSpec, QuadratureSpec, gh_nodes, integrate_gaussian, integrate_gaussian_polar,
    mc_integrate, polar_rule, resolve_workers,
)
from sbwehrl.sbs_state import ground_state
from sbwehrl.verification import random_polynomials


def test_gh_low_orders():
    t, w = gh_nodes(1)
    assert t.tolist() == [0.0] and w[0] == pytest.approx(math.sqrt(math.pi))
    t, w = gh_nodes(2)
    assert np.allclose(t, [-1 / math.sqrt(2), 1 / math.sqrt(2)])
    assert np.allclose(w, [math.sqrt(math.pi) / 2] * 2)


@pytest.mark.parametrize("order", [3, 10, 48, 200])
def test_gh_symmetry_and_positivity(order):
    t, w = gh_nodes(order)
    assert np.array_equal(t, -t[::-1])
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(math.sqrt(math.pi), rel=1e-13)


@pytest.mark.parametrize("order", [2, 5, 12, 30])
def test_gh_polynomial_exactness(order):
    t, w = gh_nodes(order)
    for k in range(order):
        exact = math.gamma(k + 0.5)
        assert np.sum(w * t ** (2 * k)) == pytest.approx(exact, rel=1e-10)
        assert abs(np.sum(w * t ** (2 * k + 1))) < 1e-10 * exact


@pytest.mark.parametrize("order", [0, 201, 2.5])
def test_gh_order_range(order):
    with pytest.raises(ValueError):
        gh_nodes(order)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(base_order=1)
    with pytest.raises(ValueError):
        QuadratureSpec(base_order=50, max_order=40)
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        McSpec(samples=10)
    assert list(QuadratureSpec().orders()) == [24, 48, 96, 192]


def _random_spd(rng, dim):
    a = rng.normal(size=(dim, dim))
    return a @ a.T + 0.2 * np.eye(dim)


@pytest.mark.parametrize("seed", range(20))
def test_whitening_normalisation(seed):
    rng = np.random.default_rng(seed)
    dim = 2 if seed % 2 else 4
    form = GaussianForm.from_qmatrix(_random_spd(rng, dim))
    res = integrate_gaussian(lambda x: np.ones(len(x)), form, QuadratureSpec(2, 4))
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.converged


def test_equipartition():
    form = coupled_form(1.0)
    res = integrate_gaussian(form.quadratic, form, QuadratureSpec(4, 8))
    assert res.value == pytest.approx(2.0, rel=1e-12)


def test_ground_entropy_integrand():
    d = husimi_of(ground_state(1.0))
    res = integrate_gaussian(lambda x: -d.log_density(x), d.form, QuadratureSpec(4, 8))
    assert res.value == pytest.approx(5.15703, abs=1e-5)
    assert res.value == pytest.approx(2 + 2 * math.log(math.pi) + 2 * math.log(math.cosh(1)), abs=1e-12)


def test_random_polynomials_exact():
    form = coupled_form(0.6)
    for poly in random_polynomials():
        res = integrate_gaussian(lambda x, p=poly: P.evaluate(p, x), form, QuadratureSpec(8, 16))
        assert res.value == pytest.approx(polynomial_expectation(form, poly), rel=1e-10, abs=1e-10)


def test_gh_agrees_with_mc():
    form = coupled_form(0.6)
    for poly in random_polynomials():
        fn = lambda x, p=poly: P.evaluate(p, x)  # noqa: E731
        gh = integrate_gaussian(fn, form, QuadratureSpec(8, 16))
        mc = mc_integrate(fn, form)
        assert abs(gh.value - mc.value) < 4 * mc.stderr


def test_mc_examples():
    form = coupled_form(1.0)
    one = mc_integrate(lambda x: np.ones(len(x)), form, McSpec(samples=5000))
    assert one.value == 1.0 and one.stderr == 0.0
    mc = mc_integrate(lambda x: x[:, 0] * x[:, 1], form)
    assert abs(mc.value - moment(form, (1, 1, 0, 0))) < 4 * mc.stderr
    d = husimi_of(ground_state(0.0))
    ent = mc_integrate(lambda x: -d.log_density(x), d.form)
    assert abs(ent.value - 2 * (1 + math.log(math.pi))) < 4 * ent.stderr


def test_mc_determinism_across_workers_and_seeds():
    form = coupled_form(0.4)
    fn = lambda x: np.cos(x[:, 0]) + x[:, 3] ** 2  # noqa: E731
    spec = McSpec(samples=200_000, seed=11, chunk=10_000)
    a = mc_integrate(fn, form, spec, workers=1)
    b = mc_integrate(fn, form, spec, workers=4)
    c = mc_integrate(fn, form, spec, workers=1)
    assert a == b == c
    d = mc_integrate(fn, form, McSpec(samples=200_000, seed=12, chunk=10_000))
    assert d.value != a.value


def test_tensor_determinism_across_workers():
    form = coupled_form(0.4)
    fn = lambda x: np.exp(-0.1 * np.sum(x ** 2, axis=1))  # noqa: E731
    spec = QuadratureSpec(24, 48)
    assert integrate_gaussian(fn, form, spec, 1) == integrate_gaussian(fn, form, spec, 3)


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(ENV_WORKERS, "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2
    monkeypatch.delenv(ENV_WORKERS)
    assert resolve_workers(None) == 1


def test_non_convergence_is_flagged():
    form = GaussianForm.from_qmatrix(np.eye(2))
    res = integrate_gaussian(lambda x: np.abs(x[:, 0]) ** 0.5, form, QuadratureSpec(4, 8))
    assert not res.converged and math.isfinite(res.value) and res.error > 0


def test_non_finite_integrand_raises():
    form = GaussianForm.from_qmatrix(np.eye(2))
    with pytest.raises(FloatingPointError):
        with np.errstate(divide="ignore"):
            integrate_gaussian(lambda x: np.log(np.abs(x[:, 0]) * 0), form, QuadratureSpec(2, 4))


def test_polar_rule_weights():
    y, w = polar_rule(24)
    assert w.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.sum(w * np.sum(y ** 2, axis=1)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 4))
def test_polar_rule_log_singular_integrand(n):
    # E[r^2n ln r^2] for exp(-r^2)/pi is n! * digamma(n + 1)
    form = GaussianForm.from_qmatrix(np.eye(2))
    fn = lambda x: (np.sum(x ** 2, axis=1) ** n) * np.log(np.sum(x ** 2, axis=1))  # noqa: E731
    res = integrate_gaussian_polar(fn, form)
    from scipy.special import digamma

    assert res.converged
    assert res.value == pytest.approx(math.factorial(n) * digamma(n + 1), rel=1e-12)


def test_polar_four_dimensional_matches_tensor_for_smooth_integrand():
    form = coupled_form(0.7)
    fn = lambda x: np.cos(0.3 * x[:, 0] - 0.2 * x[:, 3]) * (1 + x[:, 1] ** 2)  # noqa: E731
    tensor = integrate_gaussian(fn, form)
    # a single level: the next doubling would exceed the node cap
    polar = integrate_gaussian_polar(fn, form, QuadratureSpec(24, 24), first_mode=1)
    assert not polar.converged and polar.order == 24
    assert polar.value == pytest.approx(tensor.value, rel=1e-11)
