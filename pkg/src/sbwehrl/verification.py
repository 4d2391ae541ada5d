"""Self-checks comparing closed forms, algebra and independent numerics.

Each check returns a :class:`CheckResult`; ``run_checks`` runs them all with
optional per-check tolerance overrides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polynomial as P
from . import wehrl as W
from .coupling import as_coupling
from .gaussian_moments import coupled_form, observable_report
from .husimi import husimi_of, marginal, purity
from .quadrature import McSpec, QuadratureSpec, integrate_gaussian, mc_integrate
from .sbs_state import apply_word, excited_state, ground_state, inner_product

ETA_GRID = (0.0, 0.25, 0.5, 1.0, 1.5, 2.0)
OBS_GRID = tuple(np.linspace(-2.0, 2.0, 11))

DEFAULT_TOLERANCES = {
    "ccr": 1e-12,
    "vacuum_annihilation": 1e-12,
    "orthonormality": 1e-10,
    "swap_symmetry": 1e-12,
    "observables": 1e-10,
    "husimi_normalisation": 1e-10,
    "entropy_ground_total": 1e-7,
    "entropy_ground_partial": 1e-7,
    "entropy_excited_total": 1e-6,
    "entropy_relative": 1e-6,
    "entropy_first_excited_partial": 1e-6,
    "entropy_strong_coupling_limit": 1e-3,
    "entropy_subadditivity": 1e-8,
    "gamma0_reference": 1e-12,
    "gh_vs_mc_polynomials": 4.0,
    "gh_vs_mc_entropy_integrand": 4.0,
}


@dataclass
class CheckResult:
    check_name: str
    status: str
    max_discrepancy: float
    tolerance: float

    @property
    def passed(self):
        return self.status == "pass"

    def to_dict(self):
        return {"check_name": self.check_name, "status": self.status,
                "max_discrepancy": self.max_discrepancy, "tolerance": self.tolerance}


def _coeffs(state):
    return {k: state.prefactor * c for k, c in state.poly.items()}


def _state_gap(a, b):
    """Largest coefficient of ``a - b``, relative to the largest of ``a`` and ``b``."""
    ca, cb = _coeffs(a), _coeffs(b)
    keys = set(ca) | set(cb)
    ref = max([abs(v) for v in ca.values()] + [abs(v) for v in cb.values()] + [1e-300])
    return max((abs(ca.get(k, 0) - cb.get(k, 0)) for k in keys), default=0.0) / ref


# --- algebra -----------------------------------------------------------------------

def check_ccr():
    worst = 0.0
    for eta in (0.0, 0.7, 1.5):
        for n1, n2 in ((0, 0), (1, 2), (2, 1)):
            f = excited_state(eta, n1, n2)
            for i in (1, 2):
                for j in (1, 2):
                    for ann, cre in ((f"wb{i}", f"w{j}"), (f"d{i}", f"z{j}")):
                        ab = apply_word(f, f"{ann} {cre}")
                        ba = apply_word(f, f"{cre} {ann}")
                        lhs = _coeffs(ab)
                        for k, v in _coeffs(ba).items():
                            lhs[k] = lhs.get(k, 0) - v
                        if i == j:
                            for k, v in _coeffs(f).items():
                                lhs[k] = lhs.get(k, 0) - v
                        ref = max(abs(v) for v in _coeffs(f).values())
                        worst = max(worst, max((abs(v) for v in lhs.values()), default=0.0) / ref)
    return worst


def check_vacuum_annihilation():
    worst = 0.0
    for eta in ETA_GRID:
        omega = ground_state(eta)
        for word in ("wb1", "wb2"):
            out = apply_word(omega, word)
            worst = max(worst, abs(inner_product(out, out)))
    return math.sqrt(worst)


def check_orthonormality(nmax=3):
    worst = 0.0
    labels = [(a, b) for a in range(nmax + 1) for b in range(nmax + 1)]
    for eta in (0.0, 0.5, 1.5):
        states = [excited_state(eta, a, b) for a, b in labels]
        for i, f in enumerate(states):
            for j in range(i, len(states)):
                g = inner_product(f, states[j])
                worst = max(worst, abs(g - (1.0 if i == j else 0.0)))
    return worst


def check_swap_symmetry():
    worst = 0.0
    for eta in (0.0, 0.8, 2.0):
        for n1, n2 in ((1, 0), (2, 1), (3, 1), (2, 3)):
            worst = max(worst, _state_gap(excited_state(eta, n1, n2).swapped(),
                                          excited_state(eta, n2, n1)))
    return worst


# --- Gaussian closed forms --------------------------------------------------------

def check_observables():
    return max(observable_report(float(e)).max_discrepancy for e in OBS_GRID)


def check_husimi_normalisation():
    worst = 0.0
    for eta in (0.0, 1.0, 2.0):
        for n1, n2 in ((0, 0), (1, 0), (2, 1)):
            d = husimi_of(excited_state(eta, n1, n2))
            worst = max(worst, abs(d.total_mass() - 1.0))
            for keep in (1, 2):
                worst = max(worst, abs(marginal(d, keep).total_mass() - 1.0))
        d0 = husimi_of(ground_state(eta))
        worst = max(worst, abs(purity(d0) - as_coupling(eta).sech ** 2))
    return worst


# --- entropies ----------------------------------------------------------------------

def _numeric(eta, n1, n2, keep=None, spec=None, workers=None):
    d = husimi_of(excited_state(eta, n1, n2))
    if keep is not None:
        d = marginal(d, keep)
    return W.wehrl_numeric(d, spec, workers).value


def check_entropy_ground_total(spec=None, workers=None):
    return max(abs(_numeric(e, 0, 0, None, spec, workers) - W.s_total_ground(e)) for e in ETA_GRID)


def check_entropy_ground_partial(spec=None, workers=None):
    worst = 0.0
    for e in ETA_GRID:
        r = W.report(e, 0, 0, spec, workers)
        for q in r.QUANTITIES[1:]:
            worst = max(worst, abs(getattr(r, q).discrepancy))
    return worst


def check_entropy_excited_total(spec=None, workers=None):
    worst = 0.0
    for e in (0.25, 0.5, 1.0, 1.5, 2.0):
        for n in (1, 2, 3):
            worst = max(worst, abs(_numeric(e, n, 0, None, spec, workers) - W.s_total_excited(e, n)))
    return worst


def check_entropy_relative(spec=None, workers=None):
    worst = 0.0
    for e in (0.5, 1.0):
        vals = [_numeric(e, n, 0, None, spec, workers) for n in range(4)]
        for n in range(3):
            expect = W.relative_entropy_step(n)
            worst = max(worst, abs(vals[n + 1] - vals[n] - expect))
    return worst


def check_entropy_first_excited_partial(spec=None, workers=None):
    worst = 0.0
    for e in (0.5, 1.0, 2.0):
        worst = max(worst, abs(_numeric(e, 1, 0, 1, spec, workers) - W.s_partial_excited_same(e, 1)))
        worst = max(worst, abs(_numeric(e, 1, 0, 2, spec, workers) - W.s_partial_other_first_excited(e)))
    return worst


def check_entropy_strong_coupling_limit(spec=None, workers=None):
    """At eta = 6 the two (1, 0) partials meet and the excess mutual information is gamma."""
    e = 6.0
    r = W.report(e, 1, 0, spec, workers)
    excess = r.mutual_info.numeric - W.mutual_info_ground(e)
    return max(abs(r.s_partial_2.numeric - r.s_partial_1.numeric), abs(excess - W.EULER_GAMMA))


def check_entropy_subadditivity(spec=None, workers=None):
    """Largest violation of ``S_i <= S`` and ``I >= 0`` over doubly excited states."""
    worst = 0.0
    for e in (0.0, 1.0):
        for n1, n2 in ((1, 1), (2, 1)):
            r = W.report(e, n1, n2, spec, workers)
            s = r.s_total.numeric
            worst = max(worst, r.s_partial_1.numeric - s, r.s_partial_2.numeric - s,
                        -r.mutual_info.numeric)
    return max(worst, 0.0)


def check_gamma0_reference():
    from scipy.special import exp1

    xs = np.concatenate([np.geomspace(1e-8, 1.0, 15), np.geomspace(1.0, 600.0, 15)])
    return max(abs(W.gamma0(float(x)) / exp1(x) - 1.0) for x in xs)


# --- oracle independence -------------------------------------------------------------

def random_polynomials(count=10, degree=6, seed=7):
    """Reproducible random polynomials in four variables of total degree <= ``degree``."""
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(count):
        poly = {}
        for _ in range(6):
            k = rng.multinomial(int(rng.integers(0, degree + 1)), [0.25] * 4)
            poly[tuple(int(i) for i in k)] = float(rng.normal())
        polys.append(poly)
    return polys


def check_gh_vs_mc_polynomials(mc_spec=None, workers=None):
    form = coupled_form(0.6)
    exact_spec = QuadratureSpec(base_order=8, max_order=16)
    worst = 0.0
    for poly in random_polynomials():
        fn = lambda x, p=poly: P.evaluate(p, x)  # noqa: E731
        gh = integrate_gaussian(fn, form, exact_spec, workers)
        mc = mc_integrate(fn, form, mc_spec, workers)
        worst = max(worst, abs(gh.value - mc.value) / mc.stderr)
    return worst


def check_gh_vs_mc_entropy_integrand(mc_spec=None, workers=None):
    """``-ln F`` averaged over ``F`` for the vacuum, where ``F`` is itself the sampling weight."""
    worst = 0.0
    spec = QuadratureSpec(base_order=4, max_order=16)
    for eta in (0.0, 1.0):
        d = husimi_of(ground_state(eta))
        fn = lambda x, d=d: -d.log_density(x)  # noqa: E731
        gh = integrate_gaussian(fn, d.form, spec, workers)
        mc = mc_integrate(fn, d.form, mc_spec, workers)
        worst = max(worst, abs(gh.value - mc.value) / mc.stderr)
    return worst


def run_checks(tolerances=None, seed=None, mc_samples=None, workers=None, spec=None):
    tol = dict(DEFAULT_TOLERANCES)
    for name, value in (tolerances or {}).items():
        if name not in tol:
            raise KeyError(f"unknown check {name!r}")
        tol[name] = float(value)
    mc_kwargs = {}
    if seed is not None:
        mc_kwargs["seed"] = int(seed)
    if mc_samples is not None:
        mc_kwargs["samples"] = int(mc_samples)
    mc_spec = McSpec(**mc_kwargs)

    runners = {
        "ccr": check_ccr,
        "vacuum_annihilation": check_vacuum_annihilation,
        "orthonormality": check_orthonormality,
        "swap_symmetry": check_swap_symmetry,
        "observables": check_observables,
        "husimi_normalisation": check_husimi_normalisation,
        "entropy_ground_total": lambda: check_entropy_ground_total(spec, workers),
        "entropy_ground_partial": lambda: check_entropy_ground_partial(spec, workers),
        "entropy_excited_total": lambda: check_entropy_excited_total(spec, workers),
        "entropy_relative": lambda: check_entropy_relative(spec, workers),
        "entropy_first_excited_partial": lambda: check_entropy_first_excited_partial(spec, workers),
        "entropy_strong_coupling_limit": lambda: check_entropy_strong_coupling_limit(spec, workers),
        "entropy_subadditivity": lambda: check_entropy_subadditivity(spec, workers),
        "gamma0_reference": check_gamma0_reference,
        "gh_vs_mc_polynomials": lambda: check_gh_vs_mc_polynomials(mc_spec, workers),
        "gh_vs_mc_entropy_integrand": lambda: check_gh_vs_mc_entropy_integrand(mc_spec, workers),
    }
    results = []
    for name, fn in runners.items():
        value = float(fn())
        ok = math.isfinite(value) and value <= tol[name]
        results.append(CheckResult(name, "pass" if ok else "fail", value, tol[name]))
    return results
