"""Wehrl entropies, partial entropies and mutual information.

Closed forms for the entangled vacuum and the one-sided excitations
``(n, 0)`` / ``(0, n)`` sit next to a numerical route that integrates the
Husimi density directly.  Entropies are dimensionless (hbar = 1); physical
units follow by adding ``d * ln(hbar)`` for a ``d``-mode density.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import exp1, gammainc, gammaincc

from . import polynomial as P
from .coupling import N_MAX, as_coupling, log_cosh, log_sinh_abs
from .gaussian_moments import polynomial_expectation
from .husimi import husimi_of, marginal
from .quadrature import QuadratureSpec, integrate_gaussian_polar
from .sbs_state import excited_state

EULER_GAMMA = 0.57721566490153286061
LN_PI = math.log(math.pi)

# densities below this are treated as 0 in p ln p
_CLAMP = 1e-300
_SMALL_ETA = 1e-6


# --- special functions ----------------------------------------------------------

def harmonic(n):
    """Harmonic number ``H_n`` (``H_0 = 0``), summed exactly."""
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    return float(sum((Fraction(1, k) for k in range(1, int(n) + 1)), Fraction(0)))


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * abs(total) or k > 200:
            break
        k += 1
    return -EULER_GAMMA - math.log(x) - total


def _e1_scaled_cf(x):
    # exp(x) E1(x), modified Lentz on the even continued fraction
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def gamma0(x):
    """Upper incomplete gamma ``Gamma(0, x) = E1(x)`` for ``x > 0``."""
    if not x > 0:
        raise ValueError("gamma0 needs x > 0")
    if x <= 1.0:
        return _e1_series(x)
    return _e1_scaled_cf(x) * math.exp(-x)


def gamma0_scaled(x):
    """``exp(x) * Gamma(0, x)``, finite for arbitrarily large ``x``."""
    if not x > 0:
        raise ValueError("gamma0_scaled needs x > 0")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_cf(x)


# --- closed forms -------------------------------------------------------------------

def s_total_ground(eta):
    return 2.0 + 2.0 * LN_PI + 2.0 * log_cosh(eta)


def s_partial_ground(eta):
    return 1.0 + LN_PI + 2.0 * log_cosh(eta)


def mutual_info_ground(eta):
    return 2.0 * log_cosh(eta)


def _excitation_term(n):
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    n = int(n)
    return n * (1.0 + EULER_GAMMA - harmonic(n)) + math.lgamma(n + 1)


def s_total_excited(eta, n):
    return 2.0 * (1.0 + LN_PI + log_cosh(eta)) + _excitation_term(n)


def relative_entropy_step(n):
    """``S(n+1, 0) - S(n, 0)``, independent of the coupling."""
    return EULER_GAMMA - harmonic(n) + math.log(n + 1)


def s_partial_excited_same(eta, n):
    """Entropy of the excited mode's marginal for the ``(n, 0)`` state."""
    return 1.0 + LN_PI + 2.0 * log_cosh(eta) + _excitation_term(n)


def _gamma_term(eta):
    """``tanh^2 eta * exp(csch^2 eta) * Gamma(0, csch^2 eta)``.

    Near ``eta = 0`` the asymptotic series of ``exp(x) E1(x)`` in
    ``1/x = sinh^2 eta`` is used; the term vanishes at ``eta = 0``.
    """
    if abs(eta) < _SMALL_ETA:
        s2 = math.sinh(eta) ** 2
        return math.tanh(eta) ** 2 * s2 * (1.0 - s2 + 2.0 * s2 * s2)
    x = math.exp(-2.0 * log_sinh_abs(eta))
    return math.tanh(eta) ** 2 * gamma0_scaled(x)


def s_partial_other_first_excited(eta):
    """Entropy of the non-excited mode's marginal for the ``(1, 0)`` state."""
    return 1.0 + LN_PI + 4.0 * log_cosh(eta) - _gamma_term(eta)


def mutual_info_first_excited(eta):
    return 4.0 * log_cosh(eta) - _gamma_term(eta)


def excess_mutual_info_first_excited(eta):
    """Mutual information of ``(1, 0)`` minus that of the vacuum."""
    return 2.0 * log_cosh(eta) - _gamma_term(eta)


# --- numerical entropy -------------------------------------------------------------

class EntropyValue(NamedTuple):
    value: float
    error: float
    converged: bool


def _plogp(poly, coords):
    def fn(x):
        p = P.evaluate(poly, x[:, coords] if coords is not None else x)
        p = np.where(p > _CLAMP, p, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return fn


_BATCH = 4096
_DEGREE_RTOL = 1e-13


def _log_root_moments(dmax, c):
    """``M[:, a, b] = E[w^a conj(w)^b ln|w - c|^2]`` for ``w`` with density ``exp(-|w|^2) / pi``.

    Expanding ``ln|w - c|^2`` in angular harmonics leaves one harmonic per
    ``(a, b)``; the radial parts are incomplete gamma functions.
    """
    x = np.abs(c) ** 2
    pos = x > 0.0
    xs = np.where(pos, x, 1.0)
    logx = np.where(pos, np.log(xs), 0.0)
    k = np.arange(dmax + 1)
    fact = np.array([math.factorial(int(i)) for i in k], dtype=float)
    lower = gammainc(k + 1, x[:, None]) * fact
    upper = gammaincc(k + 1, x[:, None]) * fact
    # J_a = int_x^inf s^a e^-s ln s ds
    jay = np.empty((len(c), dmax + 1))
    ex = np.exp(-x)
    jay[:, 0] = np.where(pos, logx * ex + exp1(xs), -EULER_GAMMA)
    for a in range(1, dmax + 1):
        jay[:, a] = np.where(pos, xs ** a * logx * ex, 0.0) + a * jay[:, a - 1] + upper[:, a - 1]
    out = np.empty((len(c), dmax + 1, dmax + 1), dtype=complex)
    with np.errstate(divide="ignore", under="ignore"):
        for a in range(dmax + 1):
            out[:, a, a] = logx * lower[:, a] + jay[:, a]
            for b in range(a):
                m = a - b
                ratio = np.where(pos, np.exp(np.log(lower[:, a]) - m * logx), 0.0)
                val = -(c ** m) * (ratio + upper[:, b]) / m
                out[:, a, b] = val
                out[:, b, a] = np.conj(val)
    return out


def _inner_plogp(g):
    """``E[|g(w)|^2 ln|g(w)|^2]`` for polynomials ``g`` with coefficient rows ``g[:, k]``."""
    n, width = g.shape
    mag = np.abs(g)
    top = mag.max(axis=1)
    keep = mag > _DEGREE_RTOL * top[:, None]
    deg = np.where(keep.any(axis=1), width - 1 - np.argmax(keep[:, ::-1], axis=1), -1)
    out = np.zeros(n)
    fact = np.array([math.factorial(i) for i in range(width)], dtype=float)
    for d in np.unique(deg):
        if d < 0:
            continue
        sel = deg == d
        gs = g[sel, : d + 1]
        lead = gs[:, d]
        mass = np.sum(np.abs(gs) ** 2 * fact[: d + 1], axis=1)
        acc = np.log(np.abs(lead) ** 2) * mass
        if d > 0:
            comp = np.zeros((len(gs), d, d), dtype=complex)
            comp[:, 0, :] = -gs[:, d - 1::-1] / lead[:, None]
            if d > 1:
                comp[:, np.arange(1, d), np.arange(d - 1)] = 1.0
            roots = np.linalg.eigvals(comp)
            for j in range(d):
                mom = _log_root_moments(d, roots[:, j])
                acc = acc + np.einsum("na,nb,nab->n", gs, np.conj(gs), mom).real
        out[sel] = acc
    return out


def _nested_applicable(form):
    _, _, _, _, cond = form.split(0)
    return np.allclose(cond.qmatrix, np.eye(2), rtol=0.0, atol=1e-15)


def _conditional_plogp(factor, form):
    """``x1 -> E[p ln p | x1]`` with the second mode integrated exactly.

    Given mode 1, ``p = |g(w)|^2`` where ``g`` is ``P(z1, .)`` re-centred on
    the conditional mean and ``w`` is a standard complex normal, so the
    logarithm splits over the roots of ``g``.
    """
    _, _, shift, _, _ = form.split(0)
    deg2 = max(b for _, b in factor)
    coef = [[(a, c) for (a, b), c in factor.items() if b == j] for j in range(deg2 + 1)]
    binom = np.array([[math.comb(b, k) for b in range(deg2 + 1)] for k in range(deg2 + 1)], dtype=float)

    def fn(x):
        res = np.empty(len(x))
        for s in range(0, len(x), _BATCH):
            xb = x[s: s + _BATCH]
            z1 = xb[:, 0] + 1j * xb[:, 1]
            mu = xb @ shift.T
            c0 = mu[:, 0] + 1j * mu[:, 1]
            q = np.zeros((len(xb), deg2 + 1), dtype=complex)
            for j, terms in enumerate(coef):
                for a, c in terms:
                    q[:, j] += c * z1 ** a
            # Taylor shift: g_k = sum_b q_b C(b, k) c0^(b - k)
            powers = c0[:, None] ** np.arange(deg2 + 1)
            g = np.zeros_like(q)
            for k in range(deg2 + 1):
                for b in range(k, deg2 + 1):
                    g[:, k] += q[:, b] * binom[k, b] * powers[:, b - k]
            res[s: s + _BATCH] = _inner_plogp(g)
        return res

    return fn


def wehrl_numeric(density, spec=None, workers=None):
    """``-int F ln F`` for a polynomial-times-Gaussian Husimi density.

    With ``F = exp(L) p exp(-x^T Q x)`` the entropy splits into
    ``-L + <x^T Q x>_F - <ln p>_F``.  The first two pieces are exact Gaussian
    moments; only ``E_Q[p ln p]`` is integrated numerically, over the
    Gaussian marginal of whichever coordinates ``p`` depends on.
    """
    spec = spec or QuadratureSpec()
    form = density.form
    poly = density.poly
    scale = math.exp(density.log_prefactor + form.log_norm)
    energy = scale * polynomial_expectation(form, P.mul(poly, form.quadratic_poly()))

    used = P.variables(poly)
    if not used:
        c = next(iter(poly.values()))
        return EntropyValue(-density.log_prefactor - math.log(c) + energy, 0.0, True)

    if form.dim == 4 and density.factor is not None and _nested_applicable(form):
        res = integrate_gaussian_polar(_conditional_plogp(density.factor, form),
                                       form.gaussian_marginal(0), spec, workers=workers)
        value = -density.log_prefactor + energy - scale * res.value
        return EntropyValue(value, scale * res.error, res.converged)

    plane_of = None
    for m, pair in enumerate(form.modes):
        if used <= set(pair):
            plane_of = m
    if form.dim == 4 and plane_of is not None:
        sub_form = form.gaussian_marginal(plane_of)
        sub_poly = P.restrict(poly, form.modes[plane_of])
        res = integrate_gaussian_polar(_plogp(sub_poly, None), sub_form, spec, workers=workers)
    else:
        first = 0
        if form.dim == 4:
            # put the mode with the higher polynomial degree first
            deg = [max((k[i] + k[j] for k in poly), default=0) for i, j in form.modes]
            first = int(deg[1] > deg[0])
        res = integrate_gaussian_polar(_plogp(poly, None), form, spec, first_mode=first,
                                       workers=workers)
    value = -density.log_prefactor + energy - scale * res.value
    return EntropyValue(value, scale * res.error, res.converged)


# --- reports ---------------------------------------------------------------------------

@dataclass
class EntropyEntry:
    analytic: Optional[float]
    numeric: float
    err: float

    @property
    def discrepancy(self):
        if self.analytic is None:
            return None
        return float(self.numeric - self.analytic)

    def to_dict(self):
        # a non-finite error bound means "not converged" and is reported via flags
        err = self.err if math.isfinite(self.err) else None
        return {"analytic": self.analytic, "numeric": float(self.numeric), "err": err,
                "discrepancy": self.discrepancy}


@dataclass
class EntropyReport:
    eta: float
    state: tuple
    s_total: EntropyEntry
    s_partial_1: EntropyEntry
    s_partial_2: EntropyEntry
    mutual_info: EntropyEntry
    flags: list = field(default_factory=list)

    QUANTITIES = ("s_total", "s_partial_1", "s_partial_2", "mutual_info")

    def to_dict(self):
        out = {"eta": self.eta, "state": list(self.state)}
        for q in self.QUANTITIES:
            out[q] = getattr(self, q).to_dict()
        out["flags"] = list(self.flags)
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @property
    def converged(self):
        return not any(f.endswith("not_converged") for f in self.flags)


def _analytic_slots(eta, n1, n2):
    """Closed forms available for the state; missing ones are ``None``."""
    if n1 == 0 and n2 == 0:
        return (s_total_ground(eta), s_partial_ground(eta), s_partial_ground(eta),
                mutual_info_ground(eta))
    if n1 and n2:
        return None, None, None, None
    n = n1 or n2
    total = s_total_excited(eta, n)
    same = s_partial_excited_same(eta, n)
    other = s_partial_other_first_excited(eta) if n == 1 else None
    mutual = mutual_info_first_excited(eta) if n == 1 else None
    if n1:
        return total, same, other, mutual
    return total, other, same, mutual


def report(eta, n1=0, n2=0, spec=None, workers=None):
    """Analytic and numerical entropies of the ``(n1, n2)`` state at coupling ``eta``."""
    c = as_coupling(eta)
    for n in (n1, n2):
        if int(n) != n or not 0 <= n <= N_MAX:
            raise ValueError(f"excitation numbers must be integers in [0, {N_MAX}]")
    spec = spec or QuadratureSpec()
    density = husimi_of(excited_state(c, n1, n2))
    numeric = {
        "s_total": wehrl_numeric(density, spec, workers),
        "s_partial_1": wehrl_numeric(marginal(density, 1), spec, workers),
        "s_partial_2": wehrl_numeric(marginal(density, 2), spec, workers),
    }
    flags = [f"{k}:not_converged" for k, v in numeric.items() if not v.converged]
    mi_value = (numeric["s_partial_1"].value + numeric["s_partial_2"].value
                - numeric["s_total"].value)
    mi_err = sum(v.error for v in numeric.values())
    a_total, a_1, a_2, a_mi = _analytic_slots(c.eta, n1, n2)
    return EntropyReport(
        eta=c.eta,
        state=(int(n1), int(n2)),
        s_total=EntropyEntry(a_total, numeric["s_total"].value, numeric["s_total"].error),
        s_partial_1=EntropyEntry(a_1, numeric["s_partial_1"].value, numeric["s_partial_1"].error),
        s_partial_2=EntropyEntry(a_2, numeric["s_partial_2"].value, numeric["s_partial_2"].error),
        mutual_info=EntropyEntry(a_mi, mi_value, mi_err),
        flags=flags,
    )

