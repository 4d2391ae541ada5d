"""Husimi densities of Segal-Bargmann states.

A density is ``exp(log_prefactor) * poly(x) * exp(-x^T Q x)``.  Two-mode
densities use coordinates ``(u1, u2, v1, v2)``; single-mode marginals use
``(u, v)``.  With ``z = (x - i p) / sqrt(2)`` one has ``x = sqrt(2) u`` and
``p = -sqrt(2) v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polynomial as P
from .gaussian_moments import (
    MODES_4D, GaussianForm, coupled_form, moment, polynomial_expectation,
)
from .sbs_state import inner_product

NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HusimiDensity:
    dim_modes: int
    poly: dict
    form: GaussianForm
    log_prefactor: float
    # holomorphic P(z1, z2) with poly = |P|^2, kept for two-mode densities
    factor: dict | None = None

    @property
    def dim(self):
        return self.form.dim

    def __call__(self, x):
        """Density at points of shape ``(..., dim)``."""
        x = np.asarray(x, dtype=float)
        return math.exp(self.log_prefactor) * P.evaluate(self.poly, x) * np.exp(-self.form.quadratic(x))

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return self.log_prefactor + np.log(P.evaluate(self.poly, x)) - self.form.quadratic(x)

    def total_mass(self):
        """Exact integral of the density."""
        return math.exp(self.log_prefactor + self.form.log_norm) * polynomial_expectation(self.form, self.poly)


def husimi_of(state):
    """``|f(z)|^2 exp(-|z|^2) / pi^2`` as a polynomial times the coupled Gaussian."""
    norm = inner_product(state, state).real
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalised (<f,f> = {norm!r})")
    form = coupled_form(state.coupling)
    hol = dict(state.poly)
    real = P.mul(P.holomorphic_to_real(hol, MODES_4D, 4, conj=True),
                 P.holomorphic_to_real(hol, MODES_4D, 4))
    poly = P.real_part(real, atol=1e-12)
    poly = P.clean(poly, 1e-15)
    log_pref = 2.0 * math.log(abs(state.prefactor)) - 2.0 * math.log(math.pi)
    return HusimiDensity(2, poly, form, log_pref, hol)


def marginal(density, keep):
    """Integrate out the other mode in closed form.

    Completing the square gives ``x_o = shift @ x_k + y`` with ``y``
    Gaussian under ``Q_oo``; the polynomial is re-expanded in ``(x_k, y)``
    and the ``y`` powers are replaced by their moments.
    """
    if density.dim_modes != 2:
        raise ValueError("marginal needs a two-mode density")
    if keep not in (1, 2):
        raise ValueError("keep must be 1 or 2")
    form = density.form
    kept, other, shift, mform, cform = form.split(keep - 1)
    # x_full in terms of t = (x_kept, y)
    rows = np.zeros((4, 4))
    for a, i in enumerate(kept):
        rows[i, a] = 1.0
    for b, i in enumerate(other):
        rows[i, :2] = shift[b]
        rows[i, 2 + b] = 1.0
    sub = P.substitute_linear(density.poly, rows, 4)
    out = {}
    ycache = {}
    for k, c in sub.items():
        ky = k[2:]
        if (ky[0] + ky[1]) % 2:
            continue
        if ky not in ycache:
            ycache[ky] = moment(cform, ky)
        m = ycache[ky]
        if m == 0.0:
            continue
        kk = k[:2]
        out[kk] = out.get(kk, 0.0) + c * m
    poly = P.clean(out, 1e-15)
    return HusimiDensity(1, poly, mform, density.log_prefactor + cform.log_norm)


def purity(density):
    """``(2 pi)^d int F^2``, exact for polynomial-times-Gaussian densities."""
    doubled = density.form.scaled(2.0)
    sq = P.mul(density.poly, density.poly)
    integral = math.exp(2.0 * density.log_prefactor + doubled.log_norm) * polynomial_expectation(doubled, sq)
    return (2.0 * math.pi) ** density.dim_modes * integral


def slice(density, fixed):  # noqa: A001 - public name
    """Section at a fixed mode-2 point ``(u2, v2)`` as a function of ``(u1, v1)``.

    The returned callable accepts broadcastable arrays ``u1, v1``.
    """
    if density.dim_modes != 2:
        raise ValueError("slice needs a two-mode density")
    u2, v2 = (float(f) for f in fixed)

    def section(u1, v1):
        u1, v1 = np.broadcast_arrays(np.asarray(u1, float), np.asarray(v1, float))
        pts = np.stack([u1, np.full_like(u1, u2), v1, np.full_like(u1, v2)], axis=-1)
        return density(pts)

    return section


def slice_extent(density, fixed, half_width=4.0):
    """Half-side of the default square window: ``4 + |tau * fixed|``."""
    tau = density.form.coupling.tau if density.form.coupling is not None else 0.0
    return half_width + abs(tau) * math.hypot(*fixed)


def slice_grid(density, fixed, grid=101, extent=None):
    """Evaluate the section on a ``grid x grid`` square; returns ``(u1, v1, values)``."""
    if int(grid) != grid or grid < 1:
        raise ValueError("grid must be a positive integer")
    if extent is None:
        extent = slice_extent(density, fixed)
    axis = np.linspace(-extent, extent, int(grid))
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    return uu, vv, slice(density, fixed)(uu, vv)


def single_mode_density(n):
    """Decoupled oscillator level ``n`` in ``(x, p)``: ``((x^2+p^2)/2)^n exp(-(x^2+p^2)/2) / (pi n!)``.

    Normalised against ``d^2 z = dx dp / 2``, like every density here.
    """

    def f(x, p):
        r2 = 0.5 * (np.asarray(x) ** 2 + np.asarray(p) ** 2)
        return r2 ** n * np.exp(-r2) / (math.pi * math.factorial(n))

    return f
