"""Sparse multivariate polynomials over real coordinates.

A polynomial is a plain ``dict`` mapping exponent tuples to coefficients,
e.g. ``{(2, 0, 0, 0): 1.0, (0, 1, 1, 0): -0.5}``.  Coefficients may be
complex; the coordinates are always real.
"""

from __future__ import annotations

from itertools import product as _iproduct
from math import comb

import numpy as np

Poly = dict

CLEANUP_RTOL = 1e-14


def clean(p, rtol=CLEANUP_RTOL, scale=None):
    """Drop coefficients below ``rtol * scale`` (default scale: largest |c|)."""
    if not p:
        return {}
    if scale is None:
        scale = max(abs(c) for c in p.values())
    cut = rtol * scale
    return {k: c for k, c in p.items() if c != 0 and abs(c) >= cut}


def add(*polys):
    out = {}
    for p in polys:
        for k, c in p.items():
            out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c != 0}


def scale(p, factor):
    if factor == 0:
        return {}
    return {k: factor * c for k, c in p.items()}


def mul(p, q):
    out = {}
    for kp, cp in p.items():
        for kq, cq in q.items():
            k = tuple(a + b for a, b in zip(kp, kq))
            out[k] = out.get(k, 0) + cp * cq
    return {k: c for k, c in out.items() if c != 0}


def power(p, n, nvars=None):
    if n == 0:
        if nvars is None:
            nvars = len(next(iter(p)))
        return {(0,) * nvars: 1.0}
    out = p
    for _ in range(n - 1):
        out = mul(out, p)
    return out


def degree(p):
    return max((sum(k) for k in p), default=0)


def variables(p):
    """Indices of coordinates that actually appear in ``p``."""
    used = set()
    for k in p:
        used.update(i for i, e in enumerate(k) if e)
    return used


def restrict(p, idx):
    """Re-express ``p`` over the coordinates ``idx`` only.

    All other coordinates must be absent from ``p``.
    """
    idx = tuple(idx)
    out = {}
    for k, c in p.items():
        if any(e for i, e in enumerate(k) if i not in idx):
            raise ValueError("polynomial depends on a dropped coordinate")
        kk = tuple(k[i] for i in idx)
        out[kk] = out.get(kk, 0) + c
    return out


def conjugate(p):
    return {k: np.conj(c) for k, c in p.items()}


def real_part(p, atol=0.0):
    """Real part of the coefficients; raise if an imaginary residue exceeds ``atol``."""
    out = {}
    scale_ = max((abs(c) for c in p.values()), default=0.0)
    for k, c in p.items():
        c = complex(c)
        if abs(c.imag) > atol * max(scale_, 1.0):
            raise ArithmeticError(f"imaginary residue {c.imag:.3e} at {k}")
        if c.real != 0:
            out[k] = c.real
    return out


def evaluate(p, x):
    """Evaluate ``p`` at points ``x`` of shape ``(..., nvars)``."""
    x = np.asarray(x)
    if not p:
        return np.zeros(x.shape[:-1])
    nvars = x.shape[-1]
    maxexp = [max(k[i] for k in p) for i in range(nvars)]
    powers = []
    for i in range(nvars):
        col = x[..., i]
        table = [np.ones_like(col)]
        for _ in range(maxexp[i]):
            table.append(table[-1] * col)
        powers.append(table)
    dtype = np.result_type(x.dtype, *[type(c) for c in p.values()])
    acc = np.zeros(x.shape[:-1], dtype=dtype)
    for k, c in p.items():
        term = c
        for i, e in enumerate(k):
            if e:
                term = term * powers[i][e]
        acc = acc + term
    return acc


# --- holomorphic -> real expansion -------------------------------------------

def _binomial_real(a, conj):
    """(u + i v)^a (or its conjugate) as {(pu, pv): coeff}."""
    sign = -1 if conj else 1
    return {(a - k, k): comb(a, k) * (sign * 1j) ** k for k in range(a + 1)}


def holomorphic_to_real(hpoly, coords, nvars, conj=False):
    """Expand a polynomial in complex variables into real coordinates.

    Parameters
    ----------
    hpoly : dict
        ``{(a1, a2, ...): c}`` meaning ``sum c * z1**a1 * z2**a2 ...``.
    coords : sequence of (int, int)
        Real-coordinate indices ``(u_k, v_k)`` of each complex variable, with
        ``z_k = u_k + i v_k``.
    nvars : int
        Number of real coordinates of the output.
    conj : bool
        Expand the complex conjugate polynomial instead.
    """
    out = {}
    cache = {}
    for exps, c in hpoly.items():
        if conj:
            c = np.conj(c)
        factors = []
        for mode, a in enumerate(exps):
            key = (a, conj)
            if key not in cache:
                cache[key] = _binomial_real(a, conj)
            factors.append(cache[key])
        for combo in _iproduct(*[f.items() for f in factors]):
            k = [0] * nvars
            coeff = c
            for mode, ((pu, pv), b) in enumerate(combo):
                iu, iv = coords[mode]
                k[iu] += pu
                k[iv] += pv
                coeff = coeff * b
            k = tuple(k)
            out[k] = out.get(k, 0) + coeff
    return {k: c for k, c in out.items() if c != 0}


def substitute_linear(p, rows, nvars_out):
    """Substitute ``x_i = sum_j rows[i][j] * t_j`` and expand in ``t``.

    ``rows`` is an ``(nvars_in, nvars_out)`` array-like.
    """
    rows = np.asarray(rows)
    linear = []
    for i in range(rows.shape[0]):
        lin = {}
        for j in range(nvars_out):
            if rows[i, j] != 0:
                e = [0] * nvars_out
                e[j] = 1
                lin[tuple(e)] = rows[i, j].item()
        linear.append(lin)
    one = {(0,) * nvars_out: 1.0}
    pow_cache = {}

    def lin_pow(i, e):
        if e == 0:
            return one
        key = (i, e)
        if key not in pow_cache:
            pow_cache[key] = mul(lin_pow(i, e - 1), linear[i])
        return pow_cache[key]

    out = {}
    for k, c in p.items():
        term = {(0,) * nvars_out: c}
        for i, e in enumerate(k):
            if e:
                term = mul(term, lin_pow(i, e))
        for kk, cc in term.items():
            out[kk] = out.get(kk, 0) + cc
    return {k: c for k, c in out.items() if c != 0}


def quadratic_form_poly(qmatrix):
    """The polynomial x^T Q x."""
    q = np.asarray(qmatrix)
    n = q.shape[0]
    out = {}
    for i in range(n):
        for j in range(n):
            if q[i, j] != 0:
                e = [0] * n
                e[i] += 1
                e[j] += 1
                e = tuple(e)
                out[e] = out.get(e, 0) + float(q[i, j])
    return {k: c for k, c in out.items() if c != 0}
