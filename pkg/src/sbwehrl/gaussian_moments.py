"""Exact Gaussian moments via Isserlis' theorem.

Weights are ``exp(-x^T Q x)``.  For the two-mode system the coordinate order
is fixed to ``(u1, u2, v1, v2)`` with ``z_k = u_k + i v_k``; two-coordinate
(single-mode) forms use ``(u, v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import polynomial as P
from .coupling import as_coupling

MAX_DEGREE = 52

# (u_k, v_k) index pairs, one per mode
MODES_4D = ((0, 2), (1, 3))
MODES_2D = ((0, 1),)


@dataclass(frozen=True, eq=False)
class GaussianForm:
    """Positive-definite quadratic form ``Q`` with derived data.

    Attributes
    ----------
    qmatrix : ndarray
        Symmetric positive-definite ``Q``.
    covariance : ndarray
        ``Q^{-1} / 2``, the covariance of the normalised weight.
    whitening : ndarray
        ``W`` with ``W^T Q W = I``, so ``x = W y`` maps ``exp(-|y|^2)`` onto
        the weight.
    log_norm : float
        ``ln`` of the integral of ``exp(-x^T Q x)`` over all of R^dim.
    modes : tuple of (int, int)
        Coordinate indices ``(u, v)`` belonging to each mode.
    coupling : Coupling or None
        Set for forms built from a coupling; enables closed-form marginals.
    """

    qmatrix: np.ndarray
    covariance: np.ndarray
    whitening: np.ndarray
    log_norm: float
    modes: tuple = field(default=MODES_2D)
    coupling: object = None

    @property
    def dim(self):
        return self.qmatrix.shape[0]

    @classmethod
    def from_qmatrix(cls, q, modes=None):
        q = np.array(q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(q, q.T, rtol=0, atol=1e-13 * max(1.0, np.abs(q).max())):
            raise ValueError("Q must be symmetric")
        q = 0.5 * (q + q.T)
        evals, evecs = np.linalg.eigh(q)
        if evals.min() <= 0:
            raise ValueError("Q must be positive definite")
        dim = q.shape[0]
        if modes is None:
            modes = MODES_4D if dim == 4 else tuple((2 * i, 2 * i + 1) for i in range(dim // 2))
        cov = 0.5 * (evecs / evals) @ evecs.T
        whitening = evecs / np.sqrt(evals)
        log_norm = 0.5 * dim * math.log(math.pi) - 0.5 * float(np.sum(np.log(evals)))
        return cls(q, cov, whitening, log_norm, tuple(modes))

    def quadratic(self, x):
        """``x^T Q x`` for points of shape ``(..., dim)``."""
        x = np.asarray(x)
        return np.einsum("...i,ij,...j->...", x, self.qmatrix, x)

    def quadratic_poly(self):
        return P.quadratic_form_poly(self.qmatrix)

    def scaled(self, c):
        """The form ``c * Q``."""
        return GaussianForm(
            self.qmatrix * c,
            self.covariance / c,
            self.whitening / math.sqrt(c),
            self.log_norm - 0.5 * self.dim * math.log(c),
            self.modes,
            None,
        )

    def split(self, keep):
        """Block decomposition for integrating out every mode except ``keep``.

        Returns ``(kept, other, shift, marginal, conditional)`` where
        ``x^T Q x = (x_o - shift @ x_k)^T Q_oo (x_o - shift @ x_k) + x_k^T S x_k``,
        ``marginal`` is the form ``S`` over the kept coordinates and
        ``conditional`` the form ``Q_oo``.
        """
        kept = list(self.modes[keep])
        other = [i for i in range(self.dim) if i not in kept]
        q = self.qmatrix
        q_kk = q[np.ix_(kept, kept)]
        q_oo = q[np.ix_(other, other)]
        q_ok = q[np.ix_(other, kept)]
        shift = -np.linalg.solve(q_oo, q_ok)
        if self.coupling is not None and self.dim == 4:
            # Q_oo = I; Schur complement is sech^2 I exactly
            marginal = _isotropic_form(self.coupling.sech ** 2)
            conditional = _isotropic_form(1.0)
        else:
            schur = q_kk + q_ok.T @ shift
            marginal = GaussianForm.from_qmatrix(schur, MODES_2D)
            conditional = GaussianForm.from_qmatrix(q_oo, MODES_2D)
        return kept, other, shift, marginal, conditional

    def gaussian_marginal(self, keep):
        """Weight form of the kept mode after integrating out the others."""
        return self.split(keep)[3]

    def block_whitening(self, first):
        """Triangular whitening that keeps mode ``first``'s plane intact.

        Returns ``(W, order)``: ``x[order] = W @ y`` with ``y[:2]`` whitening
        mode ``first`` alone, so ``{x_first = 0}`` is ``{y[:2] = 0}``.
        """
        kept, other, shift, marginal, conditional = self.split(first)
        w = np.zeros((self.dim, self.dim))
        w[:2, :2] = marginal.whitening
        w[2:, :2] = shift @ marginal.whitening
        w[2:, 2:] = conditional.whitening
        return w, kept + other


def _isotropic_form(a):
    q = np.eye(2) * a
    return GaussianForm(q, np.eye(2) / (2.0 * a), np.eye(2) / math.sqrt(a),
                        math.log(math.pi) - math.log(a), MODES_2D)


def coupled_form(coupling):
    """Gaussian weight of the entangled vacuum.

    ``x^T Q x = |z1|^2 + |z2|^2 - 2 tanh(eta) (u1 u2 - v1 v2)`` over
    ``(u1, u2, v1, v2)``.  Everything is built in closed form so that large
    couplings keep full relative accuracy.
    """
    c = as_coupling(coupling)
    tau = c.tau
    q = np.array([
        [1.0, -tau, 0.0, 0.0],
        [-tau, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, tau],
        [0.0, 0.0, tau, 1.0],
    ])
    ch2 = c.cosh ** 2
    sc = c.sinh * c.cosh
    cov = 0.5 * np.array([
        [ch2, sc, 0.0, 0.0],
        [sc, ch2, 0.0, 0.0],
        [0.0, 0.0, ch2, -sc],
        [0.0, 0.0, -sc, ch2],
    ])
    # eigenvalue 1 - tau on (1, 1)/sqrt2 in the u-plane and (1, -1)/sqrt2 in the v-plane
    lo = 1.0 / math.sqrt(c.one_minus_tau)
    hi = 1.0 / math.sqrt(c.one_plus_tau)
    r = 1.0 / math.sqrt(2.0)
    w = np.array([
        [r * lo, r * hi, 0.0, 0.0],
        [r * lo, -r * hi, 0.0, 0.0],
        [0.0, 0.0, r * lo, r * hi],
        [0.0, 0.0, -r * lo, r * hi],
    ])
    log_norm = 2.0 * math.log(math.pi) + 2.0 * c.log_cosh
    return GaussianForm(q, cov, w, log_norm, MODES_4D, c)


# --- moments -------------------------------------------------------------------

class _MomentTable:
    """Per-call memo of normalised moments ``E[x^k]``.

    Uses the Gaussian integration-by-parts form of Isserlis' theorem,
    ``E[x_i m] = sum_j C_ij E[d m / d x_j]``, i.e. pairing the first factor
    with every remaining factor.
    """

    def __init__(self, form):
        self.cov = form.covariance
        self.dim = form.dim
        self.nz = [[j for j in range(self.dim) if self.cov[i, j] != 0.0]
                   for i in range(self.dim)]
        self.memo = {(0,) * self.dim: 1.0}

    def __call__(self, k):
        k = tuple(k)
        hit = self.memo.get(k)
        if hit is not None:
            return hit
        if sum(k) % 2:
            return 0.0
        i = next(n for n, e in enumerate(k) if e)
        rest = list(k)
        rest[i] -= 1
        total = 0.0
        for j in self.nz[i]:
            mult = rest[j]
            if mult == 0:
                continue
            sub = list(rest)
            sub[j] -= 1
            total += self.cov[i, j] * mult * self(sub)
        self.memo[k] = total
        return total


def _check_degree(k):
    if any(e < 0 for e in k):
        raise ValueError("exponents must be nonnegative")
    if sum(k) > MAX_DEGREE:
        raise ValueError(f"total degree {sum(k)} exceeds cap {MAX_DEGREE}")


def moment(form, idx):
    """Normalised moment ``E[prod x_i^idx_i]`` under ``exp(-x^T Q x)``."""
    idx = tuple(int(e) for e in idx)
    if len(idx) != form.dim:
        raise ValueError("index length does not match form dimension")
    _check_degree(idx)
    return _MomentTable(form)(idx)


def polynomial_expectation(form, poly):
    """Normalised expectation of a sparse polynomial (linear in the coefficients)."""
    table = _MomentTable(form)
    total = 0.0
    for k, c in poly.items():
        if len(k) != form.dim:
            raise ValueError("polynomial arity does not match form dimension")
        if sum(k) % 2:
            continue
        _check_degree(k)
        total = total + c * table(k)
    return total


def integrate_polynomial(form, poly):
    """Unnormalised integral of ``poly * exp(-x^T Q x)``."""
    return math.exp(form.log_norm) * polynomial_expectation(form, poly)


# --- closed-form observables --------------------------------------------------------

@dataclass(frozen=True)
class ObservableValue:
    analytic: float
    numeric: float

    @property
    def discrepancy(self):
        return abs(self.numeric - self.analytic)


@dataclass(frozen=True)
class ObservableReport:
    eta: float
    occupation: ObservableValue
    corr_z1z2: ObservableValue
    corr_x1x2: ObservableValue
    corr_p1p2: ObservableValue
    uncertainty: ObservableValue
    purity: ObservableValue

    NAMES = ("occupation", "corr_z1z2", "corr_x1x2", "corr_p1p2", "uncertainty", "purity")

    def items(self):
        return [(n, getattr(self, n)) for n in self.NAMES]

    @property
    def max_discrepancy(self):
        return max(v.discrepancy for _, v in self.items())

    def to_dict(self):
        out = {"eta": self.eta}
        for name, v in self.items():
            out[name] = {"analytic": v.analytic, "numeric": v.numeric,
                         "discrepancy": v.discrepancy}
        return out


def observable_report(coupling):
    """Ground-state observables, closed form next to moment-engine values.

    The moment-engine column uses Husimi (anti-normally ordered) averages of
    ``exp(-x^T Q x)``: for instance ``<N> = E_Q[u1^2 + v1^2] - 1`` and
    ``<x1^2> = 2 E_Q[u1^2] - 1/2``, with ``x = sqrt(2) u`` and ``p = -sqrt(2) v``.
    """
    c = as_coupling(coupling)
    form = coupled_form(c)
    t = _MomentTable(form)
    e = lambda *k: t(k)  # noqa: E731
    u1u1 = e(2, 0, 0, 0)
    v1v1 = e(0, 0, 2, 0)
    u1u2 = e(1, 1, 0, 0)
    v1v2 = e(0, 0, 1, 1)
    mean_x = math.sqrt(2.0) * e(1, 0, 0, 0)
    mean_p = -math.sqrt(2.0) * e(0, 0, 1, 0)
    var_x = 2.0 * u1u1 - 0.5 - mean_x ** 2
    var_p = 2.0 * v1v1 - 0.5 - mean_p ** 2
    # (2 pi)^2 int F^2 with F = exp(-x^T Q x) / Z
    doubled = form.scaled(2.0)
    purity_num = (2.0 * math.pi) ** 2 * math.exp(doubled.log_norm - 2.0 * form.log_norm)

    sh, ch = c.sinh, c.cosh
    return ObservableReport(
        eta=c.eta,
        occupation=ObservableValue(sh ** 2, u1u1 + v1v1 - 1.0),
        corr_z1z2=ObservableValue(0.5 * math.sinh(2.0 * c.eta), u1u2 - v1v2),
        corr_x1x2=ObservableValue(sh * ch, 2.0 * u1u2 - mean_x * mean_x),
        corr_p1p2=ObservableValue(-sh * ch, 2.0 * v1v2 - mean_p * mean_p),
        uncertainty=ObservableValue(0.5 + sh ** 2, math.sqrt(var_x * var_p)),
        purity=ObservableValue(c.sech ** 2, purity_num),
    )
