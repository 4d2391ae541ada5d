"""Two-mode Segal-Bargmann states and their ladder-operator algebra.

A state is ``f(z1, z2) = prefactor * P(z1, z2) * exp(tau * z1 * z2)`` with
``P`` a sparse polynomial ``{(a, b): c}`` and ``tau = tanh(eta)``.  In this
space the creation operator is multiplication by ``z_k`` and the
annihilation operator is ``d/dz_k`` (hbar = 1).

Operator words are applied right to left: ``"z1 d1"`` means ``z1 (d1 f)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from . import polynomial as P
from .coupling import ETA_MAX, N_MAX, Coupling, HamiltonianParams, as_coupling  # noqa: F401
from .gaussian_moments import MODES_4D, coupled_form, polynomial_expectation

__all__ = [
    "Coupling", "HamiltonianParams", "SBState", "ETA_MAX", "N_MAX",
    "ground_state", "excited_state", "apply_z_creation", "apply_z_annihilation",
    "apply_w_creation", "apply_w_annihilation", "apply_word", "inner_product",
    "expectation", "kernel_eval", "position", "momentum", "compose",
]

_CLEANUP = P.CLEANUP_RTOL


def _other(mode):
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")
    return 3 - mode


@dataclass(frozen=True)
class SBState:
    """Immutable two-mode Segal-Bargmann function."""

    coupling: Coupling
    poly: MappingProxyType
    prefactor: complex = 1.0

    def __post_init__(self):
        poly = {(int(a), int(b)): complex(c) for (a, b), c in dict(self.poly).items() if c != 0}
        if any(a < 0 or b < 0 for a, b in poly):
            raise ValueError("exponents must be nonnegative")
        object.__setattr__(self, "poly", MappingProxyType(poly))
        object.__setattr__(self, "prefactor", complex(self.prefactor))

    @property
    def is_zero(self):
        return not self.poly or self.prefactor == 0

    @property
    def degree(self):
        return max((a + b for a, b in self.poly), default=0)

    def __call__(self, z1, z2):
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        acc = np.zeros(np.broadcast(z1, z2).shape, dtype=complex)
        for (a, b), c in self.poly.items():
            acc = acc + c * z1 ** a * z2 ** b
        return self.prefactor * acc * np.exp(self.coupling.tau * z1 * z2)

    def swapped(self):
        """The state with ``z1`` and ``z2`` exchanged."""
        return SBState(self.coupling, {(b, a): c for (a, b), c in self.poly.items()},
                       self.prefactor)

    def scaled(self, factor):
        return SBState(self.coupling, self.poly, self.prefactor * factor)

    def normalized(self):
        n = inner_product(self, self).real
        if n <= 0:
            raise ValueError("cannot normalise the zero state")
        return self.scaled(1.0 / math.sqrt(n))

    def norm(self):
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def polynomial(self):
        """Plain dict copy of the polynomial part."""
        return dict(self.poly)


def _combine(state, parts):
    """Sum ``[(weight, poly), ...]`` and drop cancellation residue.

    The cut is relative to the largest operand term, so exact cancellations
    (such as an annihilator acting on its vacuum) leave an empty polynomial.
    """
    out = {}
    scale = 0.0
    for w, poly in parts:
        for k, c in poly.items():
            term = w * c
            scale = max(scale, abs(term))
            out[k] = out.get(k, 0) + term
    out = P.clean(out, _CLEANUP, scale) if out else {}
    return SBState(state.coupling, out, state.prefactor)


def _shift(poly, mode):
    if mode == 1:
        return {(a + 1, b): c for (a, b), c in poly.items()}
    return {(a, b + 1): c for (a, b), c in poly.items()}


def _deriv(poly, mode):
    out = {}
    for (a, b), c in poly.items():
        if mode == 1 and a:
            out[(a - 1, b)] = a * c
        elif mode == 2 and b:
            out[(a, b - 1)] = b * c
    return out


def ground_state(coupling):
    """Entangled vacuum ``sech(eta) * exp(tanh(eta) z1 z2)``."""
    c = as_coupling(coupling)
    return SBState(c, {(0, 0): 1.0}, c.sech)


def apply_z_creation(state, mode):
    _other(mode)
    return SBState(state.coupling, _shift(state.poly, mode), state.prefactor)


def apply_z_annihilation(state, mode):
    """``d/dz_mode``, including the derivative of the kernel ``exp(tau z1 z2)``."""
    o = _other(mode)
    tau = state.coupling.tau
    return _combine(state, [(1.0, _deriv(state.poly, mode)), (tau, _shift(state.poly, o))])


def apply_w_annihilation(state, mode):
    """``cosh(eta) d/dz_mode - sinh(eta) z_other``."""
    o = _other(mode)
    c = state.coupling
    d = apply_z_annihilation(state, mode)
    z = apply_z_creation(state, o)
    return _combine(state, [(c.cosh, d.poly), (-c.sinh, z.poly)])


def apply_w_creation(state, mode):
    """``cosh(eta) z_mode - sinh(eta) d/dz_other``.

    The kernel part of ``d/dz_other`` contributes ``tau z_mode``, and
    ``cosh - sinh * tanh`` is folded to ``sech`` before the sum.
    """
    o = _other(mode)
    c = state.coupling
    return _combine(state, [(c.sech, _shift(state.poly, mode)),
                            (-c.sinh, _deriv(state.poly, o))])


def _leading_normalised(state):
    """Move the highest-degree coefficient into the prefactor."""
    if not state.poly:
        return state
    lead = max(state.poly, key=lambda k: (k[0] + k[1], k[0]))
    c0 = state.poly[lead]
    poly = {k: v / c0 for k, v in state.poly.items()}
    poly[lead] = 1.0
    return SBState(state.coupling, poly, state.prefactor * c0)


def excited_state(coupling, n1, n2):
    """``w1^n1 w2^n2 Omega_w / sqrt(n1! n2!)``, built by operator application."""
    for n in (n1, n2):
        if int(n) != n or n < 0:
            raise ValueError("excitation numbers must be nonnegative integers")
        if n > N_MAX:
            raise ValueError(f"excitation {n} exceeds N_MAX = {N_MAX}")
    state = ground_state(coupling)
    for _ in range(int(n1)):
        state = apply_w_creation(state, 1)
    for _ in range(int(n2)):
        state = apply_w_creation(state, 2)
    state = state.scaled(1.0 / math.sqrt(math.factorial(int(n1)) * math.factorial(int(n2))))
    return _leading_normalised(state)


# --- inner products ---------------------------------------------------------------

def _real_poly(state, conj=False):
    return P.holomorphic_to_real(dict(state.poly), MODES_4D, 4, conj=conj)


def inner_product(f, g):
    """``<f, g> = int conj(f) g exp(-|z|^2) / pi^2 dz`` computed exactly.

    ``|exp(tau z1 z2)|^2 exp(-|z|^2)`` is the coupled Gaussian weight, so the
    integral reduces to polynomial moments.
    """
    if f.coupling.eta != g.coupling.eta:
        raise ValueError("states have different couplings")
    if f.is_zero or g.is_zero:
        return 0j
    form = coupled_form(f.coupling)
    integrand = P.mul(_real_poly(f, conj=True), _real_poly(g))
    e = polynomial_expectation(form, integrand)
    # exp(log_norm) / pi^2 = cosh^2
    weight = math.exp(form.log_norm - 2.0 * math.log(math.pi))
    return complex(np.conj(f.prefactor) * g.prefactor * weight * e)


def kernel_eval(z, w):
    """Reproducing kernel ``exp(z . conj(w))``."""
    z1, z2 = z
    w1, w2 = w
    return cmath.exp(z1 * complex(w1).conjugate() + z2 * complex(w2).conjugate())


# --- operator words -------------------------------------------------------------------

_LETTERS = {
    "z1": lambda s: apply_z_creation(s, 1),
    "z2": lambda s: apply_z_creation(s, 2),
    "d1": lambda s: apply_z_annihilation(s, 1),
    "d2": lambda s: apply_z_annihilation(s, 2),
    "w1": lambda s: apply_w_creation(s, 1),
    "w2": lambda s: apply_w_creation(s, 2),
    "wb1": lambda s: apply_w_annihilation(s, 1),
    "wb2": lambda s: apply_w_annihilation(s, 2),
}


def _parse_word(word):
    if isinstance(word, str):
        tokens = word.replace("*", " ").split()
    else:
        tokens = list(word)
    for t in tokens:
        if t not in _LETTERS:
            raise ValueError(f"unknown operator letter {t!r}")
    return tuple(tokens)


def _as_operator(observable):
    """Normalise to ``{word_tuple: coefficient}``."""
    if isinstance(observable, dict):
        return {_parse_word(w): c for w, c in observable.items()}
    return {_parse_word(observable): 1.0}


def apply_word(state, word):
    """Apply an operator word, rightmost letter first."""
    for t in reversed(_parse_word(word)):
        state = _LETTERS[t](state)
    return state


def compose(*ops):
    """Operator product ``ops[0] ops[1] ...`` of linear combinations of words."""
    out = {(): 1.0}
    for op in ops:
        op = _as_operator(op)
        nxt = {}
        for w1, c1 in out.items():
            for w2, c2 in op.items():
                nxt[w1 + w2] = nxt.get(w1 + w2, 0) + c1 * c2
        out = nxt
    return out


def position(mode):
    """``x_k = (z_k + d_k) / sqrt(2)``."""
    r = 1.0 / math.sqrt(2.0)
    return {(f"z{mode}",): r, (f"d{mode}",): r}


def momentum(mode):
    """``p_k = i (z_k - d_k) / sqrt(2)``."""
    r = 1j / math.sqrt(2.0)
    return {(f"z{mode}",): r, (f"d{mode}",): -r}


def expectation(state, observable):
    """``<state, O state>`` for a word or a ``{word: coefficient}`` combination."""
    total = 0j
    for word, c in _as_operator(observable).items():
        total += c * inner_product(state, apply_word(state, word))
    return total
