"""Coupling parameter of the two-mode Bogoliubov transformation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

ETA_MAX = 20.0
N_MAX = 12


def log_cosh(eta):
    """ln cosh(eta) without overflow."""
    a = abs(eta)
    return a + math.log1p(math.exp(-2.0 * a)) - math.log(2.0)


def log_sinh_abs(eta):
    """ln |sinh(eta)| for eta != 0, without overflow."""
    a = abs(eta)
    if a < 0.5:
        return math.log(math.sinh(a))
    return a + math.log1p(-math.exp(-2.0 * a)) - math.log(2.0)


@dataclass(frozen=True)
class Coupling:
    """Coupling ``eta`` with cached ``tanh`` and ``sech``.

    The Bogoliubov coefficients are ``a = cosh(eta)`` and ``b = sinh(eta)``
    with phase fixed to zero, so ``cosh**2 - sinh**2 = 1``.
    """

    eta: float
    tau: float = field(init=False)
    sech: float = field(init=False)

    def __post_init__(self):
        eta = float(self.eta)
        if not math.isfinite(eta):
            raise ValueError(f"eta must be finite, got {eta!r}")
        if abs(eta) > ETA_MAX:
            raise ValueError(f"|eta| = {abs(eta)} exceeds ETA_MAX = {ETA_MAX}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "tau", math.tanh(eta))
        object.__setattr__(self, "sech", 1.0 / math.cosh(eta))

    @property
    def cosh(self):
        return math.cosh(self.eta)

    @property
    def sinh(self):
        return math.sinh(self.eta)

    @property
    def log_cosh(self):
        return log_cosh(self.eta)

    @property
    def one_minus_tau(self):
        # 1 - tanh(eta) = 2 / (1 + e^{2 eta}); no cancellation for large eta
        return 2.0 / (1.0 + math.exp(2.0 * self.eta))

    @property
    def one_plus_tau(self):
        return 2.0 / (1.0 + math.exp(-2.0 * self.eta))


def as_coupling(c):
    return c if isinstance(c, Coupling) else Coupling(c)


@dataclass(frozen=True)
class HamiltonianParams:
    """Coupled-oscillator Hamiltonian constants (metadata only).

    ``lam`` is the two-mode coupling strength, ``omega_prime`` and
    ``h0_prime`` the frequency and offset after diagonalisation.
    """

    omega: float
    lam: float
    h0: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @classmethod
    def from_coupling(cls, coupling, omega=1.0, h0=0.0):
        coupling = as_coupling(coupling)
        return cls(omega=omega, lam=-omega * math.tanh(2.0 * coupling.eta), h0=h0)

    @property
    def eta(self):
        return 0.5 * math.atanh(-self.lam / self.omega)

    @property
    def omega_prime(self):
        return self.omega / math.cosh(2.0 * self.eta)

    @property
    def h0_prime(self):
        return self.omega_prime - self.omega + self.h0

    def is_consistent(self, coupling, rtol=1e-12):
        coupling = as_coupling(coupling)
        expected = -self.omega * math.tanh(2.0 * coupling.eta)
        return math.isclose(self.lam, expected, rel_tol=rtol, abs_tol=rtol)
