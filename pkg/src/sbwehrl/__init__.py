"""Wehrl entropy of two coupled harmonic oscillators in the Segal-Bargmann representation."""

from .coupling import ETA_MAX, N_MAX, Coupling, HamiltonianParams
from .gaussian_moments import (
    GaussianForm, ObservableReport, coupled_form, moment, observable_report,
    polynomial_expectation,
)
from .husimi import HusimiDensity, husimi_of, marginal, purity, slice, slice_grid
from .quadrature import (
    McSpec, QuadratureSpec, integrate_gaussian, integrate_gaussian_polar, mc_integrate,
)
from .sbs_state import (
    SBState, apply_w_annihilation, apply_w_creation, apply_z_annihilation,
    apply_z_creation, excited_state, expectation, ground_state, inner_product,
)
from .wehrl import (
    EULER_GAMMA, EntropyReport, gamma0, harmonic, mutual_info_first_excited,
    mutual_info_ground, report, s_partial_excited_same, s_partial_ground,
    s_partial_other_first_excited, s_total_excited, s_total_ground, wehrl_numeric,
)

__version__ = "0.1.0"
