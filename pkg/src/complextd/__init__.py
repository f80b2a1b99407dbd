"""TD learning with complex discounts.

A bank of value functions learned with discounts ``gamma_j = A exp(-i omega_j)``
estimates the discrete-time Fourier transform of the reward sequence seen
from a state.
"""

from .core import (
    ComplexDiscount,
    ComplexReturn,
    FrequencyBank,
    complex_return,
    discount_power,
    discount_powers,
    frequency_grid,
    make_discount,
    make_frequency_bank,
)
from .environments import (
    CheckeredGridWorld,
    ExplicitModel,
    TabularMDP,
    WavyRingWorld,
    export_model,
    random_tabular_mdp,
)
from .errors import (
    BoundViolation,
    CoverageError,
    DimensionError,
    DomainError,
    NoAbsorptionError,
    SingularSystemError,
)
from .features import TileCoder
from .agents import (
    LinearValueFunction,
    Policy,
    TabularActionValueFunction,
    TabularValueFunction,
    Transition,
    bank_update,
    expected_sarsa_update,
    importance_ratio,
    linear_td_update,
    off_policy_td_update,
    td_update,
)
from .spectral import Spectrum, dft, peak_indices, reconstruct
from .oracle import cauchy_gap, closed_form_values, monte_carlo_return

__version__ = "0.1.0"
