"""Floodlight quantum key distribution with K-ary PSK and square-lattice QAM encodings.

Closed-form Gaussian statistics of Alice's dual-homodyne receiver, symbol
transition matrices, Shannon-information and secret-key-rate lower bounds, and
a mode-level Monte Carlo oracle for checking them.
"""

from .constellation import Constellation, build_kpsk, build_qam, decide, parse_constellation
from .errors import NumericalError, QuadratureError, ValidationError
from .eve import EveModel, MonitorRates, cap_only, estimate_intrusion, holevo_upper_bound
from .gaussian_state import (
    ConditionalIQ,
    ModePairMoments,
    iq_conditional_stats,
    mode_pair_moments,
    qam_isotropic_approx,
    rotated_frame_stats,
    symbol_moments,
    symbol_stats,
)
from .info import TransitionMatrix, shannon_rate, transition_matrix
from .montecarlo import BACKEND, McConfig, empirical_transition, sample_iq
from .params import SystemParams, path_transmissivity, plob_bits_per_mode, preset, validate
from .skr import (
    SweepRow,
    bits_per_mode,
    information_rate,
    optimize_brightness,
    skr_lower_bound,
    sweep_distance,
)

__version__ = "0.1.0"
