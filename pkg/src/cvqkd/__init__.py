"""Numerical laboratory for continuous-variable BB84 quantum key
distribution with photon added-subtracted squeezed coherent signals."""

from .fock import (
    CONVENTION,
    DEFAULT_DIM,
    FockState,
    QuadratureConvention,
    TwoModeState,
    UnderTruncationError,
    apply_ladder,
    beamsplitter,
    beamsplitter_5050,
    displace,
    hermite_functions,
    number_state,
    quadrature_wavefunction,
    rotate,
    squeeze,
    vacuum,
)
from .quadrature import (
    Density,
    Density2D,
    Grid1D,
    GridTooNarrowError,
    default_grid,
    joint_quadrature_density,
    marginal,
    wigner,
    wigner_grid,
)
from .states import Family, NormalizationRecord, StateSpec, build_state, encode
from .protocol import (
    ProtocolConfig,
    SessionStats,
    UndefinedBitErrorRateError,
    basis_density,
    bit_error_rate,
    bit_probabilities,
    conditional_bit_error_rate,
    post_selection_efficiency,
    simulate_session,
)
from .attacks import (
    AttackReport,
    JointMaximum,
    ResendProbabilities,
    ir_joint_density,
    ir_post_attack,
    ir_resend_probabilities,
    superior_argmax,
    superior_joint,
)
from .keyrate import (
    ChannelParams,
    GainOptimum,
    GainReport,
    collision_and_tau,
    family_comparison,
    mutual_information,
    optimize_gain,
    secure_key_gain,
)

__version__ = "0.1.0"
