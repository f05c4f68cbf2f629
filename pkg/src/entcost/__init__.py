"""Certified brackets on the one-shot entanglement cost of bipartite quantum channels.

A numpy/scipy toolbox for Choi-matrix calculus, entanglement monotones as
conic programs with explicit bound directions, diamond-norm distances, and
explicit simulating channels with verified resource counts.
"""

from .tensorcore import (
    ChoiChannel,
    DensityMatrix,
    DimSpec,
    DimensionError,
    HermMatrix,
    apply,
    choi_from_kraus,
    compose,
    dephasing_channel,
    identity_channel,
    kraus_from_choi,
    max_entangled,
    partial_trace,
    partial_transpose,
    random_channel,
    replacer_channel,
    swap_unitary,
    unitary_channel,
)
from .conic import SdpProblem, SdpSolution, SolverFailure, embed_hermitian, solve
from .metrics import DiamondResult, diamond_ball_constraints, diamond_distance
from .monotones import (
    BoundedValue,
    FreeSetRelaxation,
    dmax_channels,
    gen_log_robustness_channel,
    gen_robustness_state,
    max_product_overlap,
    rob_gen_power,
    std_log_robustness_channel,
    std_robustness_state,
)
from .simulate import (
    CostBracket,
    FseppDiagnostics,
    SimulationPlan,
    bell_gated_channel,
    cost_bracket,
    fsepp_sample_check,
    separable_choi_certificate,
    simulate_with_resource,
    teleport_channel,
)
from .fileio import ChannelFileError, read_channel, write_channel

__version__ = "0.1.0"
