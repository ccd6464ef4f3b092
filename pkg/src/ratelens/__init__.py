"""Rate-distortion strategies, inverse distortion recovery and LEGI chemotaxis simulation."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .probcore import (  # noqa: F401
    Alphabet,
    CountMatrix,
    DistortionMatrix,
    JointDist,
    Pmf,
    Strategy,
    conditional_y_given_x,
    entropy,
    expected_distortion,
    joint_from_strategy,
    laplace_smooth,
    marginal_x,
    marginal_y,
    mutual_information,
    standard_distortion,
)
from .blahut import (  # noqa: F401
    BaaConfig,
    BaaResult,
    RdCurve,
    baa_solve,
    min_distortion,
    rd_curve,
    solve_for_distortion,
    zero_rate_distortion,
)
from .ibaa import IbaaResult, estimate_distortion, ibaa_from_counts, roundtrip_validate, tilde_distortion  # noqa: F401
from .apoptosis import ApoptosisModel, exp_source, hamming_like, rectified_squared  # noqa: F401
from .legi import LegiParams, SimConfig, simulate, simulate_moments  # noqa: F401
from .analysis import AlignedProfile, cyclic_align, half_height_width, hill_sweep, mean_profile  # noqa: F401
