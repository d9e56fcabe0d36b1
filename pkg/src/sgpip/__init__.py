"""Scalable power-iteration precoding for the massive MIMO downlink.

Subpackages: channel generation (`channel`), rate metrics (`metrics`), the
subspace fixed-point engine (`gpip`), the monotone damped solver
(`convergent`), classical baselines (`baselines`), and the Monte Carlo
experiment harness (`harness`) behind the `sgpip` CLI.
"""

from .baselines import mrt, rzf, water_filling, zf, zf_dpc_rate
from .channel import (
    ChannelCovariance,
    ChannelRealization,
    CsitRealization,
    UlaGeometry,
    UserGeometry,
    draw_realization,
    imperfect_csit,
    noise_power_dbm,
    one_ring_covariance,
    pathloss_umi_nlos,
    sample_channel,
)
from .convergent import (
    BacktrackStep,
    LineSearchParams,
    PrecondBounds,
    backtrack_eta,
    convergent_s_gpip,
    g_mapping,
    gradient,
    objective,
    ppga_step,
    precond_bounds,
    preconditioned_gradient,
)
from .errors import ConfigError, IllConditionedBasisError, NumericError
from .gpip import (
    SolverResult,
    SubspaceProblem,
    build_subspace_problem_cov,
    build_subspace_problem_fulldim,
    build_subspace_problem_perfect,
    kkt_apply,
    kkt_residual,
    quad_forms,
    rzf_init,
    s_gpip,
    sherman_morrison_block,
)
from .harness import (
    ExperimentConfig,
    ResultRow,
    bench_scaling,
    run_convergence_trace,
    run_experiment,
    rows_to_csv,
    write_csv,
)
from .metrics import (
    Precoder,
    frobenius_normalized,
    sinr,
    subspace_residual,
    sum_se,
    sum_se_lower_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
