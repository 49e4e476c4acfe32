"""Diversity-multiplexing tradeoff analysis and simulation for cooperative
relay protocols: closed forms, an independent optimization oracle, Monte Carlo
outage estimation, and small-instance space-time code simulation."""

from .analytic import (
    naf_dmt,
    nsdf_conditional_exponent,
    nsdf_fixed_dmt,
    nsdf_kappa_n,
    nsdf_optimal_kappa,
    nsdf_variable_dmt,
    oaf_optimal_dmt,
    oaf_upper_bound,
    osdf_fixed_dmt,
    osdf_kappa_n,
    osdf_optimal_kappa,
    osdf_variable_dmt,
    participation_exponent,
    protocol_dmt,
    transmit_diversity_bound,
)
from .codes import (
    Codebook,
    Constellation,
    NumberFieldEmbedding,
    build_embedding,
    ml_decode,
    naf_codebook,
    nsdf_schedule,
    oaf_diagonal_codebook,
    oaf_relay_matrices,
    qam_constellation,
    simulate_wer,
)
from .curves import PiecewiseLinearCurve, eval_curve, pointwise_max, pointwise_min
from .oracle import (
    InfimumProblem,
    oracle_curve,
    oracle_nsdf_curve,
    oracle_oaf_curve,
    oracle_osdf_curve,
    oracle_variable_envelope,
    solve_infimum,
)
from .outage import (
    OutagePoint,
    OutageSeries,
    estimate_exponent,
    miso_outage_closed_form,
    mutual_info_oaf,
    outage_prob,
    sweep,
)
from .protocols import ChannelRealization, ProtocolSpec, sample_channel

__version__ = "0.1.0"
