"""Additive density lab.

Computational workbench for additive questions over dense subsets of the
primes: sumset covering in Z_q*, W-trick weight functions and their
means, spectral diagnostics on the torus with arc dissection, moment
restriction measurements, and direct eight-fold representation counting.
"""

from .primes import (
    PrimeTable,
    euler_phi,
    factorize,
    is_prime,
    is_square_free,
    load_or_sieve,
    mobius,
    sieve_primes,
)
from .representations import (
    RepresentationTable,
    TransferenceReport,
    WindowReport,
    build_table,
    r4_count_small,
    r8_count_small,
    representation_witness,
    transference_demo,
    verify_window,
)
from .residues import (
    EightSumWitness,
    ResidueSet,
    SquareFreeModulus,
    SumsetCoverReport,
    compress_to_downset,
    downset_of,
    eight_sum_search,
    eight_sum_search_totals,
    is_downset,
    iterated_sumset,
    sharpness_witness,
    sumset,
    target_set,
    units,
    verify_sumset_cover,
)
from .restriction import (
    L4Report,
    LevelSetReport,
    ScalingReport,
    dyadic_reassembly,
    l4_check,
    level_set,
    level_set_scaling_scan,
    lp_norm,
)
from .spectral import (
    ArcLabel,
    ArcParams,
    CrtFactors,
    SpectralGrid,
    classify,
    classify_grid,
    crt_factor,
    default_grid_size,
    discrepancy,
    f_grid,
    i_beta,
    indicator_hat,
    major_arc_error_scan,
    major_arc_model,
    nu_grid,
    pseudorandomness_discrepancy,
    s_q_star,
    transform,
)
from .subsets import PrimeSubsetSpec, density_estimate
from .wtrick import (
    HTransformResult,
    UnitMeanReport,
    WTrickParams,
    WeightVector,
    WitnessSearchError,
    build_weight,
    compute_W,
    g_by_unit,
    h_transform,
    mean_over_units,
    select_eight_residues,
    weight_mean,
)

__version__ = "0.1.0"
