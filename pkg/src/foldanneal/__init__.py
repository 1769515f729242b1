"""foldanneal: quantum and classical annealing benchmarks on protein
lattice folding problems.

The toolkit covers the full desk-scale study: random unique-minimum
instance generation over the Miyazawa-Jernigan contact model, compilation
of conformations to a binary-polynomial objective over turn bits, sparse
annealing Hamiltonians with optional catalysts, minimum-gap spectroscopy,
Schroedinger-equation dynamics with time-to-solution optimization,
gap-position-tailored schedules, a tuned simulated-annealing baseline, and
scaling-law statistics.
"""

from .binpoly import BinPoly, dense_values, read_pubo, write_pubo
from .dataset import (
    InstanceRecord,
    enumerate_minima,
    filter_ugem,
    generate_dataset,
    make_record,
    read_instances,
    write_instances,
)
from .dynamics import (
    EvolutionResult,
    RunOutcome,
    evolve,
    initial_state,
    run_anneal,
    success_probability,
    tts,
)
from .encoder import ProblemEncoding, diagonal, encode, encode_instance, penalty_weight_for
from .hamiltonian import (
    AnnealSpec,
    Schedule,
    apply_H,
    build_catalyst,
    build_start,
    schedule_eval,
)
from .lattice import (
    AMINO_ACIDS,
    ContactMap,
    Peptide,
    TurnString,
    Walk,
    canonicalize,
    contacts,
    decode_walk,
    encode_walk,
    energy,
)
from .mj import MJMatrix, load_default, load_mj, save_mj
from .records import ExperimentConfig
from .sa import SAOutcome, SAParams, estimate_sa, sa_energy, sa_run, tune_sa
from .scaling import (
    ScalingFit,
    correlations,
    fit_all,
    fit_model,
    quantile_bands,
    select_model,
    welch_test,
)
from .schedules import (
    GapStats,
    RScoreProfile,
    probe_gap_position,
    profiles_by_length,
    rscore,
    tailored_schedule,
)
from .spectra import GapResult, low_eigs, min_gap
from .tuner import OptDomain, OptResult, Param, optimize, tune_annealing

__version__ = "0.1.0"
