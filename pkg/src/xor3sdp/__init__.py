"""Desk-scale Max-3-XOR lab: instances, exact Walsh machinery, distribution
checks, dictatorship-test composition, a two-round SDP rounding pipeline,
and a brute-force oracle."""

from .instances import (
    Assignment,
    CapExceeded,
    Constraint,
    FormatError,
    Instance,
    Literal,
    Predicate3,
    ValidationError,
    XOR_PLUS,
    evaluate,
    random_baseline,
)
from .fourier import (
    MultilinearPoly,
    degree_slice,
    eval_poly,
    instance_objective,
    predicate_fourier,
)
from .distributions import (
    DisguiseSpec,
    TupleDistribution,
    check_pairwise_independent,
    disguise,
    ground,
    sample,
    uniform_over,
)
from .gadget import (
    LabelCoverInstance,
    compose,
    dictator_assignment,
    fold,
    make_label_cover,
    row_distribution,
    uncorrelate,
)
from .sdp import GramFactor, QuadraticObjective, SdpConfig, cw_round, solve_relaxation
from .pipeline import FamilySpec, PipelineConfig, PipelineReport, gap_experiment, two_round
from .oracle import OracleResult, best_random, brute_force, exhaustive_poly_check

__version__ = "0.1.0"
