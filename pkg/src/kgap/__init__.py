"""Directional gaps in Kronecker point sets and their lattice reformulation."""

__version__ = "0.1.0"

from .errors import (
    BudgetError,
    CapabilityError,
    GapComputationError,
    InfeasibleError,
    KgapError,
    RankDeficiencyError,
)
from .lattice import (
    CoveringRectangle,
    GramSchmidtData,
    LatticeBasis,
    SlabDecomposition,
    SuccessiveMinima,
    babai_nearest_plane,
    c1,
    c2,
    covering_rectangle,
    empty_box_offset,
    enumerate_ball,
    gram_schmidt,
    lattice_points_in_box,
    lll_reduce,
    point_in_translated_box,
    reduce_full_rank,
    slab_decomposition,
    successive_minima,
)
from .gaps import (
    AngularCone,
    DirectionSpec,
    FullSphere,
    GapEvaluator,
    GapQuery,
    GapStats,
    HalfSphere,
    LinearFormMatrix,
    Orthant,
    build_AQ,
    build_UB,
    directional_inf,
    enumerate_K,
    gap_direct,
    gap_stats,
    gap_via_lattice,
    parse_direction,
    phi,
)
from .bounds import (
    GrowthFunction,
    KMRow,
    SweepRow,
    check_theorem_a,
    check_theorem_b,
    check_theorem_c,
    km_probe,
    random_B,
    sweep,
    three_gap_suite,
)
from .dioph import (
    ClassWitness,
    CongruenceInstance,
    PhiConst,
    PhiPower,
    all_classes_solvable,
    covering_condition,
    proposition8_crosscheck,
    solve_in_class,
    verify_witness,
)

__all__ = [
    "__version__",
    "BudgetError",
    "CapabilityError",
    "GapComputationError",
    "InfeasibleError",
    "KgapError",
    "RankDeficiencyError",
    "CoveringRectangle",
    "GramSchmidtData",
    "LatticeBasis",
    "SlabDecomposition",
    "SuccessiveMinima",
    "babai_nearest_plane",
    "c1",
    "c2",
    "covering_rectangle",
    "empty_box_offset",
    "enumerate_ball",
    "gram_schmidt",
    "lattice_points_in_box",
    "lll_reduce",
    "point_in_translated_box",
    "reduce_full_rank",
    "slab_decomposition",
    "successive_minima",
    "AngularCone",
    "DirectionSpec",
    "FullSphere",
    "GapEvaluator",
    "GapQuery",
    "GapStats",
    "HalfSphere",
    "LinearFormMatrix",
    "Orthant",
    "build_AQ",
    "build_UB",
    "directional_inf",
    "enumerate_K",
    "gap_direct",
    "gap_stats",
    "gap_via_lattice",
    "parse_direction",
    "phi",
    "GrowthFunction",
    "KMRow",
    "SweepRow",
    "check_theorem_a",
    "check_theorem_b",
    "check_theorem_c",
    "km_probe",
    "random_B",
    "sweep",
    "three_gap_suite",
    "ClassWitness",
    "CongruenceInstance",
    "PhiConst",
    "PhiPower",
    "all_classes_solvable",
    "covering_condition",
    "proposition8_crosscheck",
    "solve_in_class",
    "verify_witness",
]
