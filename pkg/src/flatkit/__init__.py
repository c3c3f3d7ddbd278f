"""Exact symbolic flatness analysis for two-input control-affine systems."""

from __future__ import annotations

__version__ = "0.1.0"

from .algorithms import (
    Branch,
    BranchTree,
    CandidatePair,
    LeafCandidates,
    QuadraticForm,
    StepRecord,
    extract_candidates,
    lemma1_candidates,
    run_algorithm1,
    run_algorithm2,
)
from .distributions import (
    Codistribution,
    Distribution,
    FirstIntegralsResult,
    annihilator_of,
    cauchy_characteristic,
    derived_flag,
    derived_step,
    first_integrals,
    generic_rank,
    intersect,
    intersect_with_coordinates,
    involutive_closure,
    span,
    sum_spans,
)
from .expr import (
    Chart,
    Expr,
    antiderivative,
    differentiate,
    eval_at,
    eval_float,
    normalize,
    substitute,
    transfer,
)
from .fields import (
    CovectorField,
    VectorField,
    coordinate_covector,
    coordinate_field,
    differential,
    field_from_dict,
    lie_bracket,
    lie_derivative,
    pair,
    transfer_field,
    zero_field,
)
from .linalg import RankEngine, exact_rank, rank_at_point, right_nullspace
from .modelfile import (
    ModelFile,
    build_system,
    load_model,
    model_from_dict,
    model_output,
    prolonged_model,
    save_model,
)
from .parser import parse
from .sample import SamplePoint, draw_admissible, draw_point
from .system import (
    ControlAffineSystem,
    FlatCandidate,
    FlatVerdict,
    GtfStructureReport,
    ProlongedSystem,
    QReport,
    SfeGtfResult,
    apply_static_feedback,
    candidate,
    f_u,
    flat_indices,
    gtf_structure_check,
    jet_chart,
    normalize_input,
    prolong,
    q_sequence,
    relative_degree,
    sfe_gtf_test,
    verify_flat_output,
)

__all__ = [
    "Branch",
    "BranchTree",
    "CandidatePair",
    "Chart",
    "Codistribution",
    "ControlAffineSystem",
    "CovectorField",
    "Distribution",
    "Expr",
    "LeafCandidates",
    "ModelFile",
    "QuadraticForm",
    "StepRecord",
    "FirstIntegralsResult",
    "FlatCandidate",
    "FlatVerdict",
    "GtfStructureReport",
    "ProlongedSystem",
    "QReport",
    "RankEngine",
    "SamplePoint",
    "SfeGtfResult",
    "VectorField",
    "annihilator_of",
    "apply_static_feedback",
    "build_system",
    "candidate",
    "antiderivative",
    "cauchy_characteristic",
    "coordinate_covector",
    "coordinate_field",
    "derived_flag",
    "derived_step",
    "differential",
    "differentiate",
    "draw_admissible",
    "draw_point",
    "eval_at",
    "eval_float",
    "exact_rank",
    "extract_candidates",
    "f_u",
    "field_from_dict",
    "first_integrals",
    "flat_indices",
    "generic_rank",
    "gtf_structure_check",
    "intersect",
    "intersect_with_coordinates",
    "involutive_closure",
    "jet_chart",
    "lemma1_candidates",
    "lie_bracket",
    "lie_derivative",
    "load_model",
    "model_from_dict",
    "model_output",
    "normalize",
    "normalize_input",
    "pair",
    "parse",
    "prolong",
    "prolonged_model",
    "q_sequence",
    "rank_at_point",
    "relative_degree",
    "save_model",
    "right_nullspace",
    "run_algorithm1",
    "run_algorithm2",
    "sfe_gtf_test",
    "span",
    "substitute",
    "sum_spans",
    "transfer",
    "transfer_field",
    "verify_flat_output",
    "zero_field",
    "__version__",
]
