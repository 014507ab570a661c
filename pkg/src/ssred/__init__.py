"""Semi-stable reduction of curves and finite covers, on dual graphs."""
from .covers import (
    Automorphism,
    CoverDatum,
    CoverStep,
    base_change_cover,
    infinite_auto_certificate,
    is_stable_cover,
    quotient_by_action,
    rh_defect,
    stable_hull_of_cover,
    stable_model_of_cover,
    target_stable_marked_model,
    validate_cover,
)
from .errors import InvariantBreach, PreconditionError, SemistableError, ValidationError
from .graph import (
    ContractionTrace,
    Diagnostic,
    DualGraph,
    Edge,
    EdgeMarking,
    arithmetic_genus,
    base_change,
    canonicalize,
    contract,
    desingularize,
    omega_degree,
    splitting_index,
    validate_graph,
)
from .models import (
    HullResult,
    Model,
    base_change_model,
    is_relatively_minimal,
    join_models,
    make_model,
    stable_hull,
    stable_marked_hull,
    stable_marked_model,
)
from .oracle import (
    DominationPoset,
    check_confluence,
    enumerate_contractions,
    enumerate_cover_contractions,
    relatively_minimal_models,
)

__version__ = "0.1.0"
