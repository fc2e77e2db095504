"""Filtrations, fusions and bounded model search for modal and dynamic logics."""

from .algebra import DefinableAlgebra, Validation, definable_algebra, fails_under, model_validates, validate
from .decide import SearchResult, bounded_countermodel, bounded_sat
from .errors import (
    BudgetExceeded, CapExceeded, FormatError, FusionError, ModalError, ParseError,
    PreconditionError, StrategyFailed, UnknownModality,
)
from .filtration import (
    FiltrationCertificate, FiltrationReport, Partition, bisim_coarsest, check_filtration,
    equiv_induced, filter_with, max_filtered, min_filtered, refine,
)
from .fusion import FusionTrace, fuse_filter, fuse_filter_many, fuse_logics
from .kripke import (
    FrameCondition, Model, Relation, frame_condition_holds, load_model, model_from_json,
    model_to_json, models, program_relation, temp_enrich, trans_enrich, truth_set,
)
from .logics import LogicSpec, builtin, parse_assignments, parse_logic
from .syntax import (
    Atom, BOT, Bot, Box, Comp, Converse, Dia, Diamond, FormulaSet, Imp, Not, And, Or, TOP,
    TransClos, Union, Var, parse_formula, parse_formula_set, parse_program, sub_closure, to_text,
)

__all__ = [
    "And",
    "Atom",
    "BOT",
    "Bot",
    "Box",
    "BudgetExceeded",
    "CapExceeded",
    "Comp",
    "Converse",
    "DefinableAlgebra",
    "Dia",
    "Diamond",
    "FiltrationCertificate",
    "FiltrationReport",
    "FormatError",
    "FormulaSet",
    "FrameCondition",
    "FusionError",
    "FusionTrace",
    "Imp",
    "LogicSpec",
    "ModalError",
    "Model",
    "Not",
    "Or",
    "ParseError",
    "Partition",
    "PreconditionError",
    "Relation",
    "SearchResult",
    "StrategyFailed",
    "TOP",
    "TransClos",
    "Union",
    "UnknownModality",
    "Validation",
    "Var",
    "bisim_coarsest",
    "bounded_countermodel",
    "bounded_sat",
    "builtin",
    "check_filtration",
    "definable_algebra",
    "equiv_induced",
    "fails_under",
    "filter_with",
    "frame_condition_holds",
    "fuse_filter",
    "fuse_filter_many",
    "fuse_logics",
    "load_model",
    "max_filtered",
    "min_filtered",
    "model_from_json",
    "model_to_json",
    "model_validates",
    "models",
    "parse_assignments",
    "parse_formula",
    "parse_formula_set",
    "parse_logic",
    "parse_program",
    "program_relation",
    "refine",
    "sub_closure",
    "temp_enrich",
    "to_text",
    "trans_enrich",
    "truth_set",
    "validate",
]
