"""Survey-driven and machine multiple imputation for tabular data.

Pipeline: mask cells with known truth, describe the data, turn missing
cells into constrained survey questions, collect k judgments per question
(simulated personas or live respondents over HTTP), machine-impute with
chained-equation predictive mean matching, then pool both sides per cell
and compare them against the truth.
"""

from .crowd import (
    CrowdError,
    Judgment,
    JudgmentSet,
    PRESETS,
    Persona,
    PersonaMix,
    answer,
    answer_category_probs,
    perturb_scenario,
    run_crowd,
)
from .dataset import (
    ColumnSpec,
    Dataset,
    DatasetError,
    GroundTruth,
    SummaryStats,
    ampute,
    correlation_rank,
    load_csv,
    load_schema,
    mask_cells,
    restore,
    summarize,
)
from .mice import (
    ImputationSet,
    MiceError,
    PosteriorDraw,
    RegressionTask,
    bayes_draw,
    mice_cycle,
    multiple_impute,
    pmm_impute_column,
)
from .pooling import (
    EvaluationReport,
    PooledCellSummary,
    PoolingError,
    compare,
    imputation_set_from_judgments,
    pool_point,
    summarize_cell,
)
from .questionnaire import (
    AnswerConstraint,
    PlotSpec,
    Question,
    Questionnaire,
    QuestionnaireError,
    ValidationResult,
    batch,
    build_intro,
    render_question,
)
from .service import JudgmentStore, ServiceError, create_app, init_data_dir

__version__ = "0.1.0"

__all__ = [
    "AnswerConstraint",
    "ColumnSpec",
    "CrowdError",
    "Dataset",
    "DatasetError",
    "EvaluationReport",
    "GroundTruth",
    "ImputationSet",
    "Judgment",
    "JudgmentSet",
    "JudgmentStore",
    "MiceError",
    "PRESETS",
    "Persona",
    "PersonaMix",
    "PlotSpec",
    "PooledCellSummary",
    "PoolingError",
    "PosteriorDraw",
    "Question",
    "Questionnaire",
    "QuestionnaireError",
    "RegressionTask",
    "ServiceError",
    "SummaryStats",
    "ValidationResult",
    "ampute",
    "answer",
    "answer_category_probs",
    "batch",
    "bayes_draw",
    "build_intro",
    "compare",
    "correlation_rank",
    "create_app",
    "imputation_set_from_judgments",
    "init_data_dir",
    "load_csv",
    "load_schema",
    "mask_cells",
    "mice_cycle",
    "multiple_impute",
    "perturb_scenario",
    "pmm_impute_column",
    "pool_point",
    "render_question",
    "restore",
    "run_crowd",
    "summarize",
    "summarize_cell",
]
