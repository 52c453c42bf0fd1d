"""Panel mixed logit with flexible mixing distributions and model averaging."""

__version__ = "0.1.0"

from .averaging import MAResult, average, estimate_weights, ma_fit_stats, stack
from .data import (
    ChoiceDataset,
    CodingPlan,
    CodingRule,
    PanelPerson,
    Task,
    apply_coding,
    export_long_csv,
    load_long_csv,
    load_rp_csv,
)
from .draws import DrawBlock, mlhs, to_std_normal
from .estimation import (
    FitResult,
    MaximizeSettings,
    fit_model,
    fit_stats,
    maximize,
    std_errors,
)
from .mixing import MixingSpec, analytic_moments, at_inverse_cdf, realize
from .models import (
    AscTerm,
    ModelSpec,
    PersonLikelihood,
    RPBlock,
    RPOutcome,
    UtilityTerm,
    build_utility,
    mixed_panel_ll,
    mnl_prob,
    rp_pair_ll,
)
from .postest import (
    DensityGrid,
    UnconditionalDraws,
    WTPSummary,
    density_grid,
    predict_shares,
    recovery_score,
    sample_ma_unconditionals,
    sample_unconditionals,
    wtp_summary,
)
from .simgen import SimConfig, TruthDist, default_truth, generate

__all__ = [
    "AscTerm", "ChoiceDataset", "CodingPlan", "CodingRule", "DensityGrid",
    "DrawBlock", "FitResult", "MAResult", "MaximizeSettings", "MixingSpec",
    "ModelSpec", "PanelPerson", "PersonLikelihood", "RPBlock", "RPOutcome",
    "SimConfig", "Task", "TruthDist", "UnconditionalDraws", "UtilityTerm",
    "WTPSummary", "analytic_moments", "apply_coding", "at_inverse_cdf",
    "average", "build_utility", "default_truth", "density_grid",
    "estimate_weights", "export_long_csv", "fit_model", "fit_stats", "generate",
    "load_long_csv", "load_rp_csv", "ma_fit_stats", "maximize", "mixed_panel_ll",
    "mlhs", "mnl_prob", "predict_shares", "realize", "recovery_score",
    "rp_pair_ll", "sample_ma_unconditionals", "sample_unconditionals", "stack",
    "std_errors", "to_std_normal", "wtp_summary",
]
