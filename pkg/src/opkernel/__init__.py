"""Ordinal pattern kernels for weighted graphs.

Similarity of weighted graphs through paths of strictly decreasing edge
weight: exact enumeration-based kernels at small scale, a greedy
deepest-path kernel at full scale, plus Gram tooling, a precomputed-kernel
SVM with leave-one-out evaluation, and discriminative-prefix mining.
"""

from .attributes import CONSTANT_ONE, AttributeKernel
from .dop import DopProfile, MinedPattern, build_profile, construct_dop, mine_discriminative
from .errors import BudgetError, ComputeError, InputError
from .graphs import (
    LabeledDataset,
    PerturbationSpec,
    PlantSpec,
    WeightedGraph,
    generate_correlation_graph,
    generate_dataset,
    load_dataset,
    load_graph,
    perturb_missing,
    save_dataset,
    save_graph,
)
from .kernels import (
    DopView,
    GramMatrix,
    KernelConfig,
    PsdCheck,
    attribute_factor,
    dop_kernel,
    dop_views,
    export_libsvm,
    gram,
    match,
    psd_check,
    save_gram_text,
)
from .learn import (
    C_GRID,
    LAMBDA_GRID,
    EvalReport,
    FoldResult,
    SvmModel,
    loocv,
    predict,
    robustness_eval,
    train_svm,
)
from .ordinal import (
    OrdinalPattern,
    OrdinalPatternSet,
    enumerate_patterns,
    is_isomorphic,
    iso_count,
    op_kernel,
    opa_kernel,
    sopi_kernel,
)

__all__ = [
    "AttributeKernel",
    "BudgetError",
    "C_GRID",
    "CONSTANT_ONE",
    "ComputeError",
    "DopProfile",
    "DopView",
    "EvalReport",
    "FoldResult",
    "GramMatrix",
    "InputError",
    "KernelConfig",
    "LabeledDataset",
    "LAMBDA_GRID",
    "MinedPattern",
    "OrdinalPattern",
    "OrdinalPatternSet",
    "PerturbationSpec",
    "PlantSpec",
    "PsdCheck",
    "SvmModel",
    "WeightedGraph",
    "attribute_factor",
    "build_profile",
    "construct_dop",
    "dop_kernel",
    "dop_views",
    "enumerate_patterns",
    "export_libsvm",
    "generate_correlation_graph",
    "generate_dataset",
    "gram",
    "is_isomorphic",
    "iso_count",
    "load_dataset",
    "load_graph",
    "loocv",
    "match",
    "mine_discriminative",
    "op_kernel",
    "opa_kernel",
    "perturb_missing",
    "predict",
    "psd_check",
    "robustness_eval",
    "save_dataset",
    "save_graph",
    "save_gram_text",
    "sopi_kernel",
    "train_svm",
]

__version__ = "0.1.0"
