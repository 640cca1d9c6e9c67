"""DQC1-based quantum multiple kernel learning: simulator and benchmark harness."""

from .quantum import (
    DiagonalMixedState,
    HADAMARD,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    apply_to_basis,
    hadamard_layer,
    identity,
    kron,
    kron_all,
    trace_against_state,
)
from .encoding import (
    EncodingPattern,
    KernelParameters,
    encoding_block,
    feature_unitary,
    parameterized_feature_unitary,
    rotation_layer,
)
from .dqc1 import (
    TraceEstimate,
    derive_seed,
    exact_kernel_trace,
    shot_estimate_trace,
    shots_for_accuracy,
)
from .kernels import (
    EstimationMode,
    GramMatrix,
    KernelSpec,
    Provenance,
    PsdReport,
    basis_kernel_stack,
    combine_stack,
    cross_basis_kernel_stack,
    gram,
    gram_cross,
    kernel_trace,
    kernel_value,
    validate_psd,
)
from .svm import (
    SvmConfig,
    TrainedModel,
    accuracy,
    decide,
    dual_objective,
    train,
    zero_one_risk,
)
from .optimize import (
    OptimizerConfig,
    SimplexPoint,
    alternating_fit,
    minimize_on_simplex,
    minimize_on_simplices,
)
from .data import (
    Dataset,
    ScaleRecord,
    SplitPlan,
    generate_circles,
    load_german_credit,
    make_split,
    scale_features,
    unscale_features,
)

__version__ = "0.1.0"
