"""covsep: covariance-matrix separability tests for bipartite quantum states.

Decide and witness entanglement of finite dimensional bipartite states
with covariance-matrix based criteria: the exact two-qubit semidefinite
test, trace tests in raw and operator-Schmidt form, the realignment
(CCNR) test, filter normal form bounds, and extraction of local
uncertainty relation witnesses.  A PPT baseline and reference state
families (bound entangled included) are bundled for thresholds and
detection statistics.
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguousThresholdError,
    NoConvergenceError,
    NoThresholdError,
    SingularReducedStateError,
    ValidationError,
)
from .verdict import CriterionVerdict, make_verdict
from .linalg import (
    eigh,
    inv_sqrt_psd,
    project_psd,
    svd,
    svdvals,
    trace_norm,
)
from .states import (
    DensityMatrix,
    ObservableBasis,
    gell_mann_basis,
    maximally_entangled,
    mix_with_white_noise,
    partial_trace,
    pauli_basis,
    pure_state,
    purity,
    random_density_matrix,
    random_unitary,
)
from .covariance import (
    BlockCovarianceMatrix,
    bipartite_cm,
    change_basis,
    covariance_matrix,
    diagonalize_c,
    nonsymmetric_cm,
    pairwise_expectations,
    realign,
)
from .realign import (
    OperatorSchmidtDecomposition,
    ccnr_test,
    dv_test,
    operator_schmidt,
    realignment_matrix,
    schmidt_trace_test,
)
from .normal_form import (
    FilterNormalFormResult,
    ccnr_fnf_bound,
    dv_fnf_bound,
    eq8_bound,
    fnf_asymmetric_test,
    fnf_sum_bound,
    fnf_sum_test,
    to_fnf,
)
from .cmc import (
    InfeasibilityCertificate,
    KappaCandidate,
    LocalUncertaintySet,
    certified_min_variance,
    cm_trace_test,
    extract_lur_witness,
    lur_value,
    qubit_block_cm,
    qubit_cmc_feasibility,
    traceless_pauli,
    witness_to_lur,
)
from .zoo import (
    CRITERIA,
    StateFamily,
    ThresholdScanResult,
    chessboard_params,
    chessboard_state,
    evaluate_criteria,
    family_names,
    get_family,
    isotropic_state,
    partial_transpose,
    ppt_test,
    run_criterion,
    threshold_scan,
    upb_tiles_state,
    werner_state,
)
