"""Mode-independent quantum entanglement of fixed-photon-number multimode light."""

from .estimators import MIQEWitness, StaircaseClassifier
from .fock import (
    DensityMatrix,
    FockState,
    amplitude_permanent_oracle,
    build_state,
    fidelity,
    fock_basis,
    inner_product,
    subspace_dimension,
    transform_gamma,
    transform_state,
)
from .qr import (
    SeparabilityVerdict,
    StaircaseFactorization,
    classify,
    gl_invariance_check,
    pairwise_gram,
    qr_factor,
    sort_rows,
)
from .unitary import givens_unitary, random_unitary, rotation_unitary, two_mode_unitary
from .witness import (
    Bipartition,
    Multipartition,
    OptimizerConfig,
    WitnessReport,
    all_bipartitions,
    best_product_overlap,
    certify_miqe,
    g_mi_closed,
    g_mi_numeric,
    g_separable_pure,
    lambda_surfaces,
    mi_separability_search,
    optimal_lambda,
    random_unitary_scan,
    schmidt_coeffs_closed,
    schmidt_spectrum,
    white_noise_threshold,
)

__version__ = "0.1.0"
