"""Classical-shadow estimation and unsupervised phase classification for
spin-1/2 chains and ladders."""

from .eigensolver import EigensolverError, GroundSpace, ground_expectation, ground_space
from .features import (
    FeatureMatrix,
    ObservableSet,
    annni_observables,
    assemble_feature_matrix,
    kh_quadrant_observables,
    plaquette_observable,
    read_feature_matrix,
    write_feature_matrix,
)
from .hamiltonians import AnnniParams, KhParams, build_annni, build_kitaev_heisenberg
from .ml import (
    Clustering,
    PcaResult,
    PersistenceDiagram,
    elbow_curve,
    elbow_point,
    h0_persistence,
    kmeans,
    pca,
)
from .pipeline import (
    PhaseClassificationError,
    PhaseMap,
    SweepConfig,
    classify_annni,
    classify_kh,
    phase_boundaries,
    run_annni_sweep,
    run_failure_experiment,
    run_kh_sweep,
)
from .shadows import (
    EstimateReport,
    ShadowEnsemble,
    Snapshot,
    derandomized_schedule,
    estimate_derandomized,
    estimate_pauli,
    estimate_paulis,
    failure_proportion,
    load_ensemble,
    sample_snapshots,
    save_ensemble,
    snapshot_budget,
)
from .spin_ops import (
    PauliString,
    SparseOperator,
    StateVector,
    embed_pauli_string,
    expectation,
    pauli_matrix,
)

__version__ = "0.1.0"
