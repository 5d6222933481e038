"""Cluster states from noisy entangling gates: exact simulation and analysis."""

from .states import (
    DensityMatrix,
    DephasingChannel,
    InputQubit,
    MeasurementBasis,
    MeasurementResult,
    PureState,
    apply_cphase,
    apply_local,
    dephase,
    dephasing_kraus,
    fidelity_pure_mixed,
    fidelity_pure_pure,
    init_register,
    measure,
    overlap,
    partial_trace,
    pure_to_density,
)
from .clusters import (
    ClusterGraph,
    LocalCorrection,
    NoLocalCorrectionError,
    RemovalResult,
    StabilizerReport,
    UnsupportedGraphError,
    build_cluster,
    chain_graph,
    clifford_group_1q,
    derive_local_correction,
    format_graph,
    grid_graph,
    load_graph,
    parse_graph,
    remove_x,
    remove_z,
    verify_stabilizers,
)
from .phasenoise import (
    DEPHASING_FAMILIES,
    OverlapResult,
    PhaseDistribution,
    dephasing_fidelity,
    overlap_avg,
    overlap_exact,
)
from .entanglement import (
    PairAnalysis,
    averaged_pair_state,
    concurrence,
    pair_scan,
    ppt_min_eigenvalue,
    sampled_mean_concurrence,
)
from .oneway import (
    GateConfig,
    GateRun,
    MeasurementPattern,
    PatternSearchError,
    SampleStats,
    cnot_matrix,
    config_cnot4,
    config_cnot15,
    config_cnot16_bridged,
    derive_xy_pattern,
    gate_configs,
    gate_fidelity_mc,
    gate_fidelity_once,
    run_gate,
    single_qubit_gate,
    wire_fidelity_mc,
    wire_transfer,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "DephasingChannel",
    "InputQubit",
    "MeasurementBasis",
    "MeasurementResult",
    "PureState",
    "apply_cphase",
    "apply_local",
    "dephase",
    "dephasing_kraus",
    "fidelity_pure_mixed",
    "fidelity_pure_pure",
    "init_register",
    "measure",
    "overlap",
    "partial_trace",
    "pure_to_density",
    "ClusterGraph",
    "LocalCorrection",
    "NoLocalCorrectionError",
    "RemovalResult",
    "StabilizerReport",
    "UnsupportedGraphError",
    "build_cluster",
    "chain_graph",
    "clifford_group_1q",
    "derive_local_correction",
    "format_graph",
    "grid_graph",
    "load_graph",
    "parse_graph",
    "remove_x",
    "remove_z",
    "verify_stabilizers",
    "DEPHASING_FAMILIES",
    "OverlapResult",
    "PhaseDistribution",
    "dephasing_fidelity",
    "overlap_avg",
    "overlap_exact",
    "PairAnalysis",
    "averaged_pair_state",
    "concurrence",
    "pair_scan",
    "ppt_min_eigenvalue",
    "sampled_mean_concurrence",
    "GateConfig",
    "GateRun",
    "MeasurementPattern",
    "PatternSearchError",
    "SampleStats",
    "cnot_matrix",
    "config_cnot4",
    "config_cnot15",
    "config_cnot16_bridged",
    "derive_xy_pattern",
    "gate_configs",
    "gate_fidelity_mc",
    "gate_fidelity_once",
    "run_gate",
    "single_qubit_gate",
    "wire_fidelity_mc",
    "wire_transfer",
]
