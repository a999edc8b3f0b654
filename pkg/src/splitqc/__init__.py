"""Toolkit for classically split parametrized quantum circuits.

Builds split/extended-split ansaetze, simulates them on a dense statevector
backend, measures cost-variance scaling, trains split classifiers, runs a
transverse-field Ising VQE, and counts routed CX gates on grid topologies.
"""
from .circuits import Circuit, Gate, Sym, cx, cz, h, rx, ry, rz, swap, u3, unitary1, unitary2, x
from .observables import Observable, one_local_z, tfih
from .statevector import (
    Statevector,
    apply_gate,
    concentrable_entanglement,
    concentrable_entanglement_batch,
    expectation,
    expectation_batch,
    expectation_shots,
    reduced_density_matrix,
    run_circuit,
    run_circuit_batch,
    subsystem_purity,
)
from .ansatz import (
    HeaAnsatz,
    SplitSpec,
    build_cs,
    build_ecs,
    build_efficient_su2,
    build_hea_u3,
    build_ladder_ry_cx,
    encode_features,
    project_blocks,
    split_observable,
)
from .gradients import circuit_cost, finite_difference_gradient, parameter_shift_gradient
from .optimizers import AdamState, SpsaState, adam_step, spsa_step
from .datasets import (
    ClassicalDataset,
    QuantumDataset,
    gen_hypercube_classification,
    gen_quantum_ce_dataset,
    load_dataset,
    save_dataset,
)
from .scans import (
    ScanConfig,
    VarianceRecord,
    fit_decay,
    read_records_csv,
    run_scan,
    scan_delta_cost,
    scan_ecs,
    scan_first_param_gradient,
    scan_layers,
    write_records_csv,
)
from .haar import (
    HaarSampler,
    closed_form_gradient_variance,
    haar_batch,
    haar_report,
    variance_formula_check,
    verify_first_moment,
    verify_second_moment,
    verify_trace_identities,
)
from .classify import ClassifyResult, SplitClassifier, bce_loss, predict_values, train_classifier
from .routing import (
    GridTopology,
    RoutedCircuit,
    count_table,
    read_counts_csv,
    route,
    routed_equivalent,
    write_counts_csv,
)
from .vqe import (
    VqeResult,
    VqeRun,
    build_tfih,
    exact_ground_energy,
    mean_final_error,
    run_vqe,
    run_vqe_batch,
)

__version__ = "0.1.0"
