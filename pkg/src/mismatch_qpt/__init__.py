"""Post-selected linear-optical CNOT with mode mismatch.

Simulates a dual-rail CNOT built from partially reflecting
beamsplitters, where five temporal-mismatch parameters displace the
photon wavepackets between interference points.  Provides exact
two-photon evolution in the extended Hilbert space, coincidence
measurement matrices, process-matrix reconstruction and fidelity, and
derivative-free fitting of the mismatch parameters from data.
"""

__version__ = "0.1.0"

from .errors import (
    CircuitParseError,
    DimensionMismatchError,
    MismatchQptError,
    ModeError,
    NumericalError,
    ValidationError,
)
from .wavepacket import Displacement, OverlapGram, gram, overlap
from .fock import (
    PathTerm,
    Photon,
    TwoPhotonState,
    apply_beamsplitter,
    apply_phase,
    apply_taubox,
    norm,
    outcome_probability,
    pair_state,
    post_select,
    two_photon_state,
)
from .circuit import (
    Beamsplitter,
    Circuit,
    PhaseShift,
    TauBox,
    TauParams,
    build_cnot,
    evolve,
    measurement_settings,
    parse_circuit,
    post_selected,
    prepare_input,
    serialize_circuit,
    split_state_label,
)
from ._backend import available_backends, backend_name, use, using
from .engine import CnotModel, model
from .tomography import (
    ChiMatrix,
    ErrorReport,
    MeasMatrix,
    apply_chi,
    chi_of_unitary,
    error_report,
    ideal_cnot_chi,
    matrix_from_chi,
    model_matrix,
    output_density,
    process_fidelity,
    read_chi_json,
    read_meas_csv,
    reconstruct_chi,
    state_vector,
    synthesize_measurement,
    write_chi_json,
    write_meas_csv,
)
from .fitting import (
    FitConfig,
    FitResult,
    fit,
    fit_global,
    fit_per_input,
    load_fit_result,
    save_fit_result,
)

__all__ = [
    "__version__",
    "MismatchQptError",
    "ValidationError",
    "DimensionMismatchError",
    "ModeError",
    "CircuitParseError",
    "NumericalError",
    "Displacement",
    "OverlapGram",
    "gram",
    "overlap",
    "Photon",
    "PathTerm",
    "TwoPhotonState",
    "two_photon_state",
    "pair_state",
    "apply_beamsplitter",
    "apply_taubox",
    "apply_phase",
    "post_select",
    "norm",
    "outcome_probability",
    "Beamsplitter",
    "TauBox",
    "PhaseShift",
    "TauParams",
    "Circuit",
    "build_cnot",
    "split_state_label",
    "prepare_input",
    "measurement_settings",
    "evolve",
    "post_selected",
    "parse_circuit",
    "serialize_circuit",
    "available_backends",
    "backend_name",
    "use",
    "using",
    "CnotModel",
    "model",
    "MeasMatrix",
    "ErrorReport",
    "error_report",
    "model_matrix",
    "output_density",
    "state_vector",
    "ChiMatrix",
    "reconstruct_chi",
    "chi_of_unitary",
    "ideal_cnot_chi",
    "apply_chi",
    "process_fidelity",
    "matrix_from_chi",
    "synthesize_measurement",
    "read_meas_csv",
    "write_meas_csv",
    "read_chi_json",
    "write_chi_json",
    "FitConfig",
    "FitResult",
    "fit",
    "fit_global",
    "fit_per_input",
    "save_fit_result",
    "load_fit_result",
]
