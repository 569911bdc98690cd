"""Single-qubit averaging schemes, two-qubit twirl operations, and a
two-spin NMR ensemble simulator that demonstrates them."""

from .qcore import (
    DensityMatrix,
    bell_diagonal_populations,
    bell_state,
    bloch_vector,
    fidelity,
    from_bloch,
    is_werner,
    pauli,
    product_operator,
    product_operator_decomposition,
    singlet_fidelity,
    tensor,
    trace_distance,
    werner,
)
from .rotations import (
    RotationSetSpec,
    Unitary,
    axis_angle_unitary,
    bilateral,
    enumerate_rotations,
    euler_unitary,
    magic_angle,
    parse_rotation_set,
    realize_rotations,
    sample_rotation,
)
from .twirl import TwirlReport, average, bloch_shrink, classify, exact_twirl, superoperator
from .pulseprog import PulseProgramError, PulseSequence, parse_pulse_program
from .nmr import (
    EnsembleState,
    Fid,
    GradientRefocusWarning,
    Spectrum,
    SpinSystemParams,
    TwoSpinSimulator,
    integrate_peak,
    load_params,
    spectrum,
)
from .experiments import (
    run_experiment1,
    run_experiment2,
    singlet_fraction_formula,
)

__version__ = "0.1.0"
