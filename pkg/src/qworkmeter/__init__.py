"""Work statistics for driven quantum systems with ancilla-based readout."""

from .core import (
    HADAMARD,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    HamiltonianSchedule,
    NumericalCheckError,
    Segment,
    SpectralDecomposition,
    evolve,
    expectation,
    ground_state,
    partial_trace,
    partition_function,
    spectral_decompose,
    tensor,
    thermal_state,
)
from .detector import (
    DetectorConfig,
    GaussianDetectorState,
    MomentumKick,
    PositionDistribution,
    bec_four_peak_distribution,
    joint_evolution,
    light_ancilla_moments,
    momentum_kick_unitary,
    protocol1_g,
    protocol2_position_atoms,
    protocol2_position_pdf,
)
from .models import (
    CollectiveSpinModel,
    NmrModel,
    collective_spin_schedule,
    nmr_schedule,
    spin_operators,
    sudden_quench,
)
from .ramsey import RamseyOutcome, build_m1_m2, build_m_lambda, run_ramsey
from .sampling import (
    EstimateReport,
    PositionSamples,
    ShotPlan,
    sample_position,
    sample_ramsey,
    sample_tmp,
)
from .workstats import (
    CharacteristicFunctionSamples,
    InversionResult,
    TransitionData,
    WorkDistribution,
    characteristic_function_tmp,
    crooks_check,
    delta_F,
    g_lambda,
    invert_characteristic,
    invert_characteristic_fft,
    jarzynski_check,
    make_distribution,
    moment_identities_check,
    quasi_distribution,
    tmp_distribution,
    tmp_distribution_thermal,
    transition_data,
    work_moments,
)

__version__ = "0.1.0"
