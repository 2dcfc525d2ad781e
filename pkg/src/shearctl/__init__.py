"""Active structural control toolkit for shear buildings under seismic load."""

__version__ = "0.1.0"

from . import _kernels
from .dynamics import (
    BuildingModel,
    NewmarkIntegrator,
    NewmarkParams,
    ResponseHistory,
    SimState,
    SystemMatrices,
    assemble_matrices,
    modal_analysis,
    newmark_step,
    rayleigh_coefficients,
    simulate,
    story_responses,
)
from .environment import (
    EnvConfig,
    Environment,
    GeneratorSource,
    Observation,
    RecordSource,
    StepResult,
    compute_reward,
    rollout,
)
from .excitation import (
    GroundMotionRecord,
    TrainingExcitationConfig,
    generate_training_excitation,
    load_record,
    resample,
    save_record,
)
from .lqg import LQGDesign, LqgController, StateSpaceModel, design_lqg
from .metrics import (
    MetricsReport,
    SuiteSummary,
    aggregate,
    compute_metrics,
    j1_j2,
    j3,
    j4,
    signal_energy,
)
from .models import benchmark_model, load_model, save_model
from .policy import (
    MlpController,
    MlpPolicy,
    RandomController,
    ZeroController,
    load_policy,
    mlp_forward,
    save_policy,
)
