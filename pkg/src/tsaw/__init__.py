"""Continuous-time true self-avoiding walk: simulators, Ray-Knight profiles and limit checks."""
from .continuum import (estimate_omega_hat, estimate_phi_hat, simulate_rbm_batch,
                        simulate_reflected_bm)
from .errors import BudgetExhausted, ConfigError, EmptyPath, UndersizedSample
from .experiments import ExperimentConfig, TestReport, emit_report, run_experiment
from .ray_knight import build_profile, build_profiles, rescale_profile, total_time
from .rng import ScriptedRNG, Stream
from .walk import (local_time_profile, run_until_inverse_local_time, run_until_time,
                   simulate_positions, simulate_stopped)
from .weights import (Exponential, StepTwoLevel, WeightModel, build_tables, compute_sigma2,
                      compute_W, compute_Z)

__version__ = "0.1.0"
