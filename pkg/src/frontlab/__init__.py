"""frontlab: a numerical laboratory for trait-structured invasion fronts.

Population density u(t, x, y) over space x and a quantitative trait y
diffuses in both variables, pays a fitness cost alpha*g(y), and
competes nonlocally across traits through a kernel K.  The package
computes the spectrum of the confining trait operator, the critical
genetic pressure, the invasion steady state, traveling fronts and their
minimal speed 2*sqrt(1 - lambda0), and simulates the full time-dependent
problem to measure the realized spreading speed.
"""

from .errors import ConfigError, FrontlabError, NumericsError, ValidationError
from .grids import SpaceGrid, TraitGrid
from .potentials import KernelSpec, PotentialSpec, kernel_core_bound
from .spectral import (DiscreteOperator, SpectralBasis, assemble_operator,
                       decay_report, eigenpairs, find_alpha_bar, tail_exponent,
                       truncation_study)
from .wavefront import (AssembledWave, ModeRates, SteadyState, WaveProfile,
                        assemble_wave, critical_speed, decay_rates, fit_tail_rate,
                        kpp_interior_residual, solve_kpp_profile, steady_state,
                        wave_residual)
from .cauchy import (Field, InitialData, RunSettings, Trajectory, bump_profile,
                     competition_integral, init_field, mode_amplitudes, run, step)
from .tracker import (FrontTrace, SpeedEstimate, emptiness_beyond, envelope_forecast,
                      estimate_speed, front_position, front_trace,
                      invasion_profile_error, trace_from_diagnostics)
from .config import ExperimentConfig, config_hash

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
