"""Dark-resonance spectra of trapped ions and spectroscopic thermometry."""

from ._backend import BACKEND, available_backends
from .errors import (ConvergenceError, DarkThermoError, DegenerateFitError,
                     DegenerateSteadyStateError, FitBoundError, InvalidParameterError, ParseError,
                     TemperatureUnboundedError)
from .levels import (DriveConfig, LevelSystem, ZeemanField, build_ca40_system, build_lambda_system,
                     collapse_operators, hamiltonian)
from .spectrum import (BeamGeometry, Spectrum, ThermalState, doppler_width, locate_dark_resonances,
                       spectrum_cold, spectrum_thermal_effective, spectrum_thermal_quadrature)
from .steadystate import (DensityMatrix, Liouvillian, assemble_liouvillian, fluorescence_rate,
                          steady_state, steady_state_batch)
from .thermometry import (FitParameters, FitResult, McmcSettings, RelaxationFit, SpectrumModel,
                          fit_exponential_relaxation, fit_spectrum_lsq, fit_spectrum_mcmc,
                          noise_scaling_check, poisson_log_likelihood)
from .io import (MeasuredSpectrum, RunConfig, read_config, read_spectrum_csv,
                 synthesize_measurement, write_result, write_spectrum_csv)

__version__ = "0.1.0"
