"""Transient simulation of gas pipeline networks with compressor stations.

Pipes are discretized on a staggered grid into semi-discrete
port-Hamiltonian form, compressor stations couple pipe pairs through one
of four jump-condition models, and the network incidence structure closes
the system into a DAE solved by implicit-midpoint stepping with a damped
Newton inner iteration.
"""

from .compressor import (Assumption, CompressorModel, CompressorPortState,
                         Framework, adiabatic_enthalpy, coupling_matrix,
                         external_power, momentum_jump, setpoint_input,
                         station_injection)
from .errors import (ConfigurationError, FactorizationError, FormatError,
                     GasnetError, InfeasibleFlowError, NonconvergenceError,
                     StateError)
from .formats import (RunReport, Scenario, parse_network, parse_scenario,
                      read_timeseries, serialize_network, write_timeseries)
from .gas import EffortField, GasProperties, PipeField, effort, hamiltonian, sound_speed
from .network import (CompressorStation, GlobalSystem, NetworkSpec, Node,
                      NodeKind, PipeEdge, ValidationReport, assemble,
                      fuse_compressors, incidence_matrices, residual,
                      validate_topology)
from .pipe import PipeSpec, PipeSystem, discretize_pipe, pipe_rhs, steady_pipe_oracle
from .timeloop import (NewtonResult, SolverConfig, TimeSeries, bind_inputs,
                       newton_solve, scale_residual, simulate, steady_state,
                       step_midpoint)
from .twopipe import TwoPipeDirect

__version__ = "0.1.0"

__all__ = [
    "Assumption", "CompressorModel", "CompressorPortState", "CompressorStation",
    "ConfigurationError", "EffortField", "FactorizationError", "FormatError",
    "Framework", "GasnetError", "GasProperties", "GlobalSystem",
    "InfeasibleFlowError", "NetworkSpec", "NewtonResult", "Node", "NodeKind",
    "NonconvergenceError", "PipeEdge", "PipeField", "PipeSpec", "PipeSystem",
    "RunReport", "Scenario", "SolverConfig", "StateError", "TimeSeries",
    "TwoPipeDirect", "ValidationReport", "adiabatic_enthalpy", "assemble",
    "bind_inputs", "coupling_matrix", "discretize_pipe", "effort",
    "external_power", "fuse_compressors", "hamiltonian", "incidence_matrices",
    "momentum_jump", "newton_solve", "parse_network", "parse_scenario",
    "pipe_rhs", "read_timeseries", "residual", "scale_residual",
    "serialize_network", "setpoint_input", "simulate", "sound_speed",
    "station_injection", "steady_pipe_oracle", "steady_state", "step_midpoint",
    "validate_topology", "write_timeseries",
]
