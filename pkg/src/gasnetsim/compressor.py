"""Compressor station models: four jump-condition variants and their couplings.

A compressor between two pipes is specified in one of two frameworks,
  FC: fixed compression ratio  (outlet pressure = ratio * inlet pressure),
  FP: fixed outlet pressure    (ratio varies with the inlet pressure),
combined with one of two momentum assumptions,
  AV: constant gas velocity across the machine, so the momentum jumps by
      ratio^(1/kappa) (adiabatic density ratio, constant compressibility),
  AM: constant momentum (no jump).

The two-pipe coupling matrix, the matching setpoint input vectors, the
per-station injection pair used in network assembly, and the external
energy-exchange expressions all live here. The compression work per unit
mass (adiabatic enthalpy rise) is provided as a diagnostic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .gas import GasProperties


class Framework(str, Enum):
    """What the station controls: the ratio (fc) or the outlet pressure (fp)."""

    FIXED_RATIO = "fc"
    FIXED_PRESSURE = "fp"


class Assumption(str, Enum):
    """Momentum rule across the station: constant velocity (av) or momentum (am)."""

    CONST_VELOCITY = "av"
    CONST_MOMENTUM = "am"


@dataclass
class CompressorModel:
    """One station: framework, momentum assumption, default setpoint, kappa.

    The setpoint is the compression ratio (FC, dimensionless) or the outlet
    pressure (FP, Pa). Time-varying setpoints come from scenario profiles
    and are passed per call; the field is the constant default.
    """

    framework: Framework
    assumption: Assumption
    setpoint: float
    kappa: float = 1.4

    def __post_init__(self):
        self.framework = Framework(self.framework)
        self.assumption = Assumption(self.assumption)
        if self.kappa <= 1:
            raise ConfigurationError("isentropic exponent must exceed 1")
        if self.framework is Framework.FIXED_PRESSURE:
            if self.setpoint <= 0:
                raise ConfigurationError("FP compressor needs a positive outlet pressure")
        elif self.setpoint < 1.0:
            warnings.warn(
                f"FC compressor with ratio {self.setpoint} < 1 acts as an expander",
                stacklevel=2,
            )

    @property
    def tag(self) -> str:
        return f"{self.framework.value}-{self.assumption.value}"

    def ratio(self, setpoint: float, p_in: float) -> float:
        """Effective compression ratio at the current operating point."""
        if self.framework is Framework.FIXED_RATIO:
            return setpoint
        return setpoint / p_in

    def inlet_match_factor(self, setpoint: float, p_in: float) -> float:
        """Coefficient k in the momentum coupling m_in = k * m_out.

        m_in is the momentum arriving from the upstream pipe, m_out the
        momentum state at the downstream pipe inlet. AM gives k = 1; AV
        gives k = ratio^(-1/kappa) with the effective ratio.
        """
        if self.assumption is Assumption.CONST_MOMENTUM:
            return 1.0
        return self.ratio(setpoint, p_in) ** (-1.0 / self.kappa)


@dataclass
class CompressorPortState:
    """Boundary quantities the coupling depends on.

    p_in: pressure at the upstream pipe outlet; m_feed: momentum at the
    downstream pipe inlet; p_out_end: pressure at the far downstream pipe
    outlet (diagnostic only).
    """

    p_in: float
    m_feed: float
    p_out_end: float = 0.0

    def __post_init__(self):
        if self.p_in <= 0:
            raise ConfigurationError("compressor inlet pressure must be positive")


def momentum_jump(model: CompressorModel, m_in: float, ratio: float | None = None) -> float:
    """Outlet momentum for a given inlet momentum.

    For FP with the constant-velocity assumption the current ratio
    p_out / p_in must be supplied; FC uses the model setpoint by default.
    """
    if model.assumption is Assumption.CONST_MOMENTUM:
        return m_in
    if ratio is None:
        if model.framework is Framework.FIXED_PRESSURE:
            raise ConfigurationError("FP+AV momentum jump needs the current ratio")
        ratio = model.setpoint
    return ratio ** (1.0 / model.kappa) * m_in


def coupling_matrix(model: CompressorModel, ports: CompressorPortState) -> np.ndarray:
    """State-dependent 6x4 input map of the coupled two-pipe system.

    Rows: [pipe-1 interior, pipe-1 inlet condition, pipe-1 outlet condition,
    pipe-2 interior, pipe-2 inlet condition, pipe-2 outlet condition];
    columns match the setpoint input vector.
    """
    G = np.zeros((6, 4))
    G[1, 0] = 1.0
    G[5, 3] = 1.0
    if model.framework is Framework.FIXED_RATIO:
        G[2, 1] = -ports.m_feed
        G[4, 2] = ports.p_in
    else:
        if model.assumption is Assumption.CONST_VELOCITY:
            G[2, 1] = -ports.m_feed * ports.p_in ** (1.0 / model.kappa)
        else:
            G[2, 1] = -ports.m_feed
        G[4, 2] = 1.0
    return G


def setpoint_input(
    model: CompressorModel, p_in_boundary: float, m_out_boundary: float,
    setpoint: float | None = None,
) -> np.ndarray:
    """Input 4-vector [p_0; jump entry; setpoint entry; -m_L] for the two-pipe form."""
    if setpoint is None:
        setpoint = model.setpoint
    if p_in_boundary <= 0:
        raise ConfigurationError("boundary supply pressure must be positive")
    if model.framework is Framework.FIXED_PRESSURE and setpoint <= 0:
        raise ConfigurationError("FP compressor needs a positive outlet pressure")
    if model.assumption is Assumption.CONST_VELOCITY:
        second = setpoint ** (-1.0 / model.kappa)
    else:
        second = 1.0
    return np.array([p_in_boundary, second, setpoint, -m_out_boundary])


def station_injection(model: CompressorModel, setpoint: float | None = None) -> np.ndarray:
    """The two station entries [jump entry; setpoint entry] used in network rows."""
    u = setpoint_input(model, 1.0, 0.0, setpoint)
    return u[1:3]


def external_power(
    model: CompressorModel, ports: CompressorPortState,
    inlet_power: float, outlet_power: float,
    setpoint: float | None = None,
) -> tuple[float, float]:
    """External energy-exchange rate of the coupled two-pipe system.

    Returns (total, station_term) per unit cross-sectional area, where
    total = inlet_power - outlet_power + station_term and the station term
    isolates the work done by the machine. It vanishes for a neutral
    setpoint (ratio 1, or outlet pressure equal to the inlet pressure).
    """
    if setpoint is None:
        setpoint = model.setpoint
    kinv = 1.0 / model.kappa
    p1, m2 = ports.p_in, ports.m_feed
    fc = model.framework is Framework.FIXED_RATIO
    av = model.assumption is Assumption.CONST_VELOCITY
    if fc and av:
        term = (setpoint - setpoint ** (-kinv)) * p1 * m2
    elif fc:
        term = (setpoint - 1.0) * p1 * m2
    elif av:
        term = (setpoint - p1 * (p1 / setpoint) ** kinv) * m2
    else:
        term = (setpoint - p1) * m2
    return inlet_power - outlet_power + term, term


def adiabatic_enthalpy(gas: GasProperties, p_in: float, p_out: float,
                       t_in: float | None = None) -> float:
    """Specific work of ideal adiabatic compression from p_in to p_out, J/kg."""
    if p_in <= 0 or p_out <= 0:
        raise ConfigurationError("compression pressures must be positive")
    if t_in is None:
        t_in = gas.temperature
    if t_in <= 0:
        raise ConfigurationError("inlet temperature must be positive")
    k = gas.isentropic_exponent
    return (
        gas.compressibility * t_in * gas.specific_gas_constant
        * k / (k - 1.0) * ((p_out / p_in) ** ((k - 1.0) / k) - 1.0)
    )
