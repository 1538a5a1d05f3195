import logging
import math
from typing import List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.expressions import check_expression, evaluate

logger = logging.getLogger(__name__)

DEFAULT_F0 = 0.45 * math.pi
EPSILON_WARNING = 0.2
B0_TOLERANCE = 1e-12


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')


class CavityConfig(_Frozen):
    """Static cavity in units d = v = 1.

    Per side, f0 plus any one of (b0, V0) is enough; the other follows from
    b0 = V0 cos f0.
    """
    chi0: float = Field(0.05, ge=0, description="Capacitance ratio 2 C_J / (C_0 d)")
    b0L: float = Field(..., description="Left static boundary parameter V0L cos f0L")
    b0R: float = Field(..., description="Right static boundary parameter V0R cos f0R")
    f0L: float = Field(DEFAULT_F0, description="Left static flux phase (rad)")
    f0R: float = Field(DEFAULT_F0, description="Right static flux phase (rad)")
    V0L: float = Field(..., description="Left Josephson scale 2 E_J / E_L,cav")
    V0R: float = Field(..., description="Right Josephson scale 2 E_J / E_L,cav")

    @model_validator(mode='before')
    @classmethod
    def derive_missing_side(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for side in ('L', 'R'):
            f0 = data.get(f'f0{side}', DEFAULT_F0)
            b0 = data.get(f'b0{side}')
            V0 = data.get(f'V0{side}')
            try:
                f0 = float(f0)
            except (TypeError, ValueError):
                continue
            if b0 is None and V0 is not None:
                try:
                    data[f'b0{side}'] = float(V0) * math.cos(f0)
                except (TypeError, ValueError):
                    pass
            elif V0 is None and b0 is not None:
                if abs(math.cos(f0)) < 1e-12:
                    raise ValueError(f"cos(f0{side}) vanishes; V0{side} cannot be derived from b0{side}")
                try:
                    data[f'V0{side}'] = float(b0) / math.cos(f0)
                except (TypeError, ValueError):
                    pass
        return data

    @model_validator(mode='after')
    def check_boundary_consistency(self):
        for side in ('L', 'R'):
            b0 = getattr(self, f'b0{side}')
            V0 = getattr(self, f'V0{side}')
            f0 = getattr(self, f'f0{side}')
            if abs(b0 - V0 * math.cos(f0)) > B0_TOLERANCE * max(1.0, abs(b0)):
                raise ValueError(
                    f"b0{side}={b0} is inconsistent with V0{side}*cos(f0{side})={V0 * math.cos(f0)}"
                )
        return self


class DriveConfig(_Frozen):
    """Resolved drive: f(t) = f0 + θ(t)θ(t_F - t) ε sin(Ω t + φ) on each side."""
    epsilon: float = Field(0.01, ge=0)
    epsilon_L: Optional[float] = Field(None, ge=0)
    epsilon_R: Optional[float] = Field(None, ge=0)
    omega_L: float = Field(..., gt=0)
    omega_R: float = Field(..., gt=0)
    phi_L: float = 0.0
    phi_R: float = 0.0
    t_F: float = Field(..., gt=0)
    t_max: float = Field(..., gt=0)

    @model_validator(mode='after')
    def check_window(self):
        if not self.t_F < self.t_max:
            raise ValueError(f"drive window needs t_F < t_max, got t_F={self.t_F}, t_max={self.t_max}")
        if max(self.eps_L, self.eps_R) > EPSILON_WARNING:
            logger.warning(f"Drive amplitude {max(self.eps_L, self.eps_R)} exceeds {EPSILON_WARNING}; "
                           f"the linearized boundary model assumes epsilon << 1")
        return self

    @property
    def eps_L(self) -> float:
        return self.epsilon if self.epsilon_L is None else self.epsilon_L

    @property
    def eps_R(self) -> float:
        return self.epsilon if self.epsilon_R is None else self.epsilon_R


class DriveSpec(_Frozen):
    """Drive as written in a config: frequencies may reference k1, k2, ..."""
    epsilon: float = Field(0.01, ge=0)
    epsilon_L: Optional[float] = Field(None, ge=0)
    epsilon_R: Optional[float] = Field(None, ge=0)
    omega_L: str
    omega_R: str
    phi_L: float = 0.0
    phi_R: float = 0.0
    t_F: float = Field(..., gt=0)
    t_max: float = Field(..., gt=0)

    @field_validator('omega_L', 'omega_R', mode='before')
    @classmethod
    def validate_frequency(cls, v):
        if isinstance(v, (int, float)):
            v = repr(float(v))
        return check_expression(str(v))

    @model_validator(mode='after')
    def check_window(self):
        if not self.t_F < self.t_max:
            raise ValueError(f"drive window needs t_F < t_max, got t_F={self.t_F}, t_max={self.t_max}")
        return self

    def resolve(self, k: Sequence[float]) -> DriveConfig:
        """Evaluate the frequency expressions against the eigenfrequencies k."""
        values = self.model_dump()
        values['omega_L'] = evaluate(self.omega_L, k)
        values['omega_R'] = evaluate(self.omega_R, k)
        return DriveConfig(**values)


class IntegratorConfig(_Frozen):
    dt: Optional[float] = Field(None, gt=0, description="Fixed step; default 2π/(100 k_N)")
    n_modes: int = Field(10, ge=2)
    record_stride: int = Field(50, ge=1)


class OutputConfig(_Frozen):
    directory: str = 'out'
    trajectory: bool = False
    convention: Literal['plain', 'k-weighted'] = 'plain'


class RunConfig(_Frozen):
    cavity: CavityConfig
    drive: DriveSpec
    integrator: IntegratorConfig = IntegratorConfig()
    output: OutputConfig = OutputConfig()


AxisPath = Literal[
    'cavity.chi0', 'cavity.b0L', 'cavity.b0R', 'cavity.f0L', 'cavity.f0R', 'cavity.V0L', 'cavity.V0R',
    'drive.epsilon', 'drive.omega', 'drive.omega_L', 'drive.omega_R', 'drive.phi_L', 'drive.phi_R',
]

Observable = Literal['particle_number', 'particle_history', 'eigenfrequencies', 'phases', 'spectrum_gaps']


class SweepAxis(_Frozen):
    name: str
    path: AxisPath
    min: str
    max: str
    count: int = Field(..., ge=1)
    scale: Literal['linear', 'log'] = 'linear'

    @field_validator('min', 'max', mode='before')
    @classmethod
    def validate_bound(cls, v):
        if isinstance(v, (int, float)):
            v = repr(float(v))
        return check_expression(str(v))

    def values(self, k: Sequence[float]) -> List[float]:
        lo = evaluate(self.min, k)
        hi = evaluate(self.max, k)
        if not lo < hi:
            raise ValueError(f"axis {self.name}: min {lo} must be below max {hi}")
        if self.count == 1:
            return [lo]
        if self.scale == 'log':
            if lo <= 0:
                raise ValueError(f"axis {self.name}: log scale needs a positive min")
            ratio = (hi / lo) ** (1.0 / (self.count - 1))
            return [lo * ratio ** i for i in range(self.count)]
        step = (hi - lo) / (self.count - 1)
        return [lo + step * i for i in range(self.count)]


class SweepSettings(_Frozen):
    observable: Observable = 'particle_number'
    mode: int = Field(1, ge=1)
    time: Optional[float] = Field(None, gt=0)
    workers: int = Field(1, ge=1)


class SweepPlan(_Frozen):
    base: RunConfig
    sweep: SweepSettings = SweepSettings()
    axes: List[SweepAxis] = Field(..., min_length=1)

    @model_validator(mode='after')
    def check_axes(self):
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names: {names}")
        paths = [axis.path for axis in self.axes]
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate axis paths: {paths}")
        if 'drive.omega' in paths and ({'drive.omega_L', 'drive.omega_R'} & set(paths)):
            raise ValueError("drive.omega sets both sides and cannot be combined with drive.omega_L/R")
        if self.sweep.mode > self.base.integrator.n_modes:
            raise ValueError(f"observed mode {self.sweep.mode} exceeds n_modes={self.base.integrator.n_modes}")
        return self

    @property
    def observation_time(self) -> float:
        return self.sweep.time if self.sweep.time is not None else self.base.drive.t_F
