"""Material property models for the part and tool, including cure kinetics.

The part is a curing thermoset composite: constant thermal properties plus an
autocatalytic rate law with a sigmoidal diffusion cutoff,

    da/dt = A * exp(-E / (R*T)) * a^m * (1-a)^n / (1 + exp(C*(a - (ac0 + act*T))))

with all constants supplied by a material card; only the functional form is
fixed in code.  The tool is inert (no heat generation).
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, fields

import numpy as np
import yaml

from .errors import ParseError, ValidationError

GAS_CONSTANT = 8.314462618  # J/(mol*K)

_KINETICS_SANITY_TEMPS = (250.0, 600.0)  # K, validation scan window


@dataclass(frozen=True)
class ThermalProperties:
    """Constant through-thickness thermal properties of one layer.

    density:       kg/m^3
    specific_heat: J/(kg*K)
    conductivity:  W/(m*K), through-thickness
    """

    density: float
    specific_heat: float
    conductivity: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{f.name} must be positive, got {v!r}")

    @property
    def volumetric_heat_capacity(self) -> float:
        """rho * c_p, J/(m^3*K)."""
        return self.density * self.specific_heat


@dataclass(frozen=True)
class CureKinetics:
    """Rate-law constants for the exothermic cure reaction.

    total_heat_of_reaction: J per kg of composite, released over full cure
    pre_exponential:        1/s
    activation_energy:      J/mol
    order_m, order_n:       reaction orders (autocatalytic and depletion)
    diffusion_c:            sigmoid sharpness of the diffusion cutoff
    alpha_c0:               cutoff centre at T = 0 K
    alpha_ct:               cutoff centre shift per kelvin, 1/K
    initial_degree_of_cure: seed conversion in [0, 1)
    """

    total_heat_of_reaction: float
    pre_exponential: float
    activation_energy: float
    order_m: float
    order_n: float
    diffusion_c: float
    alpha_c0: float
    alpha_ct: float
    initial_degree_of_cure: float = 0.01

    def __post_init__(self):
        if not (math.isfinite(self.total_heat_of_reaction) and self.total_heat_of_reaction >= 0):
            raise ValidationError("total_heat_of_reaction must be non-negative")
        if not (math.isfinite(self.activation_energy) and self.activation_energy >= 0):
            raise ValidationError("activation_energy must be non-negative")
        if self.order_m < 0 or self.order_n < 0:
            raise ValidationError("reaction orders must be non-negative")
        if not 0.0 <= self.initial_degree_of_cure < 1.0:
            raise ValidationError("initial_degree_of_cure must lie in [0, 1)")
        for name in ("pre_exponential", "diffusion_c", "alpha_c0", "alpha_ct"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class CompositeMaterial:
    """Thermal properties plus cure kinetics of the part."""

    thermal: ThermalProperties
    kinetics: CureKinetics


@dataclass(frozen=True)
class MaterialPair:
    """Part-on-tool material set.  The tool carries no kinetics (inert)."""

    part: CompositeMaterial
    tool: ThermalProperties
    fingerprint: str = ""

    def with_fingerprint(self) -> "MaterialPair":
        if self.fingerprint:
            return self
        return MaterialPair(self.part, self.tool, fingerprint=_fingerprint(self))


def cure_rate(alpha, temperature, kinetics: CureKinetics):
    """Cure rate da/dt (1/s) at conversion ``alpha`` and temperature (K).

    Accepts scalars or numpy arrays (broadcast together).  Exactly zero at
    alpha = 1.  Raises ValueError outside alpha in [0, 1] or T <= 0.
    """
    a = np.asarray(alpha, dtype=float)
    t = np.asarray(temperature, dtype=float)
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    if np.any(t <= 0.0):
        raise ValueError(f"temperature must be positive (K), got {temperature!r}")
    k = kinetics
    arrhenius = k.pre_exponential * np.exp(-k.activation_energy / (GAS_CONSTANT * t))
    conversion = np.power(a, k.order_m) * np.power(1.0 - a, k.order_n)
    gate = k.diffusion_c * (a - (k.alpha_c0 + k.alpha_ct * t))
    diffusion = 1.0 / (1.0 + np.exp(np.clip(gate, -500.0, 500.0)))
    rate = arrhenius * conversion * diffusion
    return float(rate) if rate.ndim == 0 else rate


def heat_generation(rate, part: CompositeMaterial):
    """Volumetric heat release Q (W/m^3) for a cure rate (1/s).

    Q = density * total_heat_of_reaction * rate; linear in the rate.
    """
    r = np.asarray(rate, dtype=float)
    if np.any(r < 0.0):
        raise ValueError(f"cure rate must be non-negative, got {rate!r}")
    q = part.thermal.density * part.kinetics.total_heat_of_reaction * r
    return float(q) if q.ndim == 0 else q


_SCHEMA = {
    "part.thermal.density": "density",
    "part.thermal.specific_heat": "specific_heat",
    "part.thermal.conductivity": "conductivity",
    "tool.thermal.density": "density",
    "tool.thermal.specific_heat": "specific_heat",
    "tool.thermal.conductivity": "conductivity",
}

_KINETICS_KEYS = (
    "total_heat_of_reaction",
    "pre_exponential",
    "activation_energy",
    "order_m",
    "order_n",
    "diffusion_c",
    "alpha_c0",
    "alpha_ct",
)


def _dig(doc: dict, path: str):
    node = doc
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ParseError(f"material document is missing required key '{path}'")
        node = node[key]
    return node


def _number(doc: dict, path: str) -> float:
    value = _dig(doc, path)
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a sign ("2.0e5") as strings
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"material key '{path}' must be a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"material key '{path}' must be a number, got {value!r}")
    return float(value)


def load_material(text: str) -> MaterialPair:
    """Parse a material card (YAML, sections part.thermal / part.kinetics /
    tool.thermal, SI units; see docs/material-schema.md) into a validated
    MaterialPair.

    Raises ParseError naming the key path for missing or malformed fields and
    ValidationError naming the violated invariant for out-of-range values.
    """
    try:
        doc = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        raise ParseError(f"material document is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("material document must be a mapping")

    def thermal(section: str) -> ThermalProperties:
        return ThermalProperties(
            density=_number(doc, f"{section}.density"),
            specific_heat=_number(doc, f"{section}.specific_heat"),
            conductivity=_number(doc, f"{section}.conductivity"),
        )

    kin_values = {key: _number(doc, f"part.kinetics.{key}") for key in _KINETICS_KEYS}
    initial = doc.get("part", {}).get("kinetics", {}).get("initial_degree_of_cure")
    if initial is not None:
        kin_values["initial_degree_of_cure"] = _number(doc, "part.kinetics.initial_degree_of_cure")

    pair = MaterialPair(
        part=CompositeMaterial(thermal=thermal("part.thermal"), kinetics=CureKinetics(**kin_values)),
        tool=thermal("tool.thermal"),
    ).with_fingerprint()
    _check_rate_law(pair.part.kinetics)
    return pair


def load_material_file(path) -> MaterialPair:
    with open(path, "r", encoding="utf-8") as fh:
        return load_material(fh.read())


def _check_rate_law(kinetics: CureKinetics, points: int = 64) -> None:
    """Coarse scan: the rate law must stay finite and non-negative over the
    full conversion range and the working temperature window."""
    a = np.linspace(0.0, 1.0, points)
    t = np.linspace(*_KINETICS_SANITY_TEMPS, points)
    rates = cure_rate(a[:, None], t[None, :], kinetics)
    if not np.all(np.isfinite(rates)) or np.any(rates < 0.0):
        raise ValidationError("cure rate is not finite and non-negative over alpha in [0,1], T in [250,600] K")


def _fingerprint(pair: MaterialPair) -> str:
    """Hash of the numeric content, independent of document formatting."""
    parts = []
    for obj in (pair.part.thermal, pair.part.kinetics, pair.tool):
        for f in fields(obj):
            parts.append(f"{f.name}={getattr(obj, f.name)!r}")
    return hashlib.sha256(";".join(parts).encode()).hexdigest()
