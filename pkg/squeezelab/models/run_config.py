"""
Run configuration: every physical parameter of a virtual experiment,
read from and written to flat `section.key=value` text.
"""

import math
from pathlib import Path
from typing import ClassVar, Optional
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from squeezelab.exceptions import ConfigError
from squeezelab.report.keyvalue import format_value
from squeezelab.models.opa import OpaConfig
from squeezelab.models.detection import DetectorParams
from squeezelab.models.spectral import CrystalParams, QuartzPlatePair


class OpticsConfig(BaseModel):
    """Optical transmission between the crystals and the detectors."""

    model_config = ConfigDict(frozen=True)

    transmission: float = Field(0.5, ge=0.0, le=1.0, description="Lumped optical transmission per arm")
    # recorded only; folded into the lumped transmission
    dichroic_transmission: float = Field(0.985, ge=0.0, le=1.0)
    dichroic_count: int = Field(2, ge=0)


class RunSection(BaseModel):
    """Measurement and bookkeeping parameters."""

    model_config = ConfigDict(frozen=True)

    stokes_index: int = Field(2, ge=1, le=3)
    n_pulses: int = Field(30000, ge=1)
    seed: int = Field(20090301, ge=0, lt=2 ** 64)
    squeezed_fraction: float = Field(1.0, ge=-1.0, le=1.0)
    output_dir: Optional[str] = None


def _default_opa() -> OpaConfig:
    # soft focus at 80 mW with the pump split between the crystals
    return OpaConfig.from_pump(0.073, 80.0, pump_split=True, pump_phase=math.pi, mode_count=1925)


class RunConfig(BaseModel):
    """Complete configuration of a virtual run."""

    model_config = ConfigDict(frozen=True)

    opa: OpaConfig = Field(default_factory=_default_opa)
    detector1: DetectorParams = Field(default_factory=DetectorParams)
    detector2: DetectorParams = Field(default_factory=lambda: DetectorParams(amplification=1.107e-2))
    optics: OpticsConfig = Field(default_factory=OpticsConfig)
    crystal: CrystalParams = Field(default_factory=CrystalParams)
    plates: QuartzPlatePair = Field(default_factory=QuartzPlatePair)
    run: RunSection = Field(default_factory=RunSection)

    SECTIONS: ClassVar[tuple[str, ...]] = ("opa", "detector1", "detector2", "optics", "crystal", "plates", "run")

    @property
    def efficiencies(self) -> tuple[float, float]:
        """Overall detection efficiency η of each arm."""
        t = self.optics.transmission
        return t * self.detector1.quantum_efficiency, t * self.detector2.quantum_efficiency

    @property
    def detectors(self) -> tuple[DetectorParams, DetectorParams]:
        return self.detector1, self.detector2

    def output_path(self) -> Optional[Path]:
        return Path(self.run.output_dir) if self.run.output_dir else None

    def with_updates(self, **sections: dict) -> "RunConfig":
        """Copy with some section fields replaced, re-validated."""
        data = self.model_dump()
        for section, values in sections.items():
            if section not in self.SECTIONS:
                raise ConfigError(f"unknown section: {section}", [section])
            if section == "opa":
                data["opa"] = _merge_opa(data["opa"], values)
            else:
                data[section].update(values)
        return self.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            fields = [".".join(str(part) for part in err["loc"]) for err in e.errors()]
            messages = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
            raise ConfigError(f"invalid run configuration: {messages}", fields) from e

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """Parse `section.key=value` lines; '#' starts a comment."""
        data: dict[str, dict] = {}
        unknown: list[str] = []
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {line_number}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            section, _, field = key.partition(".")
            if section not in cls.SECTIONS or not field:
                unknown.append(key)
                continue
            model = cls.model_fields[section].annotation
            if field not in model.model_fields:
                unknown.append(key)
                continue
            if value == "":
                continue
            data.setdefault(section, {})[field] = value
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}", unknown)
        if "opa" in data:
            data["opa"] = _merge_opa(_default_opa().model_dump(), data["opa"])
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"))

    def to_text(self) -> str:
        lines = []
        for section in self.SECTIONS:
            model = getattr(self, section)
            for field in type(model).model_fields:
                value = getattr(model, field)
                if value is None:
                    continue
                lines.append(f"{section}.{field}={format_value(value)}")
        return "\n".join(lines) + "\n"

    def to_file(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        return path


_PUMP_KEYS = {"gain_coefficient", "pump_power", "pump_split"}


def _merge_opa(base: dict, updates: dict) -> dict:
    """
    Overlay OPA fields. An explicit gain without pump keys stands on its
    own; any pump key re-derives the gain from the pump law.
    """
    merged = dict(base)
    merged.update(updates)
    if "gain" in updates and not _PUMP_KEYS & set(updates):
        merged["gain_coefficient"] = None
        merged["pump_power"] = None
    elif _PUMP_KEYS & set(updates) and "gain" not in updates:
        merged["gain"] = None
    return merged

