"""
squeezelab - Configuration Settings
Process-level defaults for the Fock engine, pulse sampling and fitting.
Physical run parameters live in run-config files (see squeezelab.models.run_config).
"""

import os
from pathlib import Path
from pydantic import BaseModel

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed, use system env vars


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value not in (None, "") else default


class EngineSettings(BaseModel):
    """Truncated Fock engine configuration."""
    tail_tolerance: float = 1e-12
    max_gain: float = 1.5  # above this only the closed-form model is used
    prune_probability: float = 1e-18  # grid cells below this are not sampled


class SamplingSettings(BaseModel):
    """Pulse sampling configuration."""
    n_pulses: int = 30000  # run length of the reference dataset
    seed: int = _env_int("SQUEEZELAB_SEED", 20090301)
    threads: int = _env_int("SQUEEZELAB_THREADS", 1)
    block_size: int = 1024  # pulses per counter-based RNG block, never depends on threads


class FitSettings(BaseModel):
    """Damped Gauss-Newton configuration."""
    initial_damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 10.0
    max_damping: float = 1e16
    step_tolerance: float = 1e-10
    gradient_tolerance: float = 1e-10
    max_iterations: int = 200
    degeneracy_correlation: float = 0.99


class Settings(BaseModel):
    """Main application settings."""
    project_root: Path = Path(__file__).parent.parent
    output_dir: Path = Path(os.environ.get("SQUEEZELAB_OUTPUT_DIR", Path(__file__).parent.parent / "output"))
    log_level: str = os.environ.get("SQUEEZELAB_LOG_LEVEL", "INFO")

    engine: EngineSettings = EngineSettings()
    sampling: SamplingSettings = SamplingSettings()
    fit: FitSettings = FitSettings()

    def model_post_init(self, __context):
        """Ensure output directory exists."""
        self.output_dir.mkdir(parents=True, exist_ok=True)


# Global settings instance
settings = Settings()
