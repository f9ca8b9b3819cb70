from pathlib import Path
from typing import Tuple

from pydantic import BaseModel, BaseSettings

PACKAGE_ROOT = Path(__file__).resolve().parents[2]


class Tolerances(BaseModel):
    """Every tolerance used by the verification catalog and the test-suite."""

    # Algebra
    pauli: float = 1e-13
    exp_spin: float = 1e-12
    leading_spin: float = 1e-12

    # Spectral calculus and moments
    spectral: float = 1e-10
    moments: float = 1e-8
    theta_moment: float = 1e-9
    theta_identity: float = 1e-8
    free_streaming: float = 1e-10
    momentum: float = 1e-10

    # Semiclassical expansion
    recursion: float = 1e-8
    reduction: float = 1e-12
    ratio_window: float = 0.5
    residual_current_rel: float = 0.01
    probe_agreement: float = 1e-8

    # Time integration
    conservation: float = 1e-9
    heat: float = 1e-6
    energy_rate: float = 0.05
    relaxation_rate: float = 0.01
    gate_rate: float = 0.05

    # Kinetic solver
    bgk_conservation: float = 1e-12
    precession_norm: float = 1e-12
    kinetic_two_ways: float = 1e-8
    stationary: float = 1e-9
    hydro_ratio: Tuple[float, float] = (1.5, 2.5)
    hydro_deviation: float = 0.02


class Settings(BaseSettings):
    """Engine settings."""

    # Project
    PROJECT_NAME: str = "spinqdd"
    VERSION: str = "0.3.0"
    LOG_LEVEL: str = "INFO"

    # Filesystem
    OUTPUT_ROOT: str = "./runs"
    SCENARIO_DIR: str = str(PACKAGE_ROOT / "scenarios")

    # Phase-space resolution
    PMAX: float = 8.0
    NP: int = 64
    DMAX: int = 6

    # Numerical guards
    N_MIN_FRACTION: float = 1e-8
    BOUNDARY_WARN_FRACTION: float = 1e-6
    KINETIC_LEAK_LIMIT: float = 1e-5

    # Verification harness
    MAX_WORKERS: int = 4
    TOLERANCES: Tolerances = Tolerances()

    class Config:
        case_sensitive = True
        env_file = ".env"


settings = Settings()
