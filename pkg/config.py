"""
Bridgify Configuration Module
Analysis defaults, tolerances, artifact names and logging setup.
"""
import logging
from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict
from rich.console import Console
from rich.logging import RichHandler

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Defaults for every analysis; overridden by DSL options and CLI flags."""

    model_config = SettingsConfigDict(env_prefix="BRIDGIFY_", extra="ignore")

    delta: float = 1e-4
    grid_exponent: int = 4
    time_points: int = 101
    rtol: float = 1e-6
    atol: float = 1e-12
    method: str = "BDF"
    threads: int = 1
    log_level: str = "INFO"
    exact_sum_width: int = 8
    output_dir: str = "results"


settings = Settings()

# ==================== SOLVER METHODS ====================
IMPLICIT_METHODS = ("BDF", "Radau")
EXPLICIT_METHODS = ("RK45", "DOP853")

# ==================== TOLERANCES ====================
ROW_SUM_TOLERANCE = 1e-12
DISTRIBUTION_TOLERANCE = 1e-12
LIKELIHOOD_ROW_TOLERANCE = 1e-9
PROBABILITY_SLACK = 1e-9
ATOL_RESOLUTION = 1e-6
ATOL_SHRINK = 0.1
ATOL_FLOOR = 1e-200
ATOL_ATTEMPTS = 12

# ==================== ARTIFACTS ====================
SCHEMA_VERSION = 1
GAMMA_FILE_TEMPLATE = "gamma_t{index}.csv"
SNAPSHOT_FILE_TEMPLATE = "truncation_i{index}.csv"
TRACE_FILE = "trace.json"
SUMMARY_FILE = "summary.json"
TIMING_FILE = "timing.json"
GENERATOR_DUMP_FILE = "generator.coo"
RARE_TABLE_FILE = "rare.csv"
POSTERIOR_FILE = "posterior.csv"
MARGINALS_FILE = "marginals.csv"
LATENT_JOINT_FILE = "latent_joint.csv"
OCCUPATION_FILE = "occupation.csv"
MODES_FILE = "modes.csv"

# ==================== EXIT CODES ====================
EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NUMERICAL_ERROR = 2


def setup_logging(level: str = None) -> None:
    """Route all bridgify loggers through a rich handler on standard error."""
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False, markup=False)],
        force=True,
    )
