"""
Defaults for every tunable, and the validated CLI configuration.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from typing_extensions import Literal

from utils.numeric import Number


class Defaults:
    # ===== CONFIGURABLE THRESHOLDS =====
    # Series
    N = 32
    TOL = 1e-12
    SERIES_MAX_TERMS = 2000

    # (s,t)-integral lattice sums
    INTEGRAL_MAX_TERMS = 200_000
    INTEGRAL_STOP_RUN = 5

    # Bell polynomials
    BELL_MAX_N = 64

    # x = 0 derivative
    RICHARDSON_STEPS = (1e-4, 1e-5, 1e-6)

    # Infinite products
    PRODUCT_EPS = 1e-15
    POLE_EPS = 1e-14
    PRODUCT_MAX_FACTORS = 100_000

    # Solvers
    LATTICE_POINTS = 16
    LATTICE_X_MAX = 1.0
    DISK_SHRINK = 0.9
    LIPSCHITZ_SAFETY = 1.5
    LIPSCHITZ_SAMPLES = 9
    ITERATIONS = 8
    GROWTH_LIMIT = 3
    RESIDUAL_LINEAR = 1e-8
    RESIDUAL_MODULATED = 1e-6
    RESIDUAL_BELL = 1e-6

    # q-periodic sampling
    PERIOD_SAMPLES = 32

    SCHEMA = "stcalc/1"


@dataclass
class CliConfig:
    """Validated command line: the subcommand plus its parsed options."""
    command: str
    s: Optional[Number] = None
    t: Optional[Number] = None
    u: Optional[Number] = None
    N: int = Defaults.N
    tol: float = Defaults.TOL
    output: Literal["json", "csv"] = "json"
    out_path: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)
