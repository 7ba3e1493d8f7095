"""Two-dimensional four-state quantum walks with self-avoiding coins and their limit laws."""

from .coins import CoinKind, build_coin, is_unitary, zero_pattern
from .errors import (
    BandMatchingError,
    LatticeBoundError,
    NormalizationError,
    OracleError,
    QuadratureError,
    SpectralError,
    SqwalkError,
)
from .evolution import evolve, evolve_checkpoints, propagate, step
from .limits import (
    LimitDensityModel,
    LimitModel,
    grover_delta,
    grover_density,
    limit_histogram,
    quadrature_mass,
    quadrature_moment,
    sc_density,
    scp_density,
)
from .spectral import eigensystem, group_velocity, momentum_coin, oracle_histogram, oracle_moments
from .state import CoinIndex, InitialCoinState, WaveFunction, make_initial, norm
from .statistics import (
    Distribution,
    RescaledHistogram,
    distribution,
    empirical_moment,
    l1_distance,
    region_mass,
    rescaled_histogram,
)

__version__ = "0.1.0"
