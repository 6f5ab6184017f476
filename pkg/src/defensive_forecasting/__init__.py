"""Defensive forecasting: online probability forecasts that defeat an
announced continuous gambling strategy."""

from .forecaster import (
    ConstantForecaster,
    DefensiveForecaster,
    K29Config,
    K29Forecaster,
    LaplaceForecaster,
    RootSolverConfig,
    SignLimitForecaster,
    defensive_choose,
    k29_forecast,
    k29_score_fn,
    laplace_forecast,
    sign_limit_forecast,
)
from .kernels import KernelSpec, gaussian_forecast_kernel, joint_kernel
from .protocol import (
    CapitalLedger,
    History,
    ProtocolViolation,
    Round,
    SkepticFunction,
    capital_update_game1,
    capital_update_game2,
    check_game1_legal,
    run_game,
)

__version__ = "0.1.0"
