"""Agent/cluster state and the herding dynamics."""

from .params import (
    RNG_ALGORITHM_ID,
    ExponentialKernel,
    ModelParams,
    RationalKernel,
    kernel_from_dict,
    price_return,
    trading_probability,
)
from .state import (
    AgentState,
    ClusterPartition,
    EventStream,
    MarketState,
    StepOutcome,
    TradeRecord,
    execute_trade,
    ez_run,
    ez_step,
    init_market,
    load_snapshot,
    merge_clusters,
    run,
    save_snapshot,
    step,
    trading_probability_of,
)

__all__ = [
    "RNG_ALGORITHM_ID", "ExponentialKernel", "ModelParams", "RationalKernel",
    "kernel_from_dict", "price_return", "trading_probability", "AgentState",
    "ClusterPartition", "EventStream", "MarketState", "StepOutcome", "TradeRecord",
    "execute_trade", "ez_run", "ez_step", "init_market", "load_snapshot",
    "merge_clusters", "run", "save_snapshot", "step", "trading_probability_of",
]
