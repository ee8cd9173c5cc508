"""Multi-lane wormhole Delta network simulator and its analytic models."""

from ._minsim import (
    ConfigError,
    complexity,
    cost_units,
    ideal_delay,
    min_reliability,
    min_reliability_general,
    run,
    simulate,
)

__all__ = [
    "ConfigError",
    "complexity",
    "cost_units",
    "ideal_delay",
    "min_reliability",
    "min_reliability_general",
    "run",
    "simulate",
]
