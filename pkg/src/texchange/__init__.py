"""Time-exchange (TE) cooperative forwarding for TDMA uplinks."""

from .model import (BS, ChannelModel, ModelError, NetworkPlan, NodeConfig,
                    PairAllocation, direct_goodput, network_objective,
                    te_pair_goodputs)

__version__ = "0.1.0"

__all__ = [
    "BS", "ChannelModel", "ModelError", "NetworkPlan", "NodeConfig",
    "PairAllocation", "direct_goodput", "network_objective", "te_pair_goodputs",
]
