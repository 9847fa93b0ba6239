"""Tree-structured conversation engine with context-isolated nodes."""

from ctree.engine import Engine
from ctree.flow import CrossPolicy, DownstreamPolicy, MergeSpec, Selection
from ctree.provider import HttpProvider, MockProvider, ProviderConfig

__all__ = [
    "Engine",
    "CrossPolicy",
    "DownstreamPolicy",
    "MergeSpec",
    "Selection",
    "HttpProvider",
    "MockProvider",
    "ProviderConfig",
]
