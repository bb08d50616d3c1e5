"""Perfect sampling of uniform proper q-colorings via bounding-chain CFTP."""

from .engine import SamplerConfig, sample
from .graphs import Graph, build_graph, parse_edge_list

__all__ = ["Graph", "SamplerConfig", "build_graph", "parse_edge_list", "sample"]
