"""Nearest-site queries with site updates on sparse graphs via separator hierarchies."""

from .graph import (DimacsParseError, Graph, GraphError, dijkstra, largest_connected_component,
                    nearest_by_dijkstra, parse_dimacs, read_dimacs, to_dimacs)
from .hierarchy import (Hierarchy, HierarchyNode, MemoryCapExceeded, build, depth_bound, load,
                        memory_estimate, save)
from .matching import (Matching, MatchingError, brute_force_greedy, greedy_stable_matching,
                       verify_stability)
from .reactive import NNAnswer, ReactiveNN
from .separators import (Separation, StrategyError, centroid_separator, get_strategy,
                         median_line_separator, validate_separation)

__version__ = "0.1.0"
