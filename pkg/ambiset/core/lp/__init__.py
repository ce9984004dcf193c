"""Linear programming engines: dense simplex and transportation simplex."""

from ambiset.core.lp.network_simplex import solve_transport
from ambiset.core.lp.simplex import solve_lp

__all__ = ["solve_lp", "solve_transport"]
