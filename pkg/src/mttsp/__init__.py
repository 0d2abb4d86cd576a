"""Moving-target TSP planning by iterated random generalized TSPs."""

__version__ = "0.1.0"
