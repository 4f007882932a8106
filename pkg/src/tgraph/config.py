import os

DEFAULT_TOL = 1e-9


def geom_tol() -> float:
    """Global geometric tolerance; ``TGRAPH_TOL`` overrides the default."""
    value = os.environ.get("TGRAPH_TOL")
    if value:
        try:
            return float(value)
        except ValueError:
            pass
    return DEFAULT_TOL
