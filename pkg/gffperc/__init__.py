"""Level-set percolation of the discrete and metric-graph Gaussian free field on a rectangle."""

__version__ = "0.1.0"
