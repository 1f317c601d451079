"""Real dessins for trigonal curves: combinatorics, numerics and the pointed-quartic atlas."""

__version__ = "0.1.0"
