"""
Seeded random generators.
File: src/core/rng.py

Every stochastic step draws from numpy's PCG64 bit generator; normal
variates use numpy's ziggurat transform (Generator.standard_normal).
"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Create a PCG64 generator from an explicit 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed))
