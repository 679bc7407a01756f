"""
Physical constants and numeric guards.

CODATA 2018 values come from scipy.constants; every other module imports them
from here so there is exactly one source for hbar and k_B.
"""

import math

from scipy import constants as _codata

# Reduced Planck constant, J s (1.054571817e-34, exact to double precision)
HBAR = _codata.hbar

# Boltzmann constant, J/K (1.380649e-23, exact by SI definition)
K_B = _codata.k

TWO_PI = 2.0 * math.pi

# exp(-x) is below the smallest subnormal double for x beyond this
EXP_UNDERFLOW = 745.0


def decay(exponent):
    """
    Evaluate exp(-exponent) for a non-negative exponent, saturating to 0.0.

    Args:
        exponent (float): Non-negative decay exponent.

    Returns:
        float: exp(-exponent), or exactly 0.0 once it would underflow.
    """
    if exponent > EXP_UNDERFLOW:
        return 0.0
    return math.exp(-exponent)
