"""types.py

This module contains type aliases to document the numeric width and shape of
attributes used by classes in torus.py, spectrum.py and elsewhere. It should
not import other modules in the pairtheta package.

Note: if imported directly, this may shadow the `types` built-in Python module,
which is rarely used.
"""

from fractions import Fraction

import numpy as np
from numpy.typing import NDArray

# Type aliases (for readability)
int64 = int
float64 = float
complex128 = complex
rational = Fraction

# arrays
FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]
ComplexArray = NDArray[np.complex128]

# a shift vector alpha, one entry per torus dimension
Vector = tuple[float64, ...]
# a point xi = (x, y) of R^{2k}
Fiber = FloatArray
