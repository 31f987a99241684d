"""Coefficients of the three simulation designs.

Polynomials are stored lowest order first. The fifth-order term of the left
branch of the covariate mean is 7.47 x^5 and its fourth-order term 19.75 x^4.
"""

from __future__ import annotations

from typing import Tuple

Coefficients = Tuple[float, float, float, float, float, float]

# E[Z | X = x]
MU_Z_LEFT: Coefficients = (0.49, 1.06, 5.74, 17.14, 19.75, 7.47)
MU_Z_RIGHT: Coefficients = (0.49, 0.61, 0.23, -3.46, 6.43, -3.48)

# Direct effect of the running variable, design 1
MU1_DESIGN1_LEFT: Coefficients = (0.48, 1.27, 7.18, 20.21, 21.54, 7.33)
MU1_DESIGN1_RIGHT: Coefficients = (0.52, 0.84, -3.00, 7.99, -9.01, 3.56)

# Direct effect of the running variable, designs 2 and 3
MU1_DESIGN23_LEFT: Coefficients = (0.36, 0.96, 5.47, 15.28, 15.87, 5.14)
MU1_DESIGN23_RIGHT: Coefficients = (0.38, 0.62, -2.84, 8.42, -10.24, 4.31)

# Coefficient on Z by side (designs 2 and 3)
MU2_LEFT: float = 0.22
MU2_RIGHT: float = 0.28

# Geometric decay of the coefficients on W
PI_DECAY_DESIGN2: float = 0.2
PI_DECAY_DESIGN3: float = 0.5

# Errors and W correlation
SIGMA_Y: float = 0.1295
SIGMA_Z: float = 0.1353
RHO: float = 0.2692
W_CORRELATION: float = 0.5
