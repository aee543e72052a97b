"""
Fourier coefficients at the 1/sqrt(T) scaling
=============================================

The resampler works on the scaled DFT of the centred series. This script
shows the round trip, Parseval and the symmetry that lets us keep only the
first N = (T - 1) // 2 coefficients.
"""

import numpy as np

from tftboot.series_core import extend_coefficients, forward_coefficients, inverse_transform

rng = np.random.default_rng(0)
v = rng.standard_normal(11)
co = forward_coefficients(v)
print("T =", co.T, " N =", co.N)

# energy is preserved, so the periodogram splits the sample variance across frequencies
print("sum v^2       ", np.sum(v**2))
print("sum x^2 + y^2 ", np.sum(co.x**2 + co.y**2))

# inverse transform gives the series back
print("round trip err", np.max(np.abs(inverse_transform(co) - v)))

# coefficients beyond N mirror the first N; negative indices conjugate
for j in (2, co.T - 2, -2):
    print(f"j = {j:3d}  (x, y) =", np.round(extend_coefficients(co, j), 4))

# the last slot carries the mean
print("x(T) / sqrt(T) =", co.x[-1] / np.sqrt(co.T), " mean =", v.mean())
