import numpy as np


def assert_non_increasing(values, rtol=1e-12):
    values = np.asarray(values, dtype=np.float64)
    slack = rtol * (1.0 + np.abs(values[:-1]))
    increases = np.flatnonzero(values[1:] > values[:-1] + slack)
    assert increases.size == 0, f"sequence increases at positions {increases[:5] + 1}"

# smoothing parameter of the reference lasso instances
BOUND_SIGMA = 1e-3
