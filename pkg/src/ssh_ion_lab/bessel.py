"""Zeroth-order Bessel function of the first kind.

Power series below ``CROSSOVER`` and the Hankel asymptotic expansion above it.
The function is even, so only ``|x|`` is evaluated.
"""

import numpy as np

CROSSOVER = 12.0


def _series(x):
    # sum_k (-1)^k (x^2/4)^k / (k!)^2, terms generated recursively
    q = -(x * x) / 4.0
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 200):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _hankel(x):
    # J0(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4.
    # a_k = prod_{m=1..k} (-(2m-1)^2) / (k! 8^k); P collects even k with
    # alternating sign, Q odd k. Stop at the smallest term (optimal truncation).
    p = np.ones_like(x)
    qsum = np.zeros_like(x)
    coeff = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 80):
        coeff = coeff * (-((2 * k - 1) ** 2)) / (k * 8.0 * x)
        mag = np.abs(coeff)
        active &= mag < prev
        if not active.any():
            break
        prev = np.where(active, mag, prev)
        # i^k bookkeeping: terms k = 0, 2, 4.. feed P with signs +, -, +..
        if k % 2 == 0:
            sign = -1.0 if (k // 2) % 2 else 1.0
            p = np.where(active, p + sign * coeff, p)
        else:
            sign = -1.0 if ((k - 1) // 2) % 2 else 1.0
            qsum = np.where(active, qsum + sign * coeff, qsum)
    chi = x - np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - qsum * np.sin(chi))


def bessel_j0(x):
    """Evaluate J0 elementwise.

    Accepts scalars or arrays and returns the same shape (a Python float for
    scalar input).
    """
    arr = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    small = arr < CROSSOVER
    if small.any():
        out[small] = _series(arr[small])
    if (~small).any():
        out[~small] = _hankel(arr[~small])
    if np.ndim(x) == 0:
        return float(out)
    return out
