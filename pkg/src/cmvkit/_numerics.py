"""Small numerical helpers: radial schedules and Richardson extrapolation."""

import numpy as np

# r_m = 1 - 2^-m, m = 4..14
DEFAULT_M = (4, 14)


def radial_schedule(m_lo=DEFAULT_M[0], m_hi=DEFAULT_M[1]):
    """Radii r_m = 1 - 2**-m for m = m_lo..m_hi (ascending)."""
    m = np.arange(m_lo, m_hi + 1)
    return 1.0 - 2.0 ** (-m.astype(float))


def doubled_schedule(m_lo=DEFAULT_M[0], m_hi=DEFAULT_M[1]):
    """Schedule with twice the number of points, used near band edges."""
    m = np.arange(2 * m_lo, 2 * m_hi + 1) / 2.0
    return 1.0 - 2.0 ** (-m)


def richardson(h, values, max_order=4):
    """Extrapolate ``values`` sampled at step sizes ``h`` to h = 0.

    Neville's scheme on polynomials in h. ``values`` has shape (len(h), ...).
    For each trailing position the tableau entry with the smallest difference
    to its predecessor is returned together with that difference, which
    serves as the error estimate.

    Returns
    -------
    best, err : ndarray
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(values)
    n = len(h)
    prev = [v[i] for i in range(n)]
    best = v[-1].copy()
    err = np.abs(v[-1] - v[-2]) if n > 1 else np.full(np.shape(best), np.inf)
    err = np.asarray(err, dtype=float)
    for j in range(1, min(max_order, n - 1) + 1):
        cur = []
        for i in range(j, n):
            num = prev[i - j + 1] - prev[i - j]
            # extrapolate the pair (i-j, i) of order j-1 entries to h = 0
            p = prev[i - j + 1] + num * h[i] / (h[i - j] - h[i])
            cur.append(p)
        for i in range(1, len(cur)):
            e = np.abs(cur[i] - cur[i - 1])
            better = e < err
            best = np.where(better, cur[i], best)
            err = np.where(better, e, err)
        prev = cur
        if len(prev) < 2:
            break
    return best, err


def trapezoid_grid(N):
    """Uniform angles 2*pi*n/N, n = 0..N-1."""
    return 2.0 * np.pi * np.arange(N) / N


def is_power_of_two(n):
    n = int(n)
    return n > 0 and (n & (n - 1)) == 0
