"""Directed rounding for float64 arrays via error-free transformations.

Each helper returns a float that bounds the exact real result from below
(``*_down``) or above (``*_up``).  The bound is the round-to-nearest result
itself whenever that result is exact, and its neighbour towards the correct
side otherwise, so exact dyadic computations stay exact.  Overflow and
subnormal ranges are not handled; enclosure arithmetic never reaches them.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    """Return ``s, e`` with ``s = fl(a + b)`` and ``a + b = s + e`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Return ``p, e`` with ``p = fl(a * b)`` and ``a * b = p + e`` exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _down(x, err):
    return np.where(err < 0, np.nextafter(x, -np.inf), x)


def _up(x, err):
    return np.where(err > 0, np.nextafter(x, np.inf), x)


def add_down(a, b):
    s, e = two_sum(np.asarray(a, float), np.asarray(b, float))
    return _down(s, e)


def add_up(a, b):
    s, e = two_sum(np.asarray(a, float), np.asarray(b, float))
    return _up(s, e)


def sub_down(a, b):
    return add_down(a, -np.asarray(b, float))


def sub_up(a, b):
    return add_up(a, -np.asarray(b, float))


def mul_down(a, b):
    p, e = two_prod(np.asarray(a, float), np.asarray(b, float))
    return _down(p, e)


def mul_up(a, b):
    p, e = two_prod(np.asarray(a, float), np.asarray(b, float))
    return _up(p, e)


def _div_residual(a, b):
    # sign of q*b - a, exact: p - a is exact by Sterbenz since p ~ a
    q = a / b
    p, e = two_prod(q, b)
    return q, (p - a) + e


def div_down(a, b):
    """Lower bound of ``a / b`` for ``b > 0``."""
    q, r = _div_residual(np.asarray(a, float), np.asarray(b, float))
    return np.where(r > 0, np.nextafter(q, -np.inf), q)


def div_up(a, b):
    """Upper bound of ``a / b`` for ``b > 0``."""
    q, r = _div_residual(np.asarray(a, float), np.asarray(b, float))
    return np.where(r < 0, np.nextafter(q, np.inf), q)
