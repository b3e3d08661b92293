"""Pure-python jet coefficient kernels.

Same contract and accumulation order as the compiled ``_jet_core``; the two
must stay bit-identical (np.add.at applies repeated indices in sequence,
matching the compiled loop).
"""

import numpy as np


def mul(a, b, out, left, right, target):
    out[:] = 0.0
    np.add.at(out, target, a[left] * b[right])


def compose(h0, h1, h2, h3, a, out, left, right, target, order):
    # out = h0 + h1*d + (h2/2)*d^2 + (h3/6)*d^3 with d = a minus its value part
    d = a.copy()
    d[0] = 0.0
    out[:] = h1 * d
    out[0] += h0
    if order >= 2:
        p2 = np.zeros_like(a)
        np.add.at(p2, target, d[left] * d[right])
        out += (h2 / 2.0) * p2
        if order >= 3:
            p3 = np.zeros_like(a)
            np.add.at(p3, target, p2[left] * d[right])
            out += (h3 / 6.0) * p3
