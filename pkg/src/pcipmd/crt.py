"""Chinese-remainder merge of mod-3 and mod-10 labels into mod-30 values.

For coprime moduli ``m1, m2`` the merged residue is
``(a * m2 * inv(m2, m1) + b * m1 * inv(m1, m2)) mod (m1 m2)``. With
``(3, 10)`` the coefficients are ``10 * 1 = 10`` and ``3 * 7 = 21``.
Other coprime pairs go through :func:`crt_coefficients`.
"""

from __future__ import annotations

import numpy as np


def crt_coefficients(m1, m2):
    """Coefficients ``(c1, c2)`` so that ``(c1 a + c2 b) mod m1 m2`` merges residues."""
    c1 = m2 * pow(m2, -1, m1)
    c2 = m1 * pow(m1, -1, m2)
    return c1 % (m1 * m2), c2 % (m1 * m2)


C3, C10 = crt_coefficients(3, 10)


def crt_merge(r3, r10):
    """Unique ``r30`` in ``Z_30`` with ``r30 = r3 (mod 3)`` and ``r30 = r10 (mod 10)``."""
    r3 = np.asarray(r3, dtype=np.int64)
    r10 = np.asarray(r10, dtype=np.int64)
    if r3.shape != r10.shape:
        raise ValueError("r3 and r10 must have the same shape")
    if np.any((r3 < 0) | (r3 >= 3)):
        raise ValueError("r3 entries must lie in [0, 3)")
    if np.any((r10 < 0) | (r10 >= 10)):
        raise ValueError("r10 entries must lie in [0, 10)")
    return (C3 * r3 + C10 * r10) % 30
