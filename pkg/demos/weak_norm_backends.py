"""Weak lp norms three ways.

The weak p-norm of x_1..x_k in E is the norm of the evaluation map
f -> (f(x_j))_j from E* into lp^k.  Depending on the geometry an exact
answer is available (sign vectors of the cube, columns of the cross-polytope,
the top singular value) or we fall back to multistart ascent.  This script
runs each backend next to the ascent so the agreement is visible.
"""

import numpy as np

from seqsum import FiniteSeq, Space
from seqsum.seqclasses import weak_norm_result

rng = np.random.default_rng(1)

cases = [
    ("l_inf^4, p=1 (dual ball l1: columns)", Space(4, "inf"), 1, "enum"),
    ("l1^4,    p=3 (dual ball cube: 16 vertices)", Space(4, 1), 3, "enum"),
    ("l2^3,    p=2 (top singular value)", Space(3, 2), 2, "svd"),
]
for label, E, p, exact in cases:
    s = FiniteSeq(E, rng.standard_normal((6, E.dim)))
    a = weak_norm_result(s, p, backend=exact)
    b = weak_norm_result(s, p, backend="ascent")
    print(f"{label}: {a.backend} {a.value:.12f}  ascent {b.value:.12f}  gap {abs(a.value - b.value):.1e}")

# no exact backend: l3 has dual l_{3/2}, so only the ascent applies.  The
# returned functional is a certificate: evaluating it reproduces the value.
E = Space(3, 3)
s = FiniteSeq(E, rng.standard_normal((5, 3)))
r = weak_norm_result(s, 2)
f = r.certificate
print(f"\nl3^3, p=2: {r.backend} value {r.value:.10f} (exact={r.exact})")
print(f"  ||f||_(3/2) = {np.sum(np.abs(f) ** 1.5) ** (2 / 3):.10f}")
print(f"  ||(f(x_j))||_2 = {np.linalg.norm(s.items @ f):.10f}")
