"""Cohen norm against the dual of the weak class.

The Cohen strongly p-summing norm is a supremum over weak-p* dual sequences,
so it should coincide with the dual-class norm built on LpWeak(p*).  We
compute both by unrelated routes: the nuclear norm (p = 2 on l2), a
cutting-plane LP, and a quasi-Newton ascent on the dual ratio.  If cvxpy is
installed the projective tensor-norm oracle is added for d = 2.
"""

import importlib.util

import numpy as np

from seqsum import FiniteSeq, LpWeak, Space
from seqsum.seqclasses import cohen_norm_result, dual_norm_result

oracle = None
if importlib.util.find_spec("cvxpy"):
    from seqsum.oracles import cohen_projective as oracle

rng = np.random.default_rng(4)
for d, k in [(2, 2), (2, 3), (3, 4)]:
    s = FiniteSeq(Space(d, 2), rng.standard_normal((k, d)))
    nuc = cohen_norm_result(s, 2)
    cut = cohen_norm_result(s, 2, backend="cutting")
    dv = dual_norm_result(LpWeak(2), s)
    line = f"d={d} k={k}: nuclear {nuc.value:.8f}  cutting {cut.value:.8f} (ub {cut.upper:.8f})  dual {dv.value:.8f}"
    if oracle is not None and d <= 2:
        line += f"  oracle {oracle(s.items, s.space, 2):.8f}"
    print(line)

# away from the Euclidean case only the cutting plane applies
s = FiniteSeq(Space(2, 3), np.array([[1.0, 2.0], [0.5, -1.0], [2.0, 0.25]]))
r = cohen_norm_result(s, 1.5)
print(f"\nl3^2, p=3/2: cutting plane {r.value:.8f}, LP upper bound {r.upper:.8f}")
if oracle is not None:
    print(f"             projective oracle {oracle(s.items, s.space, 1.5):.8f}")
