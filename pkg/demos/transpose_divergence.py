"""A bilinear form whose transpose is not summing.

Take A(x, y) = x_1 y on l_inf^K.  Feed the first slot unit vectors e_j (weak
l1 norm 1) and the second slot e_1 / j (weak l2 norm sqrt(sum 1/j^2)).  The
output of A^t is (e_1 / j)_j with l1 norm H_k, so the prefix ratio grows like
log k.  With the slots swapped only the first term survives and the ratio
stays below 1.
"""

from seqsum import LpAbs, LpWeak, ScaledPattern, Space, UnitVectors, divergence_probe, rank_one_bilinear, transpose
from seqsum.repro import harmonic, root_inverse_squares

K = 4096
E = Space(K, "inf")
A = rank_one_bilinear(E.dual().basis(0))
families = [UnitVectors(K), ScaledPattern(1, E.basis(0))]
classes, Y = [LpWeak(1), LpWeak(2)], LpAbs(1)

pt = divergence_probe(transpose(A), classes, Y, families, K)
pa = divergence_probe(A, classes, Y, families, K)

print(f"{'k':>5} {'rho_k(A^t)':>14} {'closed form':>14} {'rho_k(A)':>10}")
for (k, rt), (_, ra) in zip(pt.trace, pa.trace):
    print(f"{k:>5} {rt:>14.10f} {harmonic(k) / root_inverse_squares(k):>14.10f} {ra:>10.6f}")
print(f"\nA^t: {pt.verdict}, rho_{K}/rho_16 = {pt.growth:.4f}")
print(f"A:   {pa.verdict}")
