"""Random falsification of structural properties.

Genuine classes survive every checker; each deliberately broken class is
caught, and its counterexample replays from the seed alone.
"""

from seqsum import LInfSup, LpAbs, LpWeak, Rad, SamplerConfig
from seqsum.propcheck import CHECKERS, check_scalar_condition, mutations, replay

cfg = SamplerConfig(samples=300, seed=7)

print("genuine classes")
for X in (LpAbs(2), LInfSup(), LpWeak(2), Rad()):
    verdicts = {name: CHECKERS[name](X, cfg).verdict for name in ("axioms", "shrinking", "zero", "linear")}
    print(f"  {str(X):10s} {verdicts}")

print("\nbroken classes")
muts = mutations()
for name, check in CHECKERS.items():
    X = muts[name]
    r = check(X, cfg)
    print(f"  {name:12s} {r.summary()}  replays: {replay(r, X, cfg)}")

print("\nscalar condition")
for Xs, Y in [((LpAbs(2), LpAbs(2)), LpAbs(1)), ((LInfSup(), LInfSup()), LpAbs(1))]:
    print(" ", check_scalar_condition(Xs, Y, cfg).summary())
