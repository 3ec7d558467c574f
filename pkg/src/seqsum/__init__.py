"""Sequence-class norms and summing multilinear operators on finite-dimensional lp spaces."""

from .errors import (EnumerationCapError, ParseError, SeqSumError, SpaceMismatchError, UnsupportedError,
                     ZeroDenominatorError)
from .multilinear import (MultilinearOp, ProbeResult, ProductOp, SummingEstimate, divergence_probe,
                          lower_bound_search, permute, rank_one, rank_one_bilinear, summing_ratio, symmetrize,
                          transpose)
from .propcheck import (PropertyReport, SamplerConfig, check_contraction, check_finitely_shrinking,
                        check_linear_stability, check_scalar_condition, check_seqclass_axioms,
                        check_spherical_completeness, check_subsequence_invariant, check_zero_invariant,
                        fin_leq_falsify, jointly_dominated_check)
from .seqclasses import (Cohen, Constant, Dual, Explicit, Fd, FiniteSeq, LInfSup, LpAbs, LpWeak, NormResult, Rad,
                         ScaledPattern, SeqClass, TailTrace, U, UnitVectors, class_norm, cohen_norm, dual_norm,
                         fd_norm, parse_class, rad_norm, u_tail_trace, weak_norm)
from .spaces import (INF, Functional, Space, Vector, conjugate, dual, extreme_points, norming, operator_norm, pair,
                     parse_exponent, radial_retract, vec_norm)

__version__ = "0.1.0"
