"""
Sampling the reaction terms
===========================

At a maximum point of Q the sign of the reaction terms decides whether the
pinching condition can be lost. This script scans the reduced polynomial
over a million seeded points for several pinching constants, and shows the
violating point that appears at the top of the admissible range k = 29/40.

Runs in a few seconds.
"""

from pinchflow.pinching import PinchingParams
from pinchflow.reaction import (Convention, ScanSampler, hsq_from_constraint, reaction_decomposed, reaction_raw,
                                scan)

sampler = ScanSampler(count=1_000_000, seed=0)

###############################################################################
# For k up to 0.7 the largest sampled value is nonpositive. At k = 29/40 a
# positive region appears.

for k in (0.51, 0.6, 2 / 3, 0.7, 29 / 40):
    rep = scan(PinchingParams(k, 0.0), 0.0, sampler)
    print(f"k={k:.4f}  max reaction {rep.max_reaction:+.3e}  violations {rep.violation_count}")

###############################################################################
# The worst point found at k = 29/40, and its decomposition into the five
# grouped terms. The positive contribution comes from the last group.

p = PinchingParams(29 / 40, 0.0)
rep = scan(p, 0.0, sampler)
x = rep.argmax
print("\nworst point:", {key: round(val, 4) for key, val in x.items()})
hsq = hsq_from_constraint(x["a"], x["b"], x["c"], 0.0, p)
print(f"raw reaction {reaction_raw(x['a'], x['b'], x['c'], hsq, 0.0, p):+.6f}")
for name, val in reaction_decomposed(x["a"], x["b"], x["c"], 0.0, p, parts=True).items():
    print(f"  {name:<6}{val:+.6f}")

###############################################################################
# The other convention for the normal curvature reaction term fails even for
# small k. This is how the two conventions are told apart.

rep = scan(PinchingParams(0.6, 0.0), 0.0, ScanSampler(count=20_000, seed=0), Convention.PRINTED)
print(f"\nPaperPrinted convention, k=0.6: max {rep.max_reaction:+.3e}, violations {rep.violation_count}")
