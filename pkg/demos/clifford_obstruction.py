"""
Why the Clifford torus is excluded
==================================

The Clifford torus in the unit 4-sphere is minimal with |A|^2 = 2, so it
never satisfies a pinching condition |A|^2 + 2 gamma |K_perp| <= k |H|^2 +
beta K_bar with beta K_bar < 2. The torus in hyperbolic space sits at
|H|^2 = 8 and also fails the condition. A slightly perturbed round sphere, in
contrast, is comfortably pinched.

This script only evaluates the initial data, so it runs in a second.
"""

import numpy as np

from pinchflow.geometry import ddvv_residual, fundamental_forms
from pinchflow.pinching import PinchingParams, pinching_q
from pinchflow.presets import preset_surface
from pinchflow.spaceform import sphere


def summary(name, model=None, params=None, k=0.7):
    s = preset_surface(name, params, model=model)
    kbar = s.model.curvature
    sh = fundamental_forms(s)
    rows = s.interior_rows()
    q = pinching_q(sh, PinchingParams(k, kbar), kbar)[rows]
    print(f"{name:<20} K_bar={kbar:+.0f}  |A|^2 in [{sh.A2[rows].min():.3f}, {sh.A2[rows].max():.3f}]  "
          f"|H|^2 max {np.max(sh.H_norm[rows] ** 2):.3f}  max Q(k={k:.3g}) = {q.max():+.4f}")
    return sh


###############################################################################
# The two tori have Q > 0 everywhere, so they are not pinched.

summary("clifford-torus-s4")
summary("torus-h4", k=29 / 40)

###############################################################################
# The perturbed sphere has nonzero normal curvature but negative Q.

sh = summary("perturbed-sphere", model=sphere(1.0))
print(f"perturbed sphere: max |K_perp| = {np.max(np.abs(sh.kperp)):.2e}")

###############################################################################
# The DDVV inequality 2|K_perp| <= |A|^2 - |H|^2/2 holds at every site on
# all of them. Both tori lie in a totally geodesic 3-space, so K_perp = 0 and
# the residual is |Ao|^2; the perturbed sphere comes close to equality.

for name in ("clifford-torus-s4", "torus-h4", "perturbed-sphere"):
    print(f"{name:<20} min DDVV residual {np.min(ddvv_residual(fundamental_forms(preset_surface(name)))):+.2e}")
