"""First conjugate points of geodesics, computed with jet-RATTLE.

On the unit sphere every geodesic from a point refocuses at the antipode after
arc length pi; the discrete value converges at second order.  On a triaxial
ellipsoid the conjugate locus is an astroid with four cusps.
"""
import numpy as np

from hambif import georattle as R
from hambif import systems as S

sphere = S.hypersurface_catalog("sphere")
q = np.array([1.0, 0.0, 0.0])
prev = None
for h in (0.02, 0.01, 0.005):
    loc = R.conjugate_locus(sphere, q, 200, h=h)
    err = float(np.nanmax(np.abs(loc.arc - np.pi)))
    note = "" if prev is None else f"   ratio {prev / err:.2f}"
    print(f"sphere h={h:<6} max |arc - pi| = {err:.2e}{note}")
    prev = err

E = S.hypersurface_catalog("ellipsoid")
q0 = R.project_to_surface(E, E.q_star)
loc = R.conjugate_locus(E, q0, 200, h=0.005)
fin = np.isfinite(loc.arc)
print(f"\nellipsoid: conjugate arc in [{loc.arc[fin].min():.4f}, {loc.arc[fin].max():.4f}],"
      f" {len(loc.cusp_rays)} cusps at ray indices", list(loc.cusp_rays))
