"""A corank-2 point of the Henon-Heiles Dirichlet problem, and what a non-symplectic
integrator does to it.

With Stoermer-Verlet the discrete problem keeps its hyperbolic umbilic: three
lines of cusps meet at one point of the level bifurcation set.  The explicit
midpoint rule destroys that structure; the best it can reach is a point where
the Jacobian is merely small.
"""
import numpy as np

from hambif import singular as G
from hambif import systems as S
from hambif.integrate import FlowSpec

hh = S.scenario_bvp("henon_heiles")
spec = FlowSpec("sv", 10, 1.0)
seed, _ = G.umbilic_seed_scan(hh, spec, [(-4, 4), (-8, 8), (-8, 8)], (41, 41, 41))
pt = G.locate_umbilic(hh, spec, seed)
print("umbilic (x1, x2, mu):", np.round(pt.u, 6), " |D_y phi| =", f"{pt.residual_norm:.1e}", " corank", pt.corank)

ridges = G.cusp_ridges(hh, spec, pt.u, 0.5, 81)
print("cusp ridges through the point, per side of the cone axis:", ridges.degree)

pert = S.scenario_bvp("henon_heiles_perturbed")
box = [(0.9, 1.9), (-0.5, 0.5), (1.4, 2.4)]
for method in ("sv", "rk2"):
    sp = FlowSpec(method, 5, 1.0)
    s, _ = G.umbilic_seed_scan(pert, sp, box, (21, 21, 21))
    q = G.locate_umbilic(pert, sp, s)
    print(f"perturbed system, {method:3s} N=5: residual floor {q.residual_norm:.1e}")
