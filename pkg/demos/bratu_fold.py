"""Trace the Bratu branch in C and watch the fold appear.

The solution family u'' = -C exp(u), u(0) = u(1) = 0 turns back at a critical
value of C.  We shoot with Stoermer-Verlet, continue by pseudo-arclength and
compare the fold against a fine fourth-order reference.
"""
from hambif import bvp as B
from hambif import systems as S
from hambif.integrate import FlowSpec

bvp = S.scenario_bvp("bratu", C=1.0)

for method, steps in (("sv", 20), ("rk2", 20), ("ref_rk4", 400)):
    spec = FlowSpec(method, steps, 1.0)
    seed = B.shoot(bvp, spec, [1.0], [0.5])
    branch = B.continue_branch(bvp, spec, seed, mu_bounds=(0.0, 4.0), y_bounds=20.0)
    fold = branch.folds()[0]
    print(f"{method:8s} N={steps:4d}  fold at C = {fold.mu[0]:.6f}, initial slope p0 = {fold.y[0]:.4f}")

print("\nThe lower branch starts near p0 = 0.55 at C = 1; past the fold there are no solutions.")
