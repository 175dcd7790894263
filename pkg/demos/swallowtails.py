"""The perturbed hyperbolic umbilic splits into two swallowtails.

Each slice mu3 = const of the level bifurcation set of the D4+ unfolding is a
curve with cusps; as mu3 varies, pairs of cusps are born at swallowtail
points.  The traced points are compared with the closed form.
"""
from hambif import catastrophe as C

for mu4 in (0.1, 0.24):
    exact = C.swallowtail_points(mu4)
    traced = C.trace_swallowtails(mu4)
    print(f"mu4 = {mu4}")
    for e, t in zip(sorted(exact, key=lambda p: p.xy[1]), sorted(traced, key=lambda p: p.xy[1])):
        print(f"   closed form {tuple(round(v, 6) for v in e.xy)}   traced {tuple(round(v, 6) for v in t.xy)}"
              f"   at mu3 = {t.mu3:.6f}")

print("\nD4- keeps ||Df|| away from zero once mu4 != 0:")
for m3, m4 in ((0.0, 0.0), (0.0, 0.1), (0.3, -0.2)):
    val, at = C.min_jacobian_norm("minus", m3, m4)
    print(f"   mu3={m3:+.1f} mu4={m4:+.1f}: min ||Df|| = {val:.4f} at {tuple(round(v, 3) for v in at)}")
