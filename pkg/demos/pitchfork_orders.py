"""How well does a discretisation reproduce a periodic pitchfork?

In an integrable system a symmetric boundary value problem can have a perfect
pitchfork.  Discretisation generally breaks it into a fold and a detached
branch; the gap between them is the break magnitude.  A symplectic method
closes the gap very fast as N grows; a non-symplectic one does not.
"""
import numpy as np

from hambif import bvp as B
from hambif import systems as S
from hambif.integrate import FlowSpec

bvp = S.scenario_bvp("planar_pitchfork", mu=-6.0)
mu = (-8.0, -5.5)
for steps in (10, 14, 20, 28):
    spec = FlowSpec("sv", steps, 1.7)
    d = B.trace_diagram(bvp, spec, mu, (-1.0, 1.0), ds=1e-2, y_bounds=3.0)
    print(f"sv  N={steps:3d}: break = {B.pitchfork_break(d, mu, bvp=bvp, spec=spec):.3e}")

grid = np.linspace(*mu, 51)
starts = np.linspace(-1.0, 1.0, 41)
for steps in (14, 29):
    counts = B.root_counts(bvp, FlowSpec("rk2", steps, 1.7), grid, starts, y_window=(-1.0, 1.0))
    print(f"rk2 N={steps:3d}: at most {counts.max()} solution(s) in the window")
