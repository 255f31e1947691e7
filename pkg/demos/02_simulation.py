# Corroborating the verdicts by integrating trajectories.
import math

import numpy as np

from eqstab import builtin, integrate, outcome, parse_system, phase_portrait
from eqstab.report import PlotSeries, Line, emit_svg

# example2 converges to 1 from any positive start
ex2 = builtin("example2")
for x0 in np.linspace(0.4, 4.0, 10):
    tr = integrate(ex2, [x0], 50.0)
    print(f"x0={x0:4.1f}  x(50)={tr.final[0]:.10f}  {outcome(tr, [1.0]).kind}")

# example1 blows up above the equilibrium and runs into x = 0 below it
ex1 = builtin("example1")
print(integrate(ex1, [2.0], 1e4).termination, integrate(ex1, [0.5], 10.0).termination)

# example4 leaves any bounded set even from a nearby state
tr = integrate(builtin("example4"), [1.5, 0.0, 0.0], 50.0)
print("example4:", tr.termination, "at t =", round(tr.t[-1], 3))

# Phase portrait of example3 from 10 random starts in [0, 2]^2
portrait = phase_portrait(builtin("example3"), [(0, 2), (0, 2)], 10, 30.0, rng_seed=0)
print([outcome(t, [1, 1]).kind for t in portrait.trajectories])
series = PlotSeries("example3 phase portrait", "x1", "x2",
                    tuple(Line(f"#{k}", t.x[:, 0], t.x[:, 1])
                          for k, t in enumerate(portrait.trajectories)))
emit_svg(series, "example3_portrait.svg")

# RK4 order check on x' = -x
decay = parse_system("dim 1\nx1' = -x1\n")
errs = [abs(integrate(decay, [1.0], 1.0, "rk4", h=h).final[0] - math.exp(-1)) for h in (0.1, 0.05)]
print("rk4 error ratio:", errs[0] / errs[1])
