# Two independent checks: Popov's criterion for scalar systems and the
# Bendixson divergence test for planar ones.
import numpy as np

from eqstab import builtin, find_equilibria
from eqstab.errors import PreconditionError
from eqstab.greitzer import CompressorParams, equilibrium_for_g, g_for_equilibrium
from eqstab.stability import LureSystem, bendixson_test, popov_margin, popov_test, taylor_lure

# example2 linearized about x* = 1 gives A = -1/2
ex2 = builtin("example2")
L = taylor_lure(ex2, find_equilibria(ex2, [(0.01, 10)])[0])
res = popov_test(L)
print("A =", L.A[0, 0], "feasible:", res.feasible, "gamma:", res.gamma, "margin:", res.margin)

# For a scalar A and b = c = 1 the margin has a closed form
w = np.array([0.1, 1.0, 10.0])
print(popov_margin(LureSystem([[-1.0]], [1.0], [1.0]), w, 2.0), (1 + 2 * w**2) / (1 + w**2))

# example1 linearizes to an unstable A; the criterion does not apply
ex1 = builtin("example1")
try:
    popov_test(taylor_lure(ex1, find_equilibria(ex1, [(0, 10)])[0]))
except PreconditionError as exc:
    print("example1:", exc)

# Bendixson on the compressor: one sign near the stable point, mixed signs
# across the unstable zone (so a closed orbit is possible there)
p = CompressorParams()
for phi_star, box in [(0.6312, None), (0.30, [(0.1, 0.5), (0.4, 0.8)])]:
    g = g_for_equilibrium(phi_star, p)
    eq = equilibrium_for_g(g, p)
    box = box or [(eq.phi - 0.08, eq.phi + 0.08), (eq.psi - 0.1, eq.psi + 0.1)]
    v = bendixson_test(builtin("greitzer", g=g), box)
    print(f"phi*={phi_star}: divergence in [{v.div_min:.3f}, {v.div_max:.3f}] -> {v.kind}")
