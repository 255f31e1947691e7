# Greitzer compressor: where does the operating point lose stability?
import numpy as np

from eqstab.greitzer import (
    CompressorParams, characteristic, characteristic_peak, eigen_sweep, equilibrium_for_g,
    g_for_equilibrium, real_part, surge_boundary, surge_experiment,
)
from eqstab.report import PlotSeries, emit_csv, emit_svg

p = CompressorParams()
print("characteristic at 0, W, 2W:", [float(characteristic(v, p)) for v in (0.0, 0.25, 0.5)])
print("peak of the characteristic:", characteristic_peak(p))

# Linearization along the curve of equilibria.  The discriminant stays
# negative, so the eigenvalues are a complex pair whose real part changes
# sign at the surge boundary.
rows = eigen_sweep(np.linspace(0.01, 0.8, 200), p)
print("max discriminant:", max(r.discriminant for r in rows))
b = surge_boundary(p)
print(f"surge boundary phi = {b.phi:.6f}  (bracket {b.lower:.7f} .. {b.upper:.7f})")
emit_csv(rows, "greitzer_sweep.csv")
emit_svg(PlotSeries.single("Eigenvalue real part versus flow", "phi", "real part",
                           [r.phi for r in rows], [r.real_part for r in rows]),
         "greitzer_realpart.svg")

# Stable operating point
g = g_for_equilibrium(0.6312, p)
eq = equilibrium_for_g(g, p)
print(f"g={g:.5f}: phi*={eq.phi:.4f} psi*={eq.psi:.4f} real part {real_part(eq.phi, p):.4f}")
traj, cycle = surge_experiment(g, p)
print("  limit cycle:", cycle.detected, "-", cycle.reason)

# Inside the unstable zone the perturbation grows into a surge cycle
traj, cycle = surge_experiment(g_for_equilibrium(0.30, p), p)
print(f"phi*=0.30: limit cycle {cycle.detected}, period {cycle.period:.3f}, "
      f"amplitudes {np.round(cycle.amplitude, 4)}")
emit_svg(PlotSeries.single("Surge cycle", "phi", "psi", traj.x[:, 0], traj.x[:, 1]),
         "greitzer_surge.svg")
