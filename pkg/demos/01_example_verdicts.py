# Classifying the four worked examples with the extended-Jacobian test.
#
# Each system gets a search box; the multistart Newton search looks for
# equilibria there, and the Jacobian spectrum at the (unique) equilibrium
# decides the verdict.
import numpy as np

from eqstab import builtin, classify, jacobian, parse_system

boxes = {
    "example1": [(0.0, 10.0)],
    "example2": [(0.01, 10.0)],
    "example3": [(-3.0, 3.0)] * 2,
    "example4": [(-2.0, 3.0)] * 3,
}

for name, box in boxes.items():
    sys = builtin(name)
    print(sys.to_text().strip())
    v = classify(sys, box)
    eq = np.round(v.equilibria[0].x, 6)
    print(f"  equilibrium {eq}  spectrum {[complex(np.round(z, 9)) for z in v.spectrum]}")
    print(f"  -> {v.kind}\n")

# The Jacobian is built symbolically, so it can be printed as text
ex3 = builtin("example3")
for row in ex3.jacobian_exprs():
    print("  ".join(str(e) for e in row))
print(jacobian(ex3, [1.0, 1.0]))

# A centre (purely imaginary pair) is not hyperbolic: the method declines
harmonic = parse_system("dim 2\nx1' = x2\nx2' = -x1\n", name="harmonic")
print(harmonic.name, classify(harmonic, [(-1, 1), (-1, 1)]).kind)

# Several equilibria in the box: uniqueness fails, so no global claim
logistic = parse_system("dim 1\nx1' = x1*(1 - x1)\n")
v = classify(logistic, [(-2, 2)])
print("logistic:", v.uniqueness.status, [e.x for e in v.equilibria], v.kind)
