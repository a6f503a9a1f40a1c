"""Clifford torus: index 5 in S^3, one more negative direction per extra dimension.

Run:  python demos/01_clifford_index.py
"""

import numpy as np

from toruslab import oracles, zoo
from toruslab.geometry import evaluate_geometry
from toruslab.jacobi import assemble, spectrum_auto

g = evaluate_geometry(zoo.clifford(3), shape=(32, 32))
res = spectrum_auto(assemble(g, "frame"), k=30, keep_vectors=False)
ref = oracles.clifford_eigenvalues(30)

print("Clifford torus in S^3, 32x32 grid")
print(f"{'computed':>14s} {'closed form':>14s}")
for lam, mu in zip(res.eigenvalues[:12], ref[:12]):
    print(f"{lam:14.10f} {mu:14.1f}")
print(f"max deviation over 30 modes: {np.max(np.abs(res.eigenvalues - ref)):.2e}")
print(f"index {res.index}, nullity {res.nullity}")

# a constant normal direction e4 adds the eigenvalues |xi|^2 e^{-2 rho} - 2
for n in (4, 5):
    gn = evaluate_geometry(zoo.clifford(n), shape=(32, 32))
    rn = spectrum_auto(assemble(gn, "frame"), k=40, keep_vectors=False)
    print(f"S^{n}: index {rn.index}, nullity {rn.nullity}, -2 multiplicity {rn.multiplicity(-2.0, 1e-7)}")
