"""Equilateral superminimal torus: index n + 3 and how padding grows it.

Every constant normal direction added by going from S^n to S^{n+1}
contributes the Laplacian eigenvalues below 2, counted on the dual lattice.

Run:  python demos/02_bimr_padding.py
"""

import numpy as np

from toruslab import oracles, zoo
from toruslab.geometry import evaluate_geometry
from toruslab.jacobi import assemble, spectrum_auto
from toruslab.sections import coordinate_projections, gram_rank, section_basis

shape = (32, 32)
prev = None
for n in (5, 6, 7):
    g = evaluate_geometry(zoo.bimr(n), shape=shape)
    res = spectrum_auto(assemble(g, "frame"), k=60, keep_vectors=False)
    labels, E = coordinate_projections(g)
    basis = section_basis(g, ["omega1", "omega2"] + labels, np.concatenate([[g.omega1, g.omega2], E]))
    line = f"S^{n}: |a| = {abs(g.a):.1e}  index {res.index}  nullity {res.nullity}  rank{{omega, e^perp}} {gram_rank(basis)}"
    if prev is not None:
        e2rho = float(np.mean(g.e2rho))
        line += f"  jump {res.index - prev} (lattice count {oracles.padding_count(g.immersion.lattice, e2rho)})"
    print(line)
    prev = res.index
