"""The black hole map z -> (z, f, f, w) from a quadric in C^2 into a
hyperquadric of signature (2,1) in C^4.

The two copies of f cancel in the defining equation, so any f works.  The
degeneracy rows see this: the map is degenerate in a way the dimension count
alone would not predict.
"""
from crdeg import (FormalMap, TruncatedSeries, analyze, check_maps_into, hol_vector_fields,
                   hyperquadric_like)
from crdeg.series import I

T = 6
quad = hyperquadric_like(1, 1, [[[2 * I]]], order=T)
bh = hyperquadric_like(3, 1, [[[2 * I, 0, 0], [0, 2 * I, 0], [0, 0, -2 * I]]], order=T)

Zc = quad.ctx["Z"]
z = TruncatedSeries.variable(Zc, T, "z")
w = TruncatedSeries.variable(Zc, T, "w")

for label, f in (("f = z^2", z * z), ("f = z", z)):
    H = FormalMap(quad, bh, [z, f, f, w], order=T)
    print(f"--- {label}")
    print("maps into the target:", check_maps_into(H).verdict)
    rep, probe, hv, _ = analyze(H)
    print("dims:", rep.dims, " k0 =", rep.k0, " s =", rep.s)
    print("constancy probe:", probe.verdict)
    print("holomorphic vector fields at 0:", hol_vector_fields(H, 2).dim0)
