"""Segre maps and the finite type test.

A Levi-nondegenerate quadric is of finite type at level 2; a Levi-flat
hypersurface never is.
"""
from crdeg import finite_type_test, hyperquadric_like, segre_map
from crdeg.series import I

quad = hyperquadric_like(1, 1, [[[2 * I]]], order=6)
flat = hyperquadric_like(1, 1, [[[0]]], order=6)

for k in range(1, 4):
    v = segre_map(quad, k)
    print(f"Segre map v^{k}:", [str(c) for c in v.components])

for name, M in (("quadric", quad), ("Levi-flat", flat)):
    res = finite_type_test(M, 2)
    where = f"at level {res.level}" if res.verdict == "FINITE_TYPE" else "up to level 2"
    print(f"{name}: {res.verdict} {where}")
