"""Regenerate the shipped problem files.

    python3 fixtures/build.py
"""
import json
from pathlib import Path

from crdeg import FormalMap, GaussianRational, TruncatedSeries, hyperquadric_like
from crdeg.degeneracy import identity_map
from crdeg.io import dump_problem

HERE = Path(__file__).parent
I = GaussianRational(0, 1)


def zw(M, t):
    Zc = M.ctx["Z"]
    return TruncatedSeries.variable(Zc, t, "z"), TruncatedSeries.variable(Zc, t, "w"), \
        TruncatedSeries.zero(Zc, t)


def write(name, prob):
    path = HERE / f"{name}.json"
    path.write_text(json.dumps(prob, indent=1, sort_keys=True) + "\n")
    print("wrote", path)


def main():
    t = 8
    quad = hyperquadric_like(1, 1, [[[2 * I]]], order=t)
    z, w, zero = zw(quad, t)
    write("id", dump_problem(quad, quad, identity_map(quad), name="hyperquadric identity"))

    for tag, lam in (("scaling", GaussianRational(2, 1)), ("scaling_b", GaussianRational(1, 1))):
        H = FormalMap(quad, quad, [z.scale(lam), w.scale(lam * lam.conjugate())], order=t)
        write(tag, dump_problem(quad, quad, H, name=f"quadric scaling, lambda = {lam}"))

    # z/(1 - r w), w/(1 - r w): same 1-jet as the identity
    r = GaussianRational("1/3")
    geo = sum(((w.scale(r)) ** k for k in range(t)), zero)
    Hr = FormalMap(quad, quad, [(z * geo).truncate(t).with_exact(False),
                                (w * geo).truncate(t).with_exact(False)], order=t)
    write("hr", dump_problem(quad, quad, Hr, name="quadric automorphism fixing the 1-jet"))

    ball3 = hyperquadric_like(2, 1, [[[2 * I, 0], [0, 2 * I]]], order=t)
    write("balls", dump_problem(quad, ball3, FormalMap(quad, ball3, [z, zero, w], order=t),
                                name="linear embedding into the C^3 quadric"))

    bh = hyperquadric_like(3, 1, [[[2 * I, 0, 0], [0, 2 * I, 0], [0, 0, -2 * I]]], order=t)
    for tag, f in (("blackhole_z2", z * z), ("blackhole_z", z)):
        H = FormalMap(quad, bh, [z, f, f, w], order=t)
        write(tag, dump_problem(quad, bh, H, name=f"black hole with f = {f}"))
    H = FormalMap(quad, bh, [z, z * w, z * w, w], order=t)
    write("nonconstant", dump_problem(quad, bh, H, name="degeneracy drops off the origin"))

    flat = hyperquadric_like(1, 1, [[[0]]], order=t)
    write("leviflat", dump_problem(flat, flat, identity_map(flat), name="Levi-flat identity"))
    write("leviflat_target", dump_problem(quad, flat, FormalMap(quad, flat, [z, zero], order=t),
                                          name="quadric into the Levi-flat model"))

    src = hyperquadric_like(1, 1, [[[1]]], order=t)
    tgt = hyperquadric_like(2, 1, [[[1, 0], [0, -1]]], order=t)
    z, w, zero = zw(src, t)
    write("eps_1deg", dump_problem(src, tgt, FormalMap(src, tgt, [z, zero, w], order=t),
                                   options={"mode": "one_deg"},
                                   name="epsilon-normalized 1-degenerate embedding"))
    write("quadric", dump_problem(quad, name="hyperquadric, no map",
                                  options={"zero_point": {"level": 3, "point": ["0", "1", "0"]}}))


if __name__ == "__main__":
    main()
