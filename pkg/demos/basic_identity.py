"""The basic identity for the identity map of a quadric.

The map is recovered from its 1-jet: substituting the actual jets back into
the certificate gives the map again, with zero residual.
"""
from crdeg import basic_identity, hyperquadric_like, identity_map, jet_determination_check
from crdeg.series import I

M = hyperquadric_like(1, 1, [[[2 * I]]], order=6)
H = identity_map(M)
cert = basic_identity(H)
print("k0 =", cert.k0, " det at 0 =", cert.det0, " residual zero:", cert.residual_zero)
for j, p in enumerate(cert.Psi):
    print(f"Psi[{j}] with the jets of H substituted:", cert.space.substitute_jets(p, H))

res = jet_determination_check(H, H)
print("jet determination against itself:", res.verdict, "threshold", res.threshold)
