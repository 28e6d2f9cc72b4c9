import pytest

from crdeg import (FormalMap, IdentityError, TruncatedSeries, basic_identity, basic_identity_1deg,
                   derivative_identities, jet_determination_check, segre_map, upsilon_recursion)
from crdeg.identity import first_difference, upsilon_1deg, upsilon_check
from crdeg.jets import JetSpace
from crdeg.series import I, GaussianRational


def sub(cert, H):
    """Psi with the actual jets of H substituted, as series in (z, w, chi, tau)."""
    return [cert.space.substitute_jets(p, H) for p in cert.Psi]


def test_identity_certificate(load):
    H = load("id").map
    cert = basic_identity(H)
    assert cert.k0 == 1 and cert.residual_zero
    M = H.source
    z, w, chi, tau = (M.var(b, order=cert.Psi.order) for b in ("z", "w", "chi", "tau"))
    got = sub(cert, H)
    assert got[0] == z
    assert got[1] == tau + (z * chi).scale(2 * I)


def test_scaling_reconstructed(load):
    H = load("scaling").map
    cert = basic_identity(H)
    assert cert.residual_zero
    assert cert.det0 == GaussianRational(2, 4)


def test_same_jets_same_certificate(load):
    a = basic_identity(load("id").map)
    b = basic_identity(load("hr").map)
    assert a.serialize() == b.serialize()
    assert b.residual_zero


def test_certificate_depends_on_jets(load):
    a = basic_identity(load("scaling").map)
    b = basic_identity(load("scaling_b").map)
    assert a.serialize() != b.serialize()


def test_wrong_entry_point(load):
    with pytest.raises(IdentityError, match="basic_identity_1deg"):
        basic_identity(load("blackhole_z2").map)


def test_derivative_identities(load):
    H = load("id", order=6).map
    cert = basic_identity(H)
    D0 = derivative_identities(cert, (0, 0), H)
    assert [str(p) for p in D0.Psi] == [str(p.embed_blocks(D0.space.vars)) for p in cert.Psi]
    D = derivative_identities(cert, (1, 0), H)
    assert D.residual_zero
    assert derivative_identities(cert, (0, 1), H).residual_zero


def test_s_fields_are_tangent(load):
    M = load("id").source
    space = JetSpace(M, 2, {}, order=6)
    for j in range(M.N):
        co = space.S(j)
        for g in M.generators():
            assert M.ideal_member(space.apply_field(space.lift(g), co))


def test_upsilon_examples(load):
    H = load("id", order=6).map
    cert = basic_identity(H)
    U0 = upsilon_recursion(cert, 0, (0, 0), H)
    x0 = TruncatedSeries.variable(U0.vars, 6, "x0")
    assert U0[0] == x0.truncate(U0[0].order) and U0[1].is_zero()
    U1 = upsilon_recursion(cert, 1, (0, 0), H)
    v = [TruncatedSeries.variable(U1.vars, U1[1].order, b) for b in ("x0", "x1")]
    assert U1[1] == (v[0] * v[1]).scale(2 * I)


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("alpha", [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
def test_upsilon_recursion_identity(load, k, alpha):
    H = load("id", order=6).map
    cert = basic_identity(H)
    ok, diffs, t = upsilon_check(cert, H, k, alpha)
    assert ok and t >= 1


def test_one_degenerate_certificate(load):
    cert = basic_identity_1deg(load("eps_1deg").map)
    e = cert.extras
    assert cert.residual_zero
    assert e["D"] == "-1" and e["g_w0"] == "1"
    assert e["D_identity"] and e["cauchy_binet"]
    assert e["Xlast_absent_from_Phi"] and e["Upsilon_Xlast_0"] == "0"
    assert list(e["Delta_bar_m_0"].values()) == ["0"]
    assert cert.Psi.order >= 6


def test_one_degenerate_upsilon(load):
    H = load("eps_1deg", order=6).map
    cert = basic_identity_1deg(H)
    U = upsilon_1deg(cert, (0, 0), H)
    ctx = U.vars
    v = segre_map(H.source, 2, order=U.order)
    for h, u in zip(H.components, U):
        assert (h.compose(list(v.components), target=ctx).truncate(u.order) - u).is_zero()


def test_one_degenerate_hypotheses(load):
    with pytest.raises(IdentityError):
        basic_identity_1deg(load("balls").map)   # Levi form 2i is not normalized
    with pytest.raises(IdentityError):
        basic_identity_1deg(load("id").map)


def test_first_difference(load):
    d = first_difference(load("scaling").map, load("scaling_b").map, 3)
    assert d["degree"] == 1 and d["component"] == 0 and d["values"] == ["2+i", "1+i"]
    assert first_difference(load("id").map, load("id").map, 4) is None


def test_jet_determination_equal(load):
    res = jet_determination_check(load("id").map, load("id").map)
    assert res.verdict == "determined" and res.discrepancies == 0
    assert res.threshold == 2


def test_jet_determination_differ(load):
    res = jet_determination_check(load("scaling").map, load("scaling_b").map)
    assert res.verdict == "jets_differ" and res.first_difference["degree"] == 1
    res = jet_determination_check(load("id").map, load("hr").map)
    assert res.verdict == "jets_differ" and res.first_difference["degree"] == 2


def test_jet_determination_rejects_non_maps(load):
    H = load("id", order=10).map
    z, w = H.components
    # a storage cap of 10 keeps the perturbation exact
    z10 = TruncatedSeries.variable(z.vars, 10, "z") ** 10
    bad = FormalMap(H.source, H.target, [z, w + z10], order=10)
    res = jet_determination_check(H, bad)
    assert res.verdict == "hypothesis_failed"
    assert res.hypotheses["H' maps M into M'"] is False


def test_jet_determination_one_deg(load):
    H = load("eps_1deg").map
    res = jet_determination_check(H, H, mode="one_deg")
    assert res.verdict == "determined" and res.threshold == 2
