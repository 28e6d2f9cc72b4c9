import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crdeg import (ManifoldError, TruncatedSeries, hyperquadric_like, recenter_normalize,
                   validate_manifold)
from crdeg.manifold import Recentering, contexts
from crdeg.series import I

from conftest import gaussian_rationals, sparse_series


def quad(t=6):
    return hyperquadric_like(1, 1, [[[2 * I]]], order=t)


def qseries(terms, t=6, n=1, d=1):
    return TruncatedSeries(contexts(n, d)["Q"], t, terms, exact=True)


def fvars(M, t=None):
    t = t or M.order
    return [M.var(b, 0, order=t) for b in ("z", "w", "chi", "tau")]


def test_hyperquadric_is_valid_and_real():
    M = validate_manifold(1, 1, [qseries({(0, 0, 1): 1, (1, 1, 0): 2 * I})])
    assert M.reality is True
    assert M.R[0] == M.Qbar[0]


def test_normality_violation_named():
    with pytest.raises(ManifoldError, match=r"Q\(z,0,tau\)"):
        validate_manifold(1, 1, [qseries({(0, 0, 1): 1, (1, 0, 0): 1})])


def test_nonreal_model_recorded():
    M = validate_manifold(1, 1, [qseries({(0, 0, 1): 1, (1, 1, 0): 1})])
    assert M.reality is False
    # the conjugate graph is still available, solved for tau
    z, w, chi, tau = fvars(M)
    assert M.ideal_reduce(w - tau - z * chi).is_zero()


def test_order_zero_rejected():
    Qc = contexts(1, 1)["Q"]
    with pytest.raises(ManifoldError):
        validate_manifold(1, 1, [TruncatedSeries.zero(Qc, 0, exact=False)])


def test_ideal_reduce_examples():
    M = quad()
    z, w, chi, tau = fvars(M)
    rho = w - tau - (z * chi).scale(2 * I)
    assert M.ideal_reduce(rho).is_zero()
    red = M.ctx["red"]
    zr, wr, cr = (TruncatedSeries.variable(red, 6, b) for b in ("z", "w", "chi"))
    assert M.ideal_reduce(tau) == wr - (zr * cr).scale(2 * I)
    assert M.ideal_member(z * rho)


def test_cr_field():
    M = quad()
    z, w, chi, tau = fvars(M)
    assert M.cr_derivative(chi.scale(-2 * I), (1,)) == -2 * I
    rho = w - tau - (z * chi).scale(2 * I)
    assert M.ideal_member(M.apply_L(rho, 0))
    assert M.cr_derivative(rho, (0,)) is rho


def test_coefficient_extraction_examples():
    M = quad()
    z, w, chi, tau = fvars(M)
    assert M.coefficient_extraction_check(tau, (1,))
    Lt = M.restrict_zero_chi(M.cr_derivative(tau, (1,)))
    Zc = M.ctx["Z"]
    assert Lt == TruncatedSeries.variable(Zc, 5, "z").scale(-2 * I)
    assert M.coefficient_extraction_check(z * w + w, (2,))
    assert M.coefficient_extraction_check(chi * tau, (2,))


def test_recenter_at_origin_unchanged():
    M = quad()
    N = recenter_normalize(M, [0, 0, 0, 0])
    assert [str(q) for q in N.Q] == [str(q) for q in M.Q]


def test_recenter_off_origin():
    M = quad()
    p = [1, 2 * I, 1, 0]
    assert M.on_complexification(p)
    N = recenter_normalize(M, p)
    validate_manifold(N.n, N.d, list(N.Q), order=N.order, polynomial=False)
    # the quadric is homogeneous: translations are automorphisms
    assert [str(q) for q in N.Q] == [str(q) for q in M.Q]


def test_recenter_translated_generator_in_new_ideal():
    M = hyperquadric_like(1, 1, [[[1]]], order=5)
    p = M.point_from([1], [I], [2])
    rc = Recentering(M, p)
    N = rc.manifold
    full = N.ctx["full"]
    Zold = rc.inverse_Z()
    zold = rc.inverse_zeta()
    emb_Z = [s.embed(full, [0, 1]) for s in Zold]
    emb_zeta = [s.embed(full, [2, 3]) for s in zold]
    # rho(Z(new), zeta(new)) for the old manifold
    z, w, chi, tau = emb_Z + emb_zeta
    rho = w - tau - z * chi
    assert N.ideal_reduce(rho).is_zero()


def test_recenter_leviflat():
    M = hyperquadric_like(1, 1, [[[0]]], order=5)
    N = recenter_normalize(M, M.point_from(["1/2"], [I], [3]))
    assert str(N.Q[0]) == "tau"


def test_recenter_rejects_bad_points():
    M = quad()
    with pytest.raises(ManifoldError):
        recenter_normalize(M, [1, 0, 1, 0])
    Mt = validate_manifold(1, 1, [qseries({(0, 0, 1): 1, (1, 1, 0): 2 * I}).with_exact(False)],
                           polynomial=False)
    with pytest.raises(ManifoldError):
        recenter_normalize(Mt, [0, 0, 0, 0])


def test_levi_matrices_general_codim():
    M = hyperquadric_like(2, 2, [[[1, 0], [0, 0]], [[0, 1], [1, 0]]], order=4)
    assert M.levi_matrices()[1] == [[0, 1], [1, 0]]


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_ideal_is_an_ideal(data):
    M = quad(4)
    g = data.draw(sparse_series(ctx=M.ctx["full"], order=4))
    z, w, chi, tau = fvars(M, 4)
    rho = w - tau - (z * chi).scale(2 * I)
    assert M.ideal_member(g * rho)


@settings(max_examples=40, deadline=None)
@given(st.data(), st.integers(min_value=0, max_value=2))
def test_coefficient_extraction_random(data, a):
    M = hyperquadric_like(1, 1, [[[1]]], order=5)
    phi = data.draw(sparse_series(ctx=M.ctx["full"], order=5))
    assert M.coefficient_extraction_check(phi, (a,))


@settings(max_examples=20, deadline=None)
@given(gaussian_rationals(), gaussian_rationals(), gaussian_rationals())
def test_recenter_output_is_normal(z0, c0, t0):
    M = hyperquadric_like(1, 1, [[[2 * I]]], order=4)
    N = recenter_normalize(M, M.point_from([z0], [c0], [t0]))
    validate_manifold(N.n, N.d, list(N.Q), order=N.order, polynomial=False)
    z, w, chi, tau = fvars(N)
    assert N.ideal_member(N.apply_L(w - N.Q_full[0], 0))
