import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from crdeg import (GaussianRational, PrecisionError, SeriesError, TruncatedSeries, VariableBlocks,
                   arith, evaluate, implicit_solve)
from crdeg.linalg import SingularMatrixError
from crdeg.series import I, ONE

from conftest import CTX, gaussian_rationals, same_order_triples, sparse_series

ZW = VariableBlocks([("z", 1), ("w", 1)])
FULL = VariableBlocks([("z", 1), ("w", 1), ("chi", 1), ("tau", 1)])


def v(ctx, name, t, i=0, exact=False):
    return TruncatedSeries.variable(ctx, t, name, i, exact=exact)


def test_gaussian_rational_basics():
    a = GaussianRational("2/4", "-3/6")
    assert str(a) == "1/2-1/2*i"
    assert a * a.conjugate() == GaussianRational("1/2")
    assert GaussianRational.parse("1-2/3*i") == GaussianRational(1, "-2/3")
    assert GaussianRational.parse("-i") == -I
    assert (I ** 2) == -ONE
    assert 1 / GaussianRational(1, 1) == GaussianRational("1/2", "-1/2")


def test_difference_of_squares():
    z, w = v(ZW, "z", 2), v(ZW, "w", 2)
    assert arith(z + w, z - w, "mul") == z * z - w * w
    z1, w1 = v(ZW, "z", 1), v(ZW, "w", 1)
    assert arith(z1 + w1, z1 - w1, "mul").is_zero()


def test_one_plus_iz():
    z = v(ZW, "z", 2)
    p = arith(1 + z.scale(I), 1 - z.scale(I), "mul")
    assert p == 1 + z * z


def test_arith_is_strict():
    a = v(ZW, "z", 2)
    with pytest.raises(PrecisionError):
        arith(a, v(ZW, "z", 3), "add")
    with pytest.raises(SeriesError):
        arith(a, v(FULL, "z", 2), "add")


def test_differentiate():
    z, w = v(ZW, "z", 4), v(ZW, "w", 4)
    d = (z * z * w).differentiate(0)
    assert d == (z * w).scale(2).truncate(3)
    assert d.order == 3
    t, zz, chi = v(FULL, "tau", 3), v(FULL, "z", 3), v(FULL, "chi", 3)
    q = t + (zz * chi).scale(2 * I)
    assert q.differentiate(3) == 1
    assert q.differentiate(0).differentiate(2) == q.differentiate(2).differentiate(0)
    assert q.differentiate(0).differentiate(2) == 2 * I


def test_differentiate_order_zero():
    with pytest.raises(PrecisionError):
        TruncatedSeries.constant(ZW, 0, 1, exact=False).differentiate(0)


def test_substitute_generator():
    z, w, chi, tau = (v(FULL, b, 4) for b in ("z", "w", "chi", "tau"))
    rho = w - tau - (z * chi).scale(2 * I)
    assert rho.substitute({"tau": w - (z * chi).scale(2 * I)}).is_zero()


def test_substitute_shift():
    z = v(ZW, "z", 3)
    got = (z * z).substitute({"z": z + z * z})
    assert got == z * z + (z ** 3).scale(2)


def test_substitute_restriction():
    z, w, chi, tau = (v(FULL, b, 4) for b in ("z", "w", "chi", "tau"))
    phi = z * tau + chi * w + tau * tau
    assert phi.substitute({"chi": 0, "tau": w}) == z * w + w * w


def test_constant_into_truncated_rejected():
    z = v(ZW, "z", 3)
    with pytest.raises(PrecisionError):
        (z * z).substitute({"z": 1 + z})
    zp = TruncatedSeries.variable(ZW, 3, "z")
    assert (zp * zp).substitute({"z": 1 + zp}) == 1 + zp.scale(2) + zp * zp


def test_implicit_geometric_series():
    ctx = VariableBlocks([("Y", 1), ("X", 1)])
    Y, X = v(ctx, "Y", 6), v(ctx, "X", 6)
    psi = implicit_solve([X - Y - Y * X], 1)[0]
    P = psi.vars
    y = TruncatedSeries.variable(P, 6, "Y")
    assert psi == sum((y ** k for k in range(1, 7)), TruncatedSeries.zero(P, 6))


def test_implicit_identity_case():
    ctx = VariableBlocks([("Y", 1), ("X", 1)])
    psi = implicit_solve([v(ctx, "X", 4) - v(ctx, "Y", 4)], 1)[0]
    assert psi == TruncatedSeries.variable(psi.vars, 4, "Y")


def test_implicit_hyperquadric_system():
    ctx = VariableBlocks([("z", 1), ("w", 1), ("chi", 1), ("tau", 1), ("X", 2)])
    t = 5
    z, chi, tau = v(ctx, "z", t), v(ctx, "chi", t), v(ctx, "tau", t)
    X1, X2 = v(ctx, "X", t, 0), v(ctx, "X", t, 1)
    Phi = [X2 - tau - (X1 * chi).scale(2 * I), (z - X1).scale(2 * I)]
    psi = implicit_solve(Phi, 2)
    P = psi.vars
    assert psi[0] == TruncatedSeries.variable(P, t, "z")
    want = TruncatedSeries.variable(P, t, "tau") + (
        TruncatedSeries.variable(P, t, "z") * TruncatedSeries.variable(P, t, "chi")).scale(2 * I)
    assert psi[1] == want


def test_implicit_errors():
    ctx = VariableBlocks([("Y", 1), ("X", 1)])
    Y, X = v(ctx, "Y", 3), v(ctx, "X", 3)
    with pytest.raises(SingularMatrixError):
        implicit_solve([Y + X * X], 1)
    with pytest.raises(SeriesError):
        implicit_solve([X - Y + 1], 1)


def test_evaluate():
    z, w = TruncatedSeries.variable(ZW, 3, "z"), TruncatedSeries.variable(ZW, 3, "w")
    e = evaluate(z * z * w, [2, 3])
    assert e.value == 12 and e.exact
    zc = TruncatedSeries.variable(FULL, 2, "z")
    cc = TruncatedSeries.variable(FULL, 2, "chi")
    assert (zc * cc).scale(2 * I).evaluate([1, 0, 1, 0]) == 2 * I
    assert not evaluate(v(ZW, "z", 3), [1, 1]).exact
    with pytest.raises(SeriesError):
        (z * w).evaluate([1])


def test_literal_roundtrip():
    s = TruncatedSeries(FULL, 4, {(1, 0, 1, 0): GaussianRational(0, 2), (0, 0, 0, 1): 1})
    back = TruncatedSeries.from_literal(FULL, 4, s.to_literal())
    assert back == s
    assert s.to_literal()[0] == {"c": "1", "e": [0, 0, 0, 1]}


def test_display_is_grlex():
    z, w = TruncatedSeries.variable(ZW, 3, "z"), TruncatedSeries.variable(ZW, 3, "w")
    assert str(w * w + z + z * w.scale(2 * I)) == "z + 2*i*z*w + w^2"


# properties -------------------------------------------------------------------

LAW = settings(max_examples=1000, deadline=None)


@LAW
@given(same_order_triples())
def test_addition_associative(abc):
    a, b, c = abc
    assert (a + b) + c == a + (b + c)


@LAW
@given(same_order_triples())
def test_multiplication_commutative(abc):
    a, b, _ = abc
    assert a * b == b * a


@LAW
@given(same_order_triples())
def test_distributive(abc):
    a, b, c = abc
    assert a * (b + c) == a * b + a * c


@LAW
@given(same_order_triples())
def test_multiplication_associative(abc):
    a, b, c = abc
    assert (a * b) * c == a * (b * c)


@LAW
@given(same_order_triples(), st.integers(min_value=0, max_value=5))
def test_truncation_coherence(abc, tp):
    a, b, _ = abc
    tp = min(tp, a.order)
    assert (a * b).truncate(tp) == (a.truncate(tp) * b.truncate(tp)).truncate(tp)
    assert (a + b).truncate(tp) == a.truncate(tp) + b.truncate(tp)


@LAW
@given(sparse_series(), st.integers(0, 2), st.integers(0, 2))
def test_partials_commute(a, i, j):
    assume(a.order >= 2)
    assert a.differentiate(i).differentiate(j) == a.differentiate(j).differentiate(i)


@LAW
@given(same_order_triples(), st.data())
def test_substitute_is_homomorphism(abc, data):
    a, b, c = abc
    t = a.order
    imgs = [data.draw(sparse_series(order=t, constant=False)) for _ in range(CTX.size)]
    assert (a * b).compose(imgs) == a.compose(imgs) * b.compose(imgs)
    assert (a + c).compose(imgs) == a.compose(imgs) + c.compose(imgs)


@LAW
@given(sparse_series(), sparse_series(), st.lists(gaussian_rationals(), min_size=3, max_size=3))
def test_evaluate_homomorphism(a, b, pt):
    # polynomials with a storage cap large enough to hold the product
    a = TruncatedSeries.from_literal(CTX, 10, a.to_literal(), exact=True)
    b = TruncatedSeries.from_literal(CTX, 10, b.to_literal(), exact=True)
    assert (a * b).exact
    assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt)
    assert (a + b).evaluate(pt) == a.evaluate(pt) + b.evaluate(pt)


IFT = VariableBlocks([("P", 2), ("X", 1)])


@LAW
@given(st.integers(min_value=1, max_value=5).flatmap(
    lambda t: st.tuples(st.just(t), sparse_series(ctx=IFT, order=t, constant=False),
                        gaussian_rationals().filter(bool))))
def test_implicit_solve_residual(args):
    t, F, lead = args
    # Phi = lead * X + F with F free of linear X terms, so dPhi/dX(0) = lead
    X = TruncatedSeries.variable(IFT, t, "X")
    F = F - X.scale(F.coeff((0, 0, 1)))
    Phi = X.scale(lead) + F
    psi = implicit_solve([Phi], 1)
    P = psi.vars
    imgs = [TruncatedSeries.variable(P, t, "P", 0), TruncatedSeries.variable(P, t, "P", 1), psi[0]]
    assert Phi.compose(imgs, target=P).truncate(t).is_zero()
    assert psi[0].constant_term() == 0
