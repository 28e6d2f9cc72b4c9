import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from crdeg import FormalMap, GaussianRational, GeneratorTarget, TruncatedSeries, VariableBlocks
from crdeg.linalg import det, inverse
from crdeg.io import parse_problem

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# three variables is enough to exercise mixed monomials while staying fast
CTX = VariableBlocks([("x", 2), ("y", 1)])


def fixture_path(name):
    return FIXTURES / f"{name}.json"


@pytest.fixture(scope="session")
def load():
    cache = {}

    def get(name, order=None):
        key = (name, order)
        if key not in cache:
            cache[key] = parse_problem(fixture_path(name), order=order)
        return cache[key]

    return get


small_ints = st.integers(min_value=-4, max_value=4)
denoms = st.integers(min_value=1, max_value=3)


@st.composite
def gaussian_rationals(draw):
    a, b = draw(small_ints), draw(denoms)
    c, d = draw(small_ints), draw(denoms)
    return GaussianRational(f"{a}/{b}", f"{c}/{d}")


@st.composite
def sparse_series(draw, ctx=CTX, order=None, max_terms=5, constant=True):
    t = draw(st.integers(min_value=1, max_value=5)) if order is None else order
    nterms = draw(st.integers(min_value=0, max_value=max_terms))
    terms = {}
    for _ in range(nterms):
        deg = draw(st.integers(min_value=0 if constant else 1, max_value=t))
        exps = [0] * ctx.size
        for _ in range(deg):
            exps[draw(st.integers(min_value=0, max_value=ctx.size - 1))] += 1
        terms[tuple(exps)] = draw(gaussian_rationals())
    return TruncatedSeries(ctx, t, terms)


def same_order_triples():
    return st.integers(min_value=1, max_value=5).flatmap(
        lambda t: st.tuples(sparse_series(order=t), sparse_series(order=t), sparse_series(order=t)))


def dump(obj):
    return json.dumps(obj, sort_keys=True)


# generator and coordinate changes on the target ---------------------------------

def as_generator_target(T):
    """The target's generators moved into the (Z, zeta) context."""
    ctx = VariableBlocks([("Z", T.N), ("zeta", T.N)])
    return GeneratorTarget(T.N, [g.embed(ctx, list(range(2 * T.N))) for g in T.generators()])


def random_unit(rng, ctx, order, terms=4):
    """A random series with nonzero constant term (an invertible multiplier)."""
    def num():
        return GaussianRational(Fraction(rng.randint(-3, 3), rng.randint(1, 3)),
                                Fraction(rng.randint(-3, 3), rng.randint(1, 3)))

    c = num()
    while not c:
        c = num()
    out = {(0,) * ctx.size: c}
    for _ in range(terms):
        e = [0] * ctx.size
        for _ in range(rng.randint(1, 2)):
            e[rng.randrange(ctx.size)] += 1
        out[tuple(e)] = num()
    return TruncatedSeries(ctx, order, out)


def random_invertible(rng, n, lo=-2, hi=2):
    while True:
        C = [[GaussianRational(rng.randint(lo, hi), rng.randint(lo, hi)) for _ in range(n)]
             for _ in range(n)]
        if det(C):
            return C


def change_generators(H, rng):
    """Replace rho' by A rho' (A a random invertible matrix of series)."""
    G = as_generator_target(H.target)
    ctx, t, d = G.ctx_full, H.order, G.d
    while True:
        A = [[random_unit(rng, ctx, t) if i == j else random_unit(rng, ctx, t).scale(rng.randint(0, 1))
              for j in range(d)] for i in range(d)]
        if det([[a.constant_term() for a in row] for row in A]):
            break
    gens = [sum((A[i][j] * G.gens[j] for j in range(d)), TruncatedSeries.zero(ctx, t))
            for i in range(d)]
    return FormalMap(H.source, GeneratorTarget(G.N, gens), H.components, order=H.order)


def change_coordinates(H, rng):
    """Z' -> C Z' with C random and invertible, applied to target and map."""
    G = as_generator_target(H.target)
    N, ctx, t = G.N, G.ctx_full, H.order
    C = random_invertible(rng, N)
    Ci = inverse(C)
    Z = [TruncatedSeries.variable(ctx, t, i) for i in range(2 * N)]
    zero = TruncatedSeries.zero(ctx, t)
    imgs = [sum((Z[k].scale(Ci[i][k]) for k in range(N)), zero) for i in range(N)]
    imgs += [sum((Z[N + k].scale(Ci[i][k].conjugate()) for k in range(N)), zero) for i in range(N)]
    gens = [g.compose(imgs, target=ctx) for g in G.gens]
    Zc = H.source.ctx["Z"]
    zc = TruncatedSeries.zero(Zc, t)
    comps = [sum((H.components[k].scale(C[i][k]) for k in range(N)), zc) for i in range(N)]
    return FormalMap(H.source, GeneratorTarget(N, gens), comps, order=H.order)
