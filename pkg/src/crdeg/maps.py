"""Formal holomorphic maps between manifolds in normal coordinates."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .linalg import det, rank
from .manifold import NormalManifold, Recentering
from .series import ZERO, GaussianRational, TruncatedSeries, VariableBlocks


class MapError(ValueError):
    pass


class GeneratorTarget:
    """A target given by arbitrary generators rho'(Z', zeta') in 2N' variables.

    Only the degeneracy machinery needs this; it lets tests change the
    generators (A rho') or the coordinates (C Z') freely.
    """

    def __init__(self, N: int, generators: Sequence[TruncatedSeries]):
        self.N = N
        self.gens = list(generators)
        self.ctx_full = VariableBlocks([("Z", N), ("zeta", N)])
        for g in self.gens:
            if g.vars != self.ctx_full:
                raise MapError("generators must live in (Z, zeta)")
        self.d = len(self.gens)
        self.n = N - self.d

    def generators(self):
        return self.gens


def target_generators(T) -> list[TruncatedSeries]:
    """Generators in a context whose first N variables are Z' and next N are zeta'."""
    return T.generators()


class FormalMap:
    """H = (f, g) with components in (z, w) of the source.

    `bar_components` is the map acting on the zeta side, written in the same
    (z, w) slot context.  It defaults to the coefficient conjugate, which is
    the usual Hbar; recentered maps carry their own.
    """

    def __init__(self, source: NormalManifold, target, components: Sequence[TruncatedSeries],
                 order: int | None = None, bar_components: Sequence[TruncatedSeries] | None = None):
        self.source = source
        self.target = target
        comps = list(components)
        Zc = source.ctx["Z"]
        if len(comps) != target.N:
            raise MapError(f"map needs {target.N} components, got {len(comps)}")
        for c in comps:
            if c.vars != Zc:
                raise MapError(f"map components must live in {Zc}")
            if c.constant_term():
                raise MapError("H(0) must be 0")
        if order is None:
            order = min((c.order for c in comps if not c.exact), default=None)
            if order is None:
                order = source.order
        self.order = order
        self.components = comps
        if bar_components is None:
            bar_components = [c.conjugate() for c in comps]
        self.bar_components = list(bar_components)

    @property
    def N(self):
        return self.source.N

    @property
    def Nprime(self):
        return self.target.N

    @property
    def exact(self):
        return all(c.exact for c in self.components + self.bar_components)

    @property
    def f(self):
        return self.components[:self.target.n]

    @property
    def g(self):
        return self.components[self.target.n:]

    def __repr__(self):
        return f"FormalMap({[str(c) for c in self.components]})"

    # pieces on the complexification -------------------------------------
    @cached_property
    def on_M(self) -> list[TruncatedSeries]:
        """(H(Z), Hbar(chi, R(chi, z, w))) in the reduced source context."""
        S = self.source
        red = S.ctx["red"]
        emb = list(red.indices("z")) + list(red.indices("w"))
        Z_side = [c.embed(red, emb) for c in self.components]
        chis = [TruncatedSeries.variable(red, max(S.order, 1), "chi", i) for i in range(S.n)]
        zeta_images = chis + list(S.R)
        zeta_side = [c.compose(zeta_images, target=red) for c in self.bar_components]
        return Z_side + zeta_side

    @cached_property
    def on_full(self) -> list[TruncatedSeries]:
        """(H(Z), Hbar(zeta)) in the full source context (z, w, chi, tau)."""
        full = self.source.ctx["full"]
        Zi = list(full.indices("z")) + list(full.indices("w"))
        zi = list(full.indices("chi")) + list(full.indices("tau"))
        return [c.embed(full, Zi) for c in self.components] + \
            [c.embed(full, zi) for c in self.bar_components]

    def pull_back(self, phi: TruncatedSeries) -> TruncatedSeries:
        """phi(H(Z), Hbar(zeta)) reduced modulo I (series in (z, w, chi))."""
        return phi.compose(self.on_M, target=self.source.ctx["red"])

    def jacobian_at_0(self) -> list[list[GaussianRational]]:
        """N' x N matrix dH/dZ (0)."""
        Zc = self.source.ctx["Z"]
        out = []
        for c in self.components:
            row = []
            for i in range(Zc.size):
                e = [0] * Zc.size
                e[i] = 1
                row.append(c.coeff(e))
            out.append(row)
        return out

    def jet(self, max_degree: int) -> list[list[tuple[tuple[int, ...], GaussianRational]]]:
        return [[(e, c) for e, c in comp.items() if sum(e) <= max_degree] for comp in self.components]

    def to_json(self) -> dict:
        out = {"order": self.order, "components": [c.to_literal() for c in self.components]}
        return out


@dataclass
class MapsIntoResult:
    verdict: bool
    residuals: list
    order: int


def check_maps_into(H: FormalMap) -> MapsIntoResult:
    """rho'_j(H(Z), Hbar(zeta)) modulo I for every target generator."""
    residuals = [H.pull_back(g) for g in target_generators(H.target)]
    order = min([r.order for r in residuals] + [H.order])
    residuals = [r.truncate(order) if not r.exact else r for r in residuals]
    return MapsIntoResult(all(r.is_zero() for r in residuals), residuals, order)


@dataclass
class TransversalityResult:
    transversal: bool
    rank: int
    matrix: list


def transversality_check(H: FormalMap) -> TransversalityResult:
    """rank of g_w(0) equals d."""
    S = H.source
    J = H.jacobian_at_0()
    wcols = list(S.ctx["Z"].indices("w"))
    gw = [[J[H.target.n + j][c] for c in wcols] for j in range(H.target.d)]
    r = rank(gw) if gw and gw[0] else 0
    return TransversalityResult(r == S.d, r, gw)


@dataclass
class LeviData:
    matrices: list
    nondegenerate: bool
    epsilon_normalized: bool
    epsilon: tuple | None = None

    @property
    def B(self):
        return self.matrices[0]


def levi_data(M: NormalManifold) -> LeviData:
    mats = M.levi_matrices()
    B = mats[0] if mats else []
    nondeg = M.d == 1 and M.n > 0 and det(B) != 0
    eps = None
    normalized = False
    if M.d == 1 and M.n > 0:
        diag_ok = all(B[a][b] == 0 for a in range(M.n) for b in range(M.n) if a != b)
        signs = [B[a][a] for a in range(M.n)]
        if diag_ok and all(s == 1 or s == -1 for s in signs):
            normalized = True
            eps = tuple(int(s.re) for s in signs)
    return LeviData(mats, nondeg, normalized, eps)


@dataclass
class LeviPullbackResult:
    verdict: bool
    lhs: list
    rhs: list
    immersive: bool | None
    notes: list = field(default_factory=list)


def levi_pullback_check(H: FormalMap) -> LeviPullbackResult:
    """g_w(0) B = f_z(0)^T B' conj(f_z(0)) for hypersurfaces."""
    S, T = H.source, H.target
    if S.d != 1 or T.d != 1:
        raise MapError("the Levi pullback identity needs hypersurfaces on both sides")
    if not isinstance(T, NormalManifold):
        raise MapError("target must be given in normal coordinates")
    if not check_maps_into(H).verdict:
        raise MapError("H does not map M into M'")
    B = levi_data(S).B
    Bp = levi_data(T).B
    J = H.jacobian_at_0()
    Jb = _jac0(H.bar_components, S.ctx["Z"])
    n, np_ = S.n, T.n
    fz = [[J[r][j] for j in range(n)] for r in range(np_)]
    fzb = [[Jb[r][j] for j in range(n)] for r in range(np_)]
    gw = J[np_][S.ctx["Z"].index("w", 0)]
    lhs = [[gw * B[j][k] for k in range(n)] for j in range(n)]
    rhs = [[sum((Bp[r][s] * fz[r][j] * fzb[s][k] for r in range(np_) for s in range(np_)), ZERO)
            for k in range(n)] for j in range(n)]
    notes = []
    immersive = None
    if levi_data(S).nondegenerate and levi_data(T).nondegenerate and transversality_check(H).transversal:
        immersive = rank(J) == S.N
        notes.append(f"immersivity asserted: rank dH(0) = {rank(J)}")
    else:
        notes.append("immersivity: hypotheses not met, not asserted")
    return LeviPullbackResult(lhs == rhs, lhs, rhs, immersive, notes)


def _jac0(comps, Zc):
    out = []
    for c in comps:
        row = []
        for i in range(Zc.size):
            e = [0] * Zc.size
            e[i] = 1
            row.append(c.coeff(e))
        out.append(row)
    return out


# transport of maps under recentering ------------------------------------------

def recenter_map(H: FormalMap, p, order: int | None = None):
    """The map H written in normal coordinates centered at p and H(p).

    Returns (H_new, source_recentering, target_recentering).
    """
    S, T = H.source, H.target
    if not (S.polynomial and T.polynomial and H.exact):
        raise MapError("recentering a map needs polynomial manifolds and a polynomial map")
    t = order if order is not None else H.order
    rs = Recentering(S, p, order=t)
    z0, w0, c0, t0 = S.split_point(p)
    Hp = [c.evaluate(z0 + w0) for c in H.components]
    Hbp = [c.evaluate(c0 + t0) for c in H.bar_components]
    rt = Recentering(T, Hp + Hbp, order=t)
    inv_Z = rs.inverse_Z()
    inv_zeta = rs.inverse_zeta()
    Zc = S.ctx["Z"]
    comp = [c.compose(inv_Z, target=Zc) for c in H.components]
    bar = [c.compose(inv_zeta, target=Zc) for c in H.bar_components]
    new = rt.forward_Z(comp)
    newb = rt.forward_zeta(bar)
    Hn = FormalMap(rs.manifold, rt.manifold, new, order=t, bar_components=newb)
    return Hn, rs, rt
