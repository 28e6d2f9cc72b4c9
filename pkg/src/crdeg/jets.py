"""Symbolic jet variables and vector fields acting on them.

A JetSpace is the variable context (z, w, chi, tau, jet blocks..., X).  Each
jet block stands for a shifted derivative V = d^beta F - c of one of

    bar  : Hbar(zeta), derivatives in zeta = (chi, tau)
    edge : H(0, tau), derivatives of H in (z, w), evaluated at z = 0, w = tau
    Zjet : H(Z), derivatives in Z = (z, w)

with c the value at 0.  Vector fields on (Z, zeta) act on such expressions
through the chain rule, raising beta by one in the direction of the field.
"""
from __future__ import annotations

from typing import Mapping, Sequence

from .linalg import inverse
from .manifold import NormalManifold
from .series import (ONE, ZERO, GaussianRational, SeriesError, TruncatedSeries, VariableBlocks,
                     multiindices)

FAMILIES = ("bar", "edge", "Zjet")


class JetError(SeriesError):
    pass


def jet_block(fam, beta):
    return f"{fam}[{','.join(map(str, beta))}]"


def derivative(s: TruncatedSeries, beta, start=0) -> TruncatedSeries:
    for i, b in enumerate(beta):
        for _ in range(b):
            s = s.differentiate(start + i)
    return s


class JetSpace:
    def __init__(self, M: NormalManifold, Np: int, families: Mapping[str, int],
                 unknowns: bool = False, order: int = 8):
        self.M = M
        self.Np = Np
        self.order = order
        n, d, N = M.n, M.d, M.N
        self.families = {f: families[f] for f in FAMILIES if f in families}
        blocks = [("z", n), ("w", d), ("chi", n), ("tau", d)]
        self.betas = {}
        for fam, k in self.families.items():
            self.betas[fam] = multiindices(N, k)
            blocks += [(jet_block(fam, b), Np) for b in self.betas[fam]]
        self.unknowns = unknowns
        if unknowns:
            blocks.append(("X", Np))
        self.vars = VariableBlocks(blocks)
        self.nbase = 2 * N
        self.consts = {}
        # where each base variable pushes a jet index, per family
        v = self.vars
        self._dirs = {"bar": {}, "edge": {}, "Zjet": {}}
        for k in range(n):
            self._dirs["bar"][v.index("chi", k)] = k
            self._dirs["Zjet"][v.index("z", k)] = k
        for j in range(d):
            self._dirs["bar"][v.index("tau", j)] = n + j
            self._dirs["Zjet"][v.index("w", j)] = n + j
            self._dirs["edge"][v.index("tau", j)] = n + j
        self._jet_of = {}
        for fam in self.families:
            for b in self.betas[fam]:
                for m in range(Np):
                    self._jet_of[v.index(jet_block(fam, b), m)] = (fam, b, m)

    # variables -------------------------------------------------------------
    def var(self, block, i=0):
        return TruncatedSeries.variable(self.vars, self.order, block, i)

    def base(self, i):
        return TruncatedSeries.variable(self.vars, self.order, i)

    def X(self, m):
        return self.var("X", m)

    def has_jet(self, fam, beta):
        return fam in self.families and sum(beta) <= self.families[fam]

    def jet(self, fam, beta, m):
        """The un-shifted jet d^beta F_m = V + c."""
        beta = tuple(beta)
        if not self.has_jet(fam, beta):
            raise JetError(f"jet {jet_block(fam, beta)} is outside this space")
        c = self.consts.get((fam, beta))
        if c is None:
            raise JetError(f"no stored value for {jet_block(fam, beta)}")
        return self.var(jet_block(fam, beta), m) + c[m]

    def lift(self, s: TruncatedSeries) -> TruncatedSeries:
        """A series in (z, w, chi, tau) or (z, w, chi) viewed in this space."""
        return s.embed(self.vars, list(range(s.vars.size)))

    # constants ---------------------------------------------------------------
    def set_constants(self, consts: Mapping):
        self.consts = {k: [GaussianRational.coerce(x) for x in v] for k, v in consts.items()}

    def constants_from_map(self, H) -> dict:
        out = {}
        for fam in self.families:
            comps = H.bar_components if fam == "bar" else H.components
            for b in self.betas[fam]:
                out[(fam, b)] = [derivative(c, b).constant_term() for c in comps]
        self.consts = out
        return out

    # chain rule ----------------------------------------------------------------
    def used(self, F: TruncatedSeries) -> set:
        V = self.vars.size
        found = set()
        for k in F._t:
            for i in range(V):
                if (k >> (8 * i)) & 0xFF:
                    found.add(i)
        return found

    def apply_field(self, F: TruncatedSeries, coeffs: Mapping[int, TruncatedSeries]) -> TruncatedSeries:
        """sum_i a_i d/d(base_i), extended to the jet variables."""
        used = self.used(F)
        res = TruncatedSeries.zero(self.vars, F.order, exact=F.exact)
        for i, a in coeffs.items():
            if i in used:
                res = res + a * F.differentiate(i)
        touches_Z = any(i < self.M.N for i in coeffs)
        for idx in sorted(used):
            if idx < self.nbase:
                continue
            info = self._jet_of.get(idx)
            if info is None:
                if touches_Z:
                    raise JetError("field with Z components applied to an expression in X")
                continue
            fam, beta, m = info
            inc = None
            for i, a in coeffs.items():
                k = self._dirs[fam].get(i)
                if k is None:
                    continue
                b2 = tuple(e + (1 if j == k else 0) for j, e in enumerate(beta))
                term = a * self.jet(fam, b2, m)
                inc = term if inc is None else inc + term
            if inc is not None:
                res = res + F.differentiate(idx) * inc
        return res

    # the standard fields ---------------------------------------------------------
    def L(self, k):
        """CR field L_k = d/dchi_k + sum_j R_{j,chi_k} d/dtau_j."""
        M = self.M
        co = {self.vars.index("chi", k): TruncatedSeries.one(self.vars, self.order)}
        for j, c in enumerate(M.cr_coefficients[k]):
            co[self.vars.index("tau", j)] = self.lift(c)
        return co

    def Lbar(self, k):
        """Anti-CR field d/dz_k + sum_j Q_{j,z_k} d/dw_j (tangent in the Z variables)."""
        M = self.M
        full = M.ctx["full"]
        co = {self.vars.index("z", k): TruncatedSeries.one(self.vars, self.order)}
        for j, q in enumerate(M.Q_full):
            co[self.vars.index("w", j)] = self.lift(q.differentiate(full.index("z", k)))
        return co

    def S(self, j):
        """d/dZ_j - rho_{Z_j} (rho_tau)^{-1} d/dtau, tangent to the complexification."""
        M = self.M
        gens = M.generators()
        full = M.ctx["full"]
        A = [[g.differentiate(full.index("tau", k)) for k in range(M.d)] for g in gens]
        Ainv = series_matrix_inverse(A)
        rz = [g.differentiate(j) for g in gens]
        co = {j: TruncatedSeries.one(self.vars, self.order)}
        for k in range(M.d):
            c = sum((Ainv[k][l] * rz[l] for l in range(M.d)),
                    TruncatedSeries.zero(full, self.order))
            if not c.is_zero():
                co[self.vars.index("tau", k)] = self.lift(-c)
        return co

    def cr_power(self, F, alpha):
        """L^alpha F = L_1^a1 ... L_n^an F."""
        return _power(self, F, alpha, self.L)

    def s_power(self, F, alpha):
        return _power(self, F, alpha, self.S)

    # substitution of actual jets -----------------------------------------------------
    def jet_values(self, H, target: VariableBlocks | None = None) -> dict:
        """Series for each jet variable: d^beta F(.) - c in the full source context."""
        M = self.M
        full = target or M.ctx["full"]
        Zi = list(full.indices("z")) + list(full.indices("w"))
        zi = list(full.indices("chi")) + list(full.indices("tau"))
        o = max(H.order, 1)
        edge_img = ([TruncatedSeries.zero(full, o) for _ in range(M.n)]
                    + [TruncatedSeries.variable(full, o, "tau", j) for j in range(M.d)])
        out = {}
        for fam in self.families:
            for b in self.betas[fam]:
                c = self.consts[(fam, b)]
                if fam == "bar":
                    vals = [derivative(s, b).embed(full, zi) for s in H.bar_components]
                elif fam == "Zjet":
                    vals = [derivative(s, b).embed(full, Zi) for s in H.components]
                else:
                    vals = [derivative(s, b).compose(edge_img, target=full) for s in H.components]
                for m in range(self.Np):
                    out[self.vars.index(jet_block(fam, b), m)] = vals[m] - c[m]
        return out

    def substitute_jets(self, F: TruncatedSeries, H, X=None) -> TruncatedSeries:
        """F(Z, zeta, jets of H, X) in the full source context."""
        M = self.M
        full = M.ctx["full"]
        vals = self.jet_values(H)
        o = max(F.order, 1)
        images = [TruncatedSeries.variable(full, o, i) for i in range(self.nbase)]
        for idx in range(self.nbase, F.vars.size):
            if idx in vals:
                images.append(vals[idx])
            elif X is not None:
                images.append(X[idx - self.vars.offset("X")])
            else:
                images.append(TruncatedSeries.zero(full, o))
        return F.compose(images, target=full)


def _power(space, F, alpha, field):
    for k in reversed(range(len(alpha))):
        co = None
        for _ in range(alpha[k]):
            co = co or field(k)
            F = space.apply_field(F, co)
    return F


def series_matrix_inverse(A: Sequence[Sequence[TruncatedSeries]]):
    """Inverse of a matrix of series with invertible constant part (Neumann series)."""
    n = len(A)
    if n == 0:
        return []
    vars_ = A[0][0].vars
    order = min(a.order for row in A for a in row)
    A0 = [[a.constant_term() for a in row] for row in A]
    B = inverse(A0)
    zero = TruncatedSeries.zero(vars_, order)
    E = [[sum((TruncatedSeries.constant(vars_, order, B[i][k]) * (A[k][j] - A0[k][j])
               for k in range(n)), zero) for j in range(n)] for i in range(n)]
    # (I + E)^{-1} = sum (-E)^p, E has valuation >= 1
    term = [[TruncatedSeries.constant(vars_, order, ONE if i == j else ZERO) for j in range(n)]
            for i in range(n)]
    total = [row[:] for row in term]
    for _ in range(order):
        term = [[-sum((term[i][k] * E[k][j] for k in range(n)), zero) for j in range(n)]
                for i in range(n)]
        if all(t.is_zero() for row in term for t in row):
            break
        total = [[total[i][j] + term[i][j] for j in range(n)] for i in range(n)]
    return [[sum((total[i][k] * B[k][j] for k in range(n)), zero) for j in range(n)]
            for i in range(n)]
