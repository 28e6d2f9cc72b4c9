"""Formal generic submanifolds given in normal coordinates w = Q(z, chi, tau)."""
from __future__ import annotations

from functools import cached_property
from typing import Sequence

from .linalg import SingularMatrixError
from .series import (ONE, ZERO, GaussianRational, PrecisionError, SeriesError, SeriesVector,
                     TruncatedSeries, VariableBlocks, gr, implicit_solve)


class ManifoldError(ValueError):
    pass


def contexts(n: int, d: int):
    """The variable contexts used for a manifold with CR dimension n, codimension d."""
    return {
        "Z": VariableBlocks([("z", n), ("w", d)]),
        "Q": VariableBlocks([("z", n), ("chi", n), ("tau", d)]),
        "full": VariableBlocks([("z", n), ("w", d), ("chi", n), ("tau", d)]),
        "red": VariableBlocks([("z", n), ("w", d), ("chi", n)]),
    }


class NormalManifold:
    """M = {w = Q(z, chi, tau)} with Q(z,0,tau) = Q(0,chi,tau) = tau.

    `R` is the conjugate graph: the solution tau = R(chi, z, w) of
    w = Q(z, chi, tau).  For real M it is the conjugate series Qbar; for
    non-real models it is solved for.
    """

    def __init__(self, n: int, d: int, Q: Sequence[TruncatedSeries], order: int | None = None,
                 polynomial: bool | None = None):
        self.n, self.d = int(n), int(d)
        self.N = self.n + self.d
        ctx = contexts(self.n, self.d)
        self.ctx = ctx
        Q = list(Q)
        if len(Q) != self.d:
            raise ManifoldError(f"expected {self.d} components of Q, got {len(Q)}")
        for q in Q:
            if q.vars != ctx["Q"]:
                raise ManifoldError(f"Q must live in {ctx['Q']}, got {q.vars}")
        if polynomial is None:
            polynomial = all(q.exact for q in Q)
        if order is None:
            order = min((q.order for q in Q if not q.exact), default=max(q.order for q in Q))
        self.order = int(order)
        if polynomial:
            Q = [q.with_exact(True) if q.degree() <= self.order else q for q in Q]
            self.polynomial = all(q.exact for q in Q)
        else:
            Q = [q.truncate(self.order) if not q.exact else q.truncate(self.order).with_exact(False)
                 for q in Q]
            self.polynomial = False
        self.Q = SeriesVector(Q, vars=ctx["Q"])
        self.reality = None

    def __repr__(self):
        kind = "polynomial" if self.polynomial else f"order {self.order}"
        return f"NormalManifold(n={self.n}, d={self.d}, {kind}, Q={[str(q) for q in self.Q]})"

    # basic derived objects ------------------------------------------------
    def var(self, block, i=0, ctx="full", order=None):
        return TruncatedSeries.variable(self.ctx[ctx], order if order is not None else self.order,
                                        block, i)

    @cached_property
    def Qbar(self) -> list[TruncatedSeries]:
        """Qbar(chi, z, w): conjugate coefficients, slots renamed, in the reduced context."""
        red = self.ctx["red"]
        idx = list(red.indices("chi")) + list(red.indices("z")) + list(red.indices("w"))
        return [q.conjugate().embed(red, idx) for q in self.Q]

    @cached_property
    def Q_full(self) -> list[TruncatedSeries]:
        full = self.ctx["full"]
        idx = list(full.indices("z")) + list(full.indices("chi")) + list(full.indices("tau"))
        return [q.embed(full, idx) for q in self.Q]

    def generators(self) -> list[TruncatedSeries]:
        """rho_j = w_j - Q_j(z, chi, tau) in the context (z, w, chi, tau)."""
        return [self.var("w", j) - self.Q_full[j] for j in range(self.d)]

    @cached_property
    def R(self) -> list[TruncatedSeries]:
        red = self.ctx["red"]
        # cheap path: Qbar already solves w = Q(z, chi, tau)
        qb = self.Qbar
        images = self._red_images(qb)
        try:
            ok = all((self.var("w", j, "red") - self.Q_full[j].compose(images, target=red)).is_zero()
                     for j in range(self.d))
        except PrecisionError:
            ok = False
        if ok and self.polynomial:
            return qb
        if ok:
            return [q.truncate(self.order) for q in qb]
        Phi = [q - self.var("w", j) for j, q in enumerate(self.Q_full)]
        sol = implicit_solve(Phi, self.d, order=self.order)
        return list(sol)

    def _red_images(self, taus):
        red = self.ctx["red"]
        order = max(self.order, 1)
        images = [TruncatedSeries.variable(red, order, i) for i in range(red.size)]
        return images + list(taus)

    @cached_property
    def reduction_images(self) -> list[TruncatedSeries]:
        return self._red_images(self.R)

    # ideal --------------------------------------------------------------
    def ideal_reduce(self, phi: TruncatedSeries) -> TruncatedSeries:
        """phi(z, w, chi, R(chi, z, w)); zero iff phi lies in I (to its order)."""
        if phi.vars != self.ctx["full"]:
            raise SeriesError(f"ideal_reduce expects a series in {self.ctx['full']}")
        return phi.compose(self.reduction_images, target=self.ctx["red"])

    def ideal_member(self, phi: TruncatedSeries) -> bool:
        return self.ideal_reduce(phi).is_zero()

    def check_reality(self) -> bool:
        """Reality: each conjugated generator lies in I.  Holds iff R = Qbar."""
        full = self.ctx["full"]
        verdict = True
        for j in range(self.d):
            # rhobar_j(zeta, Z) = tau_j - Qbar_j(chi, z, w)
            qb = self.Qbar[j].embed(full, list(full.indices("z")) + list(full.indices("w"))
                                    + list(full.indices("chi")))
            rb = self.var("tau", j) - qb
            r = self.ideal_reduce(rb)
            if not r.truncate(min(r.order, self.order)).is_zero():
                verdict = False
        self.reality = verdict
        return verdict

    # CR vector fields ----------------------------------------------------
    @cached_property
    def cr_coefficients(self) -> list[list[TruncatedSeries]]:
        """coef[k][j] = d R_j / d chi_k embedded in the full context."""
        red, full = self.ctx["red"], self.ctx["full"]
        emb = list(range(red.size))
        out = []
        for k in range(self.n):
            ci = red.index("chi", k)
            out.append([r.differentiate(ci).embed(full, emb) for r in self.R])
        return out

    def apply_L(self, phi: TruncatedSeries, k: int) -> TruncatedSeries:
        full = self.ctx["full"]
        res = phi.differentiate(full.index("chi", k))
        for j, c in enumerate(self.cr_coefficients[k]):
            dt = phi.differentiate(full.index("tau", j))
            if dt.is_zero():
                continue
            res = res + c * dt
        return res

    def cr_derivative(self, phi: TruncatedSeries, alpha: Sequence[int]) -> TruncatedSeries:
        """L^alpha phi = L_1^a1 ... L_n^an phi (L_n applied first)."""
        alpha = tuple(alpha)
        if len(alpha) != self.n:
            raise SeriesError("multiindex length must equal n")
        if not phi.exact and sum(alpha) > phi.order:
            raise PrecisionError("order exhausted by CR derivatives")
        out = phi
        for k in reversed(range(self.n)):
            for _ in range(alpha[k]):
                out = self.apply_L(out, k)
        return out

    def restrict_zero_chi(self, phi: TruncatedSeries) -> TruncatedSeries:
        """phi(z, w, 0, w) as a series in (z, w)."""
        Z = self.ctx["Z"]
        o = max(phi.order, 1)
        images = ([TruncatedSeries.variable(Z, o, "z", i) for i in range(self.n)]
                  + [TruncatedSeries.variable(Z, o, "w", j) for j in range(self.d)]
                  + [TruncatedSeries.zero(Z, o) for _ in range(self.n)]
                  + [TruncatedSeries.variable(Z, o, "w", j) for j in range(self.d)])
        return phi.compose(images, target=Z)

    def coefficient_extraction_check(self, phi: TruncatedSeries, alpha: Sequence[int]) -> bool:
        """alpha! * chi^alpha-coefficient of the reduced phi equals L^alpha phi at (z,w,0,w)."""
        red, Z = self.ctx["red"], self.ctx["Z"]
        lhs = self.ideal_reduce(phi)
        for k, a in enumerate(alpha):
            for _ in range(a):
                lhs = lhs.differentiate(red.index("chi", k))
        o = max(lhs.order, 1)
        images = ([TruncatedSeries.variable(Z, o, i) for i in range(self.N)]
                  + [TruncatedSeries.zero(Z, o) for _ in range(self.n)])
        lhs = lhs.compose(images, target=Z)
        rhs = self.restrict_zero_chi(self.cr_derivative(phi, alpha))
        o = min(x.order for x in (lhs, rhs))
        return lhs.truncate(o) == rhs.truncate(o)

    # points ---------------------------------------------------------------
    def on_complexification(self, p) -> bool:
        z0, w0, c0, t0 = self.split_point(p)
        if not self.polynomial:
            raise ManifoldError("membership of a point needs a polynomial manifold")
        vals = z0 + c0 + t0
        return all(q.evaluate(vals) == w for q, w in zip(self.Q, w0))

    def split_point(self, p):
        p = [gr(x) for x in p]
        n, d = self.n, self.d
        if len(p) != 2 * self.N:
            raise ManifoldError(f"point must have {2 * self.N} coordinates")
        return p[:n], p[n:n + d], p[n + d:2 * n + d], p[2 * n + d:]

    def point_from(self, z0, chi0, tau0):
        """The point (z0, Q(z0,chi0,tau0), chi0, tau0) of the complexification."""
        z0, chi0, tau0 = [gr(x) for x in z0], [gr(x) for x in chi0], [gr(x) for x in tau0]
        w0 = [q.evaluate(z0 + chi0 + tau0) for q in self.Q]
        return z0 + w0 + chi0 + tau0

    def levi_matrices(self) -> list[list[list[GaussianRational]]]:
        """B^j with B^j[a][b] = Q_j coefficient of z_a chi_b."""
        if self.order < 2 and not self.polynomial:
            raise PrecisionError("Levi terms need order >= 2")
        Qc = self.ctx["Q"]
        out = []
        for q in self.Q:
            B = []
            for a in range(self.n):
                row = []
                for b in range(self.n):
                    e = [0] * Qc.size
                    e[Qc.index("z", a)] += 1
                    e[Qc.index("chi", b)] += 1
                    row.append(q.coeff(e))
                B.append(row)
            out.append(B)
        return out

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "order": self.order, "polynomial": self.polynomial,
                "Q": [q.to_literal() for q in self.Q]}


def validate_manifold(n: int, d: int, Q: Sequence[TruncatedSeries], order: int | None = None,
                      polynomial: bool | None = None, check_reality: bool = True) -> NormalManifold:
    """Build a manifold, checking the normal form conditions."""
    M = NormalManifold(n, d, Q, order=order, polynomial=polynomial)
    if M.order < 1:
        raise ManifoldError("order must be at least 1 to state normality")
    Qc = M.ctx["Q"]
    zi, ci, ti = list(Qc.indices("z")), list(Qc.indices("chi")), list(Qc.indices("tau"))
    for j, q in enumerate(M.Q):
        for exps, c in q.items():
            zpart = any(exps[i] for i in zi)
            cpart = any(exps[i] for i in ci)
            if zpart and cpart:
                continue
            expected = ONE if (not zpart and not cpart and sum(exps) == 1 and exps[ti[j]] == 1) \
                else ZERO
            if c != expected:
                side = "Q(z,0,tau)" if not cpart else "Q(0,chi,tau)"
                raise ManifoldError(
                    f"normality fails for component {j}: {side} != tau has coefficient {c} "
                    f"at exponent {list(exps)}")
        e = [0] * Qc.size
        e[ti[j]] = 1
        if q.coeff(e) != ONE:
            raise ManifoldError(f"normality fails for component {j}: tau_{j} coefficient is {q.coeff(e)}")
    if check_reality:
        M.check_reality()
    return M


def hyperquadric_like(n: int, d: int, B, order: int = 8) -> NormalManifold:
    """Quadric w_j = tau_j + sum_ab B^j[a][b] z_a chi_b (B a list of d matrices)."""
    Qc = contexts(n, d)["Q"]
    Q = []
    for j in range(d):
        q = TruncatedSeries.variable(Qc, order, "tau", j)
        for a in range(n):
            for b in range(n):
                c = gr(B[j][a][b])
                if c:
                    q = q + (TruncatedSeries.variable(Qc, order, "z", a)
                             * TruncatedSeries.variable(Qc, order, "chi", b)).scale(c)
        Q.append(q)
    return validate_manifold(n, d, Q, order=order, polynomial=True)


# recentering -----------------------------------------------------------------

class Recentering:
    """Normal coordinates of M centered at a point p of its complexification.

    Z side:    (z, w) = (z0 + zt, w0 + Q1(zt, 0, wt))
    zeta side: (chi, tau) = (chi0 + ct, tau0 + K(ct, tt))
    and the new manifold is wt = Qt(zt, ct, tt).
    """

    def __init__(self, M: NormalManifold, p, order: int | None = None):
        if not M.polynomial:
            raise ManifoldError("recentering requires a polynomial manifold")
        if not M.on_complexification(p):
            raise ManifoldError("point does not lie on the complexified manifold")
        self.M = M
        self.p = [gr(x) for x in p]
        z0, w0, c0, t0 = M.split_point(p)
        n, d = M.n, M.d
        t = order if order is not None else M.order
        self.order = t
        ctx = M.ctx
        Qc = ctx["Q"]
        # Q1(z, chi, tau) = Q(z0 + z, chi0 + chi, tau0 + tau) - w0
        shift = [z0[i] for i in range(n)] + [c0[i] for i in range(n)] + [t0[j] for j in range(d)]
        imgs = [TruncatedSeries.variable(Qc, t, i) + shift[i] for i in range(Qc.size)]
        self.Q1 = [(q.compose(imgs, target=Qc) - w0[j]) for j, q in enumerate(M.Q)]
        # h(z, w): Q1(z, 0, h) = w, solved in context (z, w, T)
        ZT = VariableBlocks([("z", n), ("w", d), ("T", d)])
        img = ([TruncatedSeries.variable(ZT, t, "z", i) for i in range(n)]
               + [TruncatedSeries.zero(ZT, t) for _ in range(n)]
               + [TruncatedSeries.variable(ZT, t, "T", j) for j in range(d)])
        Phi = [q.compose(img, target=ZT) - TruncatedSeries.variable(ZT, t, "w", j)
               for j, q in enumerate(self.Q1)]
        Phi = [f.truncate(t) for f in Phi]
        try:
            self.h = list(implicit_solve(Phi, d, order=t))
        except SingularMatrixError:
            raise ManifoldError("Q is not solvable for tau at this point") from None
        # k(chi, tau) = h(0, Q1(0, chi, tau)); K = tau-inverse of k
        CT = VariableBlocks([("chi", n), ("tau", d)])
        img = ([TruncatedSeries.zero(CT, t) for _ in range(n)]
               + [TruncatedSeries.variable(CT, t, "chi", i) for i in range(n)]
               + [TruncatedSeries.variable(CT, t, "tau", j) for j in range(d)])
        q1_0 = [q.compose(img, target=CT).truncate(t) for q in self.Q1]
        img = [TruncatedSeries.zero(CT, t) for _ in range(n)] + q1_0
        self.k = [hj.compose(img, target=CT) for hj in self.h]
        CTT = VariableBlocks([("chi", n), ("tau", d), ("T", d)])
        img = ([TruncatedSeries.variable(CTT, t, "chi", i) for i in range(n)]
               + [TruncatedSeries.variable(CTT, t, "T", j) for j in range(d)])
        Phi = [kj.compose(img, target=CTT) - TruncatedSeries.variable(CTT, t, "tau", j)
               for j, kj in enumerate(self.k)]
        self.K = list(implicit_solve(Phi, d, order=t))
        # Qt(z, chi, tt) = h(z, Q1(z, chi, K(chi, tt)))
        img = ([TruncatedSeries.variable(Qc, t, "z", i) for i in range(n)]
               + [TruncatedSeries.variable(Qc, t, "chi", i) for i in range(n)]
               + [kk.embed(Qc, list(Qc.indices("chi")) + list(Qc.indices("tau"))) for kk in self.K])
        inner = [q.compose(img, target=Qc) for q in self.Q1]
        img = [TruncatedSeries.variable(Qc, t, "z", i) for i in range(n)] + inner
        Qt = [hj.compose(img, target=Qc) for hj in self.h]
        self.manifold = validate_manifold(n, d, Qt, order=t, polynomial=False, check_reality=False)
        self._z0, self._w0, self._c0, self._t0 = z0, w0, c0, t0

    def inverse_Z(self) -> list[TruncatedSeries]:
        """Old (z, w) in terms of new (zt, wt): components minus nothing (includes constants)."""
        n, d, t = self.M.n, self.M.d, self.order
        Zc = self.M.ctx["Z"]
        zs = [TruncatedSeries.variable(Zc, t, "z", i) for i in range(n)]
        img = zs + [TruncatedSeries.zero(Zc, t) for _ in range(n)] + \
            [TruncatedSeries.variable(Zc, t, "w", j) for j in range(d)]
        ws = [q.compose(img, target=Zc) for q in self.Q1]
        return [zs[i] + self._z0[i] for i in range(n)] + [ws[j] + self._w0[j] for j in range(d)]

    def inverse_zeta(self) -> list[TruncatedSeries]:
        """Old (chi, tau) in terms of new (ct, tt), written in the (z, w) slot context."""
        n, d, t = self.M.n, self.M.d, self.order
        Zc = self.M.ctx["Z"]
        cs = [TruncatedSeries.variable(Zc, t, "z", i) for i in range(n)]
        ts = [kk.embed(Zc, list(range(n + d))) for kk in self.K]
        return [cs[i] + self._c0[i] for i in range(n)] + [ts[j] + self._t0[j] for j in range(d)]

    def forward_Z(self, H: Sequence[TruncatedSeries]) -> list[TruncatedSeries]:
        """Apply the new-coordinate map to series H = (z', w') (values in old coordinates).

        H must vanish at the recentering point after the shift, i.e. H(.)-p has zero
        constant term.
        """
        n, d = self.M.n, self.M.d
        z1 = [H[i] - self._z0[i] for i in range(n)]
        w1 = [H[n + j] - self._w0[j] for j in range(d)]
        for s in z1 + w1:
            if s.constant_term():
                raise ManifoldError("series does not pass through the recentering point")
        wt = [hj.compose(z1 + w1) for hj in self.h]
        return z1 + wt

    @cached_property
    def kinv(self):
        """tt as a function of (ct, tau1): the tau-inverse of K, which is k itself."""
        return self.k

    def forward_zeta(self, Hb: Sequence[TruncatedSeries]) -> list[TruncatedSeries]:
        n, d = self.M.n, self.M.d
        c1 = [Hb[i] - self._c0[i] for i in range(n)]
        t1 = [Hb[n + j] - self._t0[j] for j in range(d)]
        for s in c1 + t1:
            if s.constant_term():
                raise ManifoldError("series does not pass through the recentering point")
        tt = [kj.compose(c1 + t1) for kj in self.k]
        return c1 + tt


def recenter_normalize(M: NormalManifold, p, order: int | None = None) -> NormalManifold:
    return Recentering(M, p, order=order).manifold
