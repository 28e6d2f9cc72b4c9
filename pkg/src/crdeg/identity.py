"""Basic identities: H(Z) expressed modulo I through zeta-jets of Hbar.

For a k0-nondegenerate map the N' equations

    Phi_j = L^{alpha_j} rho'_{l_j}(X, jets of Hbar) = 0

are solved for X by the implicit function theorem; the solution Psi gives
H(Z) = Psi(Z, zeta, jets of Hbar(zeta)) on the complexification.  Applying the
tangent fields S_j gives the same for the derivatives of H, and substituting
along Segre sets propagates jets.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .degeneracy import DegeneracyReport, analyze
from .jets import JetError, JetSpace, derivative, jet_block
from .linalg import SingularMatrixError, det, independent_rows
from .maps import FormalMap, check_maps_into, target_generators, transversality_check, levi_data
from .segre import _conj_shift, finite_type_test, segre_map
from .series import (PrecisionError, SeriesVector, TruncatedSeries, grlex_key,
                     implicit_solve, multiindices)


class IdentityError(ValueError):
    pass


@dataclass
class BasicIdentityCertificate:
    kind: str
    k0: int
    choices: list
    det0: object
    jets: dict
    Psi: SeriesVector
    space: JetSpace
    order: int
    residuals: list = field(default_factory=list)
    residual_zero: bool = False
    extras: dict = field(default_factory=dict)
    _derived: dict = field(default_factory=dict, repr=False)

    @property
    def M(self):
        return self.space.M

    def to_json(self) -> dict:
        jets = []
        for (fam, beta), vals in sorted(self.jets.items(), key=lambda kv: (kv[0][0], grlex_key(kv[0][1]))):
            jets.append({"family": fam, "beta": list(beta), "values": [str(v) for v in vals]})
        out = {"kind": self.kind, "order": self.order, "k0": self.k0,
               "choices": [{"alpha": list(a), "l": l} for a, l in self.choices],
               "det": str(self.det0), "jets": jets,
               "Psi": [p.to_literal() for p in self.Psi],
               "residual_zero": self.residual_zero}
        for k, v in self.extras.items():
            out[k] = v
        return out

    def serialize(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _target_in_space(space, gen, Xs, ys):
    """Compose a target generator (Z', zeta') with the images Xs, ys."""
    return gen.compose(list(Xs) + list(ys), target=space.vars)


def _residual(space, Psi, H, comps):
    """comps(Z) - Psi(Z, zeta, jets) reduced modulo I."""
    M = space.M
    full = M.ctx["full"]
    Zi = list(full.indices("z")) + list(full.indices("w"))
    out = []
    for p, c in zip(Psi, comps):
        lhs = c.embed(full, Zi)
        rhs = space.substitute_jets(p, H)
        out.append(M.ideal_reduce(lhs - rhs))
    return out


def basic_identity(H: FormalMap, report: DegeneracyReport | None = None,
                   order: int | None = None) -> BasicIdentityCertificate:
    S, T = H.source, H.target
    if report is None:
        report = analyze(H)[0]
    if report.s != 0:
        raise IdentityError(f"map has s = {report.s} > 0: not k0-nondegenerate, "
                            "use basic_identity_1deg for the N' = N+1 case")
    k0 = report.k0
    t = order if order is not None else H.order
    if t < 2 * k0 + 2:
        raise PrecisionError(f"working order {t} < 2 k0 + 2 = {2 * k0 + 2}")
    Np = T.N
    space = JetSpace(S, Np, {"bar": k0}, unknowns=True, order=t)
    jets = space.constants_from_map(H)
    return _nondeg_from_jets(S, T, space, jets, k0, t, H)


def _nondeg_from_jets(S, T, space, jets, k0, t, H=None):
    Np = T.N
    Xs = [space.X(m) for m in range(Np)]
    ys = [space.jet("bar", (0,) * S.N, m) for m in range(Np)]
    base = [_target_in_space(space, g, Xs, ys) for g in target_generators(T)]
    xi = list(space.vars.indices("X"))
    labels, exprs, consts = [], [], []
    cache = {}
    for alpha in multiindices(S.n, k0):
        for l, g in enumerate(base):
            if sum(alpha) == 0:
                F = g
            else:
                k = next(i for i, a in enumerate(alpha) if a)
                parent = tuple(a - (1 if i == k else 0) for i, a in enumerate(alpha))
                F = space.apply_field(cache[(parent, l)], space.L(k))
            cache[(alpha, l)] = F
            labels.append((alpha, l))
            exprs.append(F)
            consts.append([F.differentiate(i).constant_term() for i in xi])
    chosen = independent_rows(consts)
    if len(chosen) < Np:
        raise IdentityError("no valid multiindex choice: the rows at 0 do not span")
    chosen = chosen[:Np]
    d0 = det([consts[i] for i in chosen])
    Phi = [exprs[i] for i in chosen]
    try:
        Psi = implicit_solve(Phi, Np, order=t - k0)
    except SingularMatrixError:
        raise IdentityError("internal inconsistency: singular system although s = 0") from None
    cert = BasicIdentityCertificate("nondeg", k0, [labels[i] for i in chosen], d0, jets, Psi,
                                    space, t - k0)
    cert.extras["source"] = S.to_json()
    cert.extras["target"] = T.to_json()
    if H is not None:
        cert.residuals = _residual(space, Psi, H, H.components)
        cert.residual_zero = all(r.is_zero() for r in cert.residuals)
    return cert


# derivatives ------------------------------------------------------------------

def _extended_space(cert, extra):
    old = cert.space
    fams = {f: k + extra for f, k in old.families.items()}
    sp = JetSpace(old.M, old.Np, fams, unknowns=False, order=old.order)
    return sp


def _needed_consts(cert, space, H):
    missing = [(f, b) for f in space.families for b in space.betas[f] if (f, b) not in cert.jets]
    if missing and H is None:
        raise JetError(f"insufficient jets: {jet_block(*missing[0])} not stored")
    if H is not None:
        space.constants_from_map(H)
    else:
        space.set_constants(cert.jets)


def derivative_identities(cert: BasicIdentityCertificate, alpha, H: FormalMap | None = None):
    """Psi_alpha with d^alpha H(Z) = Psi_alpha(Z, zeta, jets) modulo I.

    alpha is a multiindex on Z = (z, w).  Jets beyond those in the
    certificate are read from H when needed.
    """
    alpha = tuple(alpha)
    key = alpha
    if key in cert._derived:
        return cert._derived[key]
    M = cert.M
    if len(alpha) != M.N:
        raise ValueError(f"multiindex must have length N = {M.N}")
    if sum(alpha) > cert.order:
        raise PrecisionError("order exhausted by derivatives")
    space = _extended_space(cert, sum(alpha))
    _needed_consts(cert, space, H)
    if sum(alpha) == 0:
        Ps = [p.embed_blocks(space.vars) for p in cert.Psi]
    else:
        k = next(i for i, a in enumerate(alpha) if a)
        parent = tuple(a - (1 if i == k else 0) for i, a in enumerate(alpha))
        prev = derivative_identities(cert, parent, H)
        co = None
        Ps = []
        for p in prev.Psi:
            p = p.embed_blocks(space.vars)
            co = co or space.S(k)
            Ps.append(space.apply_field(p, co))
    res = DerivedIdentity(alpha, SeriesVector(Ps, vars=space.vars), space)
    if H is not None:
        comps = [derivative(c, alpha) for c in H.components]
        res.residuals = _residual(space, res.Psi, H, comps)
        res.residual_zero = all(r.is_zero() for r in res.residuals)
    cert._derived[key] = res
    return res


@dataclass
class DerivedIdentity:
    alpha: tuple
    Psi: SeriesVector
    space: JetSpace
    residuals: list = field(default_factory=list)
    residual_zero: bool | None = None


# Segre propagation ----------------------------------------------------------------

def upsilon_recursion(cert: BasicIdentityCertificate, k: int, alpha, H: FormalMap | None = None,
                      memo: dict | None = None):
    """Upsilon_{k,alpha}(x0, ..., xk) with d^alpha H(v^{k+1}) = Upsilon."""
    if cert.kind != "nondeg":
        raise IdentityError("upsilon_recursion needs a nondegenerate certificate")
    alpha = tuple(alpha)
    memo = {} if memo is None else memo
    key = (k, alpha)
    if key in memo:
        return memo[key]
    M = cert.M
    D = derivative_identities(cert, alpha, H)
    sp = D.space
    t = min(p.order for p in D.Psi)
    v = segre_map(M, k + 1, order=t)
    ctx = v.vars
    o = max(t, 1)
    images = list(v.components)
    if k == 0:
        images += [TruncatedSeries.zero(ctx, o) for _ in range(M.N)]
    else:
        prev = segre_map(M, k, order=t)
        images += _conj_shift(prev.components, prev.vars, ctx)
    fam = "bar"
    for beta in sp.betas[fam]:
        c = sp.consts[(fam, beta)]
        if k == 0:
            vals = [TruncatedSeries.zero(ctx, o) for _ in range(sp.Np)]
        else:
            up = upsilon_recursion(cert, k - 1, beta, H, memo)
            prev_ctx = up[0].vars
            vals = [u - c[m] for m, u in enumerate(_conj_shift(list(up), prev_ctx, ctx))]
        images += vals
    out = SeriesVector([p.compose(images, target=ctx) for p in D.Psi], vars=ctx)
    memo[key] = out
    return out


def upsilon_check(cert, H, k, alpha, memo=None):
    """d^alpha H(v^{k+1}) - Upsilon_{k,alpha}, compared to the common order."""
    U = upsilon_recursion(cert, k, alpha, H, memo)
    ctx = U[0].vars
    t = min(u.order for u in U)
    v = segre_map(cert.M, k + 1, order=t)
    diffs = []
    for u, c in zip(U, H.components):
        lhs = derivative(c, alpha).compose(list(v.components), target=ctx)
        o = min(lhs.order if not lhs.exact else t, u.order)
        diffs.append(lhs.truncate(o) - u.truncate(o))
    return all(d.is_zero() for d in diffs), diffs, t


# the constantly 1-degenerate case N' = N + 1 ----------------------------------------

def _check_1deg_hypotheses(H):
    S, T = H.source, H.target
    if S.d != 1 or T.d != 1:
        raise IdentityError("needs hypersurfaces: d = d' = 1")
    if T.N != S.N + 1:
        raise IdentityError(f"needs N' = N + 1, got N = {S.N}, N' = {T.N}")
    for name, M in (("source", S), ("target", T)):
        ld = levi_data(M)
        if not ld.nondegenerate:
            raise IdentityError(f"{name} Levi form is degenerate")
        if not ld.epsilon_normalized:
            raise IdentityError(f"{name} Levi form is not diagonal with entries +-1; "
                                "supply coordinates in which it is (no automatic normalization)")
    if not transversality_check(H).transversal:
        raise IdentityError("H is not transversal: g_w(0) = 0")
    if not check_maps_into(H).verdict:
        raise IdentityError("H does not map M into M'")


def _mirror_generator(T):
    """tau' - R'(chi', z', w'), the generator solved for tau'."""
    full = T.ctx["full"]
    R = T.R[0].embed(full, list(range(T.ctx["red"].size)))
    return T.var("tau", 0, "full", order=max(R.order, 1)) - R


def _zeta_gradient(T, g):
    full = T.ctx["full"]
    return [g.differentiate(full.index("chi", m)) for m in range(T.n)] + \
        [g.differentiate(full.index("tau", 0))]


def basic_identity_1deg(H: FormalMap, order: int | None = None, report=None,
                        probe=None) -> BasicIdentityCertificate:
    from .degeneracy import pivot_columns, series_det
    _check_1deg_hypotheses(H)
    S, T = H.source, H.target
    n, Np = S.n, T.N
    if report is None:
        report, probe, _, _ = analyze(H)
    if report.s != 1:
        raise IdentityError(f"H is not 1-degenerate at 0 (s = {report.s})")
    if probe is not None and probe.verdict == "non_constant":
        raise IdentityError("degeneracy of H is not constant")
    t = order if order is not None else H.order
    space = JetSpace(S, Np, {"bar": 1, "edge": 1}, unknowns=True, order=t)
    jets = space.constants_from_map(H)
    mir = JetSpace(S, Np, {"bar": 0, "Zjet": 1}, order=t)
    mir.constants_from_map(H)
    zero = (0,) * S.N

    # rows of the mirror module: L-bar derivatives of the zeta'-gradient
    grad = _zeta_gradient(T, _mirror_generator(T))
    img = [mir.jet("Zjet", zero, m) for m in range(Np)] + [mir.jet("bar", zero, m) for m in range(Np)]
    row0 = [g.compose(img, target=mir.vars) for g in grad]
    rows = [row0] + [[mir.apply_field(e, mir.Lbar(i)) for e in row0] for i in range(n)]
    at0 = [[e.constant_term() for e in r] for r in rows]
    if len(independent_rows(at0)) != n + 1:
        raise IdentityError("mirror rows are dependent at 0: H is not 1-degenerate")
    piv = pivot_columns(at0, Np)
    extra = [c for c in range(Np) if c not in piv]
    kcol = extra[0]

    # restrict to z = 0, w = tau and move Z-jets to edge jets
    o = max(t, 1)
    images = []
    for i in range(mir.vars.size):
        if i < S.n:
            images.append(TruncatedSeries.zero(space.vars, o))
        elif i < S.N:
            images.append(space.var("tau", i - S.n))
        elif i < mir.nbase:
            images.append(space.base(i))
        else:
            fam, beta, m = mir._jet_of[i]
            fam = "edge" if fam == "Zjet" else fam
            images.append(space.var(jet_block(fam, beta), m))
    rrows = [[e.compose(images, target=space.vars) for e in r] for r in rows]
    Dfull = series_det([[r[c] for c in piv] for r in rrows])
    Dm = {}
    for m in piv:
        cols = [kcol if c == m else c for c in piv]
        Dm[m] = series_det([[r[c] for c in cols] for r in rrows])

    Xs = [space.X(m) for m in range(Np)]
    ys = [space.jet("bar", zero, m) for m in range(Np)]
    phi = [g.compose(Xs + ys, target=space.vars) for g in grad]
    Upsilon = Dfull * phi[kcol] - sum((Dm[m] * phi[m] for m in piv),
                                      TruncatedSeries.zero(space.vars, t))
    rho = _target_in_space(space, target_generators(T)[0], Xs, ys)
    Phis = [space.apply_field(rho, space.L(j)) for j in range(n)]
    system = Phis + [Upsilon, rho]
    xi = list(space.vars.indices("X"))
    J0 = [[f.differentiate(i).constant_term() for i in xi] for f in system]
    D = det(J0)

    # structure and the determinant identity
    last = xi[-1]
    absent = all(not f.uses_variable(last) for f in Phis)
    ups_last = J0[n][Np - 1]
    gw = H.jacobian_at_0()[T.n][S.ctx["Z"].index("w", 0)]
    B = levi_data(S).B
    target_value = gw ** n * det(B)
    lp = levi_pullback_check_value(H)
    if D == 0:
        raise IdentityError("D = 0: inconsistent hypotheses")
    try:
        Psi = implicit_solve(system, Np, order=min(f.order for f in system if not f.exact))
    except SingularMatrixError:
        raise IdentityError("singular system although D != 0") from None

    # the n x n Levi-type determinants at 0, with R' written positively
    Lrows = [[-r[c].constant_term() for c in range(Np)] for r in rrows[1:]]
    chi_piv = [c for c in piv if c < T.n]
    dbar0 = det([[r[c] for c in chi_piv] for r in Lrows])
    dbar_m0 = {m: det([[r[kcol if c == m else c] for c in chi_piv] for r in Lrows])
               for m in chi_piv}
    cert = BasicIdentityCertificate("1deg", 1, [((0,) * n, 0)] + [(tuple(int(i == j) for i in range(n)), 0)
                                                                  for j in range(n)],
                                    D, jets, Psi, space, Psi.order)
    cert.extras.update({
        "D": str(D), "g_w0": str(gw), "levi_det": str(det(B)),
        "D_identity": D == target_value or D == -target_value,
        "cauchy_binet": lp == target_value,
        "Xlast_absent_from_Phi": absent, "Upsilon_Xlast_0": str(ups_last),
        "Delta_bar_0": str(dbar0), "Delta_bar_m_0": {str(m): str(v) for m, v in dbar_m0.items()},
        "pivot_columns": piv, "extra_column": kcol,
        "source": S.to_json(), "target": T.to_json(),
    })
    cert.extras["upsilon_in_ideal"] = space.M.ideal_reduce(
        space.substitute_jets(Upsilon, H, X=H.on_full[:Np])).is_zero()
    cert.residuals = _residual(space, Psi, H, H.components)
    cert.residual_zero = all(r.is_zero() for r in cert.residuals)
    return cert


def levi_pullback_check_value(H):
    """det(f_z(0)^T B' conj f_z(0)), the triple product of the Levi pullback."""
    from .maps import levi_pullback_check
    return det(levi_pullback_check(H).rhs)


def upsilon_1deg(cert: BasicIdentityCertificate, alpha, H: FormalMap | None = None):
    """d^alpha H(z, Q(z, chi, 0)) as a series in (x0, x1) = (z, chi)."""
    if cert.kind != "1deg":
        raise IdentityError("upsilon_1deg needs a 1-degenerate certificate")
    alpha = tuple(alpha)
    M = cert.M
    D = derivative_identities(cert, alpha, H)
    sp = D.space
    t = min(p.order for p in D.Psi)
    c1 = segre_map(M, 1, order=t)
    c2 = segre_map(M, 2, order=t)
    ctx1, ctx2 = c1.vars, c2.vars
    o = max(t, 1)
    # jets on the first Segre set from the identity at zeta = 0
    first = {}
    for beta in sp.betas["bar"]:
        Db = derivative_identities(cert, beta, H)
        imgs = list(c1.components) + [TruncatedSeries.zero(ctx1, o) for _ in range(Db.space.vars.size - M.N)]
        first[beta] = [p.compose(imgs, target=ctx1) for p in Db.Psi]
    images = list(c2.components) + _conj_shift(list(c1.components), ctx1, ctx2)
    for fam in sp.families:
        for beta in sp.betas[fam]:
            c = sp.consts[(fam, beta)]
            if fam == "bar":
                images += [u - c[m] for m, u in enumerate(_conj_shift(first[beta], ctx1, ctx2))]
            else:
                images += [TruncatedSeries.zero(ctx2, o) for _ in range(sp.Np)]
    return SeriesVector([p.compose(images, target=ctx2) for p in D.Psi], vars=ctx2)


# jet determination ---------------------------------------------------------------------

@dataclass
class JetDeterminationResult:
    verdict: str                 # determined, jets_differ, hypothesis_failed, discrepancy
    mode: str
    threshold: int | None = None
    order: int | None = None
    first_difference: dict | None = None
    discrepancies: int = 0
    hypotheses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"verdict": self.verdict, "mode": self.mode, "threshold": self.threshold,
                "order": self.order, "first_difference": self.first_difference,
                "discrepancies": self.discrepancies, "hypotheses": self.hypotheses,
                "notes": self.notes}


def first_difference(H1: FormalMap, H2: FormalMap, max_degree: int):
    """First coefficient (by degree, then component, then grlex) where H1 and H2 differ."""
    Zc = H1.source.ctx["Z"]
    for deg in range(max_degree + 1):
        for m, (a, b) in enumerate(zip(H1.components, H2.components)):
            for e in multiindices(Zc.size, deg):
                if sum(e) != deg:
                    continue
                ca, cb = a.coeff(e), b.coeff(e)
                if ca != cb:
                    return {"degree": deg, "component": m, "exponent": list(e),
                            "values": [str(ca), str(cb)]}
    return None


def jet_determination_check(H1: FormalMap, H2: FormalMap, mode: str = "nondeg",
                            levels: int | None = None, trials: int = 8, seed: int = 0):
    if mode not in ("nondeg", "one_deg"):
        raise ValueError(f"unknown mode {mode!r}")
    S = H1.source
    t = min(H1.order, H2.order)
    res = JetDeterminationResult("hypothesis_failed", mode, order=t)
    for name, H in (("H", H1), ("H'", H2)):
        ok = check_maps_into(H).verdict
        res.hypotheses[f"{name} maps M into M'"] = ok
        if not ok:
            res.notes.append(f"{name} rejected: does not map M into M' to order {t}")
            return res
    ft = finite_type_test(S, levels or S.d + 1, trials=trials, seed=seed, zero_point=False)
    res.hypotheses["source finite type"] = ft.verdict == "FINITE_TYPE"
    if ft.verdict != "FINITE_TYPE":
        res.notes.append(f"source finite type test: {ft.verdict}")
        return res
    k1 = ft.level
    certs = []
    try:
        for name, H in (("H", H1), ("H'", H2)):
            if mode == "nondeg":
                rep = analyze(H)[0]
                res.hypotheses[f"{name} k0-nondegenerate"] = rep.s == 0
                if rep.s != 0:
                    return res
                certs.append(basic_identity(H, rep))
            else:
                certs.append(basic_identity_1deg(H))
                res.hypotheses[f"{name} constantly 1-degenerate, transversal"] = True
    except IdentityError as exc:
        res.notes.append(str(exc))
        return res
    if mode == "nondeg":
        k0 = max(c.k0 for c in certs)
        res.threshold = k1 * k0
    else:
        res.threshold = 2
    diff = first_difference(H1, H2, res.threshold)
    if diff is not None:
        res.verdict = "jets_differ"
        res.first_difference = diff
        return res
    # same jets: the identities coincide and reproduce both maps along Segre sets
    same = certs[0].serialize() == certs[1].serialize()
    res.notes.append(f"certificates identical: {same}")
    for H, c in zip((H1, H2), certs):
        if mode == "nondeg":
            ok, _, o = upsilon_check(c, H, k1 - 1, (0,) * S.N)
            res.notes.append(f"H(v^{k1}) = Upsilon_{k1 - 1},0 to order {o}: {ok}")
        else:
            U = upsilon_1deg(c, (0,) * S.N, H)
            v = segre_map(S, 2, order=U.order)
            ok = all((h.compose(list(v.components), target=v.vars).truncate(u.order) - u).is_zero()
                     for h, u in zip(H.components, U))
            res.notes.append(f"H(v^2) = Upsilon_0 to order {U.order}: {ok}")
        if not ok:
            res.verdict = "discrepancy"
            return res
    late = first_difference(H1, H2, t)
    if late is None:
        res.verdict = "determined"
        res.notes.append(f"determined to order {t}")
    else:
        res.verdict = "discrepancy"
        res.first_difference = late
        res.discrepancies = 1
    return res
