"""The (k0, s)-degeneracy of a formal map and the tools around it.

Rows are stored reduced modulo I, i.e. as series in (z, w, chi).  On the
complexification the CR fields L_k become plain chi_k derivatives, so
L^alpha of a pulled back gradient is d^alpha/dchi^alpha of its reduction.
"""
from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .linalg import det, independent_rows, nullspace, rank
from .manifold import NormalManifold
from .maps import (FormalMap, check_maps_into, recenter_map, target_generators,
                   transversality_check)
from .series import ONE, ZERO, GaussianRational, PrecisionError, TruncatedSeries, multiindices

log = logging.getLogger(__name__)


class DegeneracyError(ValueError):
    pass


@dataclass
class DegeneracyRows:
    H: FormalMap
    k_max: int
    labels: list          # (alpha, j) in graded-lex order of alpha, then j
    rows: list            # list of N'-lists of series in (z, w, chi)
    constants: list       # list of N'-lists of GaussianRational

    def level(self, k):
        return [i for i, (a, _) in enumerate(self.labels) if sum(a) <= k]


def pulled_back_gradients(H: FormalMap) -> list[list[TruncatedSeries]]:
    """grad_Z' rho'_j (H, Hbar) reduced modulo I, for each target generator j."""
    T = H.target
    Np = T.N
    out = []
    for g in target_generators(T):
        row = []
        for m in range(Np):
            row.append(H.pull_back(g.differentiate(m)))
        out.append(row)
    return out


def chi_derivative(phi: TruncatedSeries, alpha, M: NormalManifold) -> TruncatedSeries:
    red = M.ctx["red"]
    for k, a in enumerate(alpha):
        for _ in range(a):
            phi = phi.differentiate(red.index("chi", k))
    return phi


def degeneracy_rows(H: FormalMap, k_max: int) -> DegeneracyRows:
    S = H.source
    if k_max < 0:
        raise DegeneracyError("k_max must be non-negative")
    if k_max + 1 > H.order:
        raise PrecisionError(f"k_max = {k_max} needs order >= {k_max + 1}; usable k_max is {H.order - 1}")
    base = pulled_back_gradients(H)
    labels, rows, consts = [], [], []
    cache = {(0,) * S.n: base}
    for alpha in multiindices(S.n, k_max):
        if alpha not in cache:
            # derive from a parent with one less chi derivative
            k = next(i for i in range(S.n) if alpha[i])
            parent = tuple(a - (1 if i == k else 0) for i, a in enumerate(alpha))
            ci = S.ctx["red"].index("chi", k)
            cache[alpha] = [[e.differentiate(ci) for e in row] for row in cache[parent]]
        for j, row in enumerate(cache[alpha]):
            labels.append((alpha, j))
            rows.append(row)
            consts.append([e.constant_term() for e in row])
    return DegeneracyRows(H, k_max, labels, rows, consts)


@dataclass
class DegeneracyReport:
    dims: list
    k0: int
    s: int
    Nprime: int
    k_max: int
    order: int
    basis_rows: list
    pivot_columns: list
    certified: bool = False
    certificate: str = "valid up to k_max"
    constancy: str = "inconclusive"
    constancy_witness: object = None
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"dims": self.dims, "k0": self.k0, "s": self.s, "certified": self.certified,
                "certificate": self.certificate, "constancy": self.constancy,
                "k_max": self.k_max, "order": self.order,
                "basis_rows": [{"alpha": list(a), "l": j} for a, j in self.basis_rows],
                "pivot_columns": self.pivot_columns}


def degeneracy_at_origin(rows: DegeneracyRows) -> DegeneracyReport:
    Np = rows.H.target.N
    dims = []
    for k in range(rows.k_max + 1):
        idx = rows.level(k)
        dims.append(rank([rows.constants[i] for i in idx]) if idx else 0)
    top = max(dims)
    k0 = dims.index(top)
    chosen = independent_rows(rows.constants)
    basis = [rows.labels[i] for i in chosen]
    pivots = pivot_columns([rows.constants[i] for i in chosen], Np)
    rep = DegeneracyReport(dims, k0, Np - top, Np, rows.k_max, rows.H.order, basis, pivots)
    if top == Np:
        rep.certified = True
        rep.certificate = "dims reached N'"
    return rep


def pivot_columns(mat, ncols):
    """Lexicographically first column set with nonzero maximal minor."""
    t = len(mat)
    if t == 0:
        return []
    for cols in itertools.combinations(range(ncols), t):
        if det([[r[c] for c in cols] for r in mat]) != 0:
            return list(cols)
    raise DegeneracyError("basis rows are dependent at 0")


def series_det(m: list[list[TruncatedSeries]]) -> TruncatedSeries:
    """Laplace expansion along the first row."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = None
    for c in range(n):
        if m[0][c].is_zero():
            continue
        minor = [row[:c] + row[c + 1:] for row in m[1:]]
        term = m[0][c] * series_det(minor)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return m[0][0]
    return total


def _basis_matrix(rows: DegeneracyRows, report: DegeneracyReport):
    idx = {lab: i for i, lab in enumerate(rows.labels)}
    return [rows.rows[idx[lab]] for lab in report.basis_rows]


@dataclass
class ConstancyResult:
    verdict: str
    symbolic: str
    sampled: list
    witness: object = None
    minors_checked: int = 0


def bordered_minors(rows: DegeneracyRows, report: DegeneracyReport):
    """Yield (row label, extra column, minor) for every bordered minor."""
    basis = _basis_matrix(rows, report)
    piv = report.pivot_columns
    extra = [c for c in range(report.Nprime) if c not in piv]
    for lab, row in zip(rows.labels, rows.rows):
        if lab in report.basis_rows:
            continue
        for c in extra:
            cols = piv + [c]
            m = [[r[k] for k in cols] for r in basis + [row]]
            yield lab, c, series_det(m)


def constant_rank_probe(H: FormalMap, report: DegeneracyReport, rows: DegeneracyRows | None = None,
                        sample_points: Sequence | None = None, samples: int = 0, seed: int = 0):
    """Symbolic bordered-minor test plus optional sampling of s at other points."""
    rows = rows or degeneracy_rows(H, report.k_max)
    if report.s == 0:
        symbolic = "constant"
        witness = None
        count = 0
    elif report.s == report.Nprime:
        symbolic, witness, count = "constant", None, 0
    else:
        symbolic, witness, count = "constant", None, 0
        for lab, c, m in bordered_minors(rows, report):
            count += 1
            if not m.is_zero():
                symbolic = "non_constant"
                witness = {"row": {"alpha": list(lab[0]), "l": lab[1]}, "column": c,
                           "minor": str(m)}
                break
    sampled = []
    if sample_points or samples:
        if not (H.source.polynomial and _target_polynomial(H.target) and H.exact):
            raise DegeneracyError("sampling needs polynomial manifolds and a polynomial map")
        if not check_maps_into(H).verdict:
            raise DegeneracyError("sampling needs a map that sends M into M'")
        pts = list(sample_points or []) or random_points(H.source, samples, seed)
        for p in pts:
            sp = s_at_point(H, p, report.k_max)
            sampled.append({"point": [str(x) for x in p], "s": sp})
            if sp != report.s and witness is None:
                witness = {"point": [str(x) for x in p], "s": sp}
    verdict = symbolic
    if any(x["s"] != report.s for x in sampled):
        verdict = "non_constant"
    report.constancy = verdict
    report.constancy_witness = witness
    return ConstancyResult(verdict, symbolic, sampled, witness, count)


def _target_polynomial(T):
    return getattr(T, "polynomial", False)


def random_points(M: NormalManifold, count: int, seed: int = 0, denom: int = 4):
    """Seeded points (z0, Q(z0,chi0,tau0), chi0, tau0) with small rational coordinates."""
    rng = random.Random(seed)

    def num():
        return GaussianRational(Fraction(rng.randint(-denom, denom), rng.randint(1, denom)),
                                Fraction(rng.randint(-denom, denom), rng.randint(1, denom)))

    return [M.point_from([num() for _ in range(M.n)], [num() for _ in range(M.n)],
                         [num() for _ in range(M.d)]) for _ in range(count)]


def s_at_point(H: FormalMap, p, k_max: int) -> int:
    """s(p) computed after moving p to the origin in normal coordinates."""
    Hn, _, _ = recenter_map(H, p, order=max(H.order, k_max + 1))
    rows = degeneracy_rows(Hn, k_max)
    return degeneracy_at_origin(rows).s


def rows_at_point_direct(H: FormalMap, p, k_max: int):
    """Independent check: L^alpha grad rho'(H, Hbar) evaluated at p, all polynomial."""
    S = H.source
    if not (S.polynomial and S.reality and H.exact):
        raise DegeneracyError("direct evaluation needs real polynomial data")
    full = S.ctx["full"]
    out = []
    for g in target_generators(H.target):
        grads = [g.differentiate(m).compose(H.on_full, target=full) for m in range(H.target.N)]
        for alpha in multiindices(S.n, k_max):
            out.append([S.cr_derivative(e, alpha).evaluate(p) for e in grads])
    return out


# the Delta system ---------------------------------------------------------------

@dataclass
class DeltaSystem:
    Delta: TruncatedSeries
    Delta_mk: dict
    residuals: list
    Delta0: GaussianRational
    ok: bool


def delta_system(H: FormalMap, report: DegeneracyReport, rows: DegeneracyRows | None = None) -> DeltaSystem:
    rows = rows or degeneracy_rows(H, report.k_max)
    S = H.source
    red = S.ctx["red"]
    basis = _basis_matrix(rows, report)
    piv = report.pivot_columns
    t = len(piv)
    o = max(H.order, 1)
    restrict = [TruncatedSeries.variable(red, o, i) for i in range(S.N)] + \
        [TruncatedSeries.zero(red, o) for _ in range(S.n)]
    # work in red but with chi = 0, which is the restriction to (z, w, 0, w)
    B0 = [[e.compose(restrict, target=red) for e in r] for r in basis]
    if t == 0:
        one = TruncatedSeries.one(red, o)
        return DeltaSystem(one, {}, [], ONE, True)
    sq = [[r[c] for c in piv] for r in B0]
    Delta = series_det(sq)
    D0 = Delta.constant_term()
    if not D0:
        raise DegeneracyError("Delta(0) = 0: inconsistent with constant degeneracy")
    extra = [c for c in range(report.Nprime) if c not in piv]
    Dmk = {}
    for mi, m in enumerate(piv):
        for k in extra:
            mat = [[r[k] if ci == mi else r[c] for ci, c in enumerate(piv)] for r in B0]
            Dmk[(m, k)] = series_det(mat)
    residuals = []
    for lab, row in zip(rows.labels, rows.rows):
        for k in extra:
            res = Delta * row[k]
            for m in piv:
                res = res - Dmk[(m, k)] * row[m]
            residuals.append(((lab, k), res))
    ok = all(r.is_zero() for _, r in residuals)
    return DeltaSystem(_drop_chi(Delta, S), {k: _drop_chi(v, S) for k, v in Dmk.items()},
                       residuals, D0, ok)


def _drop_chi(s: TruncatedSeries, S: NormalManifold) -> TruncatedSeries:
    Zc = S.ctx["Z"]
    o = max(s.order, 1)
    imgs = [TruncatedSeries.variable(Zc, o, i) for i in range(S.N)] + \
        [TruncatedSeries.zero(Zc, o) for _ in range(S.n)]
    return s.compose(imgs, target=Zc)


# holomorphic vector fields ------------------------------------------------------

@dataclass
class HolVectorFieldSpace:
    basis: list          # each: list of N' series in (z, w)
    dim0: int
    jet_order: int
    values_at_0: list


def hol_vector_fields(H: FormalMap, jet_order: int) -> HolVectorFieldSpace:
    """X = sum a_j d/dZ'_j with sum_j a_j rho'_{l,Z'_j}(H, Hbar) in I, to degree jet_order."""
    S = H.source
    if jet_order > H.order:
        raise PrecisionError("jet_order exceeds the working order")
    red = S.ctx["red"]
    Zc = S.ctx["Z"]
    Np = H.target.N
    G = pulled_back_gradients(H)
    monos = multiindices(S.N, jet_order)
    unknowns = [(j, b) for j in range(Np) for b in monos]
    sh = red._shift
    zero_tail = (0,) * S.n
    eqs: dict = {}
    for col, (j, b) in enumerate(unknowns):
        shift_key = red.pack(tuple(b) + zero_tail)
        for l, grads in enumerate(G):
            g = grads[j]
            for k, c in g._t.items():
                nk = k + shift_key
                if nk >> sh > jet_order:
                    continue
                eqs.setdefault((l, nk), {})[col] = c
    rows = [[e.get(c, ZERO) for c in range(len(unknowns))] for e in eqs.values()]
    if rows:
        ns = nullspace(rows)
    else:
        ns = [[ONE if i == j else ZERO for i in range(len(unknowns))] for j in range(len(unknowns))]
    basis = []
    vals = []
    for v in ns:
        comps = []
        for j in range(Np):
            terms = {tuple(b): v[unknowns.index((j, b))] for b in monos}
            comps.append(TruncatedSeries(Zc, jet_order, terms, exact=False))
        basis.append(comps)
        vals.append([c.constant_term() for c in comps])
    dim0 = rank(vals) if vals else 0
    return HolVectorFieldSpace(basis, dim0, jet_order, vals)


# bounds ----------------------------------------------------------------------------

@dataclass
class Diagnostic:
    name: str
    status: str      # PASS, FAIL, SKIPPED, WARNING
    detail: str

    def to_json(self):
        return {"name": self.name, "status": self.status, "detail": self.detail}


def bounds_diagnostics(H: FormalMap, report: DegeneracyReport) -> list[Diagnostic]:
    out = []
    Np, N = report.Nprime, H.source.N
    dprime = H.target.d
    s, k0 = report.s, report.k0
    ok = 0 <= s <= Np - dprime
    out.append(Diagnostic("trivial bound s <= N'-d'", "PASS" if ok else "FAIL",
                          f"s = {s}, N'-d' = {Np - dprime}"))
    hyps = []
    trans = transversality_check(H)
    if not trans.transversal:
        hyps.append("H not transversal")
    src_ok = source_finitely_nondegenerate(H.source)
    if not src_ok:
        hyps.append("source not finitely nondegenerate up to the tested level")
    if hyps:
        out.append(Diagnostic("transversal bound s <= N'-N", "SKIPPED", "; ".join(hyps)))
    else:
        out.append(Diagnostic("transversal bound s <= N'-N", "PASS" if s <= Np - N else "FAIL",
                              f"s = {s}, N'-N = {Np - N}"))
    gen = k0 <= Np - dprime - s
    out.append(Diagnostic("generic bound k0 <= N'-d'-s", "WARNING" if not gen else "PASS",
                          f"k0 = {k0}, N'-d'-s = {Np - dprime - s}; holds off a proper subvariety only"))
    return out


def identity_map(M: NormalManifold) -> FormalMap:
    Zc = M.ctx["Z"]
    comps = [TruncatedSeries.variable(Zc, M.order, i) for i in range(M.N)]
    return FormalMap(M, M, comps, order=M.order)


def source_finitely_nondegenerate(M: NormalManifold, k_max: int | None = None) -> bool:
    k = k_max if k_max is not None else min(M.N - M.d + 1, M.order - 1)
    k = max(min(k, M.order - 1), 0)
    rep = degeneracy_at_origin(degeneracy_rows(identity_map(M), k))
    return rep.s == 0


# full analysis -------------------------------------------------------------------

def analyze(H: FormalMap, k_max: int | None = None, jet_order: int | None = None,
            samples: int = 0, seed: int = 0, sample_points=None):
    """rows -> report -> constancy -> vector fields -> certification -> bounds."""
    Np, dp = H.target.N, H.target.d
    if k_max is None:
        k_max = Np - dp
    k_max = min(k_max, H.order - 1)
    rows = degeneracy_rows(H, k_max)
    rep = degeneracy_at_origin(rows)
    probe = constant_rank_probe(H, rep, rows, sample_points=sample_points, samples=samples, seed=seed)
    J = jet_order if jet_order is not None else min(H.order, max(2, k_max + 1))
    hv = hol_vector_fields(H, J)
    if not rep.certified and probe.verdict == "constant" and hv.dim0 == Np - rep.dims[-1]:
        rep.certified = True
        rep.certificate = f"squeeze: dim X(0) = N' - dim E_kmax(0) (to order {J})"
    bounds = bounds_diagnostics(H, rep)
    return rep, probe, hv, bounds
