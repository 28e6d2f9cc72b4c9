"""Segre maps and the finite type test by Jacobian rank."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import rank
from .manifold import NormalManifold
from .series import GaussianRational, TruncatedSeries, VariableBlocks


def segre_context(n: int, k: int) -> VariableBlocks:
    """Variables x0, ..., x_{k-1}, each a block of n.  x0 is z, x1 is chi^1, ..."""
    return VariableBlocks([(f"x{i}", n) for i in range(k)])


@dataclass
class SegreMap:
    level: int
    vars: VariableBlocks
    components: list           # N series in vars: (z part, w part)
    vanishing_ok: bool | None = None

    def jacobian(self):
        return [[c.differentiate(i) for i in range(self.vars.size)] for c in self.components]


def _conj_shift(v: list[TruncatedSeries], ctx_from: VariableBlocks, ctx_to: VariableBlocks):
    """Conjugate v^k and rename x_i -> x_{i+1}."""
    n = ctx_from.arity("x0") if ctx_from.size else 0
    idx = [i + n for i in range(ctx_from.size)]
    return [c.conjugate().embed(ctx_to, idx) for c in v]


def segre_map(M: NormalManifold, k: int, order: int | None = None) -> SegreMap:
    if k < 0:
        raise ValueError("level must be non-negative")
    n, d = M.n, M.d
    t = order if order is not None else M.order
    if k == 0:
        ctx = segre_context(n, 0)
        return SegreMap(0, ctx, [TruncatedSeries.zero(ctx, t) for _ in range(M.N)], True)
    prev = segre_map(M, k - 1, order=t)
    ctx = segre_context(n, k)
    x0 = [TruncatedSeries.variable(ctx, t, "x0", i) for i in range(n)]
    if k == 1:
        comps = x0 + [TruncatedSeries.zero(ctx, t) for _ in range(d)]
        return SegreMap(1, ctx, comps, True)
    bar = _conj_shift(prev.components, prev.vars, ctx)
    images = x0 + bar[:n] + bar[n:]
    comps = x0 + [q.compose(images, target=ctx) for q in M.Q]
    sm = SegreMap(k, ctx, comps)
    sm.vanishing_ok = segre_vanishing(M, sm, prev)
    return sm


def segre_vanishing(M: NormalManifold, v: SegreMap, prev: SegreMap) -> bool:
    """Each generator f satisfies f(v^k(z, xi), vbar^{k-1}(xi)) = 0."""
    bar = _conj_shift(prev.components, prev.vars, v.vars)
    images = list(v.components) + bar
    for g in M.generators():
        r = g.compose(images, target=v.vars)
        if not r.is_zero():
            return False
    return True


@dataclass
class FiniteTypeResult:
    verdict: str                     # FINITE_TYPE, NOT_FINITE_TYPE, INCONCLUSIVE
    level: int | None = None
    point: list | None = None
    minor_columns: list | None = None
    minor_value: GaussianRational | None = None
    zero_point: dict | None = None
    notes: list = field(default_factory=list)

    def to_json(self):
        out = {"verdict": self.verdict, "level": self.level}
        if self.point is not None:
            out["point"] = [str(x) for x in self.point]
            out["minor_columns"] = self.minor_columns
            out["minor_value"] = str(self.minor_value)
        if self.zero_point is not None:
            out["zero_point"] = self.zero_point
        out["notes"] = self.notes
        return out


def _rand_gq(rng, denom=3):
    return GaussianRational(Fraction(rng.randint(-denom, denom), rng.randint(1, denom)),
                            Fraction(rng.randint(-denom, denom), rng.randint(1, denom)))


def _minors(J, N):
    cols = range(len(J[0])) if J and J[0] else range(0)
    for cs in itertools.combinations(cols, N):
        yield list(cs), [[row[c] for c in cs] for row in J]


def _series_det(m):
    from .degeneracy import series_det
    return series_det(m)


def finite_type_test(M: NormalManifold, levels: int, trials: int = 8, seed: int = 0,
                     zero_point: bool = True) -> FiniteTypeResult:
    if trials <= 0:
        raise ValueError("trials must be positive")
    if levels < 1:
        raise ValueError("levels must be at least 1")
    rng = random.Random(seed)
    N = M.N
    notes = []
    for k in range(1, levels + 1):
        v = segre_map(M, k)
        if v.vars.size < N:
            continue
        J = v.jacobian()
        for cols, sub in _minors(J, N):
            m = _series_det(sub)
            if m.is_zero():
                continue
            if not m.exact:
                notes.append("truncated data: nonzero coefficient of a minor certifies rank N")
                res = FiniteTypeResult("FINITE_TYPE", k, None, cols, None, notes=notes)
                return res
            # polynomial: look for an explicit rational point
            for _ in range(trials):
                pt = [_rand_gq(rng) for _ in range(v.vars.size)]
                val = m.evaluate(pt)
                if val:
                    res = FiniteTypeResult("FINITE_TYPE", k, pt, cols, val, notes=notes)
                    if zero_point:
                        res.zero_point = find_zero_point(M, k, trials, rng)
                    return res
            # fall back to a monomial where the minor is visibly nonzero
            notes.append(f"level {k}: minor {cols} nonzero as a polynomial, no sample point hit")
            return FiniteTypeResult("FINITE_TYPE", k, None, cols, None, notes=notes)
    exact = all(q.exact for q in M.Q)
    if exact and levels >= M.d + 1:
        return FiniteTypeResult("NOT_FINITE_TYPE", levels, notes=notes + [
            f"all {N}x{N} minors vanish identically for k <= {levels}"])
    notes.append("minors vanish to the working order only" if not exact
                 else f"levels < d+1 = {M.d + 1}")
    return FiniteTypeResult("INCONCLUSIVE", levels, notes=notes)


def check_zero_point(M: NormalManifold, level: int, point) -> dict:
    """v^level(point) and the rank of its Jacobian there (polynomial M)."""
    v = segre_map(M, level)
    vals = [c.evaluate(point) for c in v.components]
    J = [[e.evaluate(point) for e in row] for row in v.jacobian()]
    return {"level": level, "point": [str(x) for x in point], "value": [str(x) for x in vals],
            "rank": rank(J), "is_zero": all(not x for x in vals)}


def find_zero_point(M: NormalManifold, k1: int, trials: int = 8, rng=None) -> dict | None:
    """Look for xi0 with v^{2 k1}(0, xi0) = 0 and full Jacobian rank.

    Setting the even-indexed blocks to zero forces v^{2k} = 0, so only the
    rank needs to be hit by the random odd blocks.
    """
    if not all(q.exact for q in M.Q):
        return None
    rng = rng or random.Random(0)
    level = 2 * k1
    n = M.n
    for _ in range(trials):
        pt = []
        for i in range(level):
            if i % 2:
                pt.extend(_rand_gq(rng) for _ in range(n))
            else:
                pt.extend(GaussianRational(0) for _ in range(n))
        info = check_zero_point(M, level, pt)
        if info["is_zero"] and info["rank"] == M.N:
            return info
    return None
