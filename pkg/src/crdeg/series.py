"""Sparse truncated power series over the Gaussian rationals.

Monomials are stored as packed integers.  Each variable gets an 8-bit
exponent field and the total degree lives in the field above all of them,
so adding two keys multiplies the monomials and adds their degrees at once.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

from gmpy2 import mpq

BITS = 8
FIELD = (1 << BITS) - 1
MAX_EXPONENT = FIELD


class SeriesError(ValueError):
    """Raised for context mismatches and other misuse of series."""


class PrecisionError(SeriesError):
    """Raised when an operation would claim more precision than it has."""


def _to_mpq(x):
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class GaussianRational:
    """A number re + i*im with re, im rational."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    @classmethod
    def _raw(cls, re, im):
        g = object.__new__(cls)
        g.re = re
        g.im = im
        return g

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational._raw(self.re * o.re - self.im * o.im,
                                     self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational._raw((self.re * o.re + self.im * o.im) / n,
                                     (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (1 / self) ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self):
        return GaussianRational._raw(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({str(self)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return _imag_str(self.im)
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{_imag_str(abs(self.im))}"

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse strings like '3/2', '-i', '1-2/3*i', '2i'."""
        s = text.replace(" ", "").replace("*", "")
        if not s:
            raise ValueError("empty number")
        if "i" not in s:
            return cls(s)
        # split off the imaginary part at the last sign not at position 0
        cut = max(s.rfind("+", 1), s.rfind("-", 1))
        if cut > 0 and "i" in s[cut:] and "i" not in s[:cut]:
            re_part, im_part = s[:cut], s[cut:]
        else:
            re_part, im_part = "0", s
        im_part = im_part.replace("i", "")
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return cls(re_part, im_part)

    def to_json(self) -> dict:
        out = {"c": str(self.re)}
        if self.im != 0:
            out["ci"] = str(self.im)
        return out


def _imag_str(x):
    if x == 1:
        return "i"
    if x == -1:
        return "-i"
    return f"{x}*i"


def _coerce_or_none(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)) or type(x).__name__ == "mpq":
        return GaussianRational(x)
    if isinstance(x, complex):
        return GaussianRational.coerce(x)
    return None


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)

gr = GaussianRational.coerce


class VariableBlocks:
    """Ordered named blocks of variables, e.g. (z:n, w:d, chi:n, tau:d)."""

    __slots__ = ("blocks", "__dict__")

    def __init__(self, blocks: Iterable[tuple[str, int]]):
        blocks = tuple((str(name), int(k)) for name, k in blocks)
        names = [b[0] for b in blocks]
        if len(set(names)) != len(names):
            raise SeriesError(f"duplicate block names in {names}")
        for name, k in blocks:
            if k < 0:
                raise SeriesError(f"block {name} has negative arity")
        self.blocks = blocks

    @cached_property
    def size(self) -> int:
        return sum(k for _, k in self.blocks)

    @cached_property
    def _offsets(self) -> dict:
        out, pos = {}, 0
        for name, k in self.blocks:
            out[name] = (pos, k)
            pos += k
        return out

    def arity(self, block: str) -> int:
        return self._offsets[block][1]

    def offset(self, block: str) -> int:
        return self._offsets[block][0]

    def index(self, block: str, i: int = 0) -> int:
        start, k = self._offsets[block]
        if not 0 <= i < k:
            raise SeriesError(f"{block}[{i}] out of range (arity {k})")
        return start + i

    def indices(self, block: str) -> range:
        start, k = self._offsets[block]
        return range(start, start + k)

    def has(self, block: str) -> bool:
        return block in self._offsets

    @cached_property
    def names(self) -> list[str]:
        out = []
        for name, k in self.blocks:
            if k == 1:
                out.append(name)
            else:
                out.extend(f"{name}{i + 1}" for i in range(k))
        return out

    def prefix(self, count: int) -> "VariableBlocks":
        """The context made of the first `count` variables."""
        out, left = [], count
        for name, k in self.blocks:
            if left <= 0:
                break
            out.append((name, min(k, left)))
            left -= k
        return VariableBlocks(out)

    def __add__(self, other: "VariableBlocks") -> "VariableBlocks":
        return VariableBlocks(self.blocks + other.blocks)

    def __eq__(self, other):
        return isinstance(other, VariableBlocks) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        inner = ", ".join(f"{n}:{k}" for n, k in self.blocks)
        return f"VariableBlocks({inner})"

    # packing helpers -------------------------------------------------
    @cached_property
    def _shift(self) -> int:
        return BITS * self.size

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.size:
            raise SeriesError(f"exponent vector of length {len(exps)}, expected {self.size}")
        key, deg = 0, 0
        for i, e in enumerate(exps):
            if e < 0 or e > MAX_EXPONENT:
                raise SeriesError(f"exponent {e} out of range")
            key |= e << (BITS * i)
            deg += e
        return key | (deg << self._shift)

    def unpack(self, key: int) -> tuple[int, ...]:
        return tuple((key >> (BITS * i)) & FIELD for i in range(self.size))

    def degree_of(self, key: int) -> int:
        return key >> self._shift

    def unit(self, i: int) -> int:
        return (1 << (BITS * i)) | (1 << self._shift)


def grlex_key(exps: Sequence[int]):
    return (sum(exps), tuple(-e for e in exps))


class TruncatedSeries:
    """A formal power series known up to total degree `order`.

    If `exact` is set the stored terms are the whole series (a polynomial),
    and `order` is only a storage cap.
    """

    __slots__ = ("vars", "order", "exact", "_t")

    def __init__(self, vars: VariableBlocks, order: int, terms=None, exact=False):
        if order < 0:
            raise SeriesError("order must be non-negative")
        self.vars = vars
        self.order = int(order)
        self.exact = bool(exact)
        t = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for exps, c in items:
                c = gr(c)
                if not c:
                    continue
                key = vars.pack(tuple(exps))
                if vars.degree_of(key) > order:
                    if exact:
                        raise PrecisionError("exact series has a term above its order cap")
                    continue
                if key in t:
                    c = t[key] + c
                    if not c:
                        del t[key]
                        continue
                t[key] = c
        self._t = t

    @classmethod
    def _make(cls, vars, order, t, exact):
        s = object.__new__(cls)
        s.vars = vars
        s.order = order
        s.exact = exact
        s._t = t
        return s

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, vars, order, exact=True):
        return cls._make(vars, order, {}, exact)

    @classmethod
    def constant(cls, vars, order, c, exact=True):
        c = gr(c)
        t = {0: c} if c else {}
        return cls._make(vars, order, t, exact)

    @classmethod
    def one(cls, vars, order):
        return cls.constant(vars, order, ONE)

    @classmethod
    def variable(cls, vars, order, block, i=0, exact=True):
        idx = vars.index(block, i) if isinstance(block, str) else block
        if order < 1:
            return cls._make(vars, order, {}, False)
        return cls._make(vars, order, {vars.unit(idx): ONE}, exact)

    @classmethod
    def monomial(cls, vars, order, exps, c=ONE, exact=True):
        return cls(vars, order, {tuple(exps): c}, exact=exact)

    # inspection ------------------------------------------------------
    def __len__(self):
        return len(self._t)

    def items(self):
        """(exponent tuple, coefficient) pairs in graded-lex order."""
        out = [(self.vars.unpack(k), c) for k, c in self._t.items()]
        out.sort(key=lambda p: grlex_key(p[0]))
        return out

    def keys(self):
        return self._t.keys()

    def coeff(self, exps) -> GaussianRational:
        return self._t.get(self.vars.pack(tuple(exps)), ZERO)

    def constant_term(self) -> GaussianRational:
        return self._t.get(0, ZERO)

    def is_zero(self) -> bool:
        return not self._t

    def degree(self) -> int:
        """Largest total degree present (-1 for zero)."""
        sh = self.vars._shift
        return max((k >> sh for k in self._t), default=-1)

    def valuation(self) -> int:
        """Smallest total degree present (order+1 for zero)."""
        sh = self.vars._shift
        return min((k >> sh for k in self._t), default=self.order + 1)

    def homogeneous_part(self, deg: int) -> "TruncatedSeries":
        sh = self.vars._shift
        t = {k: c for k, c in self._t.items() if k >> sh == deg}
        return TruncatedSeries._make(self.vars, self.order, t, self.exact)

    def uses_variable(self, i: int) -> bool:
        sh = BITS * i
        return any((k >> sh) & FIELD for k in self._t)

    # order handling --------------------------------------------------
    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order and not self.exact:
            raise PrecisionError(f"cannot raise order {self.order} to {order}")
        if order >= self.degree():
            return TruncatedSeries._make(self.vars, order, self._t, self.exact)
        sh = self.vars._shift
        t = {k: c for k, c in self._t.items() if k >> sh <= order}
        return TruncatedSeries._make(self.vars, order, t, False)

    def with_exact(self, flag: bool = True) -> "TruncatedSeries":
        return TruncatedSeries._make(self.vars, self.order, self._t, flag)

    def _align(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.vars, self.order, gr(other))
        if self.vars != other.vars:
            raise SeriesError(f"variable context mismatch: {self.vars} vs {other.vars}")
        if self.exact and other.exact:
            order = max(self.order, other.order)
        elif self.exact:
            order = other.order
        elif other.exact:
            order = self.order
        else:
            order = min(self.order, other.order)
        return other, order

    # arithmetic ------------------------------------------------------
    def __add__(self, other):
        other, order = self._align(other)
        return _combine(self, other, order, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other, order = self._align(other)
        return _combine(self, other, order, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        t = {k: -c for k, c in self._t.items()}
        return TruncatedSeries._make(self.vars, self.order, t, self.exact)

    def scale(self, c) -> "TruncatedSeries":
        c = gr(c)
        if not c:
            return TruncatedSeries._make(self.vars, self.order, {}, self.exact)
        t = {k: v * c for k, v in self._t.items()}
        return TruncatedSeries._make(self.vars, self.order, t, self.exact)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            c = _coerce_or_none(other)
            if c is None:
                return NotImplemented
            return self.scale(c)
        other, order = self._align(other)
        return _multiply(self, other, order)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise SeriesError("negative powers are not supported")
        result = TruncatedSeries.one(self.vars, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def conjugate(self) -> "TruncatedSeries":
        """Conjugate the coefficients; variables are left alone."""
        t = {k: c.conjugate() for k, c in self._t.items()}
        return TruncatedSeries._make(self.vars, self.order, t, self.exact)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            c = _coerce_or_none(other)
            if c is None:
                return NotImplemented
            return self._t == ({0: c} if c else {})
        return self.vars == other.vars and self._t == other._t and (
            self.order == other.order or self.exact or other.exact)

    def __hash__(self):
        return hash((self.vars, frozenset(self._t.items())))

    # calculus --------------------------------------------------------
    def differentiate(self, var) -> "TruncatedSeries":
        i = var if isinstance(var, int) else self.vars.index(*var) if isinstance(var, tuple) \
            else self.vars.index(var)
        if not 0 <= i < self.vars.size:
            raise SeriesError(f"variable index {i} out of range")
        if self.order == 0 and not self.exact:
            raise PrecisionError("derivative of an order-0 series carries no information")
        unit = self.vars.unit(i)
        sh = BITS * i
        t = {}
        for k, c in self._t.items():
            e = (k >> sh) & FIELD
            if e:
                t[k - unit] = c * e
        order = max(self.order - 1, 0)
        return TruncatedSeries._make(self.vars, order, t, self.exact)

    d = differentiate

    def evaluate(self, point) -> GaussianRational:
        vals = [gr(x) for x in point]
        if len(vals) != self.vars.size:
            raise SeriesError(f"point has {len(vals)} entries, expected {self.vars.size}")
        total = ZERO
        powers = [{0: ONE} for _ in vals]
        for k, c in self._t.items():
            term = c
            for i in range(len(vals)):
                e = (k >> (BITS * i)) & FIELD
                if e:
                    p = powers[i].get(e)
                    if p is None:
                        p = vals[i] ** e
                        powers[i][e] = p
                    term = term * p
            total = total + term
        return total

    # composition -----------------------------------------------------
    def compose(self, images: Sequence["TruncatedSeries"], order: int | None = None,
                target: VariableBlocks | None = None) -> "TruncatedSeries":
        """Substitute images[i] for variable i.

        All images live in one context.  The result is valid to the
        smallest order among the inexact participants.
        """
        if len(images) != self.vars.size:
            raise SeriesError(f"{len(images)} images for {self.vars.size} variables")
        if target is None:
            if not images:
                raise SeriesError("target context needed for a series in no variables")
            target = images[0].vars
        used = [self.uses_variable(i) for i in range(len(images))]
        prec = math.inf if self.exact else self.order
        for i, img in enumerate(images):
            if img.vars != target:
                raise SeriesError("images live in different contexts")
            if not used[i]:
                continue
            if not img.exact:
                prec = min(prec, img.order)
            if img.constant_term() and not self.exact:
                raise PrecisionError(
                    "substituting a series with nonzero constant term into a truncated series")
        if order is None:
            if prec == math.inf:
                order = max([self.order] + [im.order for im, u in zip(images, used) if u])
            else:
                order = prec
        elif order > prec:
            raise PrecisionError(f"requested order {order} exceeds available precision {prec}")
        return _compose(self, images, order, target, prec == math.inf)

    def substitute(self, assignment: Mapping, target: VariableBlocks | None = None,
                   order: int | None = None) -> "TruncatedSeries":
        """Substitute some variables; the others map to themselves.

        Keys may be variable indices or names.  Values are series in the
        target context (default: self.vars) or scalars.
        """
        target = target or self.vars
        if target != self.vars:
            raise SeriesError("substitute keeps the context; use compose to change it")
        base_order = self.order
        images = [TruncatedSeries.variable(target, max(base_order, 1), i) for i in range(self.vars.size)]
        for key, val in assignment.items():
            i = self._var_index(key)
            if not isinstance(val, TruncatedSeries):
                val = TruncatedSeries.constant(target, base_order, gr(val))
            images[i] = val
        return self.compose(images, order=order, target=target)

    def _var_index(self, key):
        if isinstance(key, int):
            return key
        if isinstance(key, tuple):
            return self.vars.index(*key)
        names = self.vars.names
        if key in names:
            return names.index(key)
        return self.vars.index(key, 0)

    def embed(self, target: VariableBlocks, index_map: Sequence[int]) -> "TruncatedSeries":
        """Rename variable i to target variable index_map[i]."""
        if len(index_map) != self.vars.size:
            raise SeriesError("index map length mismatch")
        sh_src = self.vars._shift
        sh_dst = target._shift
        t = {}
        for k, c in self._t.items():
            deg = k >> sh_src
            nk = deg << sh_dst
            for i, j in enumerate(index_map):
                e = (k >> (BITS * i)) & FIELD
                if e:
                    if j is None:
                        raise SeriesError(f"variable {self.vars.names[i]} has no image")
                    nk += e << (BITS * j)
            t[nk] = t.get(nk, ZERO) + c
        t = {k: c for k, c in t.items() if c}
        return TruncatedSeries._make(target, self.order, t, self.exact)

    def embed_blocks(self, target: VariableBlocks, rename: Mapping[str, str] | None = None):
        """Embed by matching block names (optionally renamed)."""
        rename = rename or {}
        index_map = []
        for name, k in self.vars.blocks:
            tname = rename.get(name, name)
            if k and target.arity(tname) != k:
                raise SeriesError(f"block {name} -> {tname} arity mismatch")
            index_map.extend(target.index(tname, i) for i in range(k))
        return self.embed(target, index_map)

    # literals --------------------------------------------------------
    def to_literal(self) -> list:
        out = []
        for exps, c in self.items():
            term = c.to_json()
            term["e"] = list(exps)
            out.append(term)
        return out

    @classmethod
    def from_literal(cls, vars: VariableBlocks, order: int, terms: list, exact=False):
        if not isinstance(terms, list):
            raise SeriesError("series literal must be a list of terms")
        parsed = []
        for n, term in enumerate(terms):
            if not isinstance(term, dict) or "e" not in term:
                raise SeriesError(f"term {n}: expected object with key 'e'")
            exps = term["e"]
            if not isinstance(exps, list) or len(exps) != vars.size:
                raise SeriesError(f"term {n}: exponent list must have length {vars.size}")
            c = GaussianRational(str(term.get("c", "0")), str(term.get("ci", "0")))
            parsed.append((tuple(int(e) for e in exps), c))
        if exact:
            deg = max((sum(e) for e, _ in parsed), default=0)
            order = max(order, deg)
        return cls(vars, order, parsed, exact=exact)

    def __repr__(self):
        flag = "exact" if self.exact else f"O({self.order + 1})"
        return f"<{self} ; {flag}>"

    def __str__(self):
        if not self._t:
            return "0"
        parts = []
        names = self.vars.names
        for exps, c in self.items():
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e)
            cs = str(c)
            if not mono:
                parts.append(f"({cs})" if c.re and c.im else cs)
            elif c == ONE:
                parts.append(mono)
            elif c == -ONE:
                parts.append("-" + mono)
            else:
                parts.append(f"({cs})*{mono}" if c.re and c.im else f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _combine(a, b, order, sign):
    sh = a.vars._shift
    t = {k: c for k, c in a._t.items() if k >> sh <= order} if a.degree() > order else dict(a._t)
    dropped = a.degree() > order or b.degree() > order
    for k, c in b._t.items():
        if k >> sh > order:
            continue
        v = t.get(k)
        if v is None:
            t[k] = c if sign > 0 else -c
        else:
            v = v + c if sign > 0 else v - c
            if v:
                t[k] = v
            else:
                del t[k]
    return TruncatedSeries._make(a.vars, order, t, a.exact and b.exact and not dropped)


def _multiply(a, b, order):
    sh = a.vars._shift
    if not a._t or not b._t:
        return TruncatedSeries._make(a.vars, order, {}, a.exact and b.exact)
    if len(a._t) > len(b._t):
        a, b = b, a
    bl = sorted(((k >> sh, k, c.re, c.im) for k, c in b._t.items()), key=lambda x: x[0])
    acc_re: dict = {}
    acc_im: dict = {}
    dropped = False
    for ka, ca in a._t.items():
        da = ka >> sh
        limit = order - da
        ar, ai = ca.re, ca.im
        for db, kb, br, bi in bl:
            if db > limit:
                dropped = True
                break
            k = ka + kb
            if ai == 0:
                if bi == 0:
                    re, im = ar * br, None
                else:
                    re, im = ar * br, ar * bi
            elif bi == 0:
                re, im = ar * br, ai * br
            else:
                re, im = ar * br - ai * bi, ar * bi + ai * br
            if re:
                acc_re[k] = acc_re[k] + re if k in acc_re else re
            if im:
                acc_im[k] = acc_im[k] + im if k in acc_im else im
    t = {}
    zero = mpq(0)
    for k in acc_re.keys() | acc_im.keys():
        re = acc_re.get(k, zero)
        im = acc_im.get(k, zero)
        if re or im:
            t[k] = GaussianRational._raw(re, im)
    return TruncatedSeries._make(a.vars, order, t, a.exact and b.exact and not dropped)


def _compose(a, images, order, target, exact_input):
    vars_ = a.vars
    V = vars_.size
    sh_t = target._shift
    fields = [BITS * i for i in range(V)]
    vals = [im.valuation() for im in images]
    dead = [im.is_zero() and im.exact for im in images]
    # images that are a bare variable just relabel exponents
    rename = [None] * V
    for i, im in enumerate(images):
        if im.exact and len(im._t) == 1:
            (k, c), = im._t.items()
            if c == ONE and k >> sh_t == 1:
                rename[i] = k
    one = TruncatedSeries._make(target, order, {0: ONE}, True)
    memo = {0: one}

    def mono(key):
        r = memo.get(key)
        if r is not None:
            return r
        for i in range(V):
            if (key >> fields[i]) & FIELD:
                break
        r = _multiply_img(mono(key - vars_.unit(i)), images[i], order)
        memo[key] = r
        return r

    acc = {}
    exact = exact_input
    for key, c in a._t.items():
        val = 0
        killed = False
        shift = 0
        rest = 0
        for i in range(V):
            e = (key >> fields[i]) & FIELD
            if e:
                val += e * vals[i]
                killed = killed or dead[i]
                if rename[i] is not None:
                    shift += e * rename[i]
                else:
                    rest += e * vars_.unit(i)
        if killed:
            continue
        if val > order:
            exact = False
            continue
        m = mono(rest)
        if not m.exact:
            exact = False
        for k, v in m._t.items():
            nk = k + shift
            if nk >> sh_t > order:
                exact = False
                continue
            x = acc.get(nk)
            acc[nk] = v * c if x is None else x + v * c
    t = {k: v for k, v in acc.items() if v}
    return TruncatedSeries._make(target, order, t, exact and all(
        im.exact for im, i in zip(images, range(V)) if a.uses_variable(i)))


def _multiply_img(m, img, order):
    # m is exact-or-valid to `order`; img may be inexact with its own order >= order
    if img.order < order and not img.exact:
        raise PrecisionError("image order below requested composition order")
    r = _multiply(TruncatedSeries._make(m.vars, order, m._t, m.exact),
                  TruncatedSeries._make(img.vars, order, img._t, img.exact), order)
    return r


class Evaluation(NamedTuple):
    value: GaussianRational
    exact: bool


def evaluate(a: TruncatedSeries, point) -> Evaluation:
    """Evaluate, flagging whether the value is exact or only an order-t approximation."""
    return Evaluation(a.evaluate(point), a.exact)


def arith(a: TruncatedSeries, b, kind: str, c=None) -> TruncatedSeries:
    """Strict ring operation: contexts and orders must match."""
    if kind == "scale":
        return a.scale(c if c is not None else b)
    if a.vars != b.vars:
        raise SeriesError("variable context mismatch")
    if a.order != b.order:
        raise PrecisionError(f"order mismatch: {a.order} vs {b.order}")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise SeriesError(f"unknown operation {kind!r}")


class SeriesVector(tuple):
    """Tuple of series sharing one context."""

    def __new__(cls, entries: Iterable[TruncatedSeries], vars: VariableBlocks | None = None):
        entries = tuple(entries)
        self = super().__new__(cls, entries)
        if entries:
            v = entries[0].vars
            for e in entries:
                if e.vars != v:
                    raise SeriesError("SeriesVector entries must share a context")
        elif vars is None:
            raise SeriesError("empty SeriesVector needs an explicit context")
        self._vars = vars or entries[0].vars
        return self

    @property
    def vars(self):
        return self._vars

    @property
    def order(self):
        return min((e.order for e in self if not e.exact), default=max((e.order for e in self), default=0))

    def compose(self, images, order=None, target=None):
        return SeriesVector([e.compose(images, order=order, target=target) for e in self],
                            vars=target or (images[0].vars if images else None))

    def truncate(self, order):
        return SeriesVector([e.truncate(order) for e in self], vars=self._vars)

    def constant_terms(self):
        return [e.constant_term() for e in self]


def variables(vars: VariableBlocks, order: int, block: str) -> list[TruncatedSeries]:
    return [TruncatedSeries.variable(vars, order, block, i) for i in range(vars.arity(block))]


def implicit_solve(Phi: Sequence[TruncatedSeries], m: int, order: int | None = None) -> SeriesVector:
    """Solve Phi(P, X) = 0 for X = Psi(P) with Psi(0) = 0.

    The unknowns are the last m variables of the context.  Newton-type
    fixed point with the constant Jacobian: each round fixes one more degree.
    """
    from .linalg import inverse, SingularMatrixError

    Phi = list(Phi)
    if not Phi or len(Phi) != m:
        raise SeriesError(f"need {m} equations, got {len(Phi)}")
    vars_ = Phi[0].vars
    V = vars_.size
    p = V - m
    if p < 0:
        raise SeriesError("more unknowns than variables")
    for j, f in enumerate(Phi):
        if f.vars != vars_:
            raise SeriesError("equations live in different contexts")
        if f.constant_term():
            raise SeriesError(f"equation {j} does not vanish at the origin")
    prec = min((f.order for f in Phi if not f.exact), default=math.inf)
    if order is None:
        order = prec if prec != math.inf else max(f.order for f in Phi)
    elif order > prec:
        raise PrecisionError(f"requested order {order} exceeds equation precision {prec}")
    A = [[Phi[r].coeff(_unit_exps(V, p + c)) for c in range(m)] for r in range(m)]
    try:
        Ainv = inverse(A)
    except SingularMatrixError:
        raise SingularMatrixError("Jacobian with respect to the unknowns is singular at 0") from None
    P = vars_.prefix(p)
    parts = [_split_unknowns(f, p, P, order) for f in Phi]
    psi = [TruncatedSeries.zero(P, order, exact=False) for _ in range(m)]
    for deg in range(1, order + 1):
        cur = [x.truncate(deg) for x in psi]
        powers = {(0,) * m: TruncatedSeries._make(P, deg, {0: ONE}, True)}

        def power(g):
            r = powers.get(g)
            if r is None:
                k = next(i for i in range(m) if g[i])
                r = power(tuple(e - (1 if i == k else 0) for i, e in enumerate(g))) * cur[k]
                powers[g] = r
            return r

        E = []
        for part in parts:
            acc = TruncatedSeries.zero(P, deg, exact=False)
            for g, coef in part.items():
                if sum(g) > deg:
                    continue
                acc = acc + coef.truncate(deg) * power(g)
            E.append(acc.homogeneous_part(deg))
        if all(e.is_zero() for e in E):
            continue
        new = []
        for r in range(m):
            corr = TruncatedSeries.zero(P, order, exact=False)
            for c in range(m):
                if Ainv[r][c]:
                    corr = corr + TruncatedSeries._make(P, order, E[c]._t, False).scale(Ainv[r][c])
            new.append(psi[r] - corr)
        psi = new
    return SeriesVector([TruncatedSeries._make(P, order, s._t, False) for s in psi], vars=P)


def _split_unknowns(f, p, P, order):
    """Write f(P, X) as sum_g c_g(P) X^g; returns {g: c_g}."""
    out = {}
    for k, c in f._t.items():
        exps = f.vars.unpack(k)
        g = exps[p:]
        pk = P.pack(exps[:p]) if p else 0
        out.setdefault(g, {})[pk] = c
    return {g: TruncatedSeries._make(P, order, t, False) for g, t in out.items()}


def _unit_exps(V, i):
    e = [0] * V
    e[i] = 1
    return tuple(e)


def multiindices(n: int, max_degree: int) -> list[tuple[int, ...]]:
    """All multiindices of length n with |a| <= max_degree, graded-lex."""
    out = [a for a in itertools.product(range(max_degree + 1), repeat=n) if sum(a) <= max_degree]
    out.sort(key=grlex_key)
    return out
