"""Homogeneous multivariate polynomials (sparse) and univariate polynomials (dense).

Monomial order is graded lexicographic with the first variable largest;
all serialization is normalized against this order.
"""

from __future__ import annotations

from functools import lru_cache

from .field import FieldError

VARS_X = ("x0", "x1", "x2")
VARS_ST = ("s", "t")
VARS_L = ("l0", "l1", "l2")
VARS_XI = ("xi00", "xi01", "xi02", "xi11", "xi12", "xi22")
# internal: pairs of P^1 points, used for symmetric-function reductions
VARS_PAIR = ("s1", "t1", "s2", "t2")


class PolyError(ValueError):
    pass


@lru_cache(maxsize=None)
def mono_basis(nvars: int, d: int) -> tuple:
    """Exponent tuples of total degree d, in descending grlex order."""
    if d < 0:
        return ()

    def gen(nv, total):
        if nv == 1:
            yield (total,)
            return
        for e in range(total, -1, -1):
            for rest in gen(nv - 1, total - e):
                yield (e,) + rest

    return tuple(gen(nvars, d))


@lru_cache(maxsize=None)
def mono_index(nvars: int, d: int) -> dict:
    return {m: i for i, m in enumerate(mono_basis(nvars, d))}


def mono_count(nvars: int, d: int) -> int:
    if d < 0:
        return 0
    if nvars == 2:
        return d + 1
    if nvars == 3:
        return (d + 1) * (d + 2) // 2
    return len(mono_basis(nvars, d))


def _mono_str(vars_, exps):
    parts = []
    for v, e in zip(vars_, exps):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


class HomPoly:
    """A homogeneous polynomial with exact coefficients.

    The zero polynomial has an empty coefficient map and may carry
    degree None, in which case it is compatible with any degree.
    """

    __slots__ = ("field", "vars", "degree", "coeffs")

    def __init__(self, field, vars_, degree, coeffs):
        self.field = field
        self.vars = tuple(vars_)
        clean = {}
        for m, c in coeffs.items():
            c = field.normalize(c)
            if not field.is_zero(c):
                if len(m) != len(self.vars):
                    raise PolyError(f"exponent tuple {m} does not match variables {self.vars}")
                if sum(m) != degree:
                    raise PolyError(f"monomial {m} has degree {sum(m)}, expected {degree}")
                clean[tuple(m)] = c
        self.coeffs = clean
        self.degree = None if not clean and degree is None else degree

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, field, vars_, degree=None):
        return cls(field, vars_, degree, {})

    @classmethod
    def constant(cls, field, vars_, value):
        return cls(field, vars_, 0, {(0,) * len(vars_): value})

    @classmethod
    def variable(cls, field, vars_, i):
        e = [0] * len(vars_)
        e[i] = 1
        return cls(field, vars_, 1, {tuple(e): field.one})

    @classmethod
    def linear_form(cls, field, vars_, coeffs_vec):
        d = {}
        for i, c in enumerate(coeffs_vec):
            e = [0] * len(vars_)
            e[i] = 1
            d[tuple(e)] = c
        return cls(field, vars_, 1, d)

    @classmethod
    def from_coeff_vector(cls, field, vars_, degree, vec):
        basis = mono_basis(len(vars_), degree)
        return cls(field, vars_, degree, dict(zip(basis, vec)))

    # -- basic queries ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff_vector(self, degree=None):
        d = self.degree if degree is None else degree
        vec = [self.field.zero] * mono_count(len(self.vars), d)
        idx = mono_index(len(self.vars), d)
        for m, c in self.coeffs.items():
            vec[idx[m]] = c
        return vec

    def lead_monomial(self):
        if not self.coeffs:
            return None
        return max(self.coeffs)

    def lead_normalized(self) -> "HomPoly":
        if not self.coeffs:
            return self
        inv = self.field.inv(self.coeffs[self.lead_monomial()])
        return self.scale(inv)

    def _require_compatible(self, other):
        if self.field != other.field or self.vars != other.vars:
            raise PolyError("polynomials live in different rings")

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        self._require_compatible(other)
        if self.is_zero() and self.degree is None:
            return other
        if other.is_zero() and other.degree is None:
            return self
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise PolyError(f"cannot add degrees {self.degree} and {other.degree}")
        deg = self.degree if not self.is_zero() else other.degree
        f = self.field
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = f.add(out.get(m, f.zero), c)
        return HomPoly(f, self.vars, deg, out)

    def __neg__(self):
        f = self.field
        return HomPoly(f, self.vars, self.degree, {m: f.neg(c) for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "HomPoly":
        f = self.field
        c = f.normalize(c)
        if f.is_zero(c):
            return HomPoly.zero(f, self.vars, self.degree)
        return HomPoly(f, self.vars, self.degree, {m: f.mul(v, c) for m, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, HomPoly):
            return self.scale(other)
        self._require_compatible(other)
        if self.is_zero() or other.is_zero():
            deg = None
            if self.degree is not None and other.degree is not None:
                deg = self.degree + other.degree
            return HomPoly.zero(self.field, self.vars, deg)
        f = self.field
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                prod = f.mul(c1, c2)
                if m in out:
                    out[m] = f.add(out[m], prod)
                else:
                    out[m] = prod
        return HomPoly(f, self.vars, self.degree + other.degree, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise PolyError("negative power")
        result = HomPoly.constant(self.field, self.vars, self.field.one)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, HomPoly):
            return NotImplemented
        if self.field != other.field or self.vars != other.vars:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.vars, self.degree, frozenset(self.coeffs.items())))

    # -- evaluation and substitution ---------------------------------------
    def evaluate(self, point):
        f = self.field
        total = f.zero
        for m, c in self.coeffs.items():
            term = c
            for xv, e in zip(point, m):
                for _ in range(e):
                    term = f.mul(term, xv)
            total = f.add(total, term)
        return total

    def substitute(self, new_vars, images):
        """Substitute images[i] (all of one common degree) for variable i."""
        if len(images) != len(self.vars):
            raise PolyError("wrong number of substitution images")
        f = self.field
        degs = {g.degree for g in images if not g.is_zero()}
        if len(degs) > 1:
            raise PolyError("substitution images must share a degree")
        gdeg = degs.pop() if degs else 1
        if self.is_zero():
            deg = None if self.degree is None else self.degree * gdeg
            return HomPoly.zero(f, tuple(new_vars), deg)
        out = HomPoly.zero(f, tuple(new_vars), self.degree * gdeg)
        for m, c in self.coeffs.items():
            term = HomPoly.constant(f, tuple(new_vars), c)
            for g, e in zip(images, m):
                for _ in range(e):
                    term = term * g
            if term.degree is None:
                term = HomPoly.zero(f, tuple(new_vars), self.degree * gdeg)
            out = out + term
        return out

    def diff(self, i: int) -> "HomPoly":
        f = self.field
        out = {}
        for m, c in self.coeffs.items():
            if m[i] == 0:
                continue
            dm = list(m)
            dm[i] -= 1
            out[tuple(dm)] = f.mul(c, f.normalize(m[i]))
        deg = None if self.degree is None else max(self.degree - 1, 0)
        return HomPoly(f, self.vars, deg, out)

    def restrict_pencil(self, base, direction) -> "UniPoly":
        """Evaluate at base + t*direction, giving a univariate polynomial in t."""
        f = self.field
        acc = UniPoly(f, [])
        for m, c in self.coeffs.items():
            term = UniPoly(f, [c])
            for b, d, e in zip(base, direction, m):
                lin = UniPoly(f, [b, d])
                for _ in range(e):
                    term = term * lin
            acc = acc + term
        return acc

    def divide_exact(self, divisor: "HomPoly") -> "HomPoly":
        """Exact division; raises if the divisor does not divide evenly."""
        self._require_compatible(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            deg = None
            if self.degree is not None:
                deg = self.degree - divisor.degree
            return HomPoly.zero(self.field, self.vars, deg)
        f = self.field
        qdeg = self.degree - divisor.degree
        if qdeg < 0:
            raise PolyError("not divisible: degree too small")
        rem = dict(self.coeffs)
        dl = divisor.lead_monomial()
        dl_c = divisor.coeffs[dl]
        quo = {}
        while rem:
            lead = max(rem)
            qm = tuple(a - b for a, b in zip(lead, dl))
            if any(e < 0 for e in qm):
                raise PolyError("not divisible")
            qc = f.div(rem[lead], dl_c)
            quo[qm] = qc
            for m, c in divisor.coeffs.items():
                mm = tuple(a + b for a, b in zip(qm, m))
                nv = f.sub(rem.get(mm, f.zero), f.mul(qc, c))
                if f.is_zero(nv):
                    rem.pop(mm, None)
                else:
                    rem[mm] = nv
        return HomPoly(f, self.vars, qdeg, quo)

    # -- serialization ------------------------------------------------------
    def to_json(self, normalized=True):
        p = self.lead_normalized() if normalized else self
        items = sorted(p.coeffs.items(), reverse=True)
        return {",".join(str(e) for e in m): p.field.coeff_str(c) for m, c in items}

    @classmethod
    def from_json(cls, field, vars_, degree, obj):
        coeffs = {}
        for key, val in obj.items():
            m = tuple(int(x) for x in key.split(","))
            coeffs[m] = field.parse_coeff(val)
        return cls(field, vars_, degree, coeffs)

    def __str__(self):
        if not self.coeffs:
            return "0"
        f = self.field
        parts = []
        for m, c in sorted(self.coeffs.items(), reverse=True):
            ms = _mono_str(self.vars, m)
            cs = f.coeff_str(c)
            if ms:
                parts.append(ms if cs == "1" else f"{cs}*{ms}")
            else:
                parts.append(cs)
        return " + ".join(parts)

    __repr__ = __str__


def parse_poly(field, vars_, text: str) -> HomPoly:
    """Parse integer-coefficient homogeneous polynomials like 'x0^2 + 3*x1*x2'."""
    s = text.replace(" ", "")
    if s in ("", "0"):
        return HomPoly.zero(field, vars_)
    # split into signed terms
    terms = []
    cur, sign = "", 1
    for i, ch in enumerate(s):
        if ch in "+-" and i > 0 and s[i - 1] not in "+-*^":
            terms.append((sign, cur))
            sign = 1 if ch == "+" else -1
            cur = ""
        elif ch in "+-" and cur == "":
            sign *= 1 if ch == "+" else -1
        else:
            cur += ch
    terms.append((sign, cur))
    vidx = {v: i for i, v in enumerate(vars_)}
    coeffs = {}
    degree = None
    for sign, term in terms:
        if term == "":
            raise PolyError(f"empty term in {text!r}")
        coeff = field.normalize(sign)
        exps = [0] * len(vars_)
        for factor in term.split("*"):
            if not factor:
                raise PolyError(f"bad term {term!r}")
            if factor[0].isdigit():
                coeff = field.mul(coeff, field.parse_coeff(factor))
                continue
            if "^" in factor:
                name, _, power = factor.partition("^")
                e = int(power)
            else:
                name, e = factor, 1
            if name not in vidx:
                raise PolyError(f"unknown variable {name!r} (expected one of {vars_})")
            exps[vidx[name]] += e
        d = sum(exps)
        if degree is None:
            degree = d
        elif degree != d and not field.is_zero(coeff):
            raise PolyError(f"{text!r} is not homogeneous ({d} vs {degree})")
        key = tuple(exps)
        coeffs[key] = field.add(coeffs.get(key, field.zero), coeff)
    return HomPoly(field, vars_, degree, coeffs)


class UniPoly:
    """Dense univariate polynomial with exact coefficients."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        cs = [field.normalize(c) for c in coeffs]
        while cs and field.is_zero(cs[-1]):
            cs.pop()
        self.coeffs = cs

    @classmethod
    def zero(cls, field):
        return cls(field, [])

    @classmethod
    def monomial(cls, field, coeff, power):
        return cls(field, [field.zero] * power + [coeff])

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else None

    def __add__(self, other):
        f = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for i in range(n):
            a = self.coeffs[i] if i < len(self.coeffs) else f.zero
            b = other.coeffs[i] if i < len(other.coeffs) else f.zero
            out.append(f.add(a, b))
        return UniPoly(f, out)

    def __neg__(self):
        f = self.field
        return UniPoly(f, [f.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        f = self.field
        if not isinstance(other, UniPoly):
            return UniPoly(f, [f.mul(c, f.normalize(other)) for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return UniPoly.zero(f)
        out = [f.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if f.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = f.add(out[i + j], f.mul(a, b))
        return UniPoly(f, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, UniPoly)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def evaluate(self, t):
        f = self.field
        acc = f.zero
        for c in reversed(self.coeffs):
            acc = f.add(f.mul(acc, t), c)
        return acc

    def derivative(self):
        f = self.field
        return UniPoly(f, [f.mul(c, f.normalize(i)) for i, c in enumerate(self.coeffs) if i > 0])

    def divide_linear_root(self, t0):
        """Divide by (t - t0); requires t0 to be a root."""
        f = self.field
        if self.is_zero():
            raise PolyError("cannot deflate the zero polynomial")
        out = [f.zero] * (len(self.coeffs) - 1)
        carry = f.zero
        for i in range(len(self.coeffs) - 1, 0, -1):
            carry = f.add(self.coeffs[i], f.mul(carry, t0))
            out[i - 1] = carry
        rem = f.add(self.coeffs[0], f.mul(carry, t0))
        if not f.is_zero(rem):
            raise PolyError("not a root")
        return UniPoly(f, out)

    def ord_at(self, t0) -> int:
        """Multiplicity of t0 as a root (0 if not a root)."""
        if self.is_zero():
            raise PolyError("order of the zero polynomial is undefined")
        p, mult = self, 0
        while not p.is_zero() and p.field.is_zero(p.evaluate(t0)):
            p = p.divide_linear_root(t0)
            mult += 1
        return mult

    def roots_fp(self):
        """All roots in F_p, found by vectorized evaluation over the field."""
        f = self.field
        if f.kind != "Fp":
            raise FieldError("root scan is only available over F_p")
        if self.is_zero():
            raise PolyError("zero polynomial has every root")
        import numpy as np

        p = f.p
        xs = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(self.coeffs):
            acc = (acc * xs + int(c)) % p
        return [int(r) for r in np.nonzero(acc == 0)[0]]

    def __str__(self):
        if self.is_zero():
            return "0"
        f = self.field
        parts = []
        for i, c in enumerate(self.coeffs):
            if f.is_zero(c):
                continue
            if i == 0:
                parts.append(f.coeff_str(c))
            elif i == 1:
                parts.append(f"{f.coeff_str(c)}*t")
            else:
                parts.append(f"{f.coeff_str(c)}*t^{i}")
        return " + ".join(parts)

    __repr__ = __str__
