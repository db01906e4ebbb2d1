"""Bigraded superform calculus on R^r with polynomial coefficients.

The algebra is the exterior algebra on 2r anticommuting generators
d'x_1..d'x_r, d''x_1..d''x_r; a form of bidegree (p, q) is a sum of
terms  poly * d'x_I ^ d''x_J  with strictly increasing multi-indices.
d' and d'' insert the corresponding generator at the front; J swaps the
two index blocks with the sign (-1)^{pq}.

All coefficients are exact rationals, so every identity test below is
an exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .linalg import is_psd_exact, rank_exact
from .rational import format_rational


class BidegreeError(ValueError):
    pass


# -- polynomials ---------------------------------------------------------------


class Poly:
    """Multivariate polynomial in x_1..x_r with Fraction coefficients,
    stored as exponent-tuple -> coefficient with zeros dropped."""

    __slots__ = ("r", "terms")

    def __init__(self, r: int, terms: dict | None = None):
        self.r = r
        t = {}
        for exp, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                t[tuple(exp)] = c
        self.terms = t

    # construction helpers
    @classmethod
    def const(cls, r: int, c) -> "Poly":
        return cls(r, {(0,) * r: Fraction(c)})

    @classmethod
    def var(cls, r: int, i: int) -> "Poly":
        exp = [0] * r
        exp[i] = 1
        return cls(r, {tuple(exp): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Poly") -> "Poly":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, Fraction(0)) + c
        return Poly(self.r, t)

    def __neg__(self) -> "Poly":
        return Poly(self.r, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.r, {e: c * other for e, c in self.terms.items()})
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, Fraction(0)) + c1 * c2
        return Poly(self.r, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, Poly) and self.r == other.r
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.r, frozenset(self.terms.items())))

    def diff(self, i: int) -> "Poly":
        t = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = t.get(tuple(e2), Fraction(0)) + c * e[i]
        return Poly(self.r, t)

    def eval(self, point) -> Fraction:
        pt = [Fraction(x) for x in point]
        acc = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(pt, e):
                term *= xi ** ei
            acc += term
        return acc

    def substitute_affine(self, affines: list["Poly"]) -> "Poly":
        """Compose with x_i = affines[i] (polynomials in the new variables)."""
        if not affines:
            raise ValueError("need one substitution per variable")
        r2 = affines[0].r
        acc = Poly(r2, {})
        for e, c in self.terms.items():
            term = Poly.const(r2, c)
            for i, ei in enumerate(e):
                for _ in range(ei):
                    term = term * affines[i]
            acc = acc + term
        return acc

    def integrate_box(self, box) -> Fraction:
        """Exact integral over a product of intervals [(lo, hi), ...]."""
        if len(box) != self.r:
            raise ValueError("box dimension mismatch")
        acc = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for (lo, hi), ei in zip(box, e):
                lo, hi = Fraction(lo), Fraction(hi)
                term *= (hi ** (ei + 1) - lo ** (ei + 1)) / (ei + 1)
            acc += term
        return acc

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __repr__(self):
        return f"Poly({format_poly(self)})"


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for e in sorted(p.terms, reverse=True):
        c = p.terms[e]
        factors = [format_rational(c)]
        for i, ei in enumerate(e):
            if ei == 1:
                factors.append(f"x{i + 1}")
            elif ei > 1:
                factors.append(f"x{i + 1}^{ei}")
        parts.append("*".join(factors))
    return " + ".join(parts)


# -- superforms ---------------------------------------------------------------


def _insert_sign(k: int, idx: tuple) -> tuple[int, tuple] | None:
    """Sign and result of sorting d x_k ^ dx_idx; None if k already in idx."""
    if k in idx:
        return None
    below = sum(1 for i in idx if i < k)
    return ((-1) ** below, tuple(sorted(idx + (k,))))


def _merge_sign(a: tuple, b: tuple) -> tuple[int, tuple] | None:
    """Shuffle sign of dx_a ^ dx_b into sorted order; None if they meet."""
    if set(a) & set(b):
        return None
    sign = 1
    merged = list(a)
    for k in b:
        below = sum(1 for i in merged if i > k)
        sign *= (-1) ** below
        merged.append(k)
        merged.sort()
    return sign, tuple(merged)


@dataclass(frozen=True)
class AffineMap:
    """x = A y + b, mapping R^{r_in} -> R^{r_out}."""

    matrix: tuple          # r_out rows, r_in columns, Fractions
    translation: tuple     # length r_out

    @classmethod
    def of(cls, matrix, translation) -> "AffineMap":
        m = tuple(tuple(Fraction(x) for x in row) for row in matrix)
        t = tuple(Fraction(x) for x in translation)
        if len(m) != len(t) or (m and len({len(r) for r in m}) != 1):
            raise ValueError("inconsistent affine map dimensions")
        return cls(m, t)

    @property
    def r_out(self) -> int:
        return len(self.translation)

    @property
    def r_in(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0


class SuperForm:
    """Bigraded (p, q) form; coeffs maps (I, J) to Poly."""

    def __init__(self, r: int, p: int, q: int, coeffs: dict | None = None):
        if not (0 <= p and 0 <= q):
            raise BidegreeError("negative bidegree")
        self.r = r
        self.p = p
        self.q = q
        cs = {}
        for (i, j), poly in (coeffs or {}).items():
            i, j = tuple(i), tuple(j)
            if len(i) != p or len(j) != q:
                raise BidegreeError(f"key ({i},{j}) does not match ({p},{q})")
            if list(i) != sorted(set(i)) or list(j) != sorted(set(j)):
                raise BidegreeError("multi-indices must be strictly increasing")
            if any(k >= r or k < 0 for k in i + j):
                raise BidegreeError("index out of range")
            if not poly.is_zero():
                cs[(i, j)] = poly
        if p > r or q > r:
            cs = {}
        self.coeffs = cs

    @classmethod
    def zero(cls, r: int, p: int = 0, q: int = 0) -> "SuperForm":
        return cls(r, p, q, {})

    @classmethod
    def function(cls, poly: Poly) -> "SuperForm":
        return cls(poly.r, 0, 0, {((), ()): poly})

    @classmethod
    def one(cls, r: int) -> "SuperForm":
        return cls.function(Poly.const(r, 1))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "SuperForm") -> "SuperForm":
        self._match(other)
        cs = dict(self.coeffs)
        for k, poly in other.coeffs.items():
            cs[k] = cs[k] + poly if k in cs else poly
        return SuperForm(self.r, self.p, self.q, cs)

    def __neg__(self) -> "SuperForm":
        return SuperForm(self.r, self.p, self.q,
                         {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "SuperForm") -> "SuperForm":
        return self + (-other)

    def scale(self, c) -> "SuperForm":
        return SuperForm(self.r, self.p, self.q,
                         {k: v * Fraction(c) for k, v in self.coeffs.items()})

    def _match(self, other: "SuperForm"):
        if self.r != other.r:
            raise BidegreeError("ambient dimension mismatch")
        if (self.p, self.q) != (other.p, other.q):
            raise BidegreeError("bidegree mismatch")

    def __eq__(self, other):
        return (isinstance(other, SuperForm) and self.r == other.r
                and (self.p, self.q) == (other.p, other.q)
                and self.coeffs == other.coeffs)

    def __repr__(self):
        return f"SuperForm({format_form(self)})"


def d_prime(alpha: SuperForm) -> SuperForm:
    """d': differentiate coefficients, prepend d'x_k (degree overflow -> 0)."""
    cs: dict = {}
    for (i, j), poly in alpha.coeffs.items():
        for k in range(alpha.r):
            dp = poly.diff(k)
            if dp.is_zero():
                continue
            ins = _insert_sign(k, i)
            if ins is None:
                continue
            sign, i2 = ins
            key = (i2, j)
            add = dp * sign
            cs[key] = cs[key] + add if key in cs else add
    return SuperForm(alpha.r, alpha.p + 1, alpha.q, cs)


def d_second(alpha: SuperForm) -> SuperForm:
    """d'': like d' on the second block, with the crossing sign (-1)^p."""
    sgn_cross = (-1) ** alpha.p
    cs: dict = {}
    for (i, j), poly in alpha.coeffs.items():
        for k in range(alpha.r):
            dp = poly.diff(k)
            if dp.is_zero():
                continue
            ins = _insert_sign(k, j)
            if ins is None:
                continue
            sign, j2 = ins
            key = (i, j2)
            add = dp * (sign * sgn_cross)
            cs[key] = cs[key] + add if key in cs else add
    return SuperForm(alpha.r, alpha.p, alpha.q + 1, cs)


def wedge(alpha: SuperForm, beta: SuperForm) -> SuperForm:
    """(a x' b) with the sign (-1)^{p' q} from moving beta's d'-block past
    alpha's d''-block, plus the shuffle signs inside each block."""
    if alpha.r != beta.r:
        raise BidegreeError("ambient dimension mismatch")
    cross = (-1) ** (beta.p * alpha.q)
    cs: dict = {}
    for (i1, j1), p1 in alpha.coeffs.items():
        for (i2, j2), p2 in beta.coeffs.items():
            mi = _merge_sign(i1, i2)
            mj = _merge_sign(j1, j2)
            if mi is None or mj is None:
                continue
            si, i3 = mi
            sj, j3 = mj
            key = (i3, j3)
            add = (p1 * p2) * (cross * si * sj)
            cs[key] = cs[key] + add if key in cs else add
    return SuperForm(alpha.r, alpha.p + beta.p, alpha.q + beta.q, cs)


def j_involution(alpha: SuperForm) -> SuperForm:
    """J: swap the two index blocks with the sign (-1)^{pq}."""
    sgn = (-1) ** (alpha.p * alpha.q)
    cs = {(j, i): poly * sgn for (i, j), poly in alpha.coeffs.items()}
    return SuperForm(alpha.r, alpha.q, alpha.p, cs)


def pullback(f_map: AffineMap, alpha: SuperForm) -> SuperForm:
    """Substitute coordinates and transform the generators linearly;
    commutes with d' and d''."""
    if alpha.r != f_map.r_out:
        raise BidegreeError("form/map dimension mismatch")
    r2 = f_map.r_in
    affines = [Poly(r2, {tuple(1 if t == s else 0 for t in range(r2)):
                         f_map.matrix[i][s] for s in range(r2)})
               + Poly.const(r2, f_map.translation[i])
               for i in range(f_map.r_out)]

    def gen_pull(i: int, primed: bool) -> SuperForm:
        cs = {}
        for s in range(r2):
            c = f_map.matrix[i][s]
            if c == 0:
                continue
            key = ((s,), ()) if primed else ((), (s,))
            cs[key] = Poly.const(r2, c)
        return SuperForm(r2, 1 if primed else 0, 0 if primed else 1, cs)

    total = SuperForm.zero(r2, alpha.p, alpha.q)
    for (i, j), poly in alpha.coeffs.items():
        term = SuperForm.function(poly.substitute_affine(affines))
        for k in i:
            term = wedge(term, gen_pull(k, True))
        for k in j:
            term = wedge(term, gen_pull(k, False))
        total = total + term
    return total


# -- positivity and convexity ---------------------------------------------------


def hessian_form(psi: Poly) -> SuperForm:
    """d'd'' of a function: coefficients are the Hessian entries."""
    return d_prime(d_second(SuperForm.function(psi)))


@dataclass(frozen=True)
class PositivityVerdict:
    ok: bool
    violations: tuple  # points where the coefficient matrix is not PSD


def _coeff_matrix(alpha: SuperForm) -> list[list[Poly]]:
    if (alpha.p, alpha.q) != (1, 1):
        raise BidegreeError("positivity test needs a (1,1)-form")
    zero = Poly(alpha.r, {})
    m = [[zero] * alpha.r for _ in range(alpha.r)]
    for (i, j), poly in alpha.coeffs.items():
        m[i[0]][j[0]] = poly
    return m


def is_positive_11(alpha: SuperForm, points) -> PositivityVerdict:
    """Pointwise PSD test of the coefficient matrix of a (1,1)-form;
    raises if the matrix is not symmetric as polynomials."""
    m = _coeff_matrix(alpha)
    r = alpha.r
    for i in range(r):
        for j in range(i):
            if m[i][j] != m[j][i]:
                raise ValueError("coefficient matrix is not symmetric")
    bad = []
    for pt in points:
        mat = [[m[i][j].eval(pt) for j in range(r)] for i in range(r)]
        if not is_psd_exact(mat):
            bad.append(tuple(Fraction(x) for x in pt))
    return PositivityVerdict(not bad, tuple(bad))


def restrict_convexity_check(psi: Poly, basis, points) -> PositivityVerdict:
    """Sampled convexity of psi restricted to an affine subspace: PSD test
    of the Hessian compressed to the span of the basis vectors, at each
    sample point (a certificate at those points only)."""
    basis = [[Fraction(x) for x in v] for v in basis]
    if not basis:
        raise ValueError("empty basis")
    if rank_exact(basis) != len(basis):
        raise ValueError("degenerate basis")
    r = psi.r
    hess = [[psi.diff(i).diff(j) for j in range(r)] for i in range(r)]
    bad = []
    for pt in points:
        h = [[hess[i][j].eval(pt) for j in range(r)] for i in range(r)]
        k = len(basis)
        comp = [[sum(basis[a][i] * h[i][j] * basis[b][j]
                     for i in range(r) for j in range(r))
                 for b in range(k)] for a in range(k)]
        if not is_psd_exact(comp):
            bad.append(tuple(Fraction(x) for x in pt))
    return PositivityVerdict(not bad, tuple(bad))


def integrate_box(alpha: SuperForm, box) -> Fraction:
    """Exact integral of an (r, r)-form over a product of intervals."""
    if (alpha.p, alpha.q) != (alpha.r, alpha.r):
        raise BidegreeError("integration needs bidegree (r, r)")
    full = tuple(range(alpha.r))
    poly = alpha.coeffs.get((full, full))
    if poly is None:
        return Fraction(0)
    return poly.integrate_box(box)


# -- textual syntax -------------------------------------------------------------


def format_form(alpha: SuperForm) -> str:
    if alpha.is_zero():
        if (alpha.p, alpha.q) == (0, 0):
            return "0"
        return "0" + f" [bidegree ({alpha.p},{alpha.q})]"
    parts = []
    for (i, j) in sorted(alpha.coeffs):
        poly = alpha.coeffs[(i, j)]
        gens = [f"d'x{k + 1}" for k in i] + [f"d''x{k + 1}" for k in j]
        if gens:
            parts.append(f"({format_poly(poly)}) " + " ^ ".join(gens))
        else:
            parts.append(f"({format_poly(poly)})")
    return " + ".join(parts)


class FormParseError(ValueError):
    pass


class _Tok:
    def __init__(self, text: str):
        self.toks = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
            elif text.startswith("d'x", i) or text.startswith("d''x", i):
                j = i + (4 if text.startswith("d''x", i) else 3)
                k = j
                while k < len(text) and text[k].isdigit():
                    k += 1
                if k == j:
                    raise FormParseError(f"bad generator at {i}")
                self.toks.append(text[i:k])
                i = k
            elif ch.isdigit():
                k = i
                while k < len(text) and text[k].isdigit():
                    k += 1
                self.toks.append(text[i:k])
                i = k
            elif ch == 'x':
                k = i + 1
                while k < len(text) and text[k].isdigit():
                    k += 1
                if k == i + 1:
                    raise FormParseError(f"bad variable at {i}")
                self.toks.append(text[i:k])
                i = k
            elif ch in "+-*/^()":
                self.toks.append(ch)
                i += 1
            else:
                raise FormParseError(f"unexpected character {ch!r} at {i}")
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise FormParseError("unexpected end of input")
        self.pos += 1
        return t


def _parse_poly_expr(tk: _Tok, r: int) -> Poly:
    def atom() -> Poly:
        t = tk.peek()
        if t == '(':
            tk.next()
            p = expr()
            if tk.next() != ')':
                raise FormParseError("expected ')'")
            return p
        if t == '-':
            tk.next()
            return -atom()
        if t is None:
            raise FormParseError("unexpected end in polynomial")
        if t[0].isdigit():
            tk.next()
            return Poly.const(r, int(t))
        if t.startswith('x'):
            tk.next()
            idx = int(t[1:]) - 1
            if not 0 <= idx < r:
                raise FormParseError(f"variable {t} out of range (r={r})")
            return Poly.var(r, idx)
        raise FormParseError(f"unexpected token {t!r} in polynomial")

    def power() -> Poly:
        p = atom()
        while tk.peek() == '^':
            tk.next()
            t = tk.next()
            if not t.isdigit():
                raise FormParseError("exponent must be an integer")
            n = int(t)
            acc = Poly.const(r, 1)
            for _ in range(n):
                acc = acc * p
            p = acc
        return p

    def term() -> Poly:
        p = power()
        while tk.peek() in ('*', '/'):
            op = tk.next()
            q = power()
            if op == '*':
                p = p * q
            else:
                if q.degree() != 0:
                    raise FormParseError("can only divide by a constant")
                c = q.eval([0] * r)
                if c == 0:
                    raise FormParseError("division by zero")
                p = Poly(r, {e: v / c for e, v in p.terms.items()})
        return p

    def expr() -> Poly:
        p = term()
        while tk.peek() in ('+', '-'):
            op = tk.next()
            q = term()
            p = p + q if op == '+' else p - q
        return p

    return expr()


def parse_form(text: str, r: int) -> SuperForm:
    """Parse e.g. "(2*x1^2 + x2) d'x1 ^ d''x2"; terms joined by + or -."""
    tk = _Tok(text)
    total = None

    def parse_term(negate: bool):
        nonlocal total
        t = tk.peek()
        if t == '(':
            # parenthesized coefficient (may itself be the whole term)
            tk.next()
            poly = _parse_poly_expr(tk, r)
            if tk.next() != ')':
                raise FormParseError("expected ')'")
        elif t is not None and (t[0].isdigit() or t.startswith('x')
                                or t == '-'):
            poly = _parse_poly_expr(tk, r)
        else:
            poly = Poly.const(r, 1)
        gens_i, gens_j = [], []
        expect_gen = tk.peek() is not None and tk.peek().startswith("d'")
        while expect_gen:
            t = tk.next()
            if t.startswith("d''x"):
                gens_j.append(int(t[4:]) - 1)
            else:
                gens_i.append(int(t[3:]) - 1)
            if tk.peek() == '^':
                nxt = tk.toks[tk.pos + 1] if tk.pos + 1 < len(tk.toks) else None
                if nxt is not None and nxt.startswith("d'"):
                    tk.next()
                    expect_gen = True
                    continue
            expect_gen = tk.peek() is not None and tk.peek().startswith("d'")
        # assemble with shuffle signs via wedge of generators
        form = SuperForm.function(poly if not negate else -poly)
        for k in gens_i:
            g = SuperForm(r, 1, 0, {((k,), ()): Poly.const(r, 1)})
            form = wedge(form, g)
        for k in gens_j:
            g = SuperForm(r, 0, 1, {((), (k,)): Poly.const(r, 1)})
            form = wedge(form, g)
        if total is None:
            total = form
        else:
            total = total + form

    parse_term(False)
    while tk.peek() in ('+', '-'):
        op = tk.next()
        parse_term(op == '-')
    if tk.peek() is not None:
        raise FormParseError(f"trailing input at token {tk.peek()!r}")
    return total
