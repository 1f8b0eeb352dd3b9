"""Exact rational arithmetic on sparse multivariate polynomials over jet coordinates.

Coordinates of a fibred chart with n base coordinates and m field components
are encoded as plain tuples:

* base coordinate  x^mu          -> ("b", mu)
* field component  y^i           -> ("j", i, (0, ..., 0))
* jet variable     z^i_Lambda    -> ("j", i, counts)

where ``counts`` is the derivative multi-index as a length-n tuple of
naturals (the symmetric multi-index convention: only the number of
derivatives per coordinate matters, so the representation is canonical).

A monomial is a tuple of (variable, exponent) pairs with positive exponents,
sorted by the canonical variable ranking: base coordinates first, then jet
variables graded by derivative order, multi-index, field.  A polynomial maps
monomials to nonzero Fraction coefficients; the zero polynomial stores no
terms.  All coefficients are exact rationals with arbitrary-precision
integers; no floating point enters any computation in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Mapping


class EngineError(Exception):
    """Base class for errors raised by this package; carries a stable code."""

    code = "internal"


class NonIntegrableError(EngineError):
    """The scaling integral diverges on some monomial (vertical degree d with d + e + 1 <= 0)."""

    code = "non-integrable"


class ChartMismatchError(EngineError):
    """Operands built over different charts were combined."""

    code = "chart-mismatch"


class InvalidSystemError(EngineError):
    """A balance system or analysis input violates its structural contract."""

    code = "invalid-system"


# ---------------------------------------------------------------------------
# variables
# ---------------------------------------------------------------------------

Var = tuple
Mono = tuple


def base_var(mu: int) -> Var:
    return ("b", mu)


def jet_var(i: int, counts: Iterable[int]) -> Var:
    return ("j", i, tuple(counts))


def is_jet(var: Var) -> bool:
    return var[0] == "j"


def mi_add(counts: tuple, mu: int) -> tuple:
    """Multi-index raised by one derivative along coordinate mu."""
    return counts[:mu] + (counts[mu] + 1,) + counts[mu + 1 :]


def var_order(var: Var) -> int:
    """Derivative order of a variable; 0 for base coordinates and plain fields."""
    return sum(var[2]) if var[0] == "j" else 0


def var_rank(var: Var) -> tuple:
    """Canonical total order on variables.

    Base coordinates rank below all jet variables; jet variables are graded
    by derivative order, then multi-index, then field index, so derivative
    terms lead the fields they derive from in rendered output.
    """
    if var[0] == "b":
        return (0, var[1], (), 0)
    return (1, sum(var[2]), var[2], var[1])


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    exps: dict[Var, int] = dict(a)
    for var, e in b:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted(exps.items(), key=lambda it: var_rank(it[0])))


def mono_degree(m: Mono) -> int:
    return sum(e for _, e in m)


def mono_vertical_degree(m: Mono) -> int:
    """Total exponent over jet variables; base coordinates do not count."""
    return sum(e for var, e in m if var[0] == "j")


def mono_jet_order(m: Mono) -> int:
    return max((var_order(var) for var, _ in m), default=0)


def _mono_cmp(a: Mono, b: Mono) -> int:
    """Graded comparison: total degree first, then exponents read from the
    highest-ranked variable downward (larger exponent wins)."""
    da, db = mono_degree(a), mono_degree(b)
    if da != db:
        return -1 if da < db else 1
    ia, ib = len(a) - 1, len(b) - 1
    while ia >= 0 or ib >= 0:
        ra = var_rank(a[ia][0]) if ia >= 0 else None
        rb = var_rank(b[ib][0]) if ib >= 0 else None
        if rb is None or (ra is not None and ra > rb):
            return 1
        if ra is None or rb > ra:
            return -1
        if a[ia][1] != b[ib][1]:
            return 1 if a[ia][1] > b[ib][1] else -1
        ia -= 1
        ib -= 1
    return 0


MONO_KEY = cmp_to_key(_mono_cmp)


def _mono_div(a: Mono, b: Mono) -> Mono | None:
    """a / b as a monomial, or None if some exponent would go negative."""
    exps = dict(a)
    for var, e in b:
        left = exps.get(var, 0) - e
        if left < 0:
            return None
        if left == 0:
            exps.pop(var, None)
        else:
            exps[var] = left
    return tuple(sorted(exps.items(), key=lambda it: var_rank(it[0])))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Immutable sparse polynomial: monomial -> nonzero Fraction.

    Values are never mutated after construction; every operation returns a
    fresh polynomial, so instances may be shared freely across threads.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, Fraction | int] | None = None):
        clean: dict[Mono, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                c = Fraction(coeff)
                if c:
                    prev = clean.get(mono)
                    if prev is None:
                        clean[mono] = c
                    else:
                        s = prev + c
                        if s:
                            clean[mono] = s
                        else:
                            del clean[mono]
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly":
        return cls()

    @classmethod
    def constant(cls, value: Fraction | int) -> "Poly":
        return cls({(): Fraction(value)})

    @classmethod
    def variable(cls, var: Var) -> "Poly":
        return cls({((var, 1),): Fraction(1)})

    # -- basic protocol ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"Poly({poly_text(self)})"

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Poly | None":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other)
        return None

    def __add__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for mono, c in o.terms.items():
            s = out.get(mono, Fraction(0)) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        p = Poly.__new__(Poly)
        p.terms = {mono: -c for mono, c in self.terms.items()}
        return p

    def __sub__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[Mono, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in o.terms.items():
                mono = mono_mul(ma, mb)
                s = out.get(mono, Fraction(0)) + ca * cb
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of a polynomial by zero")
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, exponent: int) -> "Poly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly.constant(1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- structure -----------------------------------------------------------

    def variables(self) -> set:
        out: set = set()
        for mono in self.terms:
            for var, _ in mono:
                out.add(var)
        return out

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def jet_order(self) -> int:
        """Highest derivative order among jet variables present (0 if none)."""
        return max((mono_jet_order(m) for m in self.terms), default=0)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def sorted_terms(self) -> list:
        """Terms in descending canonical (graded) order; leading term first."""
        return sorted(self.terms.items(), key=lambda it: MONO_KEY(it[0]), reverse=True)

    # -- calculus ------------------------------------------------------------

    def partial(self, var: Var) -> "Poly":
        """Formal partial derivative with respect to a single coordinate."""
        out: dict[Mono, Fraction] = {}
        for mono, coeff in self.terms.items():
            for pos, (v, e) in enumerate(mono):
                if v == var:
                    if e == 1:
                        new = mono[:pos] + mono[pos + 1 :]
                    else:
                        new = mono[:pos] + ((v, e - 1),) + mono[pos + 1 :]
                    s = out.get(new, Fraction(0)) + coeff * e
                    if s:
                        out[new] = s
                    else:
                        out.pop(new, None)
                    break
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    def total_derivative(self, mu: int) -> "Poly":
        """Total derivative d_mu: the base partial plus promotion of every jet
        variable present, z^i_Lambda -> z^i_{Lambda+1_mu}."""
        result = self.partial(base_var(mu))
        for var in self.variables():
            if var[0] != "j":
                continue
            dp = self.partial(var)
            if dp.is_zero:
                continue
            result = result + dp * Poly.variable(jet_var(var[1], mi_add(var[2], mu)))
        return result

    def vertical_components(self) -> dict[int, "Poly"]:
        """Split into homogeneous components by vertical degree (jet-variable
        exponent total); base coordinates count as degree zero."""
        buckets: dict[int, dict[Mono, Fraction]] = {}
        for mono, coeff in self.terms.items():
            buckets.setdefault(mono_vertical_degree(mono), {})[mono] = coeff
        return {d: Poly(t) for d, t in sorted(buckets.items())}

    def vertical_part(self) -> "Poly":
        """The components of vertical degree >= 1."""
        out = {m: c for m, c in self.terms.items() if mono_vertical_degree(m) > 0}
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    def base_part(self) -> "Poly":
        """The vertical-degree-0 component (base coordinates and constants only)."""
        out = {m: c for m, c in self.terms.items() if mono_vertical_degree(m) == 0}
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    def scale_integrate(self, exponent: int) -> "Poly":
        """Exact value of the scaling integral over t in [0, 1] of
        t^exponent * p(x, t*y, t*z): each monomial of vertical degree d picks
        the weight 1/(d + exponent + 1).

        Raises NonIntegrableError when some monomial has d + exponent + 1 <= 0.
        """
        out: dict[Mono, Fraction] = {}
        for mono, coeff in self.terms.items():
            denom = mono_vertical_degree(mono) + exponent + 1
            if denom <= 0:
                raise NonIntegrableError(
                    f"scaling integral diverges: monomial of vertical degree "
                    f"{mono_vertical_degree(mono)} with t-exponent {exponent}"
                )
            out[mono] = coeff * Fraction(1, denom)
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    # -- substitution ----------------------------------------------------------

    def substitute(self, mapping: Mapping[Var, "Poly"]) -> "Poly":
        """Replace variables by polynomials; unmapped variables stay themselves."""
        result = Poly.zero()
        for mono, coeff in self.terms.items():
            term = Poly.constant(coeff)
            for var, e in mono:
                repl = mapping.get(var)
                if repl is None:
                    term = term * Poly.variable(var) ** e
                else:
                    term = term * repl**e
            result = result + term
        return result

    def evaluate(self, assignment: Mapping[Var, Fraction]) -> Fraction:
        """Exact value at a point; every variable present must be assigned."""
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            value = coeff
            for var, e in mono:
                value *= Fraction(assignment[var]) ** e
            total += value
        return total

    # -- exact division ---------------------------------------------------------

    def div_exact(self, divisor: "Poly") -> "Poly | None":
        """Exact polynomial quotient self / divisor, or None when not divisible."""
        if divisor.is_zero:
            raise ZeroDivisionError("division of a polynomial by zero")
        lead_mono = max(divisor.terms, key=MONO_KEY)
        lead_coeff = divisor.terms[lead_mono]
        rem = self
        quot: dict[Mono, Fraction] = {}
        while not rem.is_zero:
            rm = max(rem.terms, key=MONO_KEY)
            q_mono = _mono_div(rm, lead_mono)
            if q_mono is None:
                return None
            q_coeff = rem.terms[rm] / lead_coeff
            quot[q_mono] = quot.get(q_mono, Fraction(0)) + q_coeff
            rem = rem - Poly({q_mono: q_coeff}) * divisor
        return Poly(quot)


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

_NAME_OK = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


def _valid_name(name: str) -> bool:
    return bool(name) and name[0].isalpha() and all(ch in _NAME_OK for ch in name)


@dataclass(frozen=True)
class Chart:
    """A fibred chart: named base coordinates, named field components and a
    polynomial volume density in the base coordinates (default 1)."""

    base_names: tuple
    field_names: tuple
    rho: Poly = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "base_names", tuple(self.base_names))
        object.__setattr__(self, "field_names", tuple(self.field_names))
        if self.rho is None:
            object.__setattr__(self, "rho", Poly.constant(1))
        if not self.base_names or not self.field_names:
            raise InvalidSystemError("a chart needs at least one base coordinate and one field")
        names = self.base_names + self.field_names
        if len(set(names)) != len(names):
            raise InvalidSystemError("chart names must be distinct")
        for name in names:
            if not _valid_name(name):
                raise InvalidSystemError(
                    f"invalid name {name!r}: names are letters followed by letters/digits"
                )
        if self.rho.is_zero:
            raise InvalidSystemError("the volume density must not be the zero polynomial")
        for var in self.rho.variables():
            if var[0] != "b" or var[1] >= self.n:
                raise InvalidSystemError("the volume density may only involve base coordinates")

    @property
    def n(self) -> int:
        return len(self.base_names)

    @property
    def m(self) -> int:
        return len(self.field_names)

    def zero_index(self) -> tuple:
        return (0,) * self.n

    # polynomial constructors bound to this chart
    def x(self, mu: int) -> Poly:
        self._check_base(mu)
        return Poly.variable(base_var(mu))

    def field(self, i: int) -> Poly:
        self._check_field(i)
        return Poly.variable(jet_var(i, self.zero_index()))

    def jet(self, i: int, counts: Iterable[int]) -> Poly:
        counts = tuple(counts)
        self._check_field(i)
        if len(counts) != self.n or any(c < 0 for c in counts):
            raise InvalidSystemError(f"multi-index {counts} does not fit a chart with n={self.n}")
        return Poly.variable(jet_var(i, counts))

    def _check_base(self, mu: int) -> None:
        if not 0 <= mu < self.n:
            raise InvalidSystemError(f"base index {mu} out of range for n={self.n}")

    def _check_field(self, i: int) -> None:
        if not 0 <= i < self.m:
            raise InvalidSystemError(f"field index {i} out of range for m={self.m}")

    def validate_poly(self, p: Poly) -> None:
        """Check that every variable of p belongs to this chart."""
        for var in p.variables():
            if var[0] == "b":
                self._check_base(var[1])
            else:
                self._check_field(var[1])
                if len(var[2]) != self.n:
                    raise InvalidSystemError(
                        f"jet multi-index {var[2]} does not fit a chart with n={self.n}"
                    )

    def var_name(self, var: Var) -> str:
        if var[0] == "b":
            return self.base_names[var[1]]
        i, counts = var[1], var[2]
        if not any(counts):
            return self.field_names[i]
        suffix = "".join(self.base_names[mu] * c for mu, c in enumerate(counts))
        return f"{self.field_names[i]}_{suffix}"


def _generic_name(var: Var) -> str:
    if var[0] == "b":
        return f"x{var[1]}"
    i, counts = var[1], var[2]
    if not any(counts):
        return f"y{i}"
    suffix = "".join(f"{mu}" * c for mu, c in enumerate(counts))
    return f"y{i}_d{suffix}"


def poly_text(p: Poly, chart: Chart | None = None) -> str:
    """Canonical text rendering: terms in descending graded order, rationals
    as p/q, factors separated by spaces (juxtaposition parses as product)."""
    if p.is_zero:
        return "0"
    name = chart.var_name if chart is not None else _generic_name
    pieces: list[str] = []
    for idx, (mono, coeff) in enumerate(p.sorted_terms()):
        factors = " ".join(
            name(var) if e == 1 else f"{name(var)}^{e}" for var, e in mono
        )
        mag = abs(coeff)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = factors
        else:
            body = f"{mag} {factors}"
        if idx == 0:
            pieces.append(f"-{body}" if coeff < 0 else body)
        else:
            pieces.append(f" - {body}" if coeff < 0 else f" + {body}")
    return "".join(pieces)
