"""Bigraded exterior forms on jet coordinates in the contact basis.

A form is a finite map from basis wedge words to polynomial coefficients.
A word is a pair (hwedge, cwedge):

* hwedge: strictly increasing tuple of base indices, the dx^mu factors;
* cwedge: strictly increasing tuple of contact generators (i, counts),
  each standing for the contact one-form attached to the jet variable
  z^i_counts (the form dz - z dx that vanishes on prolonged sections).

The factor order inside a word is horizontal first, then contact generators
ascending; all antisymmetry signs are normalized into the coefficient at
construction, so equality of forms is map comparison.  The bidegree of a
word is (len(hwedge), len(cwedge)); a Form may mix bidegrees (needed to hold
d = d_H + d_V results), and homogeneous pieces are exposed by accessors.

The metric volume form is not a separate symbol: a top-degree horizontal
term carries the chart density rho inside its coefficient, which reproduces
the density's logarithmic-derivative terms exactly under total derivatives.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .symcore import Chart, ChartMismatchError, EngineError, Poly, Var, mi_add

ContactGen = tuple  # (field index, counts)
Word = tuple  # (hwedge tuple, cwedge tuple)


class BidegreeError(EngineError):
    """A variational operator received a form of the wrong or mixed bidegree."""

    code = "bidegree"


def _merge_parity(before: tuple, after: tuple, item) -> int | None:
    """Inversions incurred by sorting before + (item,) + after, the two outer
    tuples already being strictly increasing; None when item repeats."""
    if item in before or item in after:
        return None
    return sum(1 for g in before if g > item) + sum(1 for g in after if g < item)


class Form:
    """Immutable bigraded exterior form over a fixed chart."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Word, Poly] | None = None):
        self.chart = chart
        clean: dict[Word, Poly] = {}
        if terms:
            for word, coeff in terms.items():
                if coeff.is_zero:
                    continue
                self._validate_word(chart, word)
                prev = clean.get(word)
                total = coeff if prev is None else prev + coeff
                if total.is_zero:
                    clean.pop(word, None)
                else:
                    clean[word] = total
        self.terms = clean

    @staticmethod
    def _validate_word(chart: Chart, word: Word) -> None:
        hwedge, cwedge = word
        if list(hwedge) != sorted(set(hwedge)) or any(
            not 0 <= mu < chart.n for mu in hwedge
        ):
            raise InvalidWord(f"horizontal word {hwedge} is not a strict subset of the chart")
        if list(cwedge) != sorted(set(cwedge)):
            raise InvalidWord(f"contact word {cwedge} is not strictly increasing")
        for i, counts in cwedge:
            if not 0 <= i < chart.m or len(counts) != chart.n:
                raise InvalidWord(f"contact generator ({i}, {counts}) does not fit the chart")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> "Form":
        return cls(chart)

    @classmethod
    def function(cls, chart: Chart, p: Poly) -> "Form":
        """The (0,0)-form with coefficient p."""
        chart.validate_poly(p)
        return cls(chart, {((), ()): p})

    @classmethod
    def dx(cls, chart: Chart, mu: int) -> "Form":
        chart._check_base(mu)
        return cls(chart, {((mu,), ()): Poly.constant(1)})

    @classmethod
    def contact(cls, chart: Chart, i: int, counts=None) -> "Form":
        """The basic contact one-form for field i and multi-index counts."""
        counts = chart.zero_index() if counts is None else tuple(counts)
        chart._check_field(i)
        if len(counts) != chart.n:
            raise InvalidWord(f"multi-index {counts} does not fit the chart")
        return cls(chart, {((), ((i, counts),)): Poly.constant(1)})

    @classmethod
    def coordinate_volume(cls, chart: Chart) -> "Form":
        """dx^0 ^ ... ^ dx^(n-1) with coefficient 1 (no density)."""
        return cls(chart, {(tuple(range(chart.n)), ()): Poly.constant(1)})

    @classmethod
    def volume(cls, chart: Chart) -> "Form":
        """The metric volume form: density rho times the coordinate volume."""
        return cls(chart, {(tuple(range(chart.n)), ()): chart.rho})

    # -- protocol ---------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.chart, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Form({form_text(self)})"

    def _require_same_chart(self, other: "Form") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("forms over different charts cannot be combined")

    # -- linear structure ---------------------------------------------------------

    def __add__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        self._require_same_chart(other)
        out = dict(self.terms)
        for word, coeff in other.terms.items():
            total = out.get(word)
            total = coeff if total is None else total + coeff
            if total.is_zero:
                out.pop(word, None)
            else:
                out[word] = total
        return self._raw(self.chart, out)

    def __neg__(self) -> "Form":
        return self._raw(self.chart, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        if not isinstance(other, Form):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "Form":
        """Coefficient-wise multiplication by a polynomial or rational scalar."""
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        out: dict[Word, Poly] = {}
        for word, coeff in self.terms.items():
            c = coeff * other
            if not c.is_zero:
                out[word] = c
        return self._raw(self.chart, out)

    __rmul__ = __mul__

    @classmethod
    def _raw(cls, chart: Chart, terms: dict) -> "Form":
        f = cls.__new__(cls)
        f.chart = chart
        f.terms = terms
        return f

    # -- bidegree bookkeeping --------------------------------------------------------

    def bidegrees(self) -> set:
        return {(len(h), len(c)) for h, c in self.terms}

    def bidegree(self) -> tuple | None:
        """The (s, r) bidegree of a homogeneous form, None for the zero form.

        Raises BidegreeError when the form mixes bidegrees.
        """
        degrees = self.bidegrees()
        if not degrees:
            return None
        if len(degrees) > 1:
            raise BidegreeError(f"form mixes bidegrees {sorted(degrees)}")
        return next(iter(degrees))

    def piece(self, s: int, r: int) -> "Form":
        out = {w: c for w, c in self.terms.items() if (len(w[0]), len(w[1])) == (s, r)}
        return self._raw(self.chart, out)

    # -- exterior algebra ---------------------------------------------------------------

    def wedge(self, other: "Form") -> "Form":
        self._require_same_chart(other)
        out: dict[Word, Poly] = {}
        for (h1, c1), p1 in self.terms.items():
            for (h2, c2), p2 in other.terms.items():
                sign = -1 if (len(c1) * len(h2)) % 2 else 1
                merged_h = _merge_tuples(h1, h2)
                if merged_h is None:
                    continue
                sgn_h, hw = merged_h
                merged_c = _merge_tuples(c1, c2)
                if merged_c is None:
                    continue
                sgn_c, cw = merged_c
                coeff = p1 * p2 * Fraction(sign * sgn_h * sgn_c)
                _accumulate(out, (hw, cw), coeff)
        return self._raw(self.chart, out)

    # -- differentials ----------------------------------------------------------------------

    def d_V(self) -> "Form":
        """Vertical differential: raises contact degree by one; kills dx and
        the basic contact generators themselves."""
        out: dict[Word, Poly] = {}
        for (h, c), coeff in self.terms.items():
            for var in coeff.variables():
                if var[0] != "j":
                    continue
                dp = coeff.partial(var)
                if dp.is_zero:
                    continue
                gen = (var[1], var[2])
                parity = _merge_parity((), c, gen)
                if parity is None:
                    continue
                parity += len(h)
                word = (h, tuple(sorted(c + (gen,))))
                _accumulate(out, word, dp if parity % 2 == 0 else -dp)
        return self._raw(self.chart, out)

    def total_derivative(self, mu: int) -> "Form":
        """d_mu as a derivation on forms: total derivative of coefficients,
        dx^nu -> 0, contact generator (i, counts) -> (i, counts + 1_mu)."""
        self.chart._check_base(mu)
        out: dict[Word, Poly] = {}
        for (h, c), coeff in self.terms.items():
            _accumulate(out, (h, c), coeff.total_derivative(mu))
            for q, gen in enumerate(c):
                promoted = (gen[0], mi_add(gen[1], mu))
                rest_before, rest_after = c[:q], c[q + 1 :]
                parity = _merge_parity(rest_before, rest_after, promoted)
                if parity is None:
                    continue
                word = (h, tuple(sorted(rest_before + rest_after + (promoted,))))
                _accumulate(out, word, coeff if parity % 2 == 0 else -coeff)
        return self._raw(self.chart, out)

    def d_H(self) -> "Form":
        """Horizontal differential: sum over mu of dx^mu wedge d_mu."""
        out: dict[Word, Poly] = {}
        for mu in range(self.chart.n):
            derived = self.total_derivative(mu)
            for (h, c), coeff in derived.terms.items():
                if mu in h:
                    continue
                parity = sum(1 for hh in h if hh < mu)
                word = (tuple(sorted(h + (mu,))), c)
                _accumulate(out, word, coeff if parity % 2 == 0 else -coeff)
        return self._raw(self.chart, out)

    def d(self) -> "Form":
        """Full exterior derivative, split as d_H + d_V."""
        return self.d_H() + self.d_V()

    # -- contraction -----------------------------------------------------------------------------

    def contract(self, var: Var) -> "Form":
        """Interior product with the coordinate vertical field of a jet variable."""
        if var[0] != "j":
            raise InvalidWord("contraction is defined against jet variables only")
        gen = (var[1], var[2])
        out: dict[Word, Poly] = {}
        for (h, c), coeff in self.terms.items():
            try:
                q = c.index(gen)
            except ValueError:
                continue
            parity = len(h) + q
            word = (h, c[:q] + c[q + 1 :])
            _accumulate(out, word, coeff if parity % 2 == 0 else -coeff)
        return self._raw(self.chart, out)


class InvalidWord(EngineError):
    code = "invalid-form"


def _merge_tuples(a: tuple, b: tuple):
    """Merge strictly increasing tuples, tracking the permutation sign.

    Returns (sign, merged) or None when the tuples share an item.
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    sign = 1
    out = []
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        if a[ia] == b[ib]:
            return None
        if a[ia] < b[ib]:
            out.append(a[ia])
            ia += 1
        else:
            if (len(a) - ia) % 2:
                sign = -sign
            out.append(b[ib])
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return sign, tuple(out)


def _accumulate(out: dict, word: Word, coeff: Poly) -> None:
    if coeff.is_zero:
        return
    prev = out.get(word)
    total = coeff if prev is None else prev + coeff
    if total.is_zero:
        out.pop(word, None)
    else:
        out[word] = total


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lamda", "lambda", "mu", "nu", "xi", "pi", "rho",
    "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega",
}


def _word_key(word: Word):
    h, c = word
    return (len(h) + len(c), len(c), h, c)


def _split_volume(form: Form, word: Word, coeff: Poly):
    """If the word is the full horizontal volume and the coefficient is an
    exact multiple of the chart density, return the quotient (eta detection)."""
    h, c = word
    if h != tuple(range(form.chart.n)):
        return None
    return coeff.div_exact(form.chart.rho)


def form_text(form: Form) -> str:
    """Canonical text rendering of a form; top horizontal factors divisible by
    the density print symbolically as eta."""
    if form.is_zero:
        return "0"
    chart = form.chart
    from .symcore import poly_text

    pieces = []
    for word in sorted(form.terms, key=_word_key):
        coeff = form.terms[word]
        h, c = word
        factors = []
        quotient = _split_volume(form, word, coeff)
        if quotient is not None:
            coeff = quotient
        else:
            factors.extend(f"d{chart.base_names[mu]}" for mu in h)
        for i, counts in c:
            factors.append(f"w({chart.var_name(('j', i, counts))})")
        if quotient is not None:
            factors.append("eta")
        basis = "^".join(factors)
        if coeff == Poly.constant(1):
            pieces.append(basis)
        elif coeff == Poly.constant(-1):
            pieces.append(f"-{basis}")
        else:
            pieces.append(f"({poly_text(coeff, chart)}) {basis}")
    return " + ".join(pieces)


def _latex_name(name: str) -> str:
    return f"\\{name}" if name in _GREEK else name


def poly_latex(p: Poly, chart: Chart) -> str:
    """LaTeX fragment for a polynomial, jet variables as subscripted fields."""
    if p.is_zero:
        return "0"
    pieces = []
    for idx, (mono, coeff) in enumerate(p.sorted_terms()):
        factors = []
        for var, e in mono:
            if var[0] == "b":
                base = _latex_name(chart.base_names[var[1]])
            else:
                i, counts = var[1], var[2]
                base = _latex_name(chart.field_names[i])
                if any(counts):
                    suffix = "".join(
                        _latex_name(chart.base_names[mu]) * c for mu, c in enumerate(counts)
                    )
                    base = f"{base}_{{{suffix}}}"
            factors.append(base if e == 1 else f"{base}^{{{e}}}")
        mag = abs(coeff)
        if mag.denominator == 1:
            mag_tex = str(mag.numerator)
        else:
            mag_tex = f"\\frac{{{mag.numerator}}}{{{mag.denominator}}}"
        if not mono:
            body = mag_tex
        elif mag == 1:
            body = " ".join(factors)
        else:
            body = f"{mag_tex} " + " ".join(factors)
        if idx == 0:
            pieces.append(f"-{body}" if coeff < 0 else body)
        else:
            pieces.append(f" - {body}" if coeff < 0 else f" + {body}")
    return "".join(pieces)


def form_latex(form: Form) -> str:
    if form.is_zero:
        return "0"
    chart = form.chart
    pieces = []
    for word in sorted(form.terms, key=_word_key):
        coeff = form.terms[word]
        h, c = word
        factors = []
        quotient = _split_volume(form, word, coeff)
        if quotient is not None:
            coeff = quotient
        else:
            factors.extend(f"d{_latex_name(chart.base_names[mu])}" for mu in h)
        for i, counts in c:
            gen = f"\\omega^{{{_latex_name(chart.field_names[i])}}}"
            if any(counts):
                suffix = "".join(
                    _latex_name(chart.base_names[mu]) * cnt for mu, cnt in enumerate(counts)
                )
                gen += f"_{{{suffix}}}"
            factors.append(gen)
        if quotient is not None:
            factors.append("\\eta")
        basis = " \\wedge ".join(factors)
        if coeff == Poly.constant(1):
            pieces.append(basis)
        elif coeff == Poly.constant(-1):
            pieces.append(f"-{basis}")
        else:
            pieces.append(f"\\left({poly_latex(coeff, chart)}\\right) {basis}")
    return " + ".join(pieces)
