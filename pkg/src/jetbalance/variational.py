"""Variational operators: interior Euler projector, vertical homotopy and the
induced decomposition, Euler-Lagrange map, induced vertical differential, and
higher-order balance residuals.

Conventions, fixed once and used throughout:

* The vertical homotopy weight for a coefficient monomial of vertical degree
  d inside an (r, s)-form is 1/(d + s); the jet variable produced by the
  contraction with the scaling field is appended unscaled.  This makes the
  homotopy identity  omega = d_V(h(omega)) + h(d_V(omega))  an exact
  polynomial identity.
* Functional forms are expressed against the coordinate volume; the chart
  density rho is folded into every component, so all identities stay in
  exact polynomial arithmetic for nonconstant densities.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .jetforms import BidegreeError, Form, _accumulate
from .symcore import (
    Chart,
    EngineError,
    InvalidSystemError,
    Poly,
    jet_var,
    mono_vertical_degree,
)


class NotFunctionalError(EngineError):
    """Input failed the fixed-point test for the image of the interior Euler operator."""

    code = "not-functional"


@dataclass(frozen=True)
class FunctionalForm:
    """An (n, s)-form in the image of the interior Euler operator.

    For s = 1 the form is a source form: a sum of components E_i wedged with
    the order-0 contact generator of field i and the coordinate volume.
    """

    form: Form

    @property
    def chart(self) -> Chart:
        return self.form.chart

    @property
    def is_zero(self) -> bool:
        return self.form.is_zero

    def components(self) -> tuple:
        """The component polynomials (E_1, ..., E_m) of a source form (s = 1)."""
        chart = self.chart
        full_h = tuple(range(chart.n))
        sign = Fraction(-1) ** chart.n
        comps = [Poly.zero()] * chart.m
        for (h, c), coeff in self.form.terms.items():
            if h != full_h or len(c) != 1 or any(c[0][1]):
                raise NotFunctionalError(
                    "component extraction needs a source form: one order-0 "
                    "contact factor against the full horizontal volume"
                )
            comps[c[0][0]] = coeff * sign
        return tuple(comps)

    def __add__(self, other: "FunctionalForm") -> "FunctionalForm":
        return FunctionalForm(self.form + other.form)

    def __sub__(self, other: "FunctionalForm") -> "FunctionalForm":
        return FunctionalForm(self.form - other.form)


def functional_from_components(chart: Chart, components) -> FunctionalForm:
    """Assemble the source form with the given per-field components (already
    weighted by the chart density)."""
    components = tuple(components)
    if len(components) != chart.m:
        raise InvalidSystemError("one component polynomial per field is required")
    sign = Fraction(-1) ** chart.n
    full_h = tuple(range(chart.n))
    terms = {}
    for i, comp in enumerate(components):
        chart.validate_poly(comp)
        coeff = comp * sign
        if not coeff.is_zero:
            terms[(full_h, ((i, chart.zero_index()),))] = coeff
    return FunctionalForm(Form(chart, terms))


def _require_bidegree(form: Form, min_contact: int = 1) -> tuple:
    degree = form.bidegree()
    if degree is None:
        return None
    if degree[1] < min_contact:
        raise BidegreeError(f"operator needs contact degree >= {min_contact}, got {degree}")
    return degree


def interior_euler(form: Form) -> FunctionalForm:
    """Interior Euler operator: projects a homogeneous (n, s)-form, s >= 1,
    onto the functional forms.  The multi-index sum runs over the contact
    generators actually present, which is finite for polynomial forms."""
    if form.is_zero:
        return FunctionalForm(form)
    s_h, s_c = form.bidegree()
    if s_h != form.chart.n or s_c < 1:
        raise BidegreeError(
            f"interior Euler operator needs a homogeneous (n, s) form with s >= 1, got ({s_h}, {s_c})"
        )
    chart = form.chart
    gens = set()
    for _, c in form.terms:
        gens.update(c)
    total = Form.zero(chart)
    for i, counts in sorted(gens):
        piece = form.contract(jet_var(i, counts))
        for mu, reps in enumerate(counts):
            for _ in range(reps):
                piece = piece.total_derivative(mu)
        if sum(counts) % 2:
            piece = -piece
        total = total + Form.contact(chart, i).wedge(piece)
    return FunctionalForm(total * Fraction(1, s_c))


def vertical_homotopy(form: Form) -> Form:
    """Contracting homotopy along the fiber scaling flow: maps (r, s) to
    (r, s-1).  Per contact factor and per coefficient monomial of vertical
    degree d, the factor is removed with its interior-product sign, the
    corresponding jet variable is appended unscaled, and the monomial picks
    the weight 1/(d + s)."""
    if form.is_zero:
        return form
    _, s = form.bidegree()
    if s < 1:
        raise BidegreeError("vertical homotopy needs contact degree >= 1")
    chart = form.chart
    out: dict = {}
    for (h, c), coeff in form.terms.items():
        for q, gen in enumerate(c):
            sign = -1 if (len(h) + q) % 2 else 1
            word = (h, c[:q] + c[q + 1 :])
            zvar = Poly.variable(jet_var(gen[0], gen[1]))
            scaled = Poly(
                {
                    mono: val * Fraction(sign, mono_vertical_degree(mono) + s)
                    for mono, val in coeff.terms.items()
                }
            )
            _accumulate(out, word, scaled * zvar)
    return Form._raw(chart, out)


def vertical_decompose(form: Form) -> tuple:
    """Split a homogeneous (r, s)-form, s >= 1, as
    (exact_part, complement) = (d_V h(form), h(d_V form)); the parts sum back
    to the input exactly."""
    if form.is_zero:
        return form, form
    _, s = form.bidegree()
    if s < 1:
        raise BidegreeError("vertical decomposition needs contact degree >= 1")
    exact_part = vertical_homotopy(form).d_V()
    complement = vertical_homotopy(form.d_V())
    return exact_part, complement


def euler_lagrange(chart: Chart, lagrangian: Poly) -> FunctionalForm:
    """Euler-Lagrange source form of a polynomial Lagrangian: component i is
    the alternating sum over multi-indices of iterated total derivatives of
    the density-weighted partials, expressed against the coordinate volume."""
    chart.validate_poly(lagrangian)
    comps = [Poly.zero()] * chart.m
    for var in sorted(lagrangian.variables()):
        if var[0] != "j":
            continue
        i, counts = var[1], var[2]
        piece = chart.rho * lagrangian.partial(var)
        for mu, reps in enumerate(counts):
            for _ in range(reps):
                piece = piece.total_derivative(mu)
        if sum(counts) % 2:
            piece = -piece
        comps[i] = comps[i] + piece
    return functional_from_components(chart, comps)


def delta_V(functional: FunctionalForm) -> FunctionalForm:
    """Induced vertical differential on functional forms: interior Euler of
    the vertical differential.  Rejects inputs that are not fixed by the
    interior Euler operator."""
    form = functional.form
    if form.is_zero:
        return functional
    try:
        fixed = interior_euler(form)
    except BidegreeError as exc:
        raise NotFunctionalError(str(exc)) from exc
    if fixed.form != form:
        raise NotFunctionalError("input is not in the image of the interior Euler operator")
    return interior_euler(form.d_V())


class HigherBalanceData:
    """Coefficients of a higher-order balance structure: a finite map
    (field, multi-index) -> polynomial, the zero multi-index entry acting as
    the source term of that field's equation."""

    __slots__ = ("chart", "coefficients")

    def __init__(self, chart: Chart, coefficients: Mapping):
        self.chart = chart
        clean = {}
        for (i, counts), p in coefficients.items():
            counts = tuple(counts)
            chart._check_field(i)
            if len(counts) != chart.n or any(c < 0 for c in counts):
                raise InvalidSystemError(
                    f"multi-index {counts} does not fit a chart with n={chart.n}"
                )
            chart.validate_poly(p)
            if not p.is_zero:
                clean[(i, counts)] = p
        self.coefficients = clean

    def source(self, i: int) -> Poly:
        return self.coefficients.get((i, self.chart.zero_index()), Poly.zero())


def higher_balance_residuals(data: HigherBalanceData) -> tuple:
    """Residuals of the higher-order balance equations: for each field, the
    alternating-signed iterated total derivatives of the density-weighted
    flux entries minus the density-weighted source.  With only first-order
    entries this reduces exactly to the first-order balance residuals."""
    chart = data.chart
    residuals = [Poly.zero()] * chart.m
    for (i, counts), coeff in sorted(data.coefficients.items()):
        order = sum(counts)
        if order == 0:
            continue
        piece = coeff * chart.rho
        for mu, reps in enumerate(counts):
            for _ in range(reps):
                piece = piece.total_derivative(mu)
        if (order - 1) % 2:
            piece = -piece
        residuals[i] = residuals[i] + piece
    for i in range(chart.m):
        residuals[i] = residuals[i] - data.source(i) * chart.rho
    return tuple(residuals)
