"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from spheralg.opalg import normal_form
from spheralg.params import GaussQ, ParamPoly

small_fractions = st.fractions(min_value=-4, max_value=4, max_denominator=6)
gaussq = st.builds(GaussQ, small_fractions, small_fractions)
real_gaussq = st.builds(GaussQ, small_fractions)

param_monos = st.lists(st.tuples(st.sampled_from("abcd"), st.integers(1, 2)), max_size=2, unique_by=lambda t: t[0])


@st.composite
def param_polys(draw, max_terms=3):
    out = ParamPoly()
    for _ in range(draw(st.integers(0, max_terms))):
        term = ParamPoly.const(draw(gaussq))
        for name, e in draw(param_monos):
            term = term * ParamPoly.var(name) ** e
        out = out + term
    return out


generators = st.integers(0, 5)


def words(max_len):
    return st.lists(generators, max_size=max_len).map(tuple)


@st.composite
def raw_sums(draw, max_len=3, max_terms=3, params=False):
    """``[(coefficient, word), ...]`` as accepted by normal_form."""
    coeff = param_polys(max_terms=2) if params else gaussq
    return draw(st.lists(st.tuples(coeff, words(max_len)), min_size=1, max_size=max_terms))


def exprs(max_len=3, max_terms=3, params=False):
    return raw_sums(max_len, max_terms, params).map(normal_form)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=4)
