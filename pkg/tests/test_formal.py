import math
import random

import pytest
import sympy
from hypothesis import given, strategies as st

from vertexfusion.field import QQ_FIELD as F
from vertexfusion.formal import (PUNCTURES, RegularFunction, TruncatedLaurentSeries, WindowError,
                                 binom, check_vanishing_lemma, iota_expand, poly_power_xi,
                                 residue_pair, series_residue_pair, vanishing_lemma_hypothesis)

t = sympy.Symbol("t")


def to_sympy(f):
    z = sympy.Rational(int(f.z.numerator), int(f.z.denominator))
    num = sum(sympy.Rational(int(c.numerator), int(c.denominator)) * t ** e for e, c in f.num.items())
    return num / (t ** f.pole0 * (t - z) ** f.polez), z


def sympy_expansion(f, at, order):
    expr, z = to_sympy(f)
    if at == "z":
        expr = expr.subs(t, z + t)
    elif at == "inf":
        expr = expr.subs(t, 1 / t)
    low = f.valuation(at)
    ser = sympy.series(expr, t, 0, order + 1).removeO()
    ser = sympy.expand(ser)
    return {n: ser.coeff(t, n) for n in range(low, order + 1)}


def functions(z):
    coef = st.integers(-3, 3)
    return st.builds(
        lambda num, a, b: RegularFunction({e: F(c) for e, c in enumerate(num)}, a, b, z=z),
        st.lists(coef, min_size=1, max_size=4), st.integers(0, 3), st.integers(0, 3))


@given(st.integers(-6, 6), st.integers(0, 6))
def test_binom_matches_falling_factorial(n, i):
    expected = sympy.binomial(n, i) if n >= 0 else (-1) ** i * math.comb(-n + i - 1, i)
    assert binom(n, i) == F(int(expected))


@pytest.mark.parametrize("z", [F(1), F(2, 3)])
@pytest.mark.parametrize("at", PUNCTURES)
@given(data=st.data())
def test_iota_matches_sympy_series(z, at, data):
    f = data.draw(functions(z))
    if f.is_zero():
        return
    order = f.valuation(at) + 3
    ours = iota_expand(f, at, order)
    ref = sympy_expansion(f, at, order)
    for n, c in ref.items():
        assert ours[n] == F(sympy.Rational(c).p, sympy.Rational(c).q)


@pytest.mark.parametrize("z", [F(1), F(2, 3)])
@given(data=st.data())
def test_residue_pairing_identities(z, data):
    f1, f2, f3 = (data.draw(functions(z)) for _ in range(3))
    assert residue_pair(f1, f2) == -residue_pair(f2, f1)
    cyc = residue_pair(f1 * f2, f3) + residue_pair(f2 * f3, f1) + residue_pair(f3 * f1, f2)
    assert cyc == 0
    assert sum(residue_pair(f1, f2, at) for at in PUNCTURES) == 0


def test_monomial_expansion_at_z_is_exact():
    z = F(2)
    for k in range(-3, 4):
        f = RegularFunction.monomial(0, k, z=z)
        e = iota_expand(f, "z", 5)
        assert e.coeffs == {k: F(1)}


def test_canonical_form_cancels_factors():
    z = F(1)
    f = RegularFunction({1: F(1), 0: F(-1)}, 0, 1, z=z)  # (t - 1)/(t - 1)
    assert f == RegularFunction({0: F(1)}, z=z)


def test_truncated_series_window():
    s = TruncatedLaurentSeries({-1: F(1), 2: F(3)}, order=2)
    assert s[2] == 3
    with pytest.raises(WindowError):
        s[3]
    prod = s * TruncatedLaurentSeries({0: F(1), 1: F(1)}, order=1)
    assert prod.order == 0
    assert series_residue_pair(s, TruncatedLaurentSeries.polynomial({0: F(1)})) == 0


def test_residue_window_too_small():
    g1 = TruncatedLaurentSeries({0: F(1)}, order=0)
    g2 = TruncatedLaurentSeries({-3: F(1)}, order=-3)
    with pytest.raises(WindowError):
        series_residue_pair(TruncatedLaurentSeries({1: F(1)}, order=1), g2 * g1)


def test_vanishing_lemma_example():
    xi = F(1)
    # f_k = 0 except f_0 = (x + 1)^-? : use f that satisfies the hypothesis trivially
    f = {0: TruncatedLaurentSeries({}, order=5)}
    assert vanishing_lemma_hypothesis(f, 1, 1, 1, xi)
    assert check_vanishing_lemma(f, 1, 1, 1, 0, xi)
    p = poly_power_xi(xi, 2)
    assert p.coeffs == {0: F(1), 1: F(2), 2: F(1)}
    with pytest.raises(ValueError):
        poly_power_xi(xi, -1)


def test_random_pairs_seeded():
    rng = random.Random(5)
    for z in (F(1), F(2, 3)):
        for _ in range(10):
            f = RegularFunction({e: F(rng.randint(-2, 2)) for e in range(3)},
                                rng.randint(0, 3), rng.randint(0, 3), z=z)
            g = RegularFunction({e: F(rng.randint(-2, 2)) for e in range(3)},
                                rng.randint(0, 3), rng.randint(0, 3), z=z)
            assert sum(residue_pair(f, g, at) for at in PUNCTURES) == 0
