import warnings

import pytest

from vertexfusion.field import Field, check_level_parameter, field_from_env


def test_parse_rational():
    F = Field()
    assert F.parse("-3/4") == F(-3, 4)
    assert F.parse("2") == F(2)


def test_generic_kappa_is_symbolic():
    G = Field("generic")
    k = G.parse("generic")
    assert not G.is_rational(k)
    assert G.is_rational(G(3))
    assert (k - 2) / k + 2 / k == G.one


def test_rational_mode_rejects_symbolic():
    with pytest.raises(ValueError):
        Field().parse("kappa")


def test_env_override(monkeypatch):
    monkeypatch.setenv("VERTEXFUSION_FIELD", "generic")
    assert field_from_env().mode == "generic"


def test_level_warning():
    F = Field()
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert not check_level_parameter(F, F(2))
        assert check_level_parameter(F, F(-1))
    assert len(w) == 1
