"""Exact base fields: rationals, or rational functions in a formal level parameter."""

import os
import warnings

from sympy import QQ, symbols

RATIONAL = "rational"
GENERIC = "generic"


class Field:
    """Thin wrapper around a sympy domain.

    Elements are native domain elements (``gmpy2.mpq`` or sympy ``FracElement``),
    so ordinary ``+ - * /`` work on them directly.
    """

    def __init__(self, mode=RATIONAL):
        if mode not in (RATIONAL, GENERIC):
            raise ValueError(f"unknown field mode {mode!r}")
        self.mode = mode
        if mode == RATIONAL:
            self.dom = QQ
            self.kappa = None
        else:
            self.dom = QQ.frac_field(symbols("kappa"))
            self.kappa = self.dom.gens[0]
        self.zero = self.dom.zero
        self.one = self.dom.one

    def __call__(self, x, d=None):
        if d is not None:
            return self.dom.convert(QQ(x, d))
        if isinstance(x, str):
            return self.parse(x)
        return self.dom.convert(x)

    def __eq__(self, other):
        return isinstance(other, Field) and other.mode == self.mode

    def __hash__(self):
        return hash(self.mode)

    def __repr__(self):
        return f"Field({self.mode!r})"

    def parse(self, s):
        """Parse ``"p/q"``, ``"p"`` or (generic mode) ``"generic"``/``"kappa"``."""
        s = s.strip()
        if s in ("generic", "kappa"):
            if self.kappa is None:
                raise ValueError("symbolic kappa requires the generic field")
            return self.kappa
        if "/" in s:
            p, q = s.split("/")
            return self(int(p), int(q))
        return self(int(s))

    def fmt(self, x):
        return str(x)

    def is_zero(self, x):
        return x == self.zero

    def is_rational(self, x):
        """True when ``x`` is a constant (no kappa dependence)."""
        if self.mode == RATIONAL:
            return True
        return x.numer.is_ground and x.denom.is_ground

    def to_rational(self, x):
        if self.mode == RATIONAL:
            return x
        if not self.is_rational(x):
            raise ValueError(f"{x} is not a constant")
        return QQ(x.numer.LC) / QQ(x.denom.LC)


QQ_FIELD = Field(RATIONAL)


def field_from_env(default=RATIONAL):
    mode = os.environ.get("VERTEXFUSION_FIELD", default)
    return Field(mode)


def check_level_parameter(field, kappa):
    """Warn when a numeric kappa lies in Q>=0 (outside the category's range)."""
    if field.is_rational(kappa):
        k = field.to_rational(kappa)
        if k >= 0:
            warnings.warn(f"kappa = {k} lies in Q>=0", stacklevel=3)
            return False
    return True
