"""Formal calculus on the thrice-punctured sphere: the function ring, its
expansions at the punctures 0, z and infinity, residues, and truncated
Laurent series with explicit validity windows."""

from .field import QQ_FIELD

PUNCTURES = ("0", "z", "inf")


class WindowError(ValueError):
    """A coefficient was requested outside the known validity window."""


def binom(n, i, field=QQ_FIELD):
    """Generalized binomial coefficient C(n, i) = n(n-1)...(n-i+1)/i!."""
    if i < 0:
        return field.zero
    num = field.one
    for j in range(i):
        num = num * field(n - j) / field(j + 1)
    return num


def binomial_coefficients(n, count, field=QQ_FIELD):
    if count < 1:
        raise ValueError("count must be at least 1")
    return [binom(n, i, field) for i in range(count)]


class TruncatedLaurentSeries:
    """Laurent series known in the window ``[low, order]``.

    Coefficients of modes above ``order`` are unknown (``order=None`` means the
    series is exact, e.g. a Laurent polynomial).  Modes below ``low`` are zero.
    """

    __slots__ = ("coeffs", "low", "order", "field")

    def __init__(self, coeffs, order, field=QQ_FIELD, low=None):
        self.field = field
        c = {}
        for n, x in coeffs.items():
            if order is not None and n > order:
                continue
            if x != 0:
                c[n] = x
        self.coeffs = c
        if low is None:
            low = min(c) if c else (order if order is not None else 0)
        if c and min(c) < low:
            raise ValueError("coefficient below declared lowest mode")
        self.low = low
        self.order = order

    @classmethod
    def polynomial(cls, coeffs, field=QQ_FIELD):
        return cls(coeffs, None, field)

    def __repr__(self):
        return f"TruncatedLaurentSeries({self.coeffs}, order={self.order})"

    def __getitem__(self, n):
        if self.order is not None and n > self.order:
            raise WindowError(f"mode {n} beyond truncation order {self.order}")
        return self.coeffs.get(n, self.field.zero)

    def known(self, n):
        return self.order is None or n <= self.order

    def _min_order(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        c = dict(self.coeffs)
        for n, x in other.coeffs.items():
            c[n] = c.get(n, 0) + x
        order = self._min_order(self.order, other.order)
        return TruncatedLaurentSeries(c, order, self.field, min(self.low, other.low))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return TruncatedLaurentSeries({n: s * x for n, x in self.coeffs.items()},
                                      self.order, self.field, self.low)

    def __mul__(self, other):
        if not isinstance(other, TruncatedLaurentSeries):
            return self.scale(other)
        # the product is known up to min(o1 + low2, o2 + low1)
        o1 = None if self.order is None else self.order + other.low
        o2 = None if other.order is None else other.order + self.low
        order = self._min_order(o1, o2)
        c = {}
        for n, x in self.coeffs.items():
            for m, y in other.coeffs.items():
                k = n + m
                if order is not None and k > order:
                    continue
                c[k] = c.get(k, 0) + x * y
        return TruncatedLaurentSeries(c, order, self.field, self.low + other.low)

    __rmul__ = scale

    def derivative(self):
        c = {n - 1: self.field(n) * x for n, x in self.coeffs.items() if n != 0}
        order = None if self.order is None else self.order - 1
        return TruncatedLaurentSeries(c, order, self.field, self.low - 1)

    def residue(self):
        return self[-1]

    def is_zero_in_window(self):
        return not self.coeffs

    def truncate(self, order):
        if self.order is not None and order > self.order:
            raise WindowError("cannot extend a truncated series")
        return TruncatedLaurentSeries(self.coeffs, order, self.field, self.low)


def geometric_power(c, b, length, field=QQ_FIELD):
    """Coefficients of (1 - c t)^(-b) up to t^(length-1)."""
    out = []
    ck = field.one
    for i in range(length):
        out.append(binom(b + i - 1, i, field) * ck)
        ck = ck * c
    return out


class RegularFunction:
    """An element ``P(t) / (t^a (t - z)^b)`` of F[t, 1/t, 1/(t - z)].

    ``numerator`` maps exponents (possibly negative) to scalars; negative
    exponents are absorbed into the pole order at 0.  The stored form shares
    no factor ``t`` or ``(t - z)`` between numerator and denominator.
    """

    __slots__ = ("num", "pole0", "polez", "z", "field")

    def __init__(self, numerator, pole0=0, polez=0, z=None, field=QQ_FIELD):
        self.field = field
        self.z = field.one if z is None else field(z)
        if self.z == 0:
            raise ValueError("z must be nonzero")
        num = {e: field(x) for e, x in numerator.items() if x != 0}
        if num and min(num) < 0:
            s = -min(num)
            num = {e + s: x for e, x in num.items()}
            pole0 += s
        if pole0 < 0 or polez < 0:
            raise ValueError("pole orders must be natural numbers")
        self.num, self.pole0, self.polez = _canonical(num, pole0, polez, self.z)

    @classmethod
    def monomial(cls, m, k=0, z=None, field=QQ_FIELD, coef=1):
        """``coef * t^m (t - z)^k`` for integers m, k."""
        zz = field.one if z is None else field(z)
        if k >= 0:
            num = {}
            for j in range(k + 1):
                num[m + j] = field(coef) * binom(k, j, field) * (-zz) ** (k - j)
            return cls(num, 0, 0, zz, field)
        return cls({m: field(coef)}, 0, -k, zz, field)

    def __repr__(self):
        return f"RegularFunction({self.num}, pole0={self.pole0}, polez={self.polez}, z={self.z})"

    def _same(self, other):
        if self.z != other.z:
            raise ValueError("functions on different spheres")

    def __eq__(self, other):
        return (isinstance(other, RegularFunction) and self.z == other.z and
                self.num == other.num and self.pole0 == other.pole0 and
                self.polez == other.polez)

    def __hash__(self):
        return hash((tuple(sorted(self.num.items())), self.pole0, self.polez))

    def __mul__(self, other):
        if not isinstance(other, RegularFunction):
            return RegularFunction({e: other * x for e, x in self.num.items()},
                                   self.pole0, self.polez, self.z, self.field)
        self._same(other)
        num = _pmul(self.num, other.num)
        return RegularFunction(num, self.pole0 + other.pole0,
                               self.polez + other.polez, self.z, self.field)

    __rmul__ = __mul__

    def __add__(self, other):
        self._same(other)
        a0, az = max(self.pole0, other.pole0), max(self.polez, other.polez)
        n1 = self._lift(a0, az)
        n2 = other._lift(a0, az)
        num = dict(n1)
        for e, x in n2.items():
            num[e] = num.get(e, 0) + x
        return RegularFunction(num, a0, az, self.z, self.field)

    def __neg__(self):
        return self * self.field(-1)

    def __sub__(self, other):
        return self + (-other)

    def _lift(self, a0, az):
        num = {e + (a0 - self.pole0): x for e, x in self.num.items()}
        lin = {1: self.field.one, 0: -self.z}
        for _ in range(az - self.polez):
            num = _pmul(num, lin)
        return num

    def is_zero(self):
        return not self.num

    def iota(self, at, order):
        """Expansion in the local coordinate at ``at`` through mode ``order``."""
        return iota_expand(self, at, order)

    def valuation(self, at):
        """Lowest mode of the expansion at the given puncture."""
        if not self.num:
            return 0
        if at == "0":
            return min(self.num) - self.pole0
        if at == "z":
            return -self.polez + _order_at(self.num, self.z)
        if at == "inf":
            return -max(self.num) + self.pole0 + self.polez
        raise ValueError(f"unknown puncture {at!r}")


def _pmul(p, q):
    out = {}
    for e, x in p.items():
        for f, y in q.items():
            out[e + f] = out.get(e + f, 0) + x * y
    return {e: x for e, x in out.items() if x != 0}


def _divide_linear(num, z):
    """Divide a polynomial by (t - z) exactly; return None if not divisible."""
    if not num:
        return None
    n = max(num)
    if n == 0:
        return None
    q = {n - 1: num.get(n, 0)}
    for i in range(n - 1, 0, -1):
        q[i - 1] = num.get(i, 0) + z * q[i]
    if num.get(0, 0) + z * q[0] != 0:
        return None
    return {i: x for i, x in q.items() if x != 0}


def _order_at(num, z):
    k = 0
    cur = dict(num)
    while True:
        nxt = _divide_linear(cur, z)
        if nxt is None:
            return k
        cur = nxt
        k += 1


def _canonical(num, pole0, polez, z):
    if not num:
        return {}, 0, 0
    m = min(num)
    s = min(m, pole0)
    if s > 0:
        num = {e - s: x for e, x in num.items()}
        pole0 -= s
    while polez > 0:
        nxt = _divide_linear(num, z)
        if nxt is None:
            break
        num = nxt
        polez -= 1
    return num, pole0, polez


def iota_expand(f, at, order):
    """Expand ``f`` at a puncture of Q(z) in its local coordinate.

    * ``at="0"``: coordinate t, (t - z)^-1 expanded in nonnegative powers of t;
    * ``at="z"``: coordinate t with t^n -> (z + t)^n;
    * ``at="inf"``: coordinate t with t^n -> t^-n.
    """
    field, z = f.field, f.z
    if z == 0:
        raise ValueError("z must be nonzero")
    low = f.valuation(at)
    if order < low:
        raise ValueError(f"order {order} below lowest mode {low}")
    if not f.num:
        return TruncatedLaurentSeries({}, order, field, low)
    if at == "0":
        # P(t) t^-a (t - z)^-b,  (t - z)^-b = (-z)^-b (1 - t/z)^-b
        base = min(f.num) - f.pole0
        length = order - base + 1
        g = geometric_power(1 / z, f.polez, length, field)
        pref = (-z) ** (-f.polez) if f.polez else field.one
        c = {}
        for e, x in f.num.items():
            for i, y in enumerate(g):
                k = e - f.pole0 + i
                if k <= order:
                    c[k] = c.get(k, 0) + pref * x * y
        return TruncatedLaurentSeries(c, order, field, low)
    if at == "z":
        # P(z + t) (z + t)^-a t^-b
        pz = {}
        for e, x in f.num.items():
            for j in range(e + 1):
                pz[j] = pz.get(j, 0) + x * binom(e, j, field) * z ** (e - j)
        length = order + f.polez + 1
        g = [binom(-f.pole0, i, field) * z ** (-f.pole0 - i) for i in range(max(length, 0))]
        c = {}
        for e, x in pz.items():
            for i, y in enumerate(g):
                k = e + i - f.polez
                if k <= order:
                    c[k] = c.get(k, 0) + x * y
        return TruncatedLaurentSeries(c, order, field, low)
    if at == "inf":
        # P(1/t) t^(a+b) (1 - z t)^-b
        shift = f.pole0 + f.polez
        base = -max(f.num) + shift
        length = order - base + 1
        g = geometric_power(z, f.polez, length, field)
        c = {}
        for e, x in f.num.items():
            for i, y in enumerate(g):
                k = -e + shift + i
                if k <= order:
                    c[k] = c.get(k, 0) + x * y
        return TruncatedLaurentSeries(c, order, field, low)
    raise ValueError(f"unknown puncture {at!r}")


def series_residue_pair(g1, g2):
    """{g1, g2} = Res g2 * d(g1)/dt for truncated series."""
    prod = g2 * g1.derivative()
    try:
        return prod.residue()
    except WindowError as exc:
        raise WindowError("window too small to determine the residue") from exc


def residue_pair(f1, f2, at="z"):
    """Residue at a puncture of the one-form f2 df1, in that puncture's coordinate."""
    v1, v2 = f1.valuation(at), f2.valuation(at)
    # d(iota f1) starts at v1 - 1, so f2 is needed through -v1 and f1 through -v2
    e1 = iota_expand(f1, at, max(-v2 + 1, v1))
    e2 = iota_expand(f2, at, max(-v1, v2))
    return series_residue_pair(e1, e2)


def poly_power_xi(xi, power, field=QQ_FIELD):
    """(x + xi)^power as an exact polynomial series; power must be natural."""
    if power < 0:
        raise ValueError("negative powers of (x + xi) are not representable")
    return TruncatedLaurentSeries.polynomial(
        {j: binom(power, j, field) * xi ** (power - j) for j in range(power + 1)}, field)


def vanishing_lemma_hypothesis(f, K, n1, n2, xi, field=QQ_FIELD):
    """Check sum_i C(n2, i)(x + xi)^(n1 + n2 - i) f_{i+k} = 0 for every k.

    ``f`` maps k < K to series (f_k = 0 for k >= K and for missing keys).
    Only coefficients inside every window are compared.
    """
    if not f:
        return True
    for k in range(min(f) - n2, K):
        acc = None
        for i in range(n2 + 1):
            g = f.get(i + k)
            if g is not None:
                term = poly_power_xi(xi, n1 + n2 - i, field) * g * binom(n2, i, field)
                acc = term if acc is None else acc + term
        if acc is not None and not acc.is_zero_in_window():
            return False
    return True


def check_vanishing_lemma(f, K, n1, n2, s, xi, field=QQ_FIELD):
    """Whether (x + xi)^(n1 + n2 + s) f_{K-1-s} vanishes within its window.

    ``f`` maps k < K to series in x; missing keys are zero.
    """
    if any(k >= K for k in f):
        raise ValueError("f_k must vanish for k >= K")
    orders = {g.order for g in f.values()}
    if len(orders) > 1:
        raise ValueError("inconsistent truncation windows")
    g = f.get(K - 1 - s)
    if g is None:
        return True
    return (poly_power_xi(xi, n1 + n2 + s, field) * g).is_zero_in_window()
