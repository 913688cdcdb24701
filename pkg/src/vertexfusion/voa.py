"""Vertex operators of V(l, 0) on truncated modules, built from the iterate formula."""

from dataclasses import dataclass, field as dc_field
from math import factorial

from .affine import ContragredientModule, InducedModule, OutOfWindow
from .formal import binom
from .linalg import EchelonBasis, add_into, vec_scale
from .sugawara import Sugawara


class VOAError(ValueError):
    pass


@dataclass
class VertexOperatorSlice:
    """Mode matrices v_n, n in [n_min, n_max], on the in-window part of a module."""

    state: dict
    n_min: int
    n_max: int
    matrices: dict = dc_field(default_factory=dict)

    def __getitem__(self, n):
        if not self.n_min <= n <= self.n_max:
            raise OutOfWindow(f"mode {n} outside the materialized range")
        return self.matrices[n]


class VertexOperators:
    """Y(v, x) for v in the vacuum module V acting on a module W.

    For v = a(-n0) u the modes are
    (a(-n0)u)_m = sum_i C(-n0, i) (-1)^i [a(-n0-i) u_{m+i} - (-1)^{n0} u_{m-n0-i} a(i)],
    and Y(1, x) is the identity.  Results are memoized per (V basis, mode, W basis).
    """

    def __init__(self, V, W=None, sugawara_V=None):
        if not isinstance(V, InducedModule) or V.lowest.dim != 1 or V.lowest.actions:
            raise VOAError("V must be the vacuum module")
        self.V = V
        self.W = V if W is None else W
        self.field = V.field
        self._cache = {}
        self._sugV = sugawara_V

    @property
    def sugV(self):
        if self._sugV is None:
            self._sugV = Sugawara(self.V)
        return self._sugV

    def weight(self, jv):
        return self.V.depths[jv]

    def mode_basis(self, jv, m, jw):
        W = self.W
        f = self.field
        wt = self.V.depths[jv]
        target = W.depths[jw] + wt - m - 1
        if target > W.D:
            raise OutOfWindow(f"mode {m} of a weight-{wt} state exits the window on depth {W.depths[jw]}")
        if target < 0:
            return {}
        key = (jv, m, jw)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        mono, _ = self.V.labels[jv]
        if not mono:
            out = {jw: f.one} if m == -1 else {}
        else:
            (n0, a), rest = mono[0], mono[1:]
            ju = self.V.index[(rest, 0)]
            wtu = self.V.depths[ju]
            w = {jw: f.one}
            out = {}
            sgn = f.one if n0 % 2 == 0 else -f.one
            d = W.depths[jw]
            # first sum: u_{m+i} w vanishes once its depth d + wtu - m - i - 1 < 0
            i = 0
            while d + wtu - m - i - 1 >= 0:
                c = binom(-n0, i, f) * (1 if i % 2 == 0 else -1)
                inner = self.apply_basis(ju, m + i, w)
                if inner:
                    add_into(out, W.act(a, -n0 - i, inner), c)
                i += 1
            # second sum: a(i) w vanishes for i > d
            for i in range(0, d + 1):
                c = binom(-n0, i, f) * (1 if i % 2 == 0 else -1) * sgn
                inner = W.act(a, i, w)
                if inner:
                    add_into(out, self.apply_basis(ju, m - n0 - i, inner), -c)
        self._cache[key] = out
        return out

    def apply_basis(self, jv, m, w):
        out = {}
        for jw, c in w.items():
            add_into(out, self.mode_basis(jv, m, jw), c)
        return out

    def apply(self, v, m, w):
        """v_m w for arbitrary vectors v in V and w in W."""
        out = {}
        for jv, c in v.items():
            add_into(out, self.apply_basis(jv, m, w), c)
        return out

    def slice(self, v, n_min, n_max):
        W = self.W
        s = VertexOperatorSlice(v, n_min, n_max)
        wt = _homogeneous_weight(self.V, v)
        for n in range(n_min, n_max + 1):
            mat = {}
            for j, d in enumerate(W.depths):
                if d + wt - n - 1 <= W.D:
                    col = self.apply(v, n, {j: self.field.one})
                    if col:
                        mat[j] = col
            s.matrices[n] = mat
        return s

    # -- opposite vertex operator ------------------------------------------------

    def L1_powers(self, v):
        """[v, L(1) v, L(1)^2 v / 2!, ...] until zero."""
        out = []
        cur = v
        j = 0
        while cur:
            out.append(vec_scale(cur, self.field(1, factorial(j))))
            cur = self.sugV.L(1, cur)
            j += 1
        return out

    def opposite(self, v, m, w, inner=None):
        """Y^o_m(v) w = (-1)^wt sum_j (1/j!) (L(1)^j v)_{2wt-m-2-j} w, per weight component."""
        inner = inner or self.apply
        out = {}
        for wt, comp in _weight_components(self.V, v).items():
            sign = 1 if wt % 2 == 0 else -1
            for j, u in enumerate(self.L1_powers(comp)):
                add_into(out, inner(u, 2 * wt - m - 2 - j, w), sign)
        return out

    def double_opposite(self, v, m, w):
        return self.opposite(v, m, w, inner=lambda u, p, x: self.opposite(u, p, x))


def _weight_components(V, v):
    comps = {}
    for j, c in v.items():
        comps.setdefault(V.depths[j], {})[j] = c
    return comps


def _homogeneous_weight(V, v):
    ws = {V.depths[j] for j in v}
    if len(ws) > 1:
        raise VOAError("state is not homogeneous; decompose it first")
    return ws.pop() if ws else 0


def vertex_operator(V, v, W, n_min, n_max):
    return VertexOperators(V, W).slice(v, n_min, n_max)


def opposite_vertex_operator(V, v, W, n_min, n_max, ops=None):
    ops = ops or VertexOperators(V, W)
    s = VertexOperatorSlice(v, n_min, n_max)
    wt = _homogeneous_weight(V, v)
    for n in range(n_min, n_max + 1):
        mat = {}
        for j, d in enumerate(W.depths):
            # Y^o_n shifts depth by n + 1 - wt
            if d + n + 1 - wt <= W.D:
                col = ops.opposite(v, n, {j: W.field.one})
                if col:
                    mat[j] = col
        s.matrices[n] = mat
    return s


def contragredient_action(V, v, W, n_min, n_max, ops=None):
    """Y'_n(v) on W' as the transpose of Y^o_n(v) on W under the graded pairing."""
    op = opposite_vertex_operator(V, v, W, n_min, n_max, ops)
    s = VertexOperatorSlice(v, n_min, n_max)
    for n, mat in op.matrices.items():
        t = {}
        for j, col in mat.items():
            for e, x in col.items():
                t.setdefault(e, {})[j] = x
        s.matrices[n] = t
    return s


def voa_contragredient(W):
    """W' as a module: u(n) acts as -u(-n)^T."""
    return ContragredientModule(W, twist=False)


def conformal_vector(V):
    """omega = (1/2 kappa) sum_i u_i(-1) u^i(-1) 1."""
    g = V.g
    one = V.vacuum()
    out = {}
    basis, dual = g.dual_bases()
    for a, b in zip(basis, dual):
        add_into(out, V.act_element(a, -1, V.act_element(b, -1, one)))
    return vec_scale(out, 1 / (2 * V.kappa))


def generator_state(V, i, n=1):
    """u_i(-n) 1."""
    return V.act(i, -n, V.vacuum())


def check_jacobi(ops, u, v, w, box=3):
    """Borcherds identity coefficients for |l|, |m|, |n| <= box.

    sum_i C(m,i) (u_{l+i} v)_{m+n-i} w
      = sum_i (-1)^i C(l,i) [u_{m+l-i} v_{n+i} w - (-1)^l v_{n+l-i} u_{m+i} w]

    ``ops`` acts on the target module; u, v are states of V.  Coefficients
    touching the window boundary are skipped and returned.
    """
    Vops = ops if ops.W is ops.V else VertexOperators(ops.V, sugawara_V=ops._sugV)
    f = ops.field
    V, W = ops.V, ops.W
    wu, wv = _homogeneous_weight(V, u), _homogeneous_weight(V, v)
    dw = W.depth_of(w)
    checked, skipped = 0, []
    for l in range(-box, box + 1):
        for m in range(-box, box + 1):
            for n in range(-box, box + 1):
                try:
                    lhs = {}
                    i = 0
                    # u_{l+i} v vanishes once wu + wv - l - i - 1 < 0
                    while wu + wv - l - i - 1 >= 0:
                        c = binom(m, i, f)
                        if c != 0:
                            uv = Vops.apply(u, l + i, v)
                            if uv:
                                add_into(lhs, ops.apply(uv, m + n - i, w), c)
                        i += 1
                    rhs = {}
                    top = _rhs_terms(l, wu, wv, dw, m, n)
                    for i in range(top + 1):
                        c = binom(l, i, f) * (1 if i % 2 == 0 else -1)
                        if c == 0:
                            continue
                        add_into(rhs, ops.apply(u, m + l - i, ops.apply(v, n + i, w)), c)
                        sl = 1 if l % 2 == 0 else -1
                        add_into(rhs, ops.apply(v, n + l - i, ops.apply(u, m + i, w)), -c * sl)
                except OutOfWindow:
                    skipped.append((l, m, n))
                    continue
                if lhs != rhs:
                    raise AssertionError(f"Jacobi identity fails at (l,m,n)=({l},{m},{n})")
                checked += 1
    return checked, skipped


def _rhs_terms(l, wu, wv, dw, m, n):
    # v_{n+i} w and u_{m+i} w vanish once their depth drops below zero
    bound = max(dw + wv - n - 1, dw + wu - m - 1, 0)
    if l >= 0:
        return min(l, bound)
    return bound


def c1_quotient_dimension(ops, D=None):
    """dim W_{<=D} / C_1 with C_1 spanned by u_{-1} w, wt u >= 1.

    Returns ``(dimension, stabilized)``; stabilized compares with D - 1.
    """
    V, W = ops.V, ops.W
    D = W.D if D is None else D
    if D < 2:
        raise VOAError("D < 2: V_+ not populated")
    if D > min(W.D, V.D):
        raise OutOfWindow("requested depth exceeds the module windows")
    dims = {}
    for top in (D - 1, D):
        span = EchelonBasis()
        for jv, wt in enumerate(V.depths):
            if wt < 1 or wt > top:
                continue
            for jw, d in enumerate(W.depths):
                if d + wt <= top:
                    x = ops.mode_basis(jv, -1, jw)
                    if x:
                        span.add(x)
        total = sum(1 for d in W.depths if d <= top)
        dims[top] = total - len(span)
    return dims[D], dims[D] == dims[D - 1]


def _in_window_columns(ops, wt, n):
    W = ops.W
    return [j for j, d in enumerate(W.depths) if 0 <= d + wt - n - 1 <= W.D]


def check_generator_modes(ops, modes):
    """Y(a(-1)1, x) has modes a(n) on every in-window basis vector."""
    W, V, f = ops.W, ops.V, ops.field
    checked = 0
    for i in range(V.g.dim):
        v = generator_state(V, i)
        for n in modes:
            for j in _in_window_columns(ops, 1, n):
                if ops.apply(v, n, {j: f.one}) != W.act_basis(i, n, j):
                    raise AssertionError(f"Y(u{i}(-1)1) mode {n} differs on basis {j}")
                checked += 1
    return checked


def check_translation(ops, states, modes):
    """(L(-1) v)_n = -n v_{n-1}."""
    f = ops.field
    checked = 0
    for v in states:
        wt = _homogeneous_weight(ops.V, v)
        if wt + 1 > ops.V.D:
            raise OutOfWindow("L(-1) v leaves the vacuum window")
        lv = ops.sugV.L(-1, v)
        for n in modes:
            # both sides land at depth d + wt - n
            for j in _in_window_columns(ops, wt + 1, n):
                w = {j: f.one}
                lhs = ops.apply(lv, n, w)
                rhs = vec_scale(ops.apply(v, n - 1, w), -n)
                if lhs != rhs:
                    raise AssertionError(f"translation identity fails at mode {n}")
                checked += 1
    return checked


def check_conformal_modes(ops, modes, sugawara_W=None):
    """omega_{k+1} equals the Sugawara operator L_k."""
    W, f = ops.W, ops.field
    sug = sugawara_W or Sugawara(W)
    w0 = conformal_vector(ops.V)
    checked = 0
    for k in modes:
        for j in _in_window_columns(ops, 2, k + 1):
            v = {j: f.one}
            if ops.apply(w0, k + 1, v) != sug.L(k, v):
                raise AssertionError(f"omega mode {k + 1} differs from L_{k}")
            checked += 1
    return checked
