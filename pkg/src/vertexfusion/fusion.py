"""Two-point fusion on the sphere Q(z) with punctures z, infinity and 0.

Two routes to the fusion space of W1 and W2 live here:

* the annihilator route: Z^N is the dual of (W1 x W2) / G_N (W1 x W2).
  That quotient is realized exactly as the depth-(N-1) truncation of the
  module induced from the tensor product of the lowest spaces, through
  the equivariant map ``KLModel.phi``;
* the compatibility route: functionals satisfying the strong lower
  truncation condition for the generators a(-1)1, together with the
  vanishing of products of lowering Y' modes, solved as an exact kernel
  on a finite tensor window.

Functionals on W1 x W2 are evaluated on basis pairs (j1, j2).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import cached_property

from .affine import InducedModule, LowestSpace, OutOfWindow, vacuum_module
from .formal import RegularFunction, WindowError, binom
from .linalg import EchelonBasis, add_into, nullspace
from .voa import VertexOperators, conformal_vector, generator_state


class FusionError(ValueError):
    pass


def _scalar(field, x):
    return field(x) if isinstance(x, (int, str)) else x


# -- tensor windows and functionals ----------------------------------------------


class TensorWindow:
    """Basis pairs (j1, j2) of W1 x W2 with total depth at most D.

    Pairs are ordered by total depth, then by (j1, j2), so the pairs of
    depth at most d form a prefix.
    """

    def __init__(self, W1, W2, D):
        if D > min(W1.D, W2.D):
            raise FusionError(f"window depth {D} exceeds the module truncation")
        self.W1, self.W2, self.D = W1, W2, D
        p1, p2 = W1.piece_list, W2.piece_list
        pairs = []
        self.prefix = []
        for d in range(D + 1):
            block = [(j1, j2) for d1 in range(d + 1) for j1 in p1[d1] for j2 in p2[d - d1]]
            pairs.extend(sorted(block))
            self.prefix.append(len(pairs))
        self.pairs = pairs
        self.index = {p: i for i, p in enumerate(pairs)}

    def __len__(self):
        return len(self.pairs)

    def depth(self, p):
        return self.W1.depths[p[0]] + self.W2.depths[p[1]]

    def size(self, d):
        """Number of pairs of depth at most d."""
        return self.prefix[d]

    def contains(self, vec):
        return all(p in self.index for p in vec)

    def coordinates(self, vec):
        return {self.index[p]: c for p, c in vec.items()}


class DualFunctional:
    """An element of (W1 x W2)^*, evaluated on vectors {(j1, j2): c}."""

    field = None

    def value(self, p):
        raise NotImplementedError

    def __call__(self, vec):
        total = self.field.zero
        for p, c in vec.items():
            x = self.value(p)
            if x != 0:
                total += c * x
        return total

    def restrict(self, window, d=None):
        """Coordinates on the pairs of ``window`` of depth at most d."""
        n = len(window) if d is None else window.size(d)
        out = {}
        for i in range(n):
            x = self.value(window.pairs[i])
            if x != 0:
                out[i] = x
        return out


class WindowFunctional(DualFunctional):
    """A functional known on a window.

    Outside the window the value is undefined and evaluation raises
    :class:`WindowError`, unless ``extend_by_zero`` declares a finitely
    supported functional.
    """

    def __init__(self, window, values, extend_by_zero=False):
        self.window = window
        self.field = window.W1.field
        self.values = {p: c for p, c in values.items() if c != 0}
        for p in self.values:
            if p not in window.index:
                raise FusionError(f"value on {p} outside the window")
        self.extend_by_zero = extend_by_zero

    @classmethod
    def from_coordinates(cls, window, coords, extend_by_zero=False):
        return cls(window, {window.pairs[i]: c for i, c in coords.items()}, extend_by_zero)

    def value(self, p):
        if p in self.window.index:
            return self.values.get(p, self.field.zero)
        if self.extend_by_zero:
            return self.field.zero
        raise WindowError(f"functional undefined on {p}")


class LazyFunctional(DualFunctional):
    """lambda(w) = evaluate(w), memoized on basis pairs."""

    def __init__(self, field, evaluate):
        self.field = field
        self._evaluate = evaluate
        self._cache = {}

    def value(self, p):
        hit = self._cache.get(p)
        if hit is None:
            hit = self._evaluate({p: self.field.one})
            self._cache[p] = hit
        return hit

    def __call__(self, vec):
        return self._evaluate(vec)


# -- operators on W1 x W2 --------------------------------------------------------


def tensor_mode(W1, W2, a, k, vec):
    """a(-k) x 1 + 1 x a(k): the action of a x t^k on W1 x W2."""
    out = {}
    for (j1, j2), c in vec.items():
        for t, x in W1.act_basis(a, -k, j1).items():
            add_into(out, {(t, j2): x * c})
        for t, x in W2.act_basis(a, k, j2).items():
            add_into(out, {(j1, t): x * c})
    return out


def _expansion(f, at, d):
    return f.iota(at, max(d, f.valuation(at)))


def gamma_vector(W1, W2, a, f, vec):
    """(a x iota_inf f) w1 x w2 + w1 x (a x iota_0 f) w2.

    At infinity a x u^p acts as a(p), at 0 a x t^p acts as a(p); modes
    above the depth of the vector act by zero.
    """
    if not vec:
        return {}
    dmax = max(max(W1.depths[j1], W2.depths[j2]) for j1, j2 in vec)
    e_inf = _expansion(f, "inf", dmax)
    e_0 = _expansion(f, "0", dmax)
    out = {}
    for (j1, j2), c in vec.items():
        d1, d2 = W1.depths[j1], W2.depths[j2]
        for p, x in e_inf.coeffs.items():
            if p <= d1:
                for t, y in W1.act_basis(a, p, j1).items():
                    add_into(out, {(t, j2): x * y * c})
        for p, x in e_0.coeffs.items():
            if p <= d2:
                for t, y in W2.act_basis(a, p, j2).items():
                    add_into(out, {(j1, t): x * y * c})
    return out


def gamma_action(a, f, lam, W1, W2):
    """((a x f) lambda)(w) = -lambda((a x f) w)."""
    return LazyFunctional(lam.field, lambda vec: -lam(gamma_vector(W1, W2, a, f, vec)))


@dataclass
class GammaRGenerator:
    """a x f with f vanishing at the puncture z; such elements generate G_1."""

    a: int
    f: RegularFunction

    def validate(self):
        if self.f.valuation("z") < 1:
            raise FusionError("generator must vanish at z")
        return True


def lift(k, z, field, N=None, shift=None):
    """A function f in R with iota_z f = t^k, optionally modulo t^N.

    The default is the lowest-pole-order lift (t - z)^k.  With ``shift``
    set to a function h regular at z, the lift (t - z)^k + (t - z)^N h is
    returned instead; both act identically on Z^N.
    """
    f = RegularFunction.monomial(0, k, z=z, field=field)
    if shift is not None:
        if N is None:
            raise ValueError("an alternative lift needs N")
        f = f + RegularFunction.monomial(0, N, z=z, field=field) * shift
    return f


# -- Y' and tau from vertex operators ----------------------------------------------


class QzActions:
    """Vertex-operator actions on (W1 x W2)^* for the sphere Q(z).

    For v in V the operator tau(v x t^m (z + t)^(-n-1)) acts by
    lambda -> lambda(tau_vector(v, m, n, .)), where
    tau_vector = sum_i C(m, i) (-z)^i Y^o_{m-n-1-i}(v) w1 x w2
               - (-1)^m sum_i C(m, i) (-1)^i z^(m-i) w1 x v_{i-n-1} w2.
    """

    def __init__(self, W1, W2, z, V=None):
        if W1.g is not W2.g:
            raise FusionError("modules over different algebras")
        self.W1, self.W2 = W1, W2
        self.g = W1.g
        self.field = W1.field
        self.z = _scalar(self.field, z)
        if self.z == 0:
            raise FusionError("z must be nonzero")
        if V is None:
            V = vacuum_module(self.g, W1.kappa, 3)
        self.V = V
        self.ops1 = VertexOperators(V, W1)
        self.ops2 = VertexOperators(V, W2, sugawara_V=self.ops1.sugV)
        self._yo = {}

    @cached_property
    def generators(self):
        """The states a(-1)1 for the basis of g."""
        return [generator_state(self.V, i) for i in range(self.g.dim)]

    @cached_property
    def omega(self):
        return conformal_vector(self.V)

    def vacuum_state(self):
        return self.V.vacuum()

    def _yo_basis(self, jv, q, j1):
        key = (jv, q, j1)
        hit = self._yo.get(key)
        if hit is None:
            one = self.field.one
            hit = self.ops1.opposite({jv: one}, q, {j1: one})
            self._yo[key] = hit
        return hit

    def _terms(self, v, m, n, j1, j2):
        """(first_sum, second_sum) pieces of tau_vector on one basis pair."""
        f, z = self.field, self.z
        d1, d2 = self.W1.depths[j1], self.W2.depths[j2]
        out = {}
        for jv, cv in v.items():
            wt = self.V.depths[jv]
            top1 = d1 + m - n - wt
            top2 = d2 + wt + n
            if m >= 0:
                top1, top2 = min(top1, m), min(top2, m)
            for i in range(top1 + 1):
                c = binom(m, i, f) * (-z) ** i * cv
                if c != 0:
                    for t, x in self._yo_basis(jv, m - n - 1 - i, j1).items():
                        add_into(out, {(t, j2): c * x})
            sgn = 1 if m % 2 == 0 else -1
            for i in range(top2 + 1):
                c = binom(m, i, f) * (1 if i % 2 == 0 else -1) * z ** (m - i) * cv * (-sgn)
                if c != 0:
                    for t, x in self.ops2.mode_basis(jv, i - n - 1, j2).items():
                        add_into(out, {(j1, t): c * x})
        return out

    def tau_vector(self, v, m, n, vec):
        out = {}
        for (j1, j2), c in vec.items():
            add_into(out, self._terms(v, m, n, j1, j2), c)
        return out

    def rho_vector(self, v, m, vec):
        """The transpose of Y'_m(v): Y'_m(v) lambda = lambda o rho_vector(v, m, .)."""
        return self.tau_vector(v, m, -1, vec)

    def psi_vector(self, v, q, vec):
        """Y^o_q(v) w1 x w2 - w1 x v_q w2."""
        one = self.field.one
        out = {}
        for (j1, j2), c in vec.items():
            for jv, cv in v.items():
                for t, x in self._yo_basis(jv, q, j1).items():
                    add_into(out, {(t, j2): c * cv * x})
                for t, x in self.ops2.mode_basis(jv, q, j2).items():
                    add_into(out, {(j1, t): -c * cv * x})
        return out

    def slt_vector(self, v, N, k, vec):
        """sum_j C(N, j) (-z)^(N-j) psi_{k+j}: the x^(-k-1) coefficient of
        (x - z)^N (Y^o(v, x) x 1 - 1 x Y(v, x)) applied to vec."""
        f, z = self.field, self.z
        out = {}
        for j in range(N + 1):
            add_into(out, self.psi_vector(v, k + j, vec), binom(N, j, f) * (-z) ** (N - j))
        return out


def yprime_action(acts, v, m, lam):
    """Y'_m(v) lambda as a functional."""
    return LazyFunctional(acts.field, lambda vec: lam(acts.rho_vector(v, m, vec)))


def lprime_operator(acts, k, lam):
    """L'(k) lambda = Y'_{k+1}(omega) lambda."""
    return yprime_action(acts, acts.omega, k + 1, lam)


def lprime_operators(acts, lam, ks=(-1, 0, 1)):
    return {k: lprime_operator(acts, k, lam) for k in ks}


def tau_direct(acts, v, m, n, lam):
    """tau(v x t^m (z + t)^(-n-1)) lambda from the vertex-operator formula."""
    return LazyFunctional(acts.field, lambda vec: lam(acts.tau_vector(v, m, n, vec)))


def tau_component(acts, v, m, n, lam, vanish_from=None, window=None):
    """sum_i C(-n-1, i) z^(-n-1-i) Y'_{m+i}(v) lambda.

    For n >= 0 the sum is infinite; ``vanish_from`` = K asserts that
    Y'_k(v) lambda = 0 for k >= K.  When ``window`` is given the claim is
    checked on it for k in [K, K + 2] and a violation raises FusionError.
    """
    f, z = acts.field, acts.z
    if n <= -1:
        count = -n
    else:
        if vanish_from is None:
            raise FusionError("infinite sum: pass vanish_from")
        count = max(vanish_from - m, 0)
        if window is not None:
            for k in range(vanish_from, vanish_from + 3):
                yk = yprime_action(acts, v, k, lam)
                for p in window.pairs:
                    try:
                        x = yk.value(p)
                    except WindowError:
                        continue
                    if x != 0:
                        raise FusionError(f"Y'_{k} does not vanish: the sum does not terminate")
    terms = [(binom(-n - 1, i, f) * z ** (-n - 1 - i), m + i) for i in range(count)]

    def evaluate(vec):
        total = f.zero
        for c, k in terms:
            if c != 0:
                total += c * lam(acts.rho_vector(v, k, vec))
        return total

    return LazyFunctional(f, evaluate)


# -- strong lower truncation ----------------------------------------------------------


@dataclass
class CheckReport:
    holds: bool
    checked: int = 0
    skipped: int = 0
    witness: tuple = None

    def __bool__(self):
        return self.holds


def _state_weight(acts, v):
    return max((acts.V.depths[j] for j in v), default=0)


def _k_range(acts, v, N, extra=0):
    wt = _state_weight(acts, v)
    dm = max(acts.W1.D, acts.W2.D)
    return range(wt - 1 - dm - N - extra, dm + wt + extra + 1)


def _check(lam, vectors):
    rep = CheckReport(True)
    for key, build in vectors:
        try:
            vec = build()
            x = lam(vec)
        except WindowError:
            rep.skipped += 1
            continue
        rep.checked += 1
        if x != 0:
            rep.holds = False
            rep.witness = key
            return rep
    return rep


def slt_report(acts, lam, v, N, pairs):
    """Polynomial route: every known coefficient of
    (x - z)^N lambda(Y^o(v, x) w1 x w2 - w1 x Y(v, x) w2) vanishes."""
    ks = _k_range(acts, v, N)

    def gen():
        for p in pairs:
            for k in ks:
                yield (p, k), (lambda p=p, k=k: acts.slt_vector(v, N, k, {p: acts.field.one}))

    return _check(lam, gen())


def check_slt(acts, lam, v, N, pairs):
    return slt_report(acts, lam, v, N, pairs).holds


def compatibility_report(acts, lam, v, N, pairs, m_max, n_bound):
    """Direct route: tau(v x t^m (z + t)^(-n-1)) lambda = 0 for N <= m <= m_max,
    |n| <= n_bound, together with Y'_m(v) lambda = 0 on the same m range."""
    one = acts.field.one

    def gen():
        for p in pairs:
            for m in range(N, m_max + 1):
                yield (p, m, "Y'"), (lambda p=p, m=m: acts.rho_vector(v, m, {p: one}))
                for n in range(-n_bound, n_bound + 1):
                    yield (p, m, n), (lambda p=p, m=m, n=n: acts.tau_vector(v, m, n, {p: one}))

    return _check(lam, gen())


def minimal_slt_order(acts, lam, v, pairs, N_max):
    for N in range(N_max + 1):
        if check_slt(acts, lam, v, N, pairs):
            return N
    return None


def slt_descendant_bound(N1, N2, K, k):
    """Order of strong lower truncation inherited by u_k v."""
    return max(0, N1 + N2 + K - 1 - k)


# -- the annihilator route ----------------------------------------------------------------


def tensor_lowest(L1, L2):
    """The lowest space M1 x M2 with the diagonal zero-mode action."""
    if not (L1.ordinary and L2.ordinary):
        raise FusionError("fusion is implemented for lowest spaces concentrated in depth 0")
    g = L1.g
    n2 = L2.dim
    acts = {}
    for i in range(g.dim):
        m = {}
        for p in range(L1.dim):
            for q in range(n2):
                col = {}
                for r, x in L1.act(i, 0, {p: g.field.one}).items():
                    add_into(col, {r * n2 + q: x})
                for r, x in L2.act(i, 0, {q: g.field.one}).items():
                    add_into(col, {p * n2 + r: x})
                if col:
                    m[p * n2 + q] = col
        acts[(i, 0)] = m
    return LowestSpace(g, [0] * (L1.dim * n2), acts, name=f"{L1.name}x{L2.name}")


class KLModel:
    """(W1 x W2) / G_N (W1 x W2) as the truncation Q_N of Ind(M1 x M2).

    ``phi`` is the quotient map.  It intertwines a x t^k on W1 x W2 with
    sum_{i<N} C(k, i) z^(k-i) a(-i) on Q_N, and is determined by
    phi(a(-n) w1 x w2) = A_n phi(w1 x w2) - phi(w1 x a(n) w2),
    phi(m1 x b(-n) w2) = A_{-n} phi(m1 x w2),  phi(m1 x m2) = m1 x m2.
    """

    def __init__(self, W1, W2, z, N):
        if not (isinstance(W1, InducedModule) and isinstance(W2, InducedModule)):
            raise FusionError("the annihilator model needs induced modules")
        if N < 1:
            raise FusionError("N must be at least 1")
        self.W1, self.W2, self.N = W1, W2, N
        self.field = W1.field
        self.z = _scalar(self.field, z)
        self.Q = InducedModule(W1.g, tensor_lowest(W1.lowest, W2.lowest), W1.kappa, N - 1)
        self._phi = {}

    def X(self, a, i, v):
        out = {}
        for j, c in v.items():
            if self.Q.depths[j] + i < self.N:
                add_into(out, self.Q.act_basis(a, -i, j), c)
        return out

    def Aq(self, a, k, v):
        f = self.field
        out = {}
        for i in range(self.N):
            c = binom(k, i, f) * self.z ** (k - i)
            if c != 0:
                add_into(out, self.X(a, i, v), c)
        return out

    def phi(self, j1, j2):
        key = (j1, j2)
        hit = self._phi.get(key)
        if hit is not None:
            return hit
        W1, W2, f = self.W1, self.W2, self.field
        mono1, m1 = W1.labels[j1]
        mono2, m2 = W2.labels[j2]
        if mono1:
            (n, a), rest = mono1[0], mono1[1:]
            jr = W1.index[(rest, m1)]
            out = self.Aq(a, n, self.phi(jr, j2))
            for t, x in W2.act_basis(a, n, j2).items():
                add_into(out, self.phi(jr, t), -x)
        elif mono2:
            (n, b), rest = mono2[0], mono2[1:]
            jr = W2.index[(rest, m2)]
            out = self.Aq(b, -n, self.phi(j1, jr))
        else:
            out = {self.Q.index[((), m1 * W2.lowest.dim + m2)]: f.one}
        self._phi[key] = out
        return out

    def phi_vector(self, vec):
        out = {}
        for (j1, j2), c in vec.items():
            add_into(out, self.phi(j1, j2), c)
        return out

    def functional(self, mu):
        """mu o phi for mu a functional {Q index: c} on Q_N."""
        return ModelFunctional(self, mu)

    def basis_functional(self, q):
        return self.functional({q: self.field.one})

    def restriction_rows(self, window):
        """For each Q basis index, the coordinates of e_q o phi on the window."""
        rows = {q: {} for q in range(self.Q.dim)}
        for i, (j1, j2) in enumerate(window.pairs):
            for q, c in self.phi(j1, j2).items():
                rows[q][i] = c
        return rows


class ModelFunctional(DualFunctional):
    def __init__(self, model, mu):
        self.model = model
        self.field = model.field
        self.mu = {q: c for q, c in mu.items() if c != 0}
        self._cache = {}

    def value(self, p):
        hit = self._cache.get(p)
        if hit is None:
            hit = self.field.zero
            for q, c in self.model.phi(*p).items():
                x = self.mu.get(q)
                if x is not None:
                    hit += c * x
            self._cache[p] = hit
        return hit

    @property
    def degree(self):
        """Highest Q depth in the support of mu."""
        return max((self.model.Q.depths[q] for q in self.mu), default=-1)


@dataclass
class FusionSpace:
    """Subspaces of the dual of a tensor window, one per filtration degree.

    ``levels[d]`` spans the restrictions of the degree-at-most-d functionals
    to ``window``, in reduced echelon form over the window's pair indices.
    """

    tag: str
    window: TensorWindow
    levels: list
    model: KLModel = None
    info: dict = dc_field(default_factory=dict)

    @property
    def dims(self):
        return [len(b) for b in self.levels]

    @property
    def graded_dims(self):
        d = self.dims
        return [d[0]] + [d[i] - d[i - 1] for i in range(1, len(d))]

    def same_bases(self, other):
        return len(self.levels) == len(other.levels) and all(
            a == b for a, b in zip(self.levels, other.levels))

    def basis_table(self, d):
        return [sorted(r.items()) for r in self.levels[d].basis()]


def _check_depth(W1, W2, D, need):
    if min(W1.D, W2.D) < need:
        raise FusionError(f"modules must be truncated at depth >= {need}")


def compute_ZN(W1, W2, z, N, D):
    """Z^N(d) for d <= D: the elements of Z^N of degree at most d, restricted
    to the window of total depth D."""
    if D < 0 or N < 1:
        raise FusionError("need D >= 0 and N >= 1")
    _check_depth(W1, W2, D, D)
    model = KLModel(W1, W2, z, min(N, D + 1))
    window = TensorWindow(W1, W2, D)
    rows = model.restriction_rows(window)
    levels = []
    for d in range(D + 1):
        levels.append(EchelonBasis(r for q, r in rows.items() if model.Q.depths[q] <= d))
    return FusionSpace(f"Z_N({N})", window, levels, model, {"N": N})


def compute_circ(W1, W2, z, D):
    """The annihilator fusion space through degree D, restricted to depth D.

    ``info['injective']`` records whether restriction to the window is
    injective, i.e. the window sees every degree-<= D functional.
    """
    space = compute_ZN(W1, W2, z, D + 1, D)
    space.tag = "KL_CIRC"
    Q = space.model.Q
    space.info["injective"] = space.dims[-1] == Q.dim
    space.info["model_dims"] = Q.graded_dims()
    if not space.info["injective"]:
        raise FusionError("restriction to the window is not injective; enlarge the window")
    return space


def circ_action(model, a, k, lam, shift=None):
    """(a x t^k) lambda on Z^infinity through a lift of t^k (see :func:`lift`)."""
    f = lift(k, model.z, model.field, model.N, shift)
    return gamma_action(a, f, lam, model.W1, model.W2)


# -- the compatibility route ----------------------------------------------------------------


def _weight(W, j, cartan):
    out = []
    for h in cartan:
        img = W.act_basis(h, 0, j)
        if set(img) - {j}:
            return None
        out.append(img.get(j, W.field.zero))
    return tuple(out)


def _compositions(N, top):
    if N == 0:
        yield ()
        return
    for m in range(1, min(N, top) + 1):
        for rest in _compositions(N - m, top):
            yield (m,) + rest


def hlz_conditions(acts, window, N):
    """Linear conditions on functionals restricted to ``window``.

    Each condition is a vector supported in the window that every
    compatible functional of degree below N annihilates: coefficients of
    the strong lower truncation identity of order N for each generator,
    and images of products of lowering operators Y'_m(a), 1 <= m < N,
    with total lowering N.  Returns {weight sector: EchelonBasis}.
    """
    W1, W2 = acts.W1, acts.W2
    one = acts.field.one
    cartan = acts.g.cartan
    wts = {}
    for p in window.pairs:
        w1, w2 = _weight(W1, p[0], cartan), _weight(W2, p[1], cartan)
        wts[p] = None if w1 is None or w2 is None else tuple(x + y for x, y in zip(w1, w2))
    conds = {}
    rho_cache = {}

    def add(vec):
        if vec and window.contains(vec):
            key = wts[next(iter(vec))]
            conds.setdefault(key, EchelonBasis()).add(window.coordinates(vec))

    def rho(a, m, vec):
        out = {}
        for p, c in vec.items():
            key = (a, m, p)
            img = rho_cache.get(key)
            if img is None:
                img = acts.rho_vector(acts.generators[a], m, {p: one})
                rho_cache[key] = img
            add_into(out, img, c)
        return out

    words = list(_compositions(N, N - 1))
    E = window.D
    for p in window.pairs:
        d = window.depth(p)
        base = {p: one}
        for a, v in enumerate(acts.generators):
            for k in range(d - E, E - d - N + 1):
                try:
                    add(acts.slt_vector(v, N, k, base))
                except OutOfWindow:
                    pass
        for word in words:
            vecs = [base]
            for m in word:
                nxt = []
                for vec in vecs:
                    for a in range(acts.g.dim):
                        try:
                            u = rho(a, m, vec)
                        except OutOfWindow:
                            continue
                        if u:
                            nxt.append(u)
                vecs = nxt
            for vec in vecs:
                add(vec)
    return conds, wts


def hlz_solve(acts, window, N, D):
    """Kernel of :func:`hlz_conditions`, projected to total depth D."""
    conds, wts = hlz_conditions(acts, window, N)
    sectors = {}
    for i, p in enumerate(window.pairs):
        sectors.setdefault(wts[p], []).append(i)
    cut = window.size(D)
    out = EchelonBasis()
    for key in sorted(sectors, key=lambda k: (k is None, k)):
        eb = conds.get(key, EchelonBasis())
        ns = nullspace(list(eb.rows.values()), sectors[key])
        for sol in ns.basis():
            proj = {i: c for i, c in sol.items() if i < cut}
            if proj:
                out.add(proj)
    return out


def compute_hboxtr(W1, W2, z, D, E=None, jobs=1):
    """The compatibility fusion space through degree D, restricted to depth D.

    The kernel is solved on the window of depth E (default D + 2); every
    compatible functional passes the conditions, so the projected kernel
    contains the compatible space.  Equality of dimensions with the
    annihilator space, which is contained in the compatible space,
    certifies that the projection is exactly the compatible space.
    """
    if E is None:
        E = D + 2
    if E < D:
        raise FusionError("solve window must contain the comparison window")
    _check_depth(W1, W2, E, E)
    small = TensorWindow(W1, W2, D)
    if jobs > 1 and D > 0:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_hlz_level, W1, W2, z, d, D, E) for d in range(D + 1)]
            levels = [f.result() for f in futures]
    else:
        acts = QzActions(W1, W2, z)
        big = TensorWindow(W1, W2, E)
        # solve-window indices of depth <= D coincide with the small window
        levels = [hlz_solve(acts, big, d + 1, D) for d in range(D + 1)]
    return FusionSpace("HLZ_HBOXTR", small, levels, None, {"E": E})


def _hlz_level(W1, W2, z, d, D, E):
    return hlz_solve(QzActions(W1, W2, z), TensorWindow(W1, W2, E), d + 1, D)


def fusion_report(W1, W2, z, D, specs=None, E=None, jobs=1):
    kl = compute_circ(W1, W2, z, D)
    hlz = compute_hboxtr(W1, W2, z, D, E, jobs)
    table = []
    for N in range(1, D + 2):
        zn = compute_ZN(W1, W2, z, N, D)
        for d, n in enumerate(zn.dims):
            table.append([N, d, n])
    equal = kl.graded_dims == hlz.graded_dims and kl.same_bases(hlz)
    return {
        "pair": specs,
        "z": str(z),
        "depth": D,
        "kl_dims": kl.graded_dims,
        "hlz_dims": hlz.graded_dims,
        "equal": equal,
        "ZN_table": table,
        "solve_depth": hlz.info["E"],
    }


# -- checks on the fusion outputs ------------------------------------------------------


def _combine(lams, coefs, field):
    def evaluate(vec):
        return sum((c * lam(vec) for lam, c in zip(lams, coefs)), field.zero)
    return LazyFunctional(field, evaluate)


def circ_action_element(model, x, k, lam):
    """(x x t^k) lambda for x = {basis index: coefficient} in g."""
    parts = [circ_action(model, i, k, lam) for i in x]
    return _combine(parts, list(x.values()), model.field)


def fusion_level(model, window, modes=(-1, 0, 1), functionals=None):
    """Measure the level of the lifted g-hat action on Z^N.

    For each pair of basis elements and modes m + n = 0 with (a, b) != 0,
    returns the scalars c with
    [a x t^m, b x t^n] lambda - ([a, b] x t^(m+n)) lambda = m (a, b) c lambda,
    and checks that the commutator has no central part when m + n != 0.
    Returns the set of measured scalars (a single element, the level, when
    the action is a representation).
    """
    g, f = model.W1.g, model.field
    lams = functionals or [model.basis_functional(q) for q in range(model.Q.dim)]
    seen = set()
    for lam in lams:
        for a in range(g.dim):
            for b in range(g.dim):
                ab = g.pair({a: f.one}, {b: f.one})
                br = g.bracket({a: f.one}, {b: f.one})
                for m in modes:
                    for n in modes:
                        x = circ_action(model, a, m, circ_action(model, b, n, lam))
                        y = circ_action(model, b, n, circ_action(model, a, m, lam))
                        zb = circ_action_element(model, br, m + n, lam) if br else None
                        for p in window.pairs:
                            diff = x.value(p) - y.value(p) - (zb.value(p) if zb else 0)
                            base = lam.value(p)
                            if m + n != 0 or ab == 0 or m == 0:
                                if diff != 0:
                                    seen.add("noncentral")
                            elif base != 0:
                                seen.add(diff / (m * ab * base))
                            elif diff != 0:
                                seen.add("noncentral")
    return seen


def check_lift_independence(model, window, shifts, ks=(-2, -1, 0, 1, 2)):
    """Lifts of t^k differing by (t - z)^N h act identically on Z^N."""
    g = model.W1.g
    for q in range(model.Q.dim):
        lam = model.basis_functional(q)
        for a in range(g.dim):
            for k in ks:
                base = circ_action(model, a, k, lam)
                for h in shifts:
                    alt = circ_action(model, a, k, lam, shift=h)
                    if any(base.value(p) != alt.value(p) for p in window.pairs):
                        return False
    return True


def check_gamma_stability(space, functions, max_degree=None):
    """(a x f) lambda stays in the fusion space for lambda of low degree.

    ``functions`` are pairs (f, pole) where f has a pole of order ``pole``
    at z, so (a x f) raises the degree by at most ``pole``.
    """
    model = space.model
    top = len(space.levels) - 1
    g = model.W1.g
    for q in range(model.Q.dim):
        deg = model.Q.depths[q]
        lam = model.basis_functional(q)
        for f, pole in functions:
            if deg + pole > (top if max_degree is None else max_degree):
                continue
            for a in range(g.dim):
                img = gamma_action(a, f, lam, model.W1, model.W2).restrict(space.window)
                if not space.levels[deg + pole].contains(img):
                    return False
    return True


@dataclass
class JacobiReport:
    holds: bool
    checked: int = 0
    skipped: int = 0
    truncation_checked: int = 0
    witness: tuple = None

    def __bool__(self):
        return self.holds


def check_intertwining_jacobi(acts, P, samples, box=2, states=None):
    """The canonical pairing I(w)(lambda) = lambda(w) against the Jacobi identity.

    Paired with lambda in P, the x0^(-m-1) x1^n coefficient of the identity
    says tau(v x t^m (z + t)^(-n-1)) lambda = sum_i C(-n-1, i) z^(-n-1-i)
    Y'_{m+i}(v) lambda; lower truncation says Y'_k(v) lambda = 0 once
    k >= degree(lambda) + wt(v).  Both are checked on the sample pairs for
    m in [-1, box], n in [-box, box - 1].  Coefficients leaving the module
    truncation are skipped.
    """
    model = P.model
    if model is None:
        raise FusionError("the fusion space carries no model to evaluate on")
    states = states if states is not None else (
        [acts.vacuum_state()] + acts.generators + [acts.omega])
    rep = JacobiReport(True)
    top = len(P.levels) - 1
    for q in range(model.Q.dim):
        deg = model.Q.depths[q]
        if deg > top:
            continue
        lam = model.basis_functional(q)
        for v in states:
            K = deg + _state_weight(acts, v)
            for k in range(K, K + 3):
                y = yprime_action(acts, v, k, lam)
                for p in samples:
                    try:
                        x = y.value(p)
                    except WindowError:
                        rep.skipped += 1
                        continue
                    rep.truncation_checked += 1
                    if x != 0:
                        rep.holds = False
                        rep.witness = ("truncation", q, k, p)
                        return rep
            for m in range(-1, box + 1):
                for n in range(-box, box):
                    lhs = tau_direct(acts, v, m, n, lam)
                    rhs = tau_component(acts, v, m, n, lam, vanish_from=K)
                    for p in samples:
                        try:
                            ok = lhs.value(p) == rhs.value(p)
                        except WindowError:
                            rep.skipped += 1
                            continue
                        rep.checked += 1
                        if not ok:
                            rep.holds = False
                            rep.witness = ("jacobi", q, m, n, p)
                            return rep
    return rep


def check_yprime_closure(acts, space, modes=(-1, 1, 2)):
    """Y'_m(a) maps the fusion space into itself within the window.

    Uses the annihilator functionals that represent each row (the two
    spaces have identical bases).  Y'_m(a) changes the degree by -m.
    """
    model = space.model
    top = len(space.levels) - 1
    for q in range(model.Q.dim):
        deg = model.Q.depths[q]
        lam = model.basis_functional(q)
        for m in modes:
            if not 0 <= deg - m <= top:
                continue
            for v in acts.generators:
                img = yprime_action(acts, v, m, lam).restrict(space.window)
                if img and not space.levels[deg - m].contains(img):
                    return False
    return True


# -- randomized equivalence trials -----------------------------------------------------


def slt_solution_space(acts, window, N, states=None):
    """Window functionals meeting every in-window coefficient of the order-N
    strong lower truncation identity for each state (default: generators)."""
    states = acts.generators if states is None else states
    one = acts.field.one
    conds = []
    for p in window.pairs:
        for v in states:
            for k in _k_range(acts, v, N):
                try:
                    vec = acts.slt_vector(v, N, k, {p: one})
                except WindowError:
                    continue
                if vec and window.contains(vec):
                    conds.append(window.coordinates(vec))
    return nullspace(conds, range(len(window))).basis()


def random_window_functionals(acts, window, rng, count, orders=(1, 2, 3), span=3):
    """Seeded functionals on the window, undefined outside it.

    Cycles through: random elements of the order-N solution spaces, the
    same with one coordinate perturbed, and unconstrained random vectors.
    """
    f = acts.field
    spaces = {N: slt_solution_space(acts, window, N) for N in orders}
    kinds = [("solution", N) for N in orders] + [("perturbed", N) for N in orders] + [("random", None)]
    out = []
    for s in range(count):
        kind, N = kinds[s % len(kinds)]
        coords = {}
        if kind == "random":
            coords = {i: f(rng.randint(-span, span)) for i in range(len(window))}
        else:
            for b in spaces[N]:
                c = f(rng.randint(-span, span))
                for i, x in b.items():
                    coords[i] = coords.get(i, f.zero) + c * x
            if kind == "perturbed":
                i = rng.randrange(len(window))
                coords[i] = coords.get(i, f.zero) + f.one
        out.append((kind, N, WindowFunctional.from_coordinates(window, coords)))
    return out


def compare_routes(acts, lam, pairs, N_max, m_max, n_bound, states=None):
    """For each state and N <= N_max, (N, check_slt, direct compatibility)."""
    states = acts.generators if states is None else states
    rows = []
    for i, v in enumerate(states):
        for N in range(N_max + 1):
            a = check_slt(acts, lam, v, N, pairs)
            b = compatibility_report(acts, lam, v, N, pairs, m_max, n_bound).holds
            rows.append((i, N, a, b))
    return rows
