"""The affine algebra, depth-truncated induced modules and their mode actions."""

import json
from functools import cached_property

from .field import QQ_FIELD, check_level_parameter
from .formal import WindowError, series_residue_pair
from .liealg import (LieAlgebraError, build_sl, highest_weight_module, load_structure_table,
                     trivial_module)
from .linalg import EchelonBasis, add_into, mat_apply, vec_scale


class OutOfWindow(WindowError):
    """A mode action whose result would leave the depth window."""


class ModuleError(ValueError):
    pass


# ---------------------------------------------------------------- elements


class AffineElement:
    """Finite sum of a_i (x) t^n plus a multiple of the central element k."""

    def __init__(self, terms=None, central=0, field=QQ_FIELD):
        self.field = field
        self.terms = {}
        for key, c in (terms or {}).items():
            if c != 0:
                self.terms[key] = field(c) if not _is_elem(c, field) else c
        self.central = field(central) if not _is_elem(central, field) else central

    @classmethod
    def mode(cls, i, n, field=QQ_FIELD, coef=1):
        return cls({(i, n): field(coef)}, 0, field)

    def items(self):
        return sorted(self.terms.items())

    def __eq__(self, other):
        return self.terms == other.terms and self.central == other.central

    def __add__(self, other):
        t = dict(self.terms)
        add_into(t, other.terms)
        return AffineElement(t, self.central + other.central, self.field)

    def __repr__(self):
        parts = [f"{self.field.fmt(c)}*x{i}({n})" for (i, n), c in self.items()]
        if self.central != 0:
            parts.append(f"{self.field.fmt(self.central)}*k")
        return " + ".join(parts) or "0"

    def is_zero(self):
        return not self.terms and self.central == 0


def _is_elem(x, field):
    return not isinstance(x, (int, str))


def affine_bracket(g, x, y):
    """[a(m), b(n)] = [a,b](m+n) + m (a,b) delta_{m+n,0} k; k central."""
    f = g.field
    terms, central = {}, f.zero
    for (i, m), c1 in x.terms.items():
        for (j, n), c2 in y.terms.items():
            c = c1 * c2
            for k, s in g.bracket_basis(i, j).items():
                add_into(terms, {(k, m + n): s * c})
            if m + n == 0 and m != 0 and g.form[i][j] != 0:
                central = central + m * g.form[i][j] * c
    return AffineElement(terms, central, f)


def completed_bracket(g, a, g1, b, g2):
    """[a (x) g1, b (x) g2] for truncated series g1, g2.

    Returns ``(bracket vector of g, product series, central coefficient)``.
    The product window is the one implied by the inputs; the residue needs
    the t^{-1} coefficient of g2 * g1' to be known.
    """
    prod = g1 * g2
    central = series_residue_pair(g1, g2) * g.pair(a, b)
    return g.bracket(a, b), prod, central


# ------------------------------------------------------------------ lowest spaces


class LowestSpace:
    """A finite-dimensional module over g (x) C[t] with a depth grading.

    ``actions[(i, n)]`` (n >= 0) is the matrix of u_i(n); u_i(n) for n > 0
    must lower depth by exactly n, which makes the positive part nilpotent.
    """

    def __init__(self, g, depths, actions, weights=None, check=True, name="custom"):
        self.g = g
        self.depths = list(depths)
        self.dim = len(self.depths)
        self.actions = {k: m for k, m in actions.items() if m}
        self.weights = weights
        self.name = name
        if check:
            self.validate()

    @classmethod
    def from_weight_module(cls, m, name=None):
        acts = {(i, 0): m.rho[i] for i in range(m.g.dim)}
        return cls(m.g, [0] * m.dim, acts, weights=m.weights, check=False,
                   name=name or f"L{tuple(m.highest_weight or ())}")

    @property
    def max_depth(self):
        return max(self.depths) if self.depths else 0

    @property
    def ordinary(self):
        """True when every positive mode acts as zero."""
        return all(n == 0 for (_, n) in self.actions)

    def act(self, i, n, v):
        m = self.actions.get((i, n))
        return mat_apply(m, v) if m else {}

    def validate(self):
        g = self.g
        for (i, n), m in self.actions.items():
            if n < 0:
                raise ModuleError("lowest-space data may only carry modes n >= 0")
            for j, col in m.items():
                for k in col:
                    if self.depths[k] != self.depths[j] - n:
                        raise ModuleError(f"mode ({i},{n}) does not lower depth by {n}"
                                          " (positive part not nilpotent)")
        modes = sorted({n for (_, n) in self.actions} | {0})
        for m in modes:
            for n in modes:
                for i in range(g.dim):
                    for j in range(g.dim):
                        for c in range(self.dim):
                            v = {c: g.field.one}
                            lhs = self.act(i, m, self.act(j, n, v))
                            add_into(lhs, self.act(j, n, self.act(i, m, v)), -1)
                            rhs = {}
                            for k, s in g.bracket_basis(i, j).items():
                                add_into(rhs, self.act(k, m + n, v), s)
                            if lhs != rhs:
                                raise ModuleError(f"bracket relation fails for modes ({i},{m}),({j},{n})")


def generalized_weyl_example(g):
    """C m0 (+) g with g at depth 1, a(0) adjoint and a(1) c = (a, c) m0.

    Its induced module has a non-semisimple Sugawara L(0) at kappa = 2.
    """
    f = g.field
    n = g.dim
    depths = [0] + [1] * n
    actions = {}
    for i in range(n):
        ad = {}
        for j in range(n):
            col = {1 + k: x for k, x in g.bracket_basis(i, j).items()}
            if col:
                ad[1 + j] = col
        actions[(i, 0)] = ad
        lower = {1 + j: {0: g.form[i][j]} for j in range(n) if g.form[i][j] != 0}
        actions[(i, 1)] = lower
    return LowestSpace(g, depths, actions, name="generalized")


# ---------------------------------------------------------------- graded modules


class GradedModule:
    """Depth-truncated module with mode actions on a fixed global basis.

    Subclasses provide ``depths`` (one entry per basis vector), ``level``,
    ``g``, ``field``, ``D`` and ``_act_basis(i, n, j)``.
    """

    def pieces(self):
        out = [[] for _ in range(self.D + 1)]
        for j, d in enumerate(self.depths):
            out[d].append(j)
        return out

    @cached_property
    def piece_list(self):
        return self.pieces()

    def graded_dims(self):
        return [len(p) for p in self.piece_list]

    @property
    def dim(self):
        return len(self.depths)

    def depth_of(self, v):
        ds = {self.depths[j] for j in v}
        if len(ds) > 1:
            raise ModuleError("vector is not depth-homogeneous")
        return ds.pop() if ds else None

    def in_window(self, d):
        return 0 <= d <= self.D

    def act(self, i, n, v):
        """u_i(n) v.  Raises :class:`OutOfWindow` when a component lands above D."""
        out = {}
        for j, c in v.items():
            add_into(out, self.act_basis(i, n, j), c)
        return out

    def act_basis(self, i, n, j):
        t = self.depths[j] - n
        if t > self.D:
            raise OutOfWindow(f"mode {n} on depth {self.depths[j]} exits window D={self.D}")
        if t < 0 and self.grading_respected:
            return {}
        return self._act_basis(i, n, j)

    grading_respected = True

    def act_element(self, a, n, v):
        """Action of sum_i a_i u_i(n) for a vector ``a`` of g."""
        out = {}
        for i, c in a.items():
            add_into(out, self.act(i, n, v), c)
        return out

    def act_affine(self, x, v):
        out = {}
        for (i, n), c in x.terms.items():
            add_into(out, self.act(i, n, v), c)
        if x.central != 0:
            add_into(out, v, x.central * self.level)
        return out

    def act_word(self, word, v):
        """Apply a word [(i1, n1), (i2, n2), ...] right to left."""
        for i, n in reversed(word):
            v = self.act(i, n, v)
            if not v:
                return v
        return v

    def mode_matrix(self, i, n):
        """Column map of u_i(n) on every basis vector whose image stays in-window."""
        out = {}
        for j, d in enumerate(self.depths):
            if d - n <= self.D:
                col = self.act_basis(i, n, j)
                if col:
                    out[j] = col
        return out

    def basis_vector(self, j):
        return {j: self.field.one}


def _key(factor):
    n, i = factor
    return (-n, i)


class InducedModule(GradedModule):
    """Generalized Weyl module Ind(M) truncated at depth D.

    Basis vectors are pairs (PBW monomial, lowest basis index); a monomial
    is a tuple of factors (n, i) meaning u_i(-n), sorted most-negative first
    and then by basis index.
    """

    def __init__(self, g, lowest, kappa, D, field=None):
        self.g = g
        self.field = field or g.field
        self.kappa = self.field(kappa) if isinstance(kappa, (int, str)) else kappa
        self.level = self.kappa - g.h
        self.lowest = lowest
        self.D = D
        self.labels = []
        self.depths = []
        self.index = {}
        for d in range(D + 1):
            for m in range(lowest.dim):
                k = d - lowest.depths[m]
                if k < 0:
                    continue
                for mono in _monomials(k, g.dim):
                    self.index[(mono, m)] = len(self.labels)
                    self.labels.append((mono, m))
                    self.depths.append(d)
        self._cache = {}

    def __repr__(self):
        return f"InducedModule({self.g.name}, {self.lowest.name}, D={self.D})"

    def label_str(self, j):
        mono, m = self.labels[j]
        lab = self.g.labels
        fac = "".join(f"{lab[i]}({-n})" for n, i in mono)
        return f"{fac}|{m}>"

    def vacuum(self):
        return {self.index[((), 0)]: self.field.one}

    def lowest_vector(self, m):
        return {self.index[((), m)]: self.field.one}

    def _act_basis(self, i, n, j):
        key = (i, n, j)
        hit = self._cache.get(key)
        if hit is None:
            mono, m = self.labels[j]
            hit = self._apply(i, n, mono, m)
            self._cache[key] = hit
        return hit

    def _apply(self, i, n, mono, m):
        """Straighten u_i(n) * mono |m> into the PBW basis."""
        f = self.field
        if not mono:
            if n < 0:
                return {self.index[(((-n, i),), m)]: f.one}
            v = self.lowest.act(i, n, {m: f.one})
            return {self.index[((), k)]: c for k, c in v.items()}
        first, rest = mono[0], mono[1:]
        if n < 0 and _key((-n, i)) <= _key(first):
            return {self.index[(((-n, i),) + mono, m)]: f.one}
        rest_idx = self.index[(rest, m)]
        out = {}
        # first * (u_i(n) rest)
        inner = self.act_basis(i, n, rest_idx)
        fn, fi = first
        for j, c in inner.items():
            add_into(out, self.act_basis(fi, -fn, j), c)
        # [u_i(n), u_fi(-fn)] rest
        for k, s in self.g.bracket_basis(i, fi).items():
            add_into(out, self.act_basis(k, n - fn, rest_idx), s)
        if n == fn and self.g.form[i][fi] != 0:
            add_into(out, {rest_idx: f.one}, n * self.g.form[i][fi] * self.level)
        return out


def _monomials(k, dim):
    """All PBW monomials of depth k in canonical order."""
    out = []

    def rec(remaining, maxkey, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for n in range(remaining, 0, -1):
            for i in range(dim):
                fac = (n, i)
                if maxkey is not None and _key(fac) < _key(maxkey):
                    continue
                acc.append(fac)
                rec(remaining - n, fac, acc)
                acc.pop()

    rec(k, None, [])
    return out


def pbw_count(d, dim):
    """Independent count of colored partitions of d with dim colors per part size."""
    # generating function prod_n (1 - q^n)^{-dim}
    coeffs = [1] + [0] * d
    for n in range(1, d + 1):
        for _ in range(dim):
            for k in range(n, d + 1):
                coeffs[k] += coeffs[k - n]
    return coeffs[d]


def induce(g, lowest, kappa, D, field=None):
    """Induced (generalized Weyl) module of level kappa - h, truncated at depth D."""
    if hasattr(lowest, "rho"):
        lowest = LowestSpace.from_weight_module(lowest)
    if not isinstance(lowest, LowestSpace):
        raise ModuleError("lowest space must be a WeightModule or LowestSpace")
    field = field or g.field
    k = field(kappa) if isinstance(kappa, (int, str)) else kappa
    check_level_parameter(field, k)
    return InducedModule(g, lowest, k, D, field)


def vacuum_module(g, kappa, D):
    return induce(g, LowestSpace.from_weight_module(trivial_module(g), name="V"), kappa, D)


def weyl_module(g, weight, kappa, D):
    m = highest_weight_module(g, weight)
    return induce(g, LowestSpace.from_weight_module(m), kappa, D)


# ----------------------------------------------------------- derived modules


class ContragredientModule(GradedModule):
    """Graded dual D(W) with (u(n) lam)(w) = -(-1)^n lam(u(-n) w).

    Basis vector j is the functional dual to basis vector j of W.  With
    ``twist=False`` the sign (-1)^n is dropped, giving the action
    u(n) = -u(-n)^T of the vertex-algebra contragredient W'.  The two are
    isomorphic through the automorphism t -> -t.
    """

    def __init__(self, W, twist=True):
        self.W = W
        self.twist = twist
        self.g, self.field, self.level, self.D = W.g, W.field, W.level, W.D
        self.kappa = getattr(W, "kappa", None)
        self.depths = list(W.depths)
        self._cache = {}

    def _act_basis(self, i, n, j):
        key = (i, n, j)
        hit = self._cache.get(key)
        if hit is None:
            W = self.W
            t = self.depths[j] - n
            sign = -1 if (n % 2 == 0 or not self.twist) else 1
            hit = {}
            for k in W.piece_list[t]:
                c = W.act_basis(i, -n, k).get(j)
                if c is not None:
                    hit[k] = sign * c
            self._cache[key] = hit
        return hit


def contragredient(W, twist=True):
    return ContragredientModule(W, twist)


def pair(lam, w):
    """Canonical pairing of a functional (dual basis coordinates) with a vector."""
    s = 0
    for j, c in lam.items():
        x = w.get(j)
        if x is not None:
            s = s + c * x
    return s


class ExplicitModule(GradedModule):
    """A module given by explicit action matrices ``actions[(i, n)]``.

    The grading is not enforced, so such modules can violate restrictedness.
    """

    grading_respected = False

    def __init__(self, g, depths, actions, level, D=None, field=None):
        self.g = g
        self.field = field or g.field
        self.depths = list(depths)
        self.D = D if D is not None else max(self.depths)
        self.actions = actions
        self.level = level

    def _act_basis(self, i, n, j):
        m = self.actions.get((i, n))
        return dict(m.get(j, {})) if m else {}

    def act_basis(self, i, n, j):
        return self._act_basis(i, n, j)


def check_restricted(W, samples=None):
    """Within the window, u(n) w = 0 for every sampled w at depth d and n > d."""
    samples = samples if samples is not None else [W.basis_vector(j) for j in range(W.dim)]
    for w in samples:
        d = W.depth_of(w)
        if d is None:
            continue
        for n in range(d + 1, W.D + d + 2):
            for i in range(W.g.dim):
                if W.act(i, n, w):
                    return False
    return True


def check_bracket_invariant(W, max_mode=None, columns=None):
    """Matrix identity [u_i(m), u_j(n)] = [u_i,u_j](m+n) + m (u_i,u_j) delta l on the window.

    Returns the number of checked (i, m, j, n, column) instances; raises
    AssertionError on the first failure.
    """
    g, D = W.g, W.D
    M = D if max_mode is None else max_mode
    count = 0
    cols = range(W.dim) if columns is None else columns
    for j0 in cols:
        d = W.depths[j0]
        v = W.basis_vector(j0)
        for m in range(-M, M + 1):
            for n in range(-M, M + 1):
                # every intermediate and final depth must be in-window
                if not (W.in_window(d - n) and W.in_window(d - m) and W.in_window(d - m - n)):
                    continue
                for i in range(g.dim):
                    for j in range(g.dim):
                        lhs = W.act(i, m, W.act(j, n, v))
                        add_into(lhs, W.act(j, n, W.act(i, m, v)), -1)
                        rhs = {}
                        for k, s in g.bracket_basis(i, j).items():
                            add_into(rhs, W.act(k, m + n, v), s)
                        if m + n == 0 and g.form[i][j] != 0:
                            add_into(rhs, v, m * g.form[i][j] * W.level)
                        if lhs != rhs:
                            raise AssertionError(
                                f"bracket invariant fails: ({i},{m}),({j},{n}) on basis {j0}")
                        count += 1
    return count


def check_tensor_level(W1, W2, samples):
    """The diagonal action u(n) (x) 1 + 1 (x) u(n) has k acting by 2l.

    ``samples`` are pairs of basis indices (j1, j2).  Returns the measured
    central scalar, asserting it is the same on every sample.
    """
    g = W1.g
    i, j = _pairing_pair(g)
    seen = set()
    for j1, j2 in samples:
        for m in (1, -1):
            d1, d2 = W1.depths[j1], W2.depths[j2]
            if not all(0 <= x <= W1.D for x in (d1 - m, d1)) or not all(0 <= x <= W2.D for x in (d2 - m, d2)):
                continue

            def delta(a, n, vec):
                out = {}
                for (k1, k2), c in vec.items():
                    for t, x in W1.act(a, n, {k1: c}).items():
                        add_into(out, {(t, k2): x})
                    for t, x in W2.act(a, n, {k2: c}).items():
                        add_into(out, {(k1, t): x})
                return out

            try:
                v = {(j1, j2): g.field.one}
                lhs = delta(i, m, delta(j, -m, v))
                add_into(lhs, delta(j, -m, delta(i, m, v)), -1)
                for k, s in g.bracket_basis(i, j).items():
                    add_into(lhs, delta(k, 0, v), -s)
            except OutOfWindow:
                continue
            extra = set(lhs) - {(j1, j2)}
            if extra:
                raise AssertionError("diagonal bracket has a non-scalar central part")
            seen.add(lhs.get((j1, j2), g.field.zero) / (m * g.form[i][j]))
    if len(seen) != 1:
        raise AssertionError(f"central scalar not constant: {seen}")
    return seen.pop()


def _pairing_pair(g):
    for i in range(g.dim):
        for j in range(g.dim):
            if g.form[i][j] != 0:
                return i, j
    raise LieAlgebraError("degenerate form")


def weyl_cover(W, generators):
    """Check that W (within its window) is a quotient of an induced module.

    ``generators`` are depth-homogeneous vectors of W.  The lowest space is
    closed under nonnegative modes, the induced module is built on it, and
    the natural map is checked to be a surjective homomorphism on the window.
    Returns ``(surjective, homomorphism, induced_module)``.
    """
    g, f = W.g, W.field
    span = EchelonBasis()
    frontier = []
    for v in generators:
        if span.add(v):
            frontier.append(v)
    while frontier:
        nxt = []
        for v in frontier:
            for i in range(g.dim):
                for n in range(0, W.D + 1):
                    w = W.act(i, n, v)
                    if w and span.add(w):
                        nxt.append(w)
        frontier = nxt
    # homogeneous basis of the lowest space, one depth at a time
    basis, depths = [], []
    for d in range(W.D + 1):
        piece = EchelonBasis(_project(r, W, d) for r in span.basis())
        for r in piece.basis():
            basis.append(r)
            depths.append(d)
    # rows b_k + e_{off+k}: reducing v leaves -sum x_k e_{off+k}
    off = W.dim
    aug = EchelonBasis({**b, off + k: f.one} for k, b in enumerate(basis))

    def coordinates(v):
        red = aug.reduce(v)
        if any(k < off for k in red):
            raise ModuleError("vector outside the lowest space")
        return {k - off: -c for k, c in red.items()}

    actions = {}
    for i in range(g.dim):
        for n in range(0, W.D + 1):
            mat = {}
            for k, b in enumerate(basis):
                if depths[k] - n < 0:
                    continue
                w = W.act(i, n, b)
                if w:
                    mat[k] = coordinates(w)
            if mat:
                actions[(i, n)] = mat
    low = LowestSpace(g, depths, actions, name="cover")
    ind = InducedModule(g, low, W.level + g.h, W.D, f)

    def phi(j):
        mono, m = ind.labels[j]
        v = basis[m]
        word = [(i, -n) for n, i in mono]
        return W.act_word(word, v)

    images = {j: phi(j) for j in range(ind.dim)}
    surjective = len(EchelonBasis(images.values())) == W.dim
    hom = True
    for j in range(ind.dim):
        for i in range(g.dim):
            for n in range(-W.D, W.D + 1):
                if not ind.in_window(ind.depths[j] - n):
                    continue
                lhs = {}
                for k, c in ind.act(i, n, {j: f.one}).items():
                    add_into(lhs, images[k], c)
                if lhs != W.act(i, n, images[j]):
                    hom = False
    return surjective, hom, ind


def _project(v, W, d):
    return {j: c for j, c in v.items() if W.depths[j] == d}


# --------------------------------------------------------------- spec files


def algebra_from_spec(spec, field=QQ_FIELD):
    if spec in ("sl2", "sl3") or (isinstance(spec, str) and spec.startswith("sl") and spec[2:].isdigit()):
        return build_sl(int(spec[2:]), field)
    return load_structure_table(spec, field)


def module_from_spec(spec, field=QQ_FIELD, g=None):
    """Build a module from ``{algebra, kappa, lowest: {type, weight}, depth}``."""
    try:
        g = g or algebra_from_spec(spec.get("algebra", "sl2"), field)
        kappa = field.parse(str(spec.get("kappa", "-1")))
        D = int(spec["depth"])
        low = spec.get("lowest", {"type": "trivial"})
        kind = low.get("type", "trivial")
    except (KeyError, TypeError, ValueError) as exc:
        raise ModuleError(f"malformed module spec: {exc}") from exc
    if kind == "trivial":
        return vacuum_module(g, kappa, D)
    if kind == "irrep":
        return weyl_module(g, tuple(low["weight"]), kappa, D)
    if kind == "generalized":
        return induce(g, generalized_weyl_example(g), kappa, D)
    raise ModuleError(f"unknown lowest-space type {kind!r}")


def graded_dims_csv(W):
    lines = ["depth,dimension"]
    lines += [f"{d},{n}" for d, n in enumerate(W.graded_dims())]
    return "\n".join(lines) + "\n"
