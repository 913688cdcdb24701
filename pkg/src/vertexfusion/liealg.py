"""Finite-dimensional semisimple Lie algebras given by structure constants,
their invariant forms, dual bases and finite-dimensional irreducible modules."""

import itertools
import json
from itertools import combinations

from .field import QQ_FIELD
from .linalg import EchelonBasis, add_into, mat_apply, mat_mul, mat_sub, vec_scale


class LieAlgebraError(ValueError):
    pass


class LieAlgebra:
    """Structure constants ``brackets[(i, j)] = {k: c}`` and Gram matrix ``form``.

    For sl_n realizations ``matrices`` holds the defining n x n matrices, and
    the triangular decomposition is strictly upper / diagonal / strictly lower.
    """

    def __init__(self, labels, brackets, form, field=QQ_FIELD, dual_coxeter=None,
                 name=None, matrices=None, positive=(), cartan=(), negative=(),
                 simple=(), check=True):
        self.labels = list(labels)
        self.dim = len(self.labels)
        self.field = field
        self.name = name or f"custom{self.dim}"
        self.matrices = matrices
        self.positive = list(positive)
        self.cartan = list(cartan)
        self.negative = list(negative)
        self.simple = list(simple)  # list of (e_index, h_index, f_index)
        self.brackets = {}
        for (i, j), v in brackets.items():
            v = {k: field(x) for k, x in v.items() if x != 0}
            if v:
                self.brackets[(i, j)] = v
        self.form = [[field(form[i][j]) for j in range(self.dim)] for i in range(self.dim)]
        if check:
            self.validate()
        self._dual = None
        self.normalization = "casimir"
        if dual_coxeter is None:
            dual_coxeter = self._dual_coxeter_from_casimir()
        self.h = field(dual_coxeter)

    def __repr__(self):
        return f"LieAlgebra({self.name}, dim={self.dim})"

    def basis_vector(self, i):
        return {i: self.field.one}

    def bracket_basis(self, i, j):
        return self.brackets.get((i, j), {})

    def bracket(self, a, b):
        if len(a) and max(a) >= self.dim or len(b) and max(b) >= self.dim:
            raise LieAlgebraError("dimension mismatch")
        out = {}
        for i, x in a.items():
            for j, y in b.items():
                c = self.brackets.get((i, j))
                if c:
                    add_into(out, c, x * y)
        return out

    def pair(self, a, b):
        s = self.field.zero
        for i, x in a.items():
            row = self.form[i]
            for j, y in b.items():
                if row[j] != 0:
                    s = s + x * y * row[j]
        return s

    def validate(self):
        n = self.dim
        for i in range(n):
            for j in range(n):
                cij = self.bracket_basis(i, j)
                cji = self.bracket_basis(j, i)
                if vec_scale(cji, -1) != cij:
                    raise LieAlgebraError(f"antisymmetry fails for ({i},{j})")
                if self.form[i][j] != self.form[j][i]:
                    raise LieAlgebraError("form is not symmetric")
        e = self.basis_vector
        for i, j, k in itertools.combinations_with_replacement(range(n), 3):
            for a, b, c in {(i, j, k), (j, k, i), (k, i, j)}:
                jac = self.bracket(e(a), self.bracket(e(b), e(c)))
                add_into(jac, self.bracket(e(b), self.bracket(e(c), e(a))))
                add_into(jac, self.bracket(e(c), self.bracket(e(a), e(b))))
                if jac:
                    raise LieAlgebraError(f"Jacobi identity fails for ({a},{b},{c})")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.pair(self.bracket(e(a), e(b)), e(c)) != self.pair(e(a), self.bracket(e(b), e(c))):
                        raise LieAlgebraError(f"form not invariant on ({a},{b},{c})")
        if EchelonBasis([{j: self.form[i][j] for j in range(n) if self.form[i][j] != 0}
                         for i in range(n)]).__len__() != n:
            raise LieAlgebraError("form is degenerate")

    def gram_inverse(self):
        n = self.dim
        rows = []
        for i in range(n):
            r = {j: self.form[i][j] for j in range(n) if self.form[i][j] != 0}
            r[n + i] = self.field.one
            rows.append(r)
        eb = EchelonBasis(rows)
        inv = [[self.field.zero] * n for _ in range(n)]
        for p, row in eb.rows.items():
            if p >= n:
                raise LieAlgebraError("form is degenerate")
            for k, x in row.items():
                if k >= n:
                    inv[p][k - n] = x
        return inv

    def dual_bases(self):
        """Pairs (u_i, u^i) with (u_i, u^j) = delta_ij; u_i is the standard basis."""
        if self._dual is None:
            inv = self.gram_inverse()
            basis = [self.basis_vector(i) for i in range(self.dim)]
            dual = [{j: inv[j][i] for j in range(self.dim) if inv[j][i] != 0}
                    for i in range(self.dim)]
            self._dual = (basis, dual)
        return self._dual

    def dual_pairs(self):
        """The tensor sum_i u_i (x) u^i as a list of (i, j, coefficient)."""
        _, dual = self.dual_bases()
        return [(i, j, c) for i in range(self.dim) for j, c in dual[i].items()]

    def ad(self, i):
        return {j: self.bracket_basis(i, j) for j in range(self.dim)}

    def casimir(self, rho):
        """sum_i rho(u_i) rho(u^i) for a representation given as matrices."""
        out = {}
        for i, j, c in self.dual_pairs():
            add_into_mat(out, mat_mul(rho[i], rho[j]), c)
        return out

    def _dual_coxeter_from_casimir(self):
        cas = self.casimir([self.ad(i) for i in range(self.dim)])
        vals = set()
        for j in range(self.dim):
            col = cas.get(j, {})
            if set(col) - {j}:
                raise LieAlgebraError("adjoint Casimir is not scalar; supply dual_coxeter")
            vals.add(col.get(j, self.field.zero))
        if len(vals) != 1:
            raise LieAlgebraError("adjoint Casimir is not scalar; supply dual_coxeter")
        return vals.pop() / 2

    def to_json(self):
        fmt = self.field.fmt
        return {
            "dimension": self.dim,
            "labels": self.labels,
            "brackets": [[i, j, k, fmt(x)] for (i, j), v in sorted(self.brackets.items())
                         for k, x in sorted(v.items())],
            "form": [[i, j, fmt(self.form[i][j])] for i in range(self.dim)
                     for j in range(self.dim) if self.form[i][j] != 0],
        }


def add_into_mat(out, m, c):
    for j, col in m.items():
        tgt = out.setdefault(j, {})
        add_into(tgt, col, c)
        if not tgt:
            del out[j]
    return out


def _matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def build_sl(n, field=QQ_FIELD):
    """sl_n with basis E_ij (i<j), H_i = E_ii - E_{i+1,i+1}, E_ji (i<j); form trace(ab)."""
    if n < 2:
        raise LieAlgebraError("sl_n needs n >= 2")
    zero, one = field.zero, field.one

    def elem(i, j):
        m = [[zero] * n for _ in range(n)]
        m[i][j] = one
        return m

    mats, labels = [], []
    pos, cart, neg = [], [], []
    for i, j in combinations(range(n), 2):
        pos.append(len(mats))
        mats.append(elem(i, j))
        labels.append(f"E{i+1}{j+1}")
    for i in range(n - 1):
        m = elem(i, i)
        m[i + 1][i + 1] = -one
        cart.append(len(mats))
        mats.append(m)
        labels.append(f"H{i+1}")
    for i, j in combinations(range(n), 2):
        neg.append(len(mats))
        mats.append(elem(j, i))
        labels.append(f"E{j+1}{i+1}")
    if n == 2:
        labels = ["e", "h", "f"]
    d = len(mats)
    coords = _matrix_coordinates(mats, n, field)
    brackets = {}
    for a in range(d):
        for b in range(d):
            c = [[x - y for x, y in zip(r1, r2)]
                 for r1, r2 in zip(_matmul(mats[a], mats[b]), _matmul(mats[b], mats[a]))]
            v = coords(c)
            if v:
                brackets[(a, b)] = v
    form = [[sum(_matmul(mats[a], mats[b])[i][i] for i in range(n)) for b in range(d)]
            for a in range(d)]
    idx = {lab: k for k, lab in enumerate(labels)}
    simple = []
    for i in range(n - 1):
        if n == 2:
            simple.append((0, 1, 2))
        else:
            simple.append((idx[f"E{i+1}{i+2}"], idx[f"H{i+1}"], idx[f"E{i+2}{i+1}"]))
    g = LieAlgebra(labels, brackets, form, field, name=f"sl{n}", matrices=mats,
                   positive=pos, cartan=cart, negative=neg, simple=simple)
    g.normalization = "trace form, (theta, theta) = 2"
    g.rank = n - 1
    g.n = n
    return g


def _matrix_coordinates(mats, n, field):
    """Coordinates of a traceless matrix in the sl_n basis."""
    # off-diagonal entries are read directly; diagonal via H_i = E_ii - E_{i+1,i+1}
    lookup = {}
    for k, m in enumerate(mats):
        nz = [(i, j) for i in range(n) for j in range(n) if m[i][j] != 0]
        if len(nz) == 1:
            lookup[nz[0]] = k
    cart = [k for k, m in enumerate(mats)
            if all(m[i][j] == 0 for i in range(n) for j in range(n) if i != j)]

    def coords(c):
        v = {}
        for (i, j), k in lookup.items():
            if c[i][j] != 0:
                v[k] = c[i][j]
        # diag (d_0..d_{n-1}) = sum_i x_i (e_i - e_{i+1}); x_i = d_0 + ... + d_i
        acc = field.zero
        for i in range(n - 1):
            acc = acc + c[i][i]
            if acc != 0:
                v[cart[i]] = acc
        return v

    return coords


def dual_coxeter_from_roots(n):
    """1 + <rho, theta^vee> for sl_n from explicit root data."""
    roots = [tuple((1 if k == i else -1 if k == j else 0) for k in range(n))
             for i, j in combinations(range(n), 2)]
    rho = [sum(r[k] for r in roots) / 2 for k in range(n)]
    theta = tuple((1 if k == 0 else -1 if k == n - 1 else 0) for k in range(n))
    theta_len = sum(x * x for x in theta)
    return 1 + int(2 * sum(a * b for a, b in zip(rho, theta)) / theta_len)


def load_structure_table(path_or_dict, field=QQ_FIELD):
    """Load the JSON structure-constant table format.

    ``{dimension, labels, brackets: [[i, j, k, "p/q"], ...], form: [[i, j, "p/q"], ...]}``;
    an optional ``dual_coxeter`` field overrides the Casimir-derived value.
    """
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict) as fh:
            data = json.load(fh)
    try:
        d = int(data["dimension"])
        labels = data.get("labels") or [f"x{i}" for i in range(d)]
        brackets = {}
        for i, j, k, val in data["brackets"]:
            brackets.setdefault((int(i), int(j)), {})[int(k)] = field.parse(str(val))
        form = [[field.zero] * d for _ in range(d)]
        for i, j, val in data["form"]:
            form[int(i)][int(j)] = field.parse(str(val))
    except (KeyError, TypeError, ValueError) as exc:
        raise LieAlgebraError(f"malformed structure table: {exc}") from exc
    dc = data.get("dual_coxeter")
    return LieAlgebra(labels, brackets, form, field,
                      dual_coxeter=None if dc is None else field.parse(str(dc)),
                      name=data.get("name"))


class WeightModule:
    """A finite-dimensional representation given by sparse action matrices."""

    def __init__(self, g, rho, highest_weight=None, weights=None, check=True):
        self.g = g
        self.rho = rho
        self.dim = _dim_of(rho)
        self.highest_weight = highest_weight
        self.weights = weights
        if check:
            self.validate()

    def __repr__(self):
        return f"WeightModule(dim={self.dim}, highest_weight={self.highest_weight})"

    def validate(self):
        g = self.g
        for a in range(g.dim):
            for b in range(a + 1, g.dim):
                lhs = {}
                for k, c in g.bracket_basis(a, b).items():
                    add_into_mat(lhs, self.rho[k], c)
                rhs = mat_sub(mat_mul(self.rho[a], self.rho[b]), mat_mul(self.rho[b], self.rho[a]))
                if not _mat_eq(lhs, rhs):
                    raise LieAlgebraError(f"representation property fails on ({a},{b})")

    def act(self, a, v):
        return mat_apply(self.rho[a], v)


def _dim_of(rho):
    # dimension from the largest index that appears
    n = 0
    for m in rho:
        for j, col in m.items():
            n = max(n, j + 1, *(i + 1 for i in col))
    return n


def _mat_eq(a, b):
    for j in set(a) | set(b):
        if a.get(j, {}) != b.get(j, {}):
            return False
    return True


def trivial_module(g):
    rho = [{} for _ in range(g.dim)]
    m = WeightModule(g, rho, highest_weight=(0,) * getattr(g, "rank", 0), weights=[None])
    m.dim = 1
    return m


def tensor_modules(m1, m2):
    """Diagonal action on m1 (x) m2 with basis index i1 * dim2 + i2."""
    g, d2 = m1.g, m2.dim
    rho = []
    for a in range(g.dim):
        out = {}
        for i1 in range(m1.dim):
            for i2 in range(d2):
                col = {}
                for k, x in m1.rho[a].get(i1, {}).items():
                    col[k * d2 + i2] = x
                for k, x in m2.rho[a].get(i2, {}).items():
                    add_into(col, {i1 * d2 + k: x})
                if col:
                    out[i1 * d2 + i2] = col
        rho.append(out)
    m = WeightModule(g, rho, check=False)
    m.dim = m1.dim * d2
    return m


def weyl_dimension(n, lam):
    """Weyl dimension formula for sl_n, Dynkin labels ``lam``."""
    from fractions import Fraction
    num = Fraction(1)
    for i in range(n - 1):
        for j in range(i, n - 1):
            s = sum(lam[i:j + 1]) + (j - i + 1)
            num *= Fraction(s, j - i + 1)
    return int(num)


def _exterior_power_rho(g, k):
    """Action of sl_n on Lambda^k C^n; basis = sorted k-subsets."""
    n = g.n
    subsets = list(combinations(range(n), k))
    index = {s: i for i, s in enumerate(subsets)}
    rho = []
    for m in g.matrices:
        out = {}
        for si, s in enumerate(subsets):
            col = {}
            for pos, j in enumerate(s):
                for i in range(n):
                    x = m[i][j]
                    if x == 0:
                        continue
                    t = list(s)
                    t[pos] = i
                    if len(set(t)) < k:
                        continue
                    # sort with sign
                    sign = 1
                    arr = t[:]
                    for p in range(len(arr)):
                        for q in range(len(arr) - 1 - p):
                            if arr[q] > arr[q + 1]:
                                arr[q], arr[q + 1] = arr[q + 1], arr[q]
                                sign = -sign
                    add_into(col, {index[tuple(arr)]: x * sign})
            if col:
                out[si] = col
        rho.append(out)
    m = WeightModule(g, rho, check=False)
    m.dim = len(subsets)
    return m, index[tuple(range(k))]


def highest_weight_module(g, lam):
    """The irreducible sl_n-module with dominant integral highest weight ``lam``.

    Realized as the cyclic submodule generated by the product of highest
    vectors inside a tensor product of exterior powers.
    """
    if not hasattr(g, "n"):
        raise LieAlgebraError("highest_weight_module supports sl_n realizations")
    n = g.n
    if isinstance(lam, int):
        lam = (lam,)
    lam = tuple(int(x) for x in lam)
    if len(lam) != n - 1:
        raise LieAlgebraError(f"weight needs {n-1} Dynkin labels")
    if any(x < 0 for x in lam):
        raise LieAlgebraError(f"weight {lam} is not dominant integral")
    if all(x == 0 for x in lam):
        m = trivial_module(g)
        m.highest_weight = lam
        m.weights = [lam]
        return m
    factors = []
    for k, mult in enumerate(lam, start=1):
        for _ in range(mult):
            factors.append(_exterior_power_rho(g, k))
    big, hv = factors[0]
    for mod, v in factors[1:]:
        hv = hv * mod.dim + v
        big = tensor_modules(big, mod)
    one = g.field.one
    # span U(n_-) v_lambda with simple lowering operators
    lowering = [f for (_, _, f) in g.simple]
    eb = EchelonBasis()
    frontier = [{hv: one}]
    eb.add(frontier[0])
    while frontier:
        nxt = []
        for v in frontier:
            for f in lowering:
                w = mat_apply(big.rho[f], v)
                if w and eb.add(w):
                    nxt.append(w)
        frontier = nxt
    basis = eb.basis()
    pivots = eb.pivots()
    rho = []
    for a in range(g.dim):
        out = {}
        for j, b in enumerate(basis):
            w = mat_apply(big.rho[a], b)
            coords = eb.reduce(w)
            if coords:
                raise LieAlgebraError("submodule not closed")
            col = {}
            for i, p in enumerate(pivots):
                x = w.get(p)
                if x is not None:
                    col[i] = x
            if col:
                out[j] = col
        rho.append(out)
    weights = []
    for j, b in enumerate(basis):
        wt = []
        for (_, h, _) in g.simple:
            col = rho[h].get(j, {})
            wt.append(int(g.field.to_rational(col.get(j, g.field.zero))))
        weights.append(tuple(wt))
    m = WeightModule(g, rho, highest_weight=lam, weights=weights)
    m.dim = len(basis)
    return m
