"""Segal-Sugawara operators on truncated modules and the Virasoro checks."""

import warnings

import sympy
from sympy.polys.matrices import DomainMatrix

from .affine import OutOfWindow
from .linalg import add_into, mat_mul, nullspace, transpose, vec_scale


class SugawaraError(ValueError):
    pass


def _ceil_half_neg(k):
    # smallest integer j with j >= -k/2
    return -(k // 2)


class Sugawara:
    """L_k = (1/2kappa) sum_i [sum_{j >= -k/2} u_i(-j) u^i(j+k) + sum_{j < -k/2} u_i(j+k) u^i(-j)].

    ``pairs`` is a list of (u_i, u^i) vectors in g with (u_i, u^j) = delta_ij;
    by default the standard basis and its dual.
    """

    def __init__(self, W, kappa=None, pairs=None):
        self.W = W
        self.field = W.field
        self.kappa = W.kappa if kappa is None else kappa
        if self.kappa == 0:
            raise SugawaraError("kappa = 0: Sugawara operators undefined")
        self.scale = 1 / (2 * self.kappa)
        if pairs is None:
            basis, dual = W.g.dual_bases()
            pairs = list(zip(basis, dual))
        self.pairs = pairs
        self._cache = {}

    def _quad(self, a, m, b, n, v):
        return self.W.act_element(a, m, self.W.act_element(b, n, v))

    def L_basis(self, k, j0):
        key = (k, j0)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        W = self.W
        d = W.depths[j0]
        if d - k > W.D:
            raise OutOfWindow(f"L({k}) on depth {d} exits window D={W.D}")
        out = {}
        if d - k >= 0:
            v = {j0: self.field.one}
            split = _ceil_half_neg(k)
            for a, b in self.pairs:
                for j in range(split, d - k + 1):
                    add_into(out, self._quad(a, -j, b, j + k, v))
                for j in range(-d, split):
                    add_into(out, self._quad(a, j + k, b, -j, v))
            out = vec_scale(out, self.scale)
        self._cache[key] = out
        return out

    def L(self, k, v):
        out = {}
        for j, c in v.items():
            add_into(out, self.L_basis(k, j), c)
        return out

    def matrix(self, k, depth=None):
        """L_k as a column map on the in-window basis (optionally one depth)."""
        W = self.W
        cols = W.piece_list[depth] if depth is not None else range(W.dim)
        out = {}
        for j in cols:
            if W.depths[j] - k <= W.D:
                col = self.L_basis(k, j)
                if col:
                    out[j] = col
        return out


def sugawara_operator(W, kappa=None, k=0):
    """Matrix of L_k on every in-window basis vector of W."""
    W_window = 2 * W.D
    if abs(k) > W_window:
        raise SugawaraError(f"|k| > 2D: L({k}) is out of window everywhere")
    return Sugawara(W, kappa).matrix(k)


def central_charge(W):
    """The formula value l * dim g / kappa."""
    return W.level * W.g.dim / W.kappa


def check_virasoro(W, m, n, sug=None):
    """[L_m, L_n] = (m-n) L_{m+n} + delta_{m+n,0} (m^3-m)/12 c on every in-window vector.

    Returns the measured central charge (the formula value when it is not
    witnessed, i.e. m + n != 0 or m in {-1, 0, 1}).
    """
    sug = sug or Sugawara(W)
    c = central_charge(W)
    f = W.field
    checked = 0
    for j0, d in enumerate(W.depths):
        if not all(W.in_window(x) for x in (d - m, d - n, d - m - n)):
            continue
        v = {j0: f.one}
        lhs = sug.L(m, sug.L(n, v))
        add_into(lhs, sug.L(n, sug.L(m, v)), -1)
        rhs = vec_scale(sug.L(m + n, v), m - n)
        if m + n == 0 and m * m * m != m:
            diff = dict(lhs)
            add_into(diff, rhs, -1)
            if set(diff) - {j0}:
                raise AssertionError(f"[L{m},L{n}] central part not scalar on basis {j0}")
            measured = diff.get(j0, f.zero) * 12 / (m * m * m - m)
            if measured != c:
                raise AssertionError(f"central charge {measured} != {c}")
            add_into(rhs, v, (m * m * m - m) * c / 12)
        if lhs != rhs:
            raise AssertionError(f"Virasoro relation [L{m},L{n}] fails on basis {j0}")
        checked += 1
    if checked == 0:
        raise SugawaraError(f"depth window too small to test ({m},{n})")
    return c


def check_mode_commutator(W, k, n, sug=None):
    """[L_k, u_i(n)] = -n u_i(n+k) on every in-window basis vector."""
    sug = sug or Sugawara(W)
    f = W.field
    checked = 0
    for j0, d in enumerate(W.depths):
        if not all(W.in_window(x) for x in (d - k, d - n, d - k - n)):
            continue
        v = {j0: f.one}
        for i in range(W.g.dim):
            lhs = sug.L(k, W.act(i, n, v))
            add_into(lhs, W.act(i, n, sug.L(k, v)), -1)
            rhs = vec_scale(W.act(i, n + k, v), -n)
            if lhs != rhs:
                raise AssertionError(f"[L{k}, u{i}({n})] fails on basis {j0}")
            checked += 1
    if checked == 0:
        raise SugawaraError(f"depth window too small to test ({k},{n})")
    return True


def _eigenvalues(A, idx, field):
    """Eigenvalues with algebraic multiplicities of the square matrix A on ``idx``."""
    n = len(idx)
    pos = {j: p for p, j in enumerate(idx)}
    rows = [[field.zero] * n for _ in range(n)]
    for j, col in A.items():
        for i, x in col.items():
            rows[pos[i]][pos[j]] = x
    dm = DomainMatrix(rows, (n, n), field.dom)
    coeffs = dm.charpoly()
    lam = sympy.Symbol("lam")
    expr = sum(field.dom.to_sympy(c) * lam ** (n - p) for p, c in enumerate(coeffs))
    expr = sympy.together(expr)
    num = sympy.numer(expr)
    gens = [lam] + ([sympy.Symbol("kappa")] if field.kappa is not None else [])
    _, factors = sympy.factor_list(num, *gens)
    out = {}
    for fac, mult in factors:
        p = sympy.Poly(fac, lam)
        if p.degree() == 0:
            continue
        if p.degree() != 1:
            raise SugawaraError(f"eigenvalues outside the base field: factor {fac}")
        a, b = p.all_coeffs()
        mu = field.dom.from_sympy(sympy.cancel(-b / a))
        out[mu] = out.get(mu, 0) + mult
    return out


def generalized_eigenspaces(W, sug=None):
    """Per depth: {eigenvalue: (generalized eigenspace basis, semisimple flag)}.

    Also reports Jordan blocks by comparing geometric and algebraic multiplicity.
    """
    sug = sug or Sugawara(W)
    f = W.field
    result = []
    for d, idx in enumerate(W.piece_list):
        A = sug.matrix(0, d)
        eig = _eigenvalues(A, idx, f)
        piece = {}
        for mu, mult in eig.items():
            B = dict(A)
            for j in idx:
                col = dict(B.get(j, {}))
                add_into(col, {j: -mu})
                B[j] = col
            P = B
            for _ in range(mult - 1):
                P = mat_mul(B, P)
            gen = nullspace(list(transpose(P).values()), idx)
            eigsp = nullspace(list(transpose(B).values()), idx)
            piece[mu] = {"basis": gen.basis(), "multiplicity": mult,
                         "geometric": len(eigsp), "semisimple": len(eigsp) == mult}
            if len(gen) != mult:
                raise AssertionError("generalized eigenspace dimension mismatch")
        semisimple = all(p["semisimple"] for p in piece.values())
        if not semisimple:
            warnings.warn(f"L(0) has Jordan blocks at depth {d}", stacklevel=2)
        result.append(piece)
    return result


def lowest_conformal_weight(W, sug=None):
    sug = sug or Sugawara(W)
    j = W.piece_list[0][0]
    v = sug.L_basis(0, j)
    return v.get(j, W.field.zero)


def spectrum_csv(W, spaces):
    f = W.field
    lines = ["depth,eigenvalue,multiplicity,semisimple"]
    for d, piece in enumerate(spaces):
        for mu in sorted(piece, key=lambda x: str(x)):
            p = piece[mu]
            lines.append(f"{d},{f.fmt(mu)},{p['multiplicity']},{str(p['semisimple']).lower()}")
    return "\n".join(lines) + "\n"
