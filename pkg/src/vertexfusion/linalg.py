"""Sparse exact linear algebra over a :class:`~vertexfusion.field.Field`.

Vectors are ``dict[int, scalar]`` with no stored zeros.  Matrices are
column maps ``dict[int, vector]`` (column index -> image vector).
"""


def vec_add(u, v, c=None):
    """Return ``u + c*v`` as a new vector."""
    out = dict(u)
    add_into(out, v, c)
    return out


def add_into(out, v, c=None):
    for k, x in v.items():
        y = x if c is None else c * x
        s = out.get(k)
        if s is None:
            if y != 0:
                out[k] = y
        else:
            s = s + y
            if s == 0:
                del out[k]
            else:
                out[k] = s
    return out


def vec_scale(v, c):
    if c == 0:
        return {}
    return {k: c * x for k, x in v.items()}


def vec_sub(u, v):
    return vec_add(u, v, -1)


def dot(u, v):
    if len(u) > len(v):
        u, v = v, u
    s = 0
    for k, x in u.items():
        y = v.get(k)
        if y is not None:
            s = s + x * y
    return s


def mat_apply(m, v):
    """Apply a column-map matrix to a vector.  Missing columns act as zero."""
    out = {}
    for k, x in v.items():
        col = m.get(k)
        if col:
            add_into(out, col, x)
    return out


def mat_mul(a, b):
    return {j: mat_apply(a, col) for j, col in b.items()}


def mat_sub(a, b):
    out = {}
    for j in set(a) | set(b):
        col = vec_sub(a.get(j, {}), b.get(j, {}))
        if col:
            out[j] = col
    return out


def mat_equal(a, b):
    for j in set(a) | set(b):
        if a.get(j, {}) != b.get(j, {}):
            return False
    return True


def transpose(m):
    out = {}
    for j, col in m.items():
        for i, x in col.items():
            out.setdefault(i, {})[j] = x
    return out


def identity(indices, one):
    return {i: {i: one} for i in indices}


class EchelonBasis:
    """Incrementally maintained reduced row echelon basis of a subspace.

    Pivots are the smallest index of each row; every row is monic at its
    pivot and zero at every other pivot, so the basis is canonical for the
    subspace it spans.
    """

    def __init__(self, rows=()):
        self.rows = {}  # pivot -> row
        for r in rows:
            self.add(r)

    def __len__(self):
        return len(self.rows)

    def reduce(self, v):
        v = dict(v)
        if not self.rows:
            return v
        for p in sorted(k for k in v if k in self.rows):
            c = v.get(p)
            if c is not None:
                add_into(v, self.rows[p], -c)
        return v

    def add(self, v):
        """Insert ``v``; return True when it enlarged the span."""
        r = self.reduce(v)
        if not r:
            return False
        p = min(r)
        inv = 1 / r[p]
        r = {k: x * inv for k, x in r.items()}
        for q, row in self.rows.items():
            c = row.get(p)
            if c is not None:
                add_into(row, r, -c)
        self.rows[p] = r
        return True

    def contains(self, v):
        return not self.reduce(v)

    def pivots(self):
        return sorted(self.rows)

    def basis(self):
        return [self.rows[p] for p in sorted(self.rows)]

    def coordinates(self, v):
        """Coordinates of ``v`` in :meth:`basis` order; raises if ``v`` is outside."""
        if not self.contains(v):
            raise ValueError("vector not in span")
        return [v.get(p, 0) for p in sorted(self.rows)]

    def __eq__(self, other):
        if not isinstance(other, EchelonBasis):
            return NotImplemented
        return self.rows == other.rows


def rank(vectors):
    return len(EchelonBasis(vectors))


def nullspace(conditions, variables):
    """Basis of ``{x : <c, x> = 0 for every c in conditions}``.

    ``variables`` lists the coordinate indices of the ambient space.  The
    result is returned in reduced echelon form.
    """
    eb = EchelonBasis(conditions)
    pivots = set(eb.rows)
    free = [v for v in variables if v not in pivots]
    out = EchelonBasis()
    for f in free:
        x = {f: 1}
        for p, row in eb.rows.items():
            c = row.get(f)
            if c is not None:
                x[p] = -c
        out.add(x)
    return out


def restrict(v, indices):
    return {k: x for k, x in v.items() if k in indices}
