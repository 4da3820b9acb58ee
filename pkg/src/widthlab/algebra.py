"""Batched element arithmetic for the concrete group representations.

Each algebra stores elements as rows of a small-integer numpy array and knows
how to multiply, invert, canonicalize and pack them into 64-bit keys.  Products
follow the left-to-right convention: ``x * y`` means "x, then y" when the
elements act on the right, so for permutations ``(x*y)[i] = y[x[i]]``.
"""

from __future__ import annotations

import numpy as np

from .gf import GF, field

_KEY_LIMIT = 2**63


class Algebra:
    kind = "abstract"
    width = 0

    def identity(self) -> np.ndarray:
        raise NotImplementedError

    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inv(self, A: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def canon(self, A: np.ndarray) -> np.ndarray:
        return A

    def pack(self, A: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=np.uint64)
        return A @ self._radix

    def _set_radix(self, bases):
        total = 1
        radix = []
        for b in bases:
            radix.append(total)
            total *= int(b)
        if total >= _KEY_LIMIT:
            raise ValueError(f"{self!r}: element encoding needs more than 63 bits")
        self._radix = np.array(radix, dtype=np.uint64)

    def describe(self, a: np.ndarray):
        return [int(x) for x in a]


class PermAlgebra(Algebra):
    """Permutations of ``{0..n-1}`` as image arrays."""

    kind = "perm"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("degree must be positive")
        self.n = n
        self.width = n
        self._set_radix([n] * n)

    def __repr__(self):
        return f"PermAlgebra({self.n})"

    def __eq__(self, other):
        return isinstance(other, PermAlgebra) and other.n == self.n

    def __hash__(self):
        return hash(("perm", self.n))

    def identity(self):
        return np.arange(self.n, dtype=np.int64)

    def mul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        A, B = np.broadcast_arrays(A, B)
        return np.take_along_axis(B, A, axis=-1)

    def inv(self, A):
        A = np.asarray(A, dtype=np.int64)
        return np.argsort(A, axis=-1)

    def from_cycles(self, *cycles, one_based: bool = True) -> np.ndarray:
        p = list(range(self.n))
        for cyc in cycles:
            c = [x - 1 if one_based else x for x in cyc]
            for i, x in enumerate(c):
                p[x] = c[(i + 1) % len(c)]
        return np.array(p, dtype=np.int64)

    def conjugate_by(self, X, g):
        """x -> g^-1 x g for each row of X."""
        return self.mul(self.mul(self.inv(g), X), g)

    def sign(self, A) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=np.int64))
        out = np.ones(len(A), dtype=np.int64)
        for r, perm in enumerate(A):
            seen = np.zeros(self.n, dtype=bool)
            s = 1
            for i in range(self.n):
                if not seen[i]:
                    j, L = i, 0
                    while not seen[j]:
                        seen[j] = True
                        j = perm[j]
                        L += 1
                    if L % 2 == 0:
                        s = -s
            out[r] = s
        return out


class MatAlgebra(Algebra):
    """n x n invertible matrices over a field, optionally modulo scalars.

    Projective elements are canonicalized by scaling so that the first
    nonzero entry in row-major order is 1.
    """

    def __init__(self, F: GF, n: int, projective: bool = True):
        self.F = F
        self.n = n
        self.projective = projective
        self.kind = "projective" if projective else "matrix"
        self.width = n * n
        self._set_radix([F.q] * (n * n))

    def __repr__(self):
        return f"MatAlgebra({self.F!r}, {self.n}, projective={self.projective})"

    def __eq__(self, other):
        return (isinstance(other, MatAlgebra) and other.F is self.F and other.n == self.n
                and other.projective == self.projective)

    def __hash__(self):
        return hash(("mat", self.F.q, self.n, self.projective))

    def __reduce__(self):
        return (MatAlgebra, (field(self.F.p, self.F.k), self.n, self.projective))

    def identity(self):
        return np.eye(self.n, dtype=np.int64).ravel()

    def _sq(self, A):
        A = np.asarray(A, dtype=np.int64)
        return A.reshape(A.shape[:-1] + (self.n, self.n))

    def _flat(self, M):
        return M.reshape(M.shape[:-2] + (self.n * self.n,))

    def mul(self, A, B):
        return self.canon(self._flat(self.F.matmul(self._sq(A), self._sq(B))))

    def inv(self, A):
        A = np.asarray(A, dtype=np.int64)
        single = A.ndim == 1
        M = self._sq(np.atleast_2d(A))
        out = self.canon(self._flat(self.F.matinv(M)))
        return out[0] if single else out

    def canon(self, A):
        if not self.projective:
            return np.asarray(A, dtype=np.int64)
        A = np.asarray(A, dtype=np.int64)
        single = A.ndim == 1
        A2 = np.atleast_2d(A)
        first = np.argmax(A2 != 0, axis=1)
        lead = A2[np.arange(len(A2)), first]
        out = self.F.mul[self.F.inv[lead][:, None], A2]
        return out[0] if single else out

    def matrix(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64).reshape(self.n, self.n)

    def frob(self, A, e: int):
        return self.canon(self.F.frob_table(e)[np.asarray(A, dtype=np.int64)])

    def inv_transpose(self, A):
        A = np.asarray(A, dtype=np.int64)
        single = A.ndim == 1
        M = self._sq(np.atleast_2d(A))
        out = self.canon(self._flat(np.swapaxes(self.F.matinv(M), -1, -2)))
        return out[0] if single else out


class SemilinearAlgebra(Algebra):
    """Automorphisms x -> g^-1 * phi(x) * g of matrix groups, as triples.

    A row is ``[g (n*n entries, projective canonical), e, t]`` where
    ``phi = (Frobenius^e) composed with (transpose-inverse)^t``.  With the
    right-action convention ``x^(ab) = (x^a)^b`` the product is

        (g1, e1, t1) * (g2, e2, t2) = (phi2(g1) g2, e1 + e2, t1 xor t2).
    """

    kind = "semilinear"

    def __init__(self, F: GF, n: int, graph: bool = True):
        self.F = F
        self.n = n
        self.graph = graph
        self.mat = MatAlgebra(F, n, projective=True)
        self.width = n * n + 2
        self._set_radix([F.q] * (n * n) + [F.k, 2])

    def __repr__(self):
        return f"SemilinearAlgebra({self.F!r}, {self.n})"

    def __eq__(self, other):
        return isinstance(other, SemilinearAlgebra) and other.F is self.F and other.n == self.n

    def __hash__(self):
        return hash(("semi", self.F.q, self.n))

    def __reduce__(self):
        return (SemilinearAlgebra, (field(self.F.p, self.F.k), self.n, self.graph))

    def identity(self):
        return np.concatenate([self.mat.identity(), [0, 0]])

    def split(self, A):
        A = np.asarray(A, dtype=np.int64)
        nn = self.n * self.n
        return A[..., :nn], A[..., nn], A[..., nn + 1]

    def join(self, g, e, t):
        return np.concatenate([g, np.asarray(e)[..., None], np.asarray(t)[..., None]], axis=-1)

    def phi(self, X, e, t):
        """Apply Frobenius^e then (if t) transpose-inverse, rowwise."""
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        e = np.broadcast_to(np.asarray(e, dtype=np.int64), (len(X),))
        t = np.broadcast_to(np.asarray(t, dtype=np.int64), (len(X),))
        out = X.copy()
        for ev in np.unique(e):
            if ev:
                sel = e == ev
                out[sel] = self.F.frob_table(int(ev))[out[sel]]
        if t.any():
            sel = t == 1
            out[sel] = self.mat.inv_transpose(out[sel])
        return self.mat.canon(out)

    def mul(self, A, B):
        A = np.atleast_2d(np.asarray(A, dtype=np.int64))
        B = np.atleast_2d(np.asarray(B, dtype=np.int64))
        A, B = np.broadcast_arrays(A, B)
        g1, e1, t1 = self.split(A)
        g2, e2, t2 = self.split(B)
        g = self.mat.mul(self.phi(g1, e2, t2), g2)
        return self.join(g, (e1 + e2) % self.F.k, t1 ^ t2)

    def inv(self, A):
        A = np.asarray(A, dtype=np.int64)
        single = A.ndim == 1
        A = np.atleast_2d(A)
        g, e, t = self.split(A)
        # (g, e, t)^-1 = (phi^-1(g)^-1, -e, t)
        ei = (-e) % self.F.k
        ginv = self.mat.inv(self.phi(g, ei, t))
        out = self.join(ginv, ei, t)
        return out[0] if single else out

    def canon(self, A):
        A = np.array(A, dtype=np.int64)
        g, e, t = self.split(A)
        A[..., : self.n * self.n] = self.mat.canon(g)
        return A

    def act(self, A, X):
        """Image of matrices X (rows) under the automorphism A (one row)."""
        g, e, t = self.split(np.asarray(A, dtype=np.int64))
        Y = self.phi(X, int(e), int(t))
        gi = self.mat.inv(g)
        return self.mat.mul(self.mat.mul(gi, Y), g)

    def embed(self, X):
        """Inner elements: matrices x as (x, 0, 0)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        z = np.zeros(len(X), dtype=np.int64)
        return self.join(self.mat.canon(X), z, z)

    def describe(self, a):
        g, e, t = self.split(np.asarray(a))
        return {"g": [int(x) for x in g], "frob": int(e), "graph": int(t)}
