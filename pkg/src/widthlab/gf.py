"""Exact arithmetic in GF(p^k) and square matrices over it.

Field elements are encoded as integers ``0 <= v < q`` whose base-``p`` digits
are the polynomial coefficients (lowest degree first) modulo a pinned
primitive modulus, so the element encoded as ``p`` (the class of ``x``) always
generates the multiplicative group when ``k > 1``.  All arithmetic goes through
precomputed ``q x q`` tables, which makes batched (numpy) matrix products cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Monic primitive moduli, coefficients lowest degree first.
MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 0, 1, 1),
    (2, 4): (1, 0, 0, 1, 1),
    (3, 2): (2, 1, 1),
    (3, 3): (1, 0, 2, 1),
    (3, 4): (2, 0, 0, 1, 1),
    (5, 2): (2, 1, 1),
    (5, 3): (2, 0, 1, 1),
    (5, 4): (2, 0, 2, 1, 1),
    (7, 2): (3, 1, 1),
    (7, 3): (2, 1, 1, 1),
    (7, 4): (3, 0, 1, 1, 1),
    (11, 2): (2, 4, 1),
    (11, 3): (3, 0, 1, 1),
    (11, 4): (2, 0, 0, 4, 1),
    (13, 2): (2, 1, 1),
    (13, 3): (2, 0, 1, 1),
    (13, 4): (2, 0, 2, 6, 1),
}

MAX_DEGREE = 4
MAX_TABLE_ORDER = 1024
MAX_DIM = 12


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _digits(v, p, k):
    out = []
    for _ in range(k):
        out.append(v % p)
        v //= p
    return out


def _undigits(ds, p):
    v = 0
    for d in reversed(ds):
        v = v * p + d
    return v


def _polymulmod(a, b, mod, p):
    k = len(mod) - 1
    res = [0] * (2 * k)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                res[i + j] = (res[i + j] + x * y) % p
    for d in range(len(res) - 1, k - 1, -1):
        c = res[d]
        if c:
            for t in range(k + 1):
                res[d - k + t] = (res[d - k + t] - c * mod[t]) % p
    return res[:k]


def _primitive_root(p):
    for g in range(1, p):
        x, seen = 1, set()
        for _ in range(p - 1):
            x = x * g % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    raise AssertionError("no primitive root")


class GF:
    """The finite field GF(p^k), ``k <= 4``, with table arithmetic.

    Use :func:`field` (cached) rather than the constructor.
    """

    def __init__(self, p: int, k: int = 1):
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if not 1 <= k <= MAX_DEGREE:
            raise ValueError(f"field degree {k} outside 1..{MAX_DEGREE}")
        q = p**k
        if q > MAX_TABLE_ORDER:
            raise ValueError(f"GF({p}^{k}) too large for table arithmetic (q={q})")
        self.p, self.k, self.q = p, k, q
        if k == 1:
            self.modulus = (0, 1)
        elif (p, k) in MODULI:
            self.modulus = MODULI[(p, k)]
        else:
            raise ValueError(f"no pinned modulus for GF({p}^{k})")
        self.dtype = np.uint8 if q <= 256 else np.uint16

        digits = [_digits(v, p, k) for v in range(q)]
        add = np.empty((q, q), dtype=np.int64)
        mul = np.empty((q, q), dtype=np.int64)
        for a in range(q):
            da = digits[a]
            for b in range(a, q):
                db = digits[b]
                s = _undigits([(x + y) % p for x, y in zip(da, db)], p)
                if k == 1:
                    m = a * b % p
                else:
                    m = _undigits(_polymulmod(da, db, self.modulus, p), p)
                add[a, b] = add[b, a] = s
                mul[a, b] = mul[b, a] = m
        self.add = add
        self.mul = mul
        self.neg = np.array([int(np.nonzero(add[a] == 0)[0][0]) for a in range(q)], dtype=np.int64)
        self.sub = add[:, self.neg]
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        self.inv = inv
        # Frobenius x -> x^p as a lookup table.
        frob = np.empty(q, dtype=np.int64)
        for a in range(q):
            frob[a] = self._pow_int(a, p)
        self.frob1 = frob
        self.generator = _primitive_root(p) if k == 1 else p
        if self.order_of(self.generator) != q - 1:
            raise AssertionError(f"pinned modulus for GF({p}^{k}) is not primitive")

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    def __reduce__(self):
        return (field, (self.p, self.k))

    @property
    def spec(self) -> str:
        return f"gf:{self.p}:{self.k}"

    def _pow_int(self, a, e):
        r = 1
        base = a
        while e:
            if e & 1:
                r = int(self.mul[r, base])
            base = int(self.mul[base, base])
            e >>= 1
        return r

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            if a == 0:
                raise ZeroDivisionError("0 has no inverse")
            a, e = int(self.inv[a]), -e
        return self._pow_int(a, e)

    def order_of(self, a: int) -> int:
        if a == 0:
            raise ValueError("0 has no multiplicative order")
        x, n = a, 1
        while x != 1:
            x = int(self.mul[x, a])
            n += 1
        return n

    def frob_table(self, e: int) -> np.ndarray:
        """Lookup table of x -> x^(p^e); e taken mod k."""
        t = np.arange(self.q, dtype=np.int64)
        for _ in range(e % self.k):
            t = self.frob1[t]
        return t

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> GF(q)."""
        return n % self.p

    def squares(self) -> set:
        return {int(self.mul[a, a]) for a in range(1, self.q)}

    def elements(self):
        return [FieldElem(self, v) for v in range(self.q)]

    def __call__(self, v: int) -> "FieldElem":
        return FieldElem(self, int(v) % self.q if v >= 0 else self.from_int(v))

    # -- batched matrix helpers; arrays hold encoded elements ---------------

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Batched product over the field; broadcasts like ``np.matmul``."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.k == 1:
            return np.matmul(A, B) % self.p
        n = A.shape[-1]
        out = None
        for j in range(n):
            term = self.mul[A[..., :, j, None], B[..., None, j, :]]
            out = term if out is None else self.add[out, term]
        return out

    def matinv(self, A: np.ndarray) -> np.ndarray:
        """Batched inverse by Gauss-Jordan; raises on a singular matrix."""
        A = np.array(A, dtype=np.int64)
        single = A.ndim == 2
        if single:
            A = A[None]
        b, n, _ = A.shape
        M = np.concatenate([A, np.broadcast_to(np.eye(n, dtype=np.int64), (b, n, n))], axis=2).copy()
        rows = np.arange(b)
        for c in range(n):
            cand = M[:, c:, c] != 0
            if not cand.any(axis=1).all():
                raise ZeroDivisionError("singular matrix")
            piv = c + np.argmax(cand, axis=1)
            tmp = M[rows, piv].copy()
            M[rows, piv] = M[:, c]
            M[:, c] = tmp
            s = self.inv[M[:, c, c]]
            M[:, c] = self.mul[s[:, None], M[:, c]]
            for r in range(n):
                if r == c:
                    continue
                f = M[:, r, c]
                M[:, r] = self.sub[M[:, r], self.mul[f[:, None], M[:, c]]]
        out = M[:, :, n:]
        return out[0] if single else out

    def det(self, A: np.ndarray) -> np.ndarray:
        """Batched determinant (encoded)."""
        A = np.array(A, dtype=np.int64)
        single = A.ndim == 2
        if single:
            A = A[None]
        b, n, _ = A.shape
        M = A.copy()
        d = np.ones(b, dtype=np.int64)
        alive = np.ones(b, dtype=bool)
        rows = np.arange(b)
        for c in range(n):
            cand = M[:, c:, c] != 0
            has = cand.any(axis=1)
            alive &= has
            piv = c + np.argmax(cand, axis=1)
            swapped = piv != c
            tmp = M[rows, piv].copy()
            M[rows, piv] = M[:, c]
            M[:, c] = tmp
            d = np.where(swapped, self.neg[d], d)
            pv = M[:, c, c]
            d = self.mul[d, pv]
            s = self.inv[pv]
            for r in range(c + 1, n):
                f = self.mul[M[:, r, c], s]
                M[:, r] = self.sub[M[:, r], self.mul[f[:, None], M[:, c]]]
        d = np.where(alive, d, 0)
        return int(d[0]) if single else d


@lru_cache(maxsize=None)
def field(p: int, k: int = 1) -> GF:
    return GF(p, k)


def field_of_order(q: int) -> GF:
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1:
                raise ValueError(f"{q} is not a prime power")
            return field(p, k)
    raise ValueError(f"{q} is not a prime power")


def parse_field(spec: str) -> GF:
    """Parse ``"gf:p:k"`` (or ``"gf:p"``)."""
    parts = spec.split(":")
    if parts[0] != "gf" or len(parts) not in (2, 3):
        raise ValueError(f"bad field spec {spec!r}")
    p = int(parts[1])
    k = int(parts[2]) if len(parts) == 3 else 1
    return field(p, k)


@dataclass(frozen=True)
class FieldElem:
    F: GF
    v: int

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.F is not self.F:
                raise ValueError("elements of different fields")
            return other.v
        if isinstance(other, int):
            return self.F.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElem(self.F, int(self.F.add[self.v, o]))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElem(self.F, int(self.F.sub[self.v, o]))

    def __rsub__(self, other):
        o = self._coerce(other)
        return FieldElem(self.F, int(self.F.sub[o, self.v]))

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElem(self.F, int(self.F.mul[self.v, o]))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(self.F, int(self.F.neg[self.v]))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise ZeroDivisionError("division by zero in " + repr(self.F))
        return FieldElem(self.F, int(self.F.mul[self.v, self.F.inv[o]]))

    def __pow__(self, e: int):
        return FieldElem(self.F, self.F.pow(self.v, e))

    def __bool__(self):
        return self.v != 0

    def __int__(self):
        return self.v

    def frob(self, e: int = 1) -> "FieldElem":
        return FieldElem(self.F, int(self.F.frob_table(e)[self.v]))

    def __repr__(self):
        return f"{self.v}@{self.F!r}"


class Matrix:
    """Immutable square matrix over a :class:`GF`, entries encoded as ints."""

    __slots__ = ("F", "a")

    def __init__(self, F: GF, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if not 1 <= a.shape[0] <= MAX_DIM:
            raise ValueError(f"matrix dimension {a.shape[0]} outside 1..{MAX_DIM}")
        if a.size and (a.min() < 0 or a.max() >= F.q):
            raise ValueError("entry out of range for " + repr(F))
        a.setflags(write=False)
        self.F = F
        self.a = a

    @classmethod
    def identity(cls, F: GF, m: int) -> "Matrix":
        return cls(F, np.eye(m, dtype=np.int64))

    @classmethod
    def diag(cls, F: GF, values) -> "Matrix":
        return cls(F, np.diag(np.array(values, dtype=np.int64)))

    @property
    def m(self) -> int:
        return self.a.shape[0]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return Matrix(self.F, self.F.matmul(self.a, other.a))

    __mul__ = __matmul__

    def __eq__(self, other):
        return isinstance(other, Matrix) and other.F is self.F and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash((self.F.q, self.a.tobytes()))

    def det(self) -> int:
        return self.F.det(self.a)

    def inverse(self) -> "Matrix":
        return Matrix(self.F, self.F.matinv(self.a))

    def transpose(self) -> "Matrix":
        return Matrix(self.F, self.a.T)

    T = property(transpose)

    def frob(self, e: int = 1) -> "Matrix":
        return Matrix(self.F, self.F.frob_table(e)[self.a])

    def apply(self, v) -> np.ndarray:
        """Matrix times column vector."""
        v = np.asarray(v, dtype=np.int64)
        return self.F.matmul(self.a, v[:, None])[:, 0]

    def to_list(self) -> list:
        """Row-major integer list, the JSON wire format."""
        return [int(x) for x in self.a.ravel()]

    @classmethod
    def from_list(cls, F: GF, values) -> "Matrix":
        m = int(round(len(values) ** 0.5))
        if m * m != len(values):
            raise ValueError("row-major list length is not a square")
        return cls(F, np.array(values, dtype=np.int64).reshape(m, m))

    def __repr__(self):
        return f"Matrix({self.F!r}, {self.a.tolist()})"


def random_invertible(F: GF, m: int, rng: np.random.Generator) -> Matrix:
    while True:
        a = rng.integers(0, F.q, size=(m, m))
        if F.det(a) != 0:
            return Matrix(F, a)
