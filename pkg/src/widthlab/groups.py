"""Finite groups given by generators, with a dense, BFS-ordered element table.

Element ``i`` of a :class:`GroupHandle` is the ``i``-th element discovered by a
breadth-first search from the identity that right-multiplies by the
generators in order, so indices are reproducible for a fixed generator list.
Subsets are :class:`ElementSet` bit vectors over those indices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .algebra import Algebra, MatAlgebra, PermAlgebra

log = logging.getLogger(__name__)

DEFAULT_CAP = 2 * 10**7
TABLE_MAX = 6144
_CHUNK = 1 << 17


class CapExceeded(RuntimeError):
    def __init__(self, msg: str, partial: int = 0):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class ConcreteElement:
    kind: str  # "perm" | "projective" | "matrix" | "semilinear"
    payload: tuple

    def to_json(self):
        return {"kind": self.kind, "payload": list(self.payload)}


class _KeyIndex:
    """Sorted 64-bit keys with their dense indices; membership by bisection."""

    def __init__(self):
        self.chunks: list = []

    def add(self, keys, idx):
        o = np.argsort(keys, kind="stable")
        self.chunks.append((keys[o], idx[o]))
        if len(self.chunks) > 12:
            self.compact()

    def compact(self):
        if len(self.chunks) > 1:
            k = np.concatenate([c[0] for c in self.chunks])
            i = np.concatenate([c[1] for c in self.chunks])
            o = np.argsort(k, kind="stable")
            self.chunks = [(k[o], i[o])]

    def lookup(self, keys):
        out = np.full(len(keys), -1, dtype=np.int64)
        for sk, si in self.chunks:
            if not len(sk):
                continue
            pos = np.searchsorted(sk, keys)
            pos = np.minimum(pos, len(sk) - 1)
            hit = sk[pos] == keys
            out[hit] = si[pos[hit]]
        return out


class GroupHandle:
    """A finite group generated by ``gens`` inside an element algebra."""

    def __init__(self, algebra: Algebra, gens, name: str = "", cap: int = DEFAULT_CAP):
        self.algebra = algebra
        g = np.asarray(gens, dtype=np.int64).reshape(-1, algebra.width) if len(gens) else \
            np.zeros((0, algebra.width), dtype=np.int64)
        self.gens = algebra.canon(g) if len(g) else g
        self.name = name
        self.cap = cap
        self._enumerated = False

    def __repr__(self):
        n = self.order if self._enumerated else "?"
        return f"<GroupHandle {self.name or self.algebra!r} order={n}>"

    # -- enumeration ---------------------------------------------------------

    def enumerate(self) -> int:
        if self._enumerated:
            return self.order
        alg = self.algebra
        ident = alg.canon(alg.identity()[None])[0]
        elems = [ident[None]]
        keys = [alg.pack(ident[None])]
        parent = [np.array([-1])]
        pgen = [np.array([-1])]
        index = _KeyIndex()
        index.add(keys[0], np.array([0]))
        n = 1
        ng = len(self.gens)
        frontier_elems = ident[None]
        frontier_idx = np.array([0])
        while len(frontier_idx) and ng:
            new_e, new_k, new_p, new_g = [], [], [], []
            fresh_keys = np.zeros(0, dtype=np.uint64)
            for s in range(0, len(frontier_idx), max(1, _CHUNK // ng)):
                F = frontier_elems[s: s + max(1, _CHUNK // ng)]
                fi = frontier_idx[s: s + max(1, _CHUNK // ng)]
                cand = alg.mul(np.repeat(F, ng, axis=0), np.tile(self.gens, (len(F), 1)))
                ck = alg.pack(cand)
                mask = index.lookup(ck) < 0
                if len(fresh_keys):
                    mask &= ~np.isin(ck, fresh_keys)
                pos = np.nonzero(mask)[0]
                if not len(pos):
                    continue
                _, first = np.unique(ck[pos], return_index=True)
                pos = pos[np.sort(first)]
                new_e.append(cand[pos])
                new_k.append(ck[pos])
                new_p.append(fi[pos // ng])
                new_g.append(pos % ng)
                fresh_keys = np.concatenate([fresh_keys, ck[pos]])
            if not new_e:
                break
            E = np.concatenate(new_e)
            K = np.concatenate(new_k)
            idx = np.arange(n, n + len(K))
            n += len(K)
            if n > self.cap:
                raise CapExceeded(f"{self.name or 'group'}: more than {self.cap} elements", n)
            index.add(K, idx)
            elems.append(E)
            keys.append(K)
            parent.append(np.concatenate(new_p))
            pgen.append(np.concatenate(new_g))
            frontier_elems, frontier_idx = E, idx
        index.compact()
        E = np.concatenate(elems)
        dt = np.uint8 if E.max(initial=0) < 256 else np.int32
        self.elems = E.astype(dt)
        self.keys = np.concatenate(keys)
        self.parent = np.concatenate(parent)
        self.pgen = np.concatenate(pgen)
        self._index = index
        self.order = n
        self._enumerated = True
        self._finish()
        log.debug("enumerated %s: %d elements", self.name, n)
        return n

    def _finish(self):
        N = self.order
        self.inv = np.empty(N, dtype=np.int64)
        for s in range(0, N, _CHUNK):
            self.inv[s: s + _CHUNK] = self.lookup(self.algebra.inv(self._e(slice(s, s + _CHUNK))))
        self.right_gen = [self._mul_by_elem(slice(None), g, right=True) for g in self.gens]
        self.table = None
        if N <= TABLE_MAX:
            dt = np.int16 if N < 2**15 else np.int32
            T = np.empty((N, N), dtype=dt)
            T[0] = np.arange(N)
            left = [self._mul_by_elem(slice(None), g, right=False) for g in self.gens]
            for a in range(1, N):
                T[a] = T[self.parent[a]][left[self.pgen[a]]]
            self.table = T

    def _e(self, sel):
        return self.elems[sel].astype(np.int64)

    def _mul_by_elem(self, sel, g, right=True):
        out = []
        E = self._e(sel)
        for s in range(0, len(E), _CHUNK):
            blk = E[s: s + _CHUNK]
            gg = np.broadcast_to(g, blk.shape)
            prod = self.algebra.mul(blk, gg) if right else self.algebra.mul(gg, blk)
            out.append(self.lookup(prod))
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)

    def _need(self):
        if not self._enumerated:
            self.enumerate()

    # -- element access ------------------------------------------------------

    def lookup(self, rows) -> np.ndarray:
        """Dense indices of element rows (already canonical); -1 if absent."""
        self._need()
        rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        return self._index.lookup(self.algebra.pack(rows))

    def index(self, x) -> int:
        if isinstance(x, ConcreteElement):
            x = np.array(x.payload, dtype=np.int64)
        row = self.algebra.canon(np.atleast_2d(np.asarray(x, dtype=np.int64)))
        i = int(self.lookup(row)[0])
        if i < 0:
            raise KeyError("element not in group")
        return i

    def element(self, i: int) -> ConcreteElement:
        self._need()
        return ConcreteElement(self.algebra.kind, tuple(int(v) for v in self.elems[i]))

    def row(self, i) -> np.ndarray:
        self._need()
        return self._e(i)

    @property
    def identity(self) -> int:
        return 0

    # -- arithmetic on indices -----------------------------------------------

    def mul(self, a, b) -> np.ndarray:
        """Elementwise products of index arrays (broadcasting)."""
        self._need()
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        if self.table is not None:
            return self.table[a, b].astype(np.int64)
        shape = a.shape
        a, b = a.ravel(), b.ravel()
        out = np.empty(len(a), dtype=np.int64)
        for s in range(0, len(a), _CHUNK):
            prod = self.algebra.mul(self._e(a[s: s + _CHUNK]), self._e(b[s: s + _CHUNK]))
            out[s: s + _CHUNK] = self.lookup(prod)
        return out.reshape(shape)

    def mul1(self, *xs) -> int:
        r = 0
        for x in xs:
            r = int(self.mul(r, x))
        return r

    def inverse(self, a):
        self._need()
        return self.inv[a]

    def conj(self, x, g):
        """x^g = g^-1 x g."""
        return self.mul(self.mul(self.inverse(g), x), g)

    def comm(self, a, b):
        """[a, b] = a^-1 b^-1 a b."""
        return self.mul(self.mul(self.inverse(a), self.inverse(b)), self.mul(a, b))

    def right_perm(self, x: int) -> np.ndarray:
        """y -> y*x over all indices."""
        self._need()
        return self.mul(np.arange(self.order), x)

    def left_perm(self, x: int) -> np.ndarray:
        self._need()
        return self.mul(x, np.arange(self.order))

    def conj_perm(self, g: int) -> np.ndarray:
        """y -> g^-1 y g over all indices."""
        return self.conj(np.arange(self.order), g)

    def gen_indices(self) -> list:
        return [int(i) for i in self.lookup(self.gens)] if len(self.gens) else []

    def element_order(self, x: int) -> int:
        k, y = 1, x
        while y != 0:
            y = int(self.mul(y, x))
            k += 1
        return k

    # -- sets ----------------------------------------------------------------

    def full(self) -> "ElementSet":
        self._need()
        return ElementSet(self, np.ones(self.order, dtype=bool))

    def trivial(self) -> "ElementSet":
        return self.set_of([0])

    def empty(self) -> "ElementSet":
        self._need()
        return ElementSet(self, np.zeros(self.order, dtype=bool))

    def set_of(self, idx) -> "ElementSet":
        self._need()
        m = np.zeros(self.order, dtype=bool)
        m[np.asarray(idx, dtype=np.int64)] = True
        return ElementSet(self, m)

    def closure(self, gens, start: "ElementSet | None" = None) -> "ElementSet":
        """Subgroup generated by the indices ``gens`` (and the subgroup ``start``)."""
        self._need()
        gens = [int(g) for g in np.atleast_1d(np.asarray(gens, dtype=np.int64))]
        if start is not None:
            gens = gens + start.generators()
        mask = np.zeros(self.order, dtype=bool)
        mask[0] = True
        gens = [g for g in dict.fromkeys(gens) if g != 0]
        frontier = np.array([0])
        while len(frontier) and gens:
            prod = self.mul(frontier[:, None], np.array(gens)[None, :]).ravel()
            prod = np.unique(prod[~mask[prod]])
            mask[prod] = True
            frontier = prod
        return ElementSet(self, mask)

    def is_generating_mod(self, gens, M: "ElementSet | None" = None) -> bool:
        """Does <gens, M> equal the whole group?  M must be a subgroup."""
        if M is not None and not M.is_subgroup():
            raise ValueError("M is not closed under products")
        return len(self.closure(gens, start=M)) == self.order

    @cached_property
    def classes(self) -> "ClassStructure":
        return ClassStructure(self)

    def subgroup_handle(self, H: "ElementSet", name: str = "") -> "GroupHandle":
        """A new handle for the subgroup H, generated by H's greedy generators."""
        gens = self.elems[H.generators()].astype(np.int64)
        sub = GroupHandle(self.algebra, gens, name=name or f"sub({self.name})", cap=self.cap)
        sub.enumerate()
        return sub

    def centralizer(self, x: int) -> "ElementSet":
        allx = np.arange(self.order)
        return ElementSet(self, self.mul(allx, x) == self.mul(x, allx))

    def is_abelian(self) -> bool:
        gi = self.gen_indices()
        return all(int(self.comm(a, b)) == 0 for a in gi for b in gi)


class ElementSet:
    """Subset of a group's element table as a boolean vector."""

    __slots__ = ("G", "mask", "_gens")

    def __init__(self, G: GroupHandle, mask: np.ndarray):
        self.G = G
        self.mask = np.asarray(mask, dtype=bool)
        self._gens = None

    def __len__(self):
        return int(self.mask.sum())

    size = property(__len__)

    def __contains__(self, i):
        return bool(self.mask[int(i)])

    def indices(self) -> np.ndarray:
        return np.nonzero(self.mask)[0]

    def __eq__(self, other):
        return isinstance(other, ElementSet) and other.G is self.G and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(np.packbits(self.mask).tobytes())

    def __and__(self, other):
        return ElementSet(self.G, self.mask & other.mask)

    def __or__(self, other):
        return ElementSet(self.G, self.mask | other.mask)

    def __sub__(self, other):
        return ElementSet(self.G, self.mask & ~other.mask)

    def __le__(self, other):
        return not np.any(self.mask & ~other.mask)

    def __lt__(self, other):
        return self <= other and len(self) < len(other)

    def __mul__(self, other):
        return product(self, other)

    def __repr__(self):
        return f"<ElementSet {len(self)}/{self.G.order} of {self.G.name}>"

    def to_list(self) -> list:
        return [int(i) for i in self.indices()]

    def inverse(self) -> "ElementSet":
        m = np.zeros_like(self.mask)
        m[self.G.inv[self.indices()]] = True
        return ElementSet(self.G, m)

    def is_subgroup(self) -> bool:
        if not self.mask[0]:
            return False
        idx = self.indices()
        if not self.mask[self.G.inv[idx]].all():
            return False
        gens = self.generators()
        return len(self.G.closure(gens)) == len(self)

    def generators(self) -> list:
        """A small generating list: greedily add the least index not yet generated."""
        if self._gens is None:
            gens: list = []
            cur = self.G.trivial()
            while True:
                missing = np.nonzero(self.mask & ~cur.mask)[0]
                if not len(missing):
                    break
                gens.append(int(missing[0]))
                cur = self.G.closure(gens)
                if np.any(cur.mask & ~self.mask):
                    raise ValueError("set is not closed under multiplication")
            self._gens = gens
        return list(self._gens)

    def is_normal(self) -> bool:
        """Closed under conjugation by the whole group."""
        cls = self.G.classes
        cid = cls.class_id
        m = self.mask
        first = np.zeros(cls.count, dtype=bool)
        first[cid[m]] = True
        return bool(np.array_equal(first[cid], m))

    def class_mask(self) -> np.ndarray:
        """Boolean vector over conjugacy classes; requires a normal set."""
        cls = self.G.classes
        out = np.zeros(cls.count, dtype=bool)
        out[cls.class_id[self.mask]] = True
        if not np.array_equal(out[cls.class_id], self.mask):
            raise ValueError("set is not a union of conjugacy classes")
        return out


class ClassStructure:
    """Conjugacy classes of a group, labelled by least element index."""

    def __init__(self, G: GroupHandle):
        G._need()
        self.G = G
        N = G.order
        gi = G.gen_indices()
        rows, cols = [], []
        allx = np.arange(N)
        for g in gi:
            rows.append(allx)
            cols.append(G.conj(allx, g))
        if rows:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
            A = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(N, N)).tocsr()
            _, lab = connected_components(A, directed=True, connection="weak")
        else:
            lab = np.zeros(N, dtype=np.int64)
        # relabel by least member
        first = np.full(lab.max() + 1, N, dtype=np.int64)
        np.minimum.at(first, lab, allx)
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        self.class_id = rank[lab]
        self.count = len(order)
        self.reps = first[order]
        self.sizes = np.bincount(self.class_id, minlength=self.count)
        self._support = None

    def members(self, k: int) -> np.ndarray:
        return np.nonzero(self.class_id == k)[0]

    def expand(self, cmask: np.ndarray) -> ElementSet:
        return ElementSet(self.G, np.asarray(cmask, dtype=bool)[self.class_id])

    @property
    def support(self) -> np.ndarray:
        """T[i, j, k] is True iff class k lies in (class i)(class j)."""
        if self._support is None:
            G, c = self.G, self.count
            T = np.zeros((c, c, c), dtype=bool)
            allx = np.arange(G.order)
            ainv = G.inv[allx]
            for k, x in enumerate(self.reps):
                b = G.mul(ainv, int(x))  # a * b = x
                T[self.class_id[allx], self.class_id[b], k] = True
            self._support = T
        return self._support

    def product(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Class mask of the product of two normal sets given as class masks."""
        T = self.support
        sub = T[np.ix_(np.nonzero(A)[0], np.nonzero(B)[0])]
        return sub.any(axis=(0, 1)) if sub.size else np.zeros(self.count, dtype=bool)


def product(A: ElementSet, B: ElementSet) -> ElementSet:
    """The product set {ab : a in A, b in B}."""
    G = A.G
    if B.G is not G:
        raise ValueError("sets live in different groups")
    ai, bi = A.indices(), B.indices()
    out = np.zeros(G.order, dtype=bool)
    if not len(ai) or not len(bi):
        return ElementSet(G, out)
    if G.table is not None:
        step = max(1, _CHUNK // len(bi))
        for s in range(0, len(ai), step):
            out[G.table[np.ix_(ai[s: s + step], bi)].ravel()] = True
        return ElementSet(G, out)
    if "classes" in G.__dict__ and A.is_normal() and B.is_normal():
        cls = G.classes
        return cls.expand(cls.product(A.class_mask(), B.class_mask()))
    if len(ai) <= len(bi):
        for a in ai:
            out[G.mul(a, bi)] = True
    else:
        for b in bi:
            out[G.mul(ai, b)] = True
    return ElementSet(G, out)


def perm_group(n: int, gens, name: str = "", cap: int = DEFAULT_CAP, one_based: bool = True) -> GroupHandle:
    """Permutation group from generators in cycle notation (lists of cycles)."""
    alg = PermAlgebra(n)
    rows = [alg.from_cycles(*g, one_based=one_based) if not isinstance(g, np.ndarray) else g for g in gens]
    return GroupHandle(alg, np.array(rows).reshape(-1, n) if rows else [], name=name, cap=cap)


def alternating(n: int, cap: int = DEFAULT_CAP) -> GroupHandle:
    if n < 1:
        raise ValueError("degree must be positive")
    if n < 3:
        return perm_group(max(n, 1), [], name=f"alt:{n}")
    if n == 3:
        return perm_group(3, [[(1, 2, 3)]], name="alt:3", cap=cap)
    if n % 2:
        gens = [[(1, 2, 3)], [tuple(range(1, n + 1))]]
    else:
        gens = [[(1, 2, 3)], [tuple(range(2, n + 1))]]
    return perm_group(n, gens, name=f"alt:{n}", cap=cap)


def symmetric(n: int, cap: int = DEFAULT_CAP) -> GroupHandle:
    if n < 2:
        return perm_group(max(n, 1), [], name=f"sym:{n}")
    return perm_group(n, [[(1, 2)], [tuple(range(1, n + 1))]], name=f"sym:{n}", cap=cap)


def dihedral8() -> GroupHandle:
    return perm_group(4, [[(1, 2, 3, 4)], [(1, 3)]], name="d8")


def sl23() -> GroupHandle:
    from .gf import field
    alg = MatAlgebra(field(3), 2, projective=False)
    return GroupHandle(alg, [[1, 1, 0, 1], [1, 0, 1, 1]], name="sl23")


def quaternion8() -> GroupHandle:
    from .gf import field
    alg = MatAlgebra(field(3), 2, projective=False)
    return GroupHandle(alg, [[0, 1, 2, 0], [1, 1, 1, 2]], name="q8")


def trivial_group() -> GroupHandle:
    return GroupHandle(PermAlgebra(1), [], name="trivial")


SMALL_GROUPS = {
    "sym4": lambda: symmetric(4),
    "alt4": lambda: alternating(4),
    "alt5": lambda: alternating(5),
    "sym5": lambda: symmetric(5),
    "sl23": sl23,
    "q8": quaternion8,
    "d8": dihedral8,
    "trivial": trivial_group,
}


def parse_group(spec: str, cap: int = DEFAULT_CAP) -> GroupHandle:
    """``alt:n``, ``sym:n``, the small named groups, else the simple catalog."""
    s = spec.strip().lower()
    if s in SMALL_GROUPS:
        G = SMALL_GROUPS[s]()
        G.cap = cap
        return G
    parts = s.split(":")
    if parts[0] == "alt" and len(parts) == 2:
        return alternating(int(parts[1]), cap=cap)
    if parts[0] == "sym" and len(parts) == 2:
        return symmetric(int(parts[1]), cap=cap)
    from .catalog import build_simple, parse_spec
    return build_simple(parse_spec(spec), cap=cap)
