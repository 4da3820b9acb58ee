"""Tuple machinery for writing elements of [H, G] as products of three c(v, g).

Tuples are integer arrays of element indices in a GroupHandle, with the tuple
position on the last axis so that every routine also works on batches.
Positions are 0-based in code; the docstrings use the 1-based j of the formulas.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import ElementSet, GroupHandle
from .lattice import commutator_subgroup, derived_subgroup, is_soluble, normal_lattice, quasi_minimal_chain
from .width import k_of_r

KT_EXHAUSTIVE_MAX = 10**6
FIBER_MAX = 10**7


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=np.int64)


def periodic(gbase, m: int) -> np.ndarray:
    """g_1..g_m with g_{i+jr} = g_i."""
    gbase = _arr(gbase)
    if len(gbase) == 0:
        raise ValueError("empty base tuple")
    return gbase[np.arange(m) % len(gbase)]


def tau_all(G: GroupHandle, g, v) -> np.ndarray:
    """All tau_j(g, v) at once: tau_j = v_j [g_{j-1}, v_{j-1}] ... [g_1, v_1]."""
    g, v = _arr(g), _arr(v)
    if g.shape[-1] != v.shape[-1]:
        raise ValueError("tuple lengths differ")
    out = np.empty(np.broadcast_shapes(g.shape, v.shape), dtype=np.int64)
    tail = np.zeros(out.shape[:-1], dtype=np.int64)
    for j in range(out.shape[-1]):
        out[..., j] = G.mul(v[..., j], tail)
        tail = G.mul(G.comm(g[..., j], v[..., j]), tail)
    return out


def tau_chain(G: GroupHandle, g, v, j: int):
    """tau_j(g, v) for 1 <= j <= m."""
    m = _arr(v).shape[-1]
    if not 1 <= j <= m:
        raise IndexError(f"j={j} outside 1..{m}")
    return tau_all(G, _arr(g)[..., :j], _arr(v)[..., :j])[..., j - 1]


def c_product(G: GroupHandle, v, g):
    """c(v, g) = [v_1, g_1] [v_2, g_2] ... [v_m, g_m]."""
    v, g = _arr(v), _arr(g)
    if v.shape[-1] != g.shape[-1]:
        raise ValueError("tuple lengths differ")
    acc = np.zeros(np.broadcast_shapes(v.shape, g.shape)[:-1], dtype=np.int64)
    for j in range(v.shape[-1]):
        acc = G.mul(acc, G.comm(v[..., j], g[..., j]))
    return acc


def _prod_left(G: GroupHandle, xs):
    acc = np.zeros_like(_arr(xs[0]))
    for x in xs:
        acc = G.mul(acc, x)
    return acc


def uv_sides(G: GroupHandle, g, us, as_) -> tuple:
    """Both sides of the correction identity for tuples a(i), u(i) (i = 1..n)."""
    g = _arr(g)
    us = [_arr(u) for u in us]
    as_ = [_arr(a) for a in as_]
    cs = [c_product(G, u, g) for u in us]
    lhs = G.mul(_prod_left(G, [c_product(G, G.mul(a, u), g) for a, u in zip(as_, us)]),
                G.inv[_prod_left(G, cs)])
    rhs = np.zeros_like(lhs)
    w = np.zeros_like(lhs)
    for a, u, c in zip(as_, us, cs):
        t = tau_all(G, g, u)
        inner = _prod_left(G, [G.conj(G.comm(a[..., j], g[..., j]), t[..., j]) for j in range(g.shape[-1])])
        rhs = G.mul(rhs, G.conj(inner, w))
        w = G.mul(G.inv[c], w)  # w(i+1) = c(u(i))^-1 w(i)
    return lhs, rhs


def uv_identity_check(G: GroupHandle, g, us, as_) -> bool:
    lhs, rhs = uv_sides(G, g, us, as_)
    return bool(np.all(lhs == rhs))


def h_prefix(G: GroupHandle, g) -> np.ndarray:
    """h_j = g_{j-1}^-1 ... g_1^-1."""
    g = _arr(g)
    out = np.empty_like(g)
    acc = np.zeros(g.shape[:-1], dtype=np.int64)
    for j in range(g.shape[-1]):
        out[..., j] = acc
        acc = G.mul(G.inv[g[..., j]], acc)
    return out


def newgens_sides(G: GroupHandle, g, u) -> tuple:
    g, u = _arr(g), _arr(u)
    left = G.conj(g, tau_all(G, g, u))
    right = G.conj(g, G.mul(u, h_prefix(G, g)))
    return left, right


def newgens_check(G: GroupHandle, g, u) -> bool:
    """<g_j^tau_j(g,u)> == <g_j^(u_j h_j)>, by generating both subgroups."""
    left, right = newgens_sides(G, g, u)
    return G.closure(left) == G.closure(right)


@dataclass
class TupleState:
    G: GroupHandle
    H: ElementSet
    C: ElementSet
    gbase: list
    m: int
    us: list = field(default_factory=list)
    h: int = 0

    def __post_init__(self):
        if self.m % len(self.gbase):
            raise ValueError("m must be a multiple of r")
        if not (self.C <= centralizer_set(self.G, self.H) and self.C.is_normal()):
            raise ValueError("C must be a normal subgroup centralizing H")

    @property
    def r(self) -> int:
        return len(self.gbase)

    @property
    def g(self) -> np.ndarray:
        return periodic(self.gbase, self.m)


def centralizer_set(G: GroupHandle, H: ElementSet) -> ElementSet:
    allx = np.arange(G.order)
    m = np.ones(G.order, dtype=bool)
    for h in H.generators():
        m &= G.comm(allx, h) == 0
    return ElementSet(G, m)


def min_generators_mod(G: GroupHandle, C: ElementSet, rmax: int = 4) -> int:
    """d(G/C) by exhaustive search; the first generator can be taken up to conjugacy."""
    if len(C) == G.order:
        return 0
    cls = G.classes
    firsts = [int(x) for x in cls.reps]
    for r in range(1, rmax + 1):
        for x in firsts:
            for rest in itertools.combinations(range(G.order), r - 1):
                if G.is_generating_mod([x, *rest], C):
                    return r
    raise ValueError(f"d(G/C) exceeds {rmax}")


# -- fibres of b -> c(b, y) ----------------------------------------------------


def _all_tuples(elems: np.ndarray, m: int) -> np.ndarray:
    """Rows of elems^m in lexicographic order, first position most significant."""
    n = len(elems)
    idx = np.indices((n,) * m).reshape(m, -1).T
    return elems[idx]


def fiber_counts(G: GroupHandle, N: ElementSet, y) -> np.ndarray:
    """counts[x] = |{b in N^m : c(b, y) = x}|, over G's indices."""
    y = _arr(y)
    m = len(y)
    if len(N) ** m > FIBER_MAX:
        raise ValueError(f"|N|^m = {len(N) ** m} exceeds the census cap")
    B = _all_tuples(N.indices(), m)
    return np.bincount(c_product(G, B, y), minlength=G.order)


@dataclass
class FiberRow:
    c: int
    parts: tuple | None
    sizes: tuple | None

    @property
    def ok(self) -> bool:
        return self.parts is not None


@dataclass
class FiberCensus:
    n_order: int
    nbar_order: int
    m: int
    r: int
    bound: Fraction
    rows: list
    abelian: bool
    kernel_formula: bool | None = None
    padding_checked: bool = False
    padding_ok: bool | None = None

    @property
    def ok(self) -> bool:
        return all(row.ok for row in self.rows) and self.padding_ok is not False and self.kernel_formula is not False

    def to_json(self):
        return {
            "N": self.n_order, "Nbar": self.nbar_order, "m": self.m, "r": self.r,
            "bound": str(self.bound), "abelian": self.abelian,
            "kernel_formula": self.kernel_formula, "padding_ok": self.padding_ok,
            "rows": [{"c": row.c, "parts": row.parts, "fibers": row.sizes} for row in self.rows],
            "pass": self.ok,
        }


def phi_fiber_census(G: GroupHandle, N: ElementSet, C: ElementSet, ys, r: int | None = None,
                     check_padding: bool = True) -> FiberCensus:
    """For each c in N', search c = c1 c2 c3 with |phi(i)^-1(c_i)| >= |N|^m |Nbar|^(-r-2).

    phi(i) is b -> c(b, y(i)) on N^m and Nbar = N / Z_N.
    """
    ys = [_arr(y) for y in ys]
    m = len(ys[0])
    if any(len(y) != m for y in ys):
        raise ValueError("y-tuples differ in length")
    if not is_soluble(G, N):
        raise ValueError("N is not soluble")
    chain = quasi_minimal_chain(G, N, normal_lattice(G))
    if len(chain) != 1:
        raise ValueError("N is not quasi-minimal")
    ZN = chain[0].z
    if not C.is_normal() or any(int(G.comm(a, b)) for a in C.generators() for b in N.generators()):
        raise ValueError("C must be normal with [C, N] = 1")
    for y in ys:
        if not G.is_generating_mod(y, C):
            raise ValueError("a y-tuple does not generate G modulo C")
    r = min_generators_mod(G, C) if r is None else r
    nbar = len(N) // len(ZN)
    bound = Fraction(len(N) ** m, nbar ** (r + 2))
    counts = [fiber_counts(G, N, y) for y in ys]
    good = [cnt >= bound for cnt in counts]
    good_idx = [np.nonzero(gm)[0] for gm in good]
    rows = []
    for c in derived_subgroup(G, N).indices():
        parts = None
        for c1 in good_idx[0]:
            rest = G.mul(G.inv[c1], c)
            c3 = G.mul(G.inv[good_idx[1]], rest)  # c2^-1 c1^-1 c for each good c2
            hit = np.nonzero(good[2][c3])[0]
            if len(hit):
                c2 = int(good_idx[1][hit[0]])
                parts = (int(c1), c2, int(c3[hit[0]]))
                break
        sizes = None if parts is None else tuple(int(counts[i][p]) for i, p in enumerate(parts))
        rows.append(FiberRow(int(c), parts, sizes))
    abelian = len(derived_subgroup(G, N)) == 1
    kernel = None
    if abelian:
        # phi(i) is a homomorphism: every value in the image has |N|^m / |image| preimages
        kernel = True
        for cnt in counts:
            img = cnt[cnt > 0]
            if not np.all(img == len(N) ** m // len(img)):
                kernel = False
    census = FiberCensus(len(N), nbar, m, r, bound, rows, abelian, kernel)
    if check_padding and len(N) ** (m + r + 1) <= FIBER_MAX:
        census.padding_checked = True
        census.padding_ok = padding_check(G, N, C, ys, r)
    return census


def padding_check(G: GroupHandle, N: ElementSet, C: ElementSet, ys, r: int) -> bool:
    """Extend each y by r+1 entries from C; then psi^-1(c) = phi^-1(c) x N^(r+1)."""
    cel = C.indices()
    B = _all_tuples(N.indices(), len(ys[0]) + r + 1)
    m = len(ys[0])
    for y in ys:
        pad = cel[np.arange(r + 1) % len(cel)]
        psi = c_product(G, B, np.concatenate([y, pad]))
        phi = c_product(G, B[:, :m], y)
        if not np.array_equal(psi, phi):
            return False
    return True


def random_generating_tuples(G: GroupHandle, C: ElementSet, m: int, count: int = 3, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        y = rng.integers(0, G.order, size=m)
        if G.is_generating_mod(y, C):
            out.append(y)
    return out


# -- search for h = c(v1,g) c(v2,g) c(v3,g) with generation ------------------------


def validate_kt(G: GroupHandle, H: ElementSet, C: ElementSet, gbase) -> None:
    problems = []
    if not (H.is_subgroup() and H.is_normal()):
        problems.append("H not a normal subgroup")
    elif not is_soluble(G, H):
        problems.append("H not soluble")
    elif commutator_subgroup(H, G) != H:
        problems.append("H != [H,G]")
    if not (C.is_subgroup() and C.is_normal()):
        problems.append("C not a normal subgroup")
    elif not C <= centralizer_set(G, H):
        problems.append("C does not centralize H")
    elif not G.is_generating_mod(gbase, C):
        problems.append("G != C<g_1..g_r>")
    if problems:
        raise ValueError("; ".join(problems))


@dataclass
class KTWitness:
    h: int
    m: int | None
    vs: tuple | None  # three tuples of element indices
    padded_ok: bool | None = None

    def to_json(self):
        return {"h": self.h, "m": self.m, "v": None if self.vs is None else [list(map(int, v)) for v in self.vs],
                "padded_ok": self.padded_ok}


@dataclass
class KTSearch:
    r: int
    m_max: int
    exhaustive: dict  # m -> bool
    witnesses: list
    bound_m: int  # r * k(r)

    @property
    def complete(self) -> bool:
        return all(w.m is not None for w in self.witnesses)

    @property
    def max_m(self):
        ms = [w.m for w in self.witnesses if w.m is not None]
        return max(ms) if ms else None

    def to_json(self):
        return {"r": self.r, "m_max": self.m_max, "bound_m": self.bound_m,
                "exhaustive": {str(k): v for k, v in self.exhaustive.items()},
                "max_m": self.max_m, "complete": self.complete,
                "witnesses": [w.to_json() for w in self.witnesses]}


def _generation_mask(G: GroupHandle, C: ElementSet, gens: np.ndarray) -> np.ndarray:
    cg = C.generators()
    memo = {}
    out = np.empty(len(gens), dtype=bool)
    for i, row in enumerate(gens):
        key = tuple(sorted(set(row.tolist())))
        if key not in memo:
            memo[key] = len(G.closure(list(key) + cg)) == G.order
        out[i] = memo[key]
    return out


def kt_verify(G: GroupHandle, C: ElementSet, g, vs, h: int) -> bool:
    """Check both h = prod c(v(i), g) and C<g_j^tau_j(g, v(i))> = G for each i."""
    g = _arr(g)
    if int(_prod_left(G, [c_product(G, _arr(v), g) for v in vs])) != h:
        return False
    return all(G.is_generating_mod(G.conj(g, tau_all(G, g, _arr(v))), C) for v in vs)


def kt_conclusion_search(G: GroupHandle, H: ElementSet, C: ElementSet, gbase, m_max: int,
                         targets=None, exhaustive_max: int = KT_EXHAUSTIVE_MAX,
                         samples: int = 20000, seed: int = 0) -> KTSearch:
    """Least m <= m_max for each target h admitting v(1), v(2), v(3) in H^m.

    For fixed m the admissible tuples W and their values c(v, g) are computed
    once; h is reachable iff it lies in V V V with V the set of values.  The
    reported witness is the least triple in the enumeration order of H^m.
    """
    validate_kt(G, H, C, gbase)
    r = len(gbase)
    hel = H.indices()
    targets = list(hel) if targets is None else [int(t) for t in targets]
    pending = {int(t) for t in targets}
    found = {}
    exhaustive = {}
    rng = np.random.default_rng(seed)
    for m in range(1, m_max + 1):
        if not pending:
            break
        g = periodic(gbase, m)
        if len(hel) ** m <= exhaustive_max:
            V = _all_tuples(hel, m)
            exhaustive[m] = True
        else:
            V = hel[rng.integers(0, len(hel), size=(samples, m))]
            exhaustive[m] = False
        T = tau_all(G, g, V)
        ok = _generation_mask(G, C, G.conj(g, T))
        W = V[ok]
        if not len(W):
            continue
        cv = c_product(G, W, g)
        vals = np.unique(cv)
        first = {int(x): int(np.argmax(cv == x)) for x in vals}
        inV = np.zeros(G.order, dtype=bool)
        inV[vals] = True
        VV = np.zeros(G.order, dtype=bool)
        VV[G.mul(vals[:, None], vals[None, :]).ravel()] = True
        for h in sorted(pending):
            need = G.mul(G.inv[cv], h)  # c(v2)c(v3) for each choice of v1
            hit1 = np.nonzero(VV[need])[0]
            if not len(hit1):
                continue
            i1 = int(hit1[0])
            need2 = G.mul(G.inv[cv], need[i1])
            i2 = int(np.nonzero(inV[need2])[0][0])
            i3 = first[int(need2[i2])]
            found[h] = (m, (W[i1], W[i2], W[i3]))
        pending -= set(found)
    witnesses = []
    for h in targets:
        if h not in found:
            witnesses.append(KTWitness(h, None, None))
            continue
        m, vs = found[h]
        assert kt_verify(G, C, periodic(gbase, m), vs, h)
        padded = tuple(np.concatenate([v, np.zeros(r, dtype=np.int64)]) for v in vs)
        pad_ok = kt_verify(G, C, periodic(gbase, m + r), padded, h)
        witnesses.append(KTWitness(h, m, tuple(tuple(int(x) for x in v) for v in vs), pad_ok))
    return KTSearch(r, m_max, exhaustive, witnesses, r * k_of_r(r))


# -- explicit assignment when kappa lies in [Z, G] ------------------------------------


@dataclass
class Q3Result:
    z: tuple
    bs: tuple
    kappa: int
    verified: bool


def q3_explicit(G: GroupHandle, Z: ElementSet, gbase, kappa: int, m: int | None = None,
                H: ElementSet | None = None, us=None) -> Q3Result:
    """Write kappa = prod_j [z_j, g_j] (least z in Z^r) and set b(1) = (z, 1, ..), b(2) = b(3) = 1.

    The assignment is verified against prod_i c(b(i), y(i)) = kappa, with
    y(i)_j = g_j^(tau_j(g, u(i)) w(i)) built from correction tuples u(i) in H^m
    (identity tuples by default).
    """
    gbase = _arr(gbase)
    r = len(gbase)
    m = r if m is None else m
    if m < r:
        raise ValueError("m must be at least r")
    if H is not None and any(int(G.comm(z, h)) for z in Z.generators() for h in H.generators()):
        raise ValueError("[Z, H] != 1")
    zel = Z.indices()
    cand = _all_tuples(zel, r)
    vals = c_product(G, cand, gbase)
    hit = np.nonzero(vals == kappa)[0]
    if not len(hit):
        raise ValueError("kappa is not a product of the [z_j, g_j]")
    z = cand[hit[0]]
    b1 = np.concatenate([z, np.zeros(m - r, dtype=np.int64)])
    bs = (b1, np.zeros(m, dtype=np.int64), np.zeros(m, dtype=np.int64))
    g = periodic(gbase, m)
    us = [np.zeros(m, dtype=np.int64)] * 3 if us is None else [_arr(u) for u in us]
    total = 0
    w = 0
    for b, u in zip(bs, us):
        y = G.conj(g, G.mul(tau_all(G, g, u), w))
        total = int(G.mul(total, c_product(G, b, y)))
        w = int(G.mul(G.inv[int(c_product(G, u, g))], w))
    return Q3Result(tuple(int(x) for x in z), tuple(tuple(int(x) for x in b) for b in bs), int(kappa),
                    total == int(kappa))
