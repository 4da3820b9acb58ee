"""Normal subgroups, chief factors and the subgroups G0, G2 of small finite groups."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import ElementSet, GroupHandle

LATTICE_MAX = 10**4


def normal_closure(G: GroupHandle, gens, by=None, start: ElementSet | None = None) -> ElementSet:
    """Smallest subgroup containing ``gens`` (and ``start``) normalized by ``by``.

    ``by`` defaults to the generators of G, giving the normal closure in G.
    """
    conjugators = G.gen_indices() if by is None else [int(x) for x in by]
    gl = [int(x) for x in np.atleast_1d(np.asarray(gens, dtype=np.int64))]
    if start is not None:
        gl += start.generators()
    H = G.closure(gl)
    while True:
        hg = H.generators()
        added = False
        for y in conjugators:
            imgs = G.conj(np.array(hg, dtype=np.int64), y) if hg else np.zeros(0, dtype=np.int64)
            for c in np.atleast_1d(imgs):
                if not H.mask[c]:
                    hg.append(int(c))
                    H = G.closure(hg)
                    added = True
        if not added:
            return H


def commutator_subgroup(H: ElementSet, G: GroupHandle, K: ElementSet | None = None) -> ElementSet:
    """[H, K] for H normal in G (K defaults to G): normal closure of generator commutators."""
    if H.G is not G:
        raise ValueError("H is not a subset of G")
    if not H.is_subgroup():
        raise ValueError("H is not a subgroup")
    hg = H.generators()
    kg = G.gen_indices() if K is None else K.generators()
    comms = [int(G.comm(h, k)) for h in hg for k in kg]
    return normal_closure(G, comms)


def derived_subgroup(G: GroupHandle, H: ElementSet | None = None) -> ElementSet:
    """[H, H]; the normal closure here is taken inside G, valid when H is normal."""
    H = G.full() if H is None else H
    hg = H.generators()
    comms = [int(G.comm(a, b)) for a in hg for b in hg]
    return normal_closure(G, comms, by=hg)


def derived_series(G: GroupHandle) -> list:
    out = [G.full()]
    while True:
        D = derived_subgroup(G, out[-1])
        if D == out[-1]:
            return out
        out.append(D)


def is_soluble(G: GroupHandle, H: ElementSet | None = None) -> bool:
    cur = G.full() if H is None else H
    while len(cur) > 1:
        D = derived_subgroup(G, cur)
        if D == cur:
            return False
        cur = D
    return True


def centralizer_of_set(G: GroupHandle, A: ElementSet) -> ElementSet:
    allx = np.arange(G.order)
    m = np.ones(G.order, dtype=bool)
    for a in A.generators():
        m &= G.mul(allx, a) == G.mul(a, allx)
    return ElementSet(G, m)


def acting_trivially(G: GroupHandle, L: ElementSet, K: ElementSet) -> ElementSet:
    """{g in G : [l, g] in K for all l in L}, the centralizer of L/K."""
    allx = np.arange(G.order)
    m = np.ones(G.order, dtype=bool)
    for l in L.generators():
        m &= K.mask[G.comm(l, allx)]
    return ElementSet(G, m)


@dataclass
class ChiefFactor:
    upper: ElementSet
    lower: ElementSet
    abelian: bool
    simple: bool

    @property
    def order(self) -> int:
        return len(self.upper) // len(self.lower)


@dataclass
class NormalLattice:
    """All normal subgroups of G, sorted by (order, least-index signature)."""

    G: GroupHandle
    subgroups: list
    covers: dict = field(default_factory=dict)  # i -> list of j with subgroups[j] covering subgroups[i]

    def index_of(self, N: ElementSet) -> int:
        for i, M in enumerate(self.subgroups):
            if M == N:
                return i
        raise KeyError("not a normal subgroup")

    def between(self, lo: ElementSet, hi: ElementSet) -> list:
        return [N for N in self.subgroups if lo <= N <= hi]

    def maximal(self) -> list:
        top = len(self.subgroups) - 1
        return [self.subgroups[i] for i in range(top) if top in self.covers[i]]

    def minimal(self) -> list:
        return [self.subgroups[j] for j in self.covers.get(0, [])]

    def chief_factors(self) -> list:
        G = self.G
        out = []
        for i, ups in self.covers.items():
            K = self.subgroups[i]
            for j in ups:
                L = self.subgroups[j]
                D = derived_subgroup(G, L)
                abelian = D <= K
                out.append(ChiefFactor(L, K, abelian, True if abelian else _quotient_simple(G, L, K)))
        return out


def _quotient_simple(G: GroupHandle, L: ElementSet, K: ElementSet) -> bool:
    """Is L/K simple (L, K normal in G, K < L)?  Every x in L outside K must
    have L-normal closure (with K) equal to L; one x per L-class modulo K."""
    lg = np.array(L.generators(), dtype=np.int64)
    kidx = K.indices()
    seen = K.mask.copy()
    for x in np.nonzero(L.mask & ~K.mask)[0]:
        if seen[x]:
            continue
        if normal_closure(G, [int(x)], by=lg, start=K) != L:
            return False
        orbit = np.zeros(G.order, dtype=bool)
        orbit[x] = True
        front = np.array([x])
        while len(front):
            img = G.conj(front[:, None], lg[None, :]).ravel()
            img = np.unique(img[~orbit[img]])
            orbit[img] = True
            front = img
        seen[G.mul(np.nonzero(orbit)[0][:, None], kidx[None, :]).ravel()] = True
    return True


def normal_lattice(G: GroupHandle, limit: int = LATTICE_MAX) -> NormalLattice:
    """Exhaustive normal-subgroup lattice, as joins of normal closures of classes."""
    G.enumerate()
    if G.order > limit:
        raise ValueError(f"normal lattice search limited to order <= {limit} (got {G.order})")
    cls = G.classes
    closures = {}
    for k in range(cls.count):
        N = normal_closure(G, [int(cls.reps[k])])
        closures[N.class_mask().tobytes()] = N.class_mask()
    found = {G.trivial().class_mask().tobytes(): G.trivial().class_mask()}
    found.update(closures)
    frontier = list(found.values())
    base = list(closures.values())
    while frontier:
        new = []
        for A in frontier:
            for B in base:
                J = cls.product(A, B)
                key = J.tobytes()
                if key not in found:
                    found[key] = J
                    new.append(J)
        frontier = new
    subs = [cls.expand(m) for m in found.values()]
    subs.sort(key=lambda N: (len(N), tuple(N.indices()[:8])))
    size = np.array([len(N) for N in subs])
    M = np.array([N.mask for N in subs])
    # containment matrix: sub[i] <= sub[j]
    inside = (M.astype(np.int32) @ M.T.astype(np.int32)) == size[:, None]
    covers = {}
    for i in range(len(subs)):
        above = [j for j in range(len(subs)) if j != i and inside[i, j]]
        covers[i] = [j for j in above if not any(inside[k, j] and k != j and inside[i, k] and k != i for k in above)]
    return NormalLattice(G, subs, covers)


def g0_and_gss(G: GroupHandle, lattice: NormalLattice | None = None):
    """(G0, G2): G0 centralizes every nonabelian simple chief factor; G2 is the
    intersection of the maximal normal subgroups not containing G'."""
    lat = lattice or normal_lattice(G)
    G0 = G.full()
    for cf in lat.chief_factors():
        if not cf.abelian and cf.simple:
            G0 = G0 & acting_trivially(G, cf.upper, cf.lower)
    Gd = derived_subgroup(G)
    G2 = G.full()
    for M in lat.maximal():
        if not Gd <= M:
            G2 = G2 & M
    return G0, G2


@dataclass
class ChainStep:
    upper: ElementSet  # H_{i-1}
    lower: ElementSet  # H_i
    z: ElementSet  # Z_N, lower <= Z_N < upper
    z_unique: bool
    z_centralizes: bool  # [Z_N, N] <= H_i


def quasi_minimal_chain(G: GroupHandle, H: ElementSet, lattice: NormalLattice | None = None) -> list:
    """Chain H = H_0 > ... > H_z = 1 with each H_{i-1}/H_i quasi-minimal in G/H_i.

    Built from the bottom: given H_i, take a normal N with H_i < N <= H of least
    order satisfying N = [N, G] H_i.  Returned top-down.
    """
    lat = lattice or normal_lattice(G)
    if not H.is_normal() or not H.is_subgroup():
        raise ValueError("H is not a normal subgroup")
    cur = G.trivial()
    steps = []
    while cur != H:
        cands = [N for N in lat.between(cur, H) if N != cur]
        pick = None
        for N in cands:  # sorted by order
            if (commutator_subgroup(N, G) * cur) == N:
                pick = N
                break
        if pick is None:
            raise ValueError("no quasi-minimal normal section: H/H_i has [N, G] H_i < N throughout")
        below = [M for M in lat.between(cur, pick) if M != pick]
        maxl = [M for M in below if not any(M < M2 for M2 in below)]
        Z = maxl[0]
        zc = commutator_subgroup(Z, G, K=pick) <= cur
        steps.append(ChainStep(pick, cur, Z, len(maxl) == 1, zc))
        cur = pick
    return steps[::-1]
