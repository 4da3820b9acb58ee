"""Escape certificates for products of simple groups with twisted generators.

Each factor S_j is realized inside an automorphism group; generator i acts on
S_j by an automorphism b_ij = s_ij a_ij, with s_ij chosen to make the
displacement set [S_j, b_ij] small.  X_n is the n-fold product of the classes
of the b_i and their inverses; a factor escapes at level n when some element of
S_j lies outside the image of X_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import Realization, realize
from .groups import ElementSet, GroupHandle
from .width import displacement, min_twist, star_chain


@dataclass
class Factor:
    spec: str
    autos: list  # ambient rows a_1..a_d


@dataclass
class TwistedFactor:
    spec: str
    R: Realization
    autos: list
    s: list  # minimizing s_ij (S indices)
    b: list  # ambient rows s_ij a_ij
    disp: list  # |[S, b_ij]|
    ratios: list

    def to_json(self):
        return {"spec": self.spec, "s": self.s, "disp": self.disp, "ratio": [r.value for r in self.ratios]}


def default_sequence(specs, d: int = 1) -> list:
    """Factors with a_i cycling through the non-inner coset representatives of Q(S)."""
    out = []
    for spec in specs:
        R = realize(spec)
        outer = R.q_reps[1:]
        if not outer:
            raise ValueError(f"{spec}: Q(S) has no non-inner automorphism")
        out.append(Factor(str(spec), [outer[i % len(outer)] for i in range(d)]))
    return out


def twist_select(seq: list) -> list:
    """Per factor and generator, the s minimizing |[S, s a]| (exhaustive when feasible)."""
    out = []
    for fac in seq:
        R = realize(fac.spec)
        ss, bs, ds, rs = [], [], [], []
        for a in fac.autos:
            if not R.is_in_Q(a):
                raise ValueError(f"{fac.spec}: automorphism outside Q(S)")
            if R.is_inner(a):
                raise ValueError(f"{fac.spec}: automorphism is inner")
            res = min_twist(R, a)
            b = R.mul(R.embed(res.s)[0], a)
            ss.append(res.s)
            bs.append(b)
            ds.append(res.size)
            rs.append(res.ratio)
        out.append(TwistedFactor(fac.spec, R, list(fac.autos), ss, bs, ds, rs))
    return out


@dataclass
class ImageGroup:
    """A = <Inn(S), b_1, .., b_d> with S's elements located inside it."""

    A: GroupHandle
    s_index: np.ndarray  # S index -> A index
    b_index: list

    @property
    def s_mask(self) -> np.ndarray:
        m = np.zeros(self.A.order, dtype=bool)
        m[self.s_index] = True
        return m


def image_group(R: Realization, bs) -> ImageGroup:
    S = R.S
    gens = np.concatenate([R.embed(S.gen_indices())] + [np.atleast_2d(b) for b in bs])
    A = GroupHandle(R.amb, gens, name=f"<{R.spec}, b>")
    A.enumerate()
    s_index = A.lookup(R.embed(np.arange(S.order)))
    b_index = [int(x) for x in A.lookup(np.array([np.asarray(b) for b in bs]))]
    return ImageGroup(A, s_index, b_index)


def base_set(img: ImageGroup) -> ElementSet:
    """Union of the A-classes of the b_i and b_i^-1."""
    A = img.A
    cls = A.classes
    hit = np.zeros(cls.count, dtype=bool)
    for b in img.b_index:
        hit[cls.class_id[b]] = True
        hit[cls.class_id[A.inv[b]]] = True
    return cls.expand(hit)


def xn_images(img: ImageGroup, nmax: int) -> list:
    Y = base_set(img)
    return list(star_chain(Y, nmax))


@dataclass
class XnCount:
    n: int
    count: int
    s_count: int  # |X_n image meet S|
    group_order: int
    s_order: int
    bound: float  # (2d |A:S| max |[S,b]|)^n
    class_bounds_ok: bool

    def to_json(self):
        return {"n": self.n, "xn_count": self.count, "xn_in_S": self.s_count, "group_order": self.group_order,
                "S_order": self.s_order, "bound": self.bound, "class_bounds_ok": self.class_bounds_ok}


def xn_image_count(R: Realization, bs, n: int, img: ImageGroup | None = None) -> XnCount:
    """|image of X_n| in A = <Inn(S), b>, and the counting bound from measured displacements."""
    if n < 1:
        raise ValueError("n must be positive")
    img = img or image_group(R, bs)
    A = img.A
    S = R.S
    P = xn_images(img, n)[-1]
    disps = [len(displacement(S, R.aut_perm(b))) for b in bs]
    idx = A.order // S.order
    # |b^A| <= |A:S| |[S,b]|, since b^s = b [b, s] and |[b,S]| = |[S,b]|
    cls = A.classes
    ok = all(int(cls.sizes[cls.class_id[b]]) <= idx * dsp for b, dsp in zip(img.b_index, disps))
    bound = float(2 * len(bs) * idx * max(disps)) ** n
    return XnCount(n, len(P), int(np.count_nonzero(P.mask[img.s_index])), A.order, S.order, bound, ok)


def xn_recheck(img: ImageGroup, n: int) -> np.ndarray:
    """X_n image by explicit conjugation and all-pairs products, without class data."""
    A = img.A
    allx = np.arange(A.order)
    Y = np.zeros(A.order, dtype=bool)
    for b in img.b_index:
        Y[A.conj(b, allx)] = True
        Y[A.conj(A.inv[b], allx)] = True
    P = Y.copy()
    yi = np.nonzero(Y)[0]
    for _ in range(n - 1):
        Q = np.zeros(A.order, dtype=bool)
        Q[A.mul(np.nonzero(P)[0][:, None], yi[None, :]).ravel()] = True
        P = Q
    return P


@dataclass
class LevelWitness:
    n: int
    factor: int
    spec: str
    witness_index: int  # index in S
    xn_count: int
    xn_in_S: int
    group_order: int
    s_order: int
    bound_predicted: bool
    recheck_outside: bool

    def to_json(self):
        return {"n": self.n, "factor": self.factor, "spec": self.spec, "witness_index": self.witness_index,
                "xn_count": self.xn_count, "xn_in_S": self.xn_in_S, "group_order": self.group_order,
                "S_order": self.s_order, "bound_predicted": self.bound_predicted,
                "count_verified": self.xn_in_S < self.s_order, "recheck_outside": self.recheck_outside}


class NoEscape(ValueError):
    def __init__(self, msg, counts):
        super().__init__(msg)
        self.counts = counts


@dataclass
class EscapeCertificate:
    levels: list
    factors: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        js = [w.factor for w in self.levels]
        return all(w.recheck_outside for w in self.levels) and all(a < b for a, b in zip(js, js[1:]))

    def to_json(self):
        return {"factors": self.factors, "levels": [w.to_json() for w in self.levels], "pass": self.passed}


def escape_certificate(seq: list, d: int, levels) -> EscapeCertificate:
    """Assign to each level n a factor j(n), strictly increasing, whose S escapes X_n.

    The witness is the least S index outside the X_n image; it is rechecked
    against an independent recomputation of X_n.
    """
    if any(len(f.autos) != d for f in seq):
        raise ValueError("every factor needs exactly d automorphisms")
    levels = sorted(set(int(n) for n in levels))
    twisted = twist_select(seq)
    imgs = [image_group(t.R, t.b) for t in twisted]
    chains = {}
    out = []
    last = -1
    counts = {}
    for n in levels:
        chosen = None
        for j in range(last + 1, len(twisted)):
            if j not in chains or len(chains[j]) < n:
                chains[j] = xn_images(imgs[j], max(levels))
            P = chains[j][n - 1]
            inS = P.mask[imgs[j].s_index]
            counts.setdefault(n, []).append({"factor": j, "xn_in_S": int(inS.sum()), "S_order": len(inS)})
            if not inS.all():
                chosen = (j, int(np.argmin(inS)))
                break
        if chosen is None:
            raise NoEscape(f"no escaping factor at level {n}", counts)
        j, x = chosen
        t, img = twisted[j], imgs[j]
        c = xn_image_count(t.R, t.b, n, img)
        recheck = xn_recheck(img, n)
        predicted = c.bound < t.R.S.order
        out.append(LevelWitness(n, j, t.spec, x, c.count, c.s_count, c.group_order, c.s_order, predicted,
                                not bool(recheck[img.s_index[x]])))
        last = j
    return EscapeCertificate(out, [t.to_json() for t in twisted])


def eta_measured(img: ImageGroup, s_order: int) -> float:
    """log|A| / log|S| - 1."""
    return math.log(img.A.order) / math.log(s_order) - 1
