"""Commutator sets, product sets, widths, and displacement sets [S, f]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .groups import ElementSet, GroupHandle, product
from .lattice import commutator_subgroup

EXHAUSTIVE_TWIST_MAX = 10**5
BRUTE_PAIRS_MAX = 5 * 10**7
INF = math.inf


def commutator_set(H: ElementSet, G: GroupHandle | None = None) -> ElementSet:
    """{[h, g] : h in H, g in G} for H normal in G.

    Since [h, g]^x = [h^x, g^x], the set is the union of the conjugacy classes
    of h^-1 h^g with h running over class representatives of G inside H.
    """
    G = H.G if G is None else G
    if not H.is_normal():
        raise ValueError("H is not normal in G")
    cls = G.classes
    hit = np.zeros(cls.count, dtype=bool)
    for k in np.unique(cls.class_id[H.mask]):
        h = int(cls.reps[k])
        members = cls.members(k)
        hit[cls.class_id[G.mul(G.inv[h], members)]] = True
    return cls.expand(hit)


def commutator_set_bruteforce(H: ElementSet, G: GroupHandle | None = None, pairs_max: int = BRUTE_PAIRS_MAX) -> ElementSet:
    """The same set by evaluating every commutator [h, g]."""
    G = H.G if G is None else G
    hi = H.indices()
    if len(hi) * G.order > pairs_max:
        raise ValueError(f"{len(hi) * G.order} pairs exceed the brute-force budget")
    out = np.zeros(G.order, dtype=bool)
    allg = np.arange(G.order)
    step = max(1, (1 << 20) // G.order)
    for s in range(0, len(hi), step):
        h = hi[s: s + step, None]
        out[G.comm(h, allg[None, :]).ravel()] = True
    return ElementSet(G, out)


def _is_class_union(X: ElementSet) -> bool:
    return "classes" in X.G.__dict__ and X.is_normal()


def star_power(X: ElementSet, f: int) -> ElementSet:
    """X^{*f} = {x_1 ... x_f}, by repeated product with X."""
    if f < 1:
        raise ValueError("f must be a positive integer")
    for P in star_chain(X, f):
        pass
    return P


def star_chain(X: ElementSet, fmax: int):
    """Yield X^{*1}, ..., X^{*fmax}."""
    G = X.G
    if _is_class_union(X):
        cls = G.classes
        xm = X.class_mask()
        cur = xm
        yield X
        for _ in range(fmax - 1):
            cur = cls.product(cur, xm)
            yield cls.expand(cur)
        return
    P = X
    yield P
    for _ in range(fmax - 1):
        P = product(P, X)
        yield P


def exact_width(X: ElementSet, target: ElementSet | None = None, fmax: int = 10**6):
    """Least f with X^{*f} == target, or infinity when the sequence never reaches it.

    X^{*(f+1)} is a function of X^{*f}, so a repeated term means the sequence is
    periodic from there on and the target is never hit.
    """
    G = X.G
    target = G.closure(X.indices()) if target is None else target
    seen = set()
    for f, P in enumerate(star_chain(X, fmax), start=1):
        if P == target:
            return f
        key = P.mask.tobytes()
        if key in seen or len(P) > len(target):
            return INF
        seen.add(key)
    return INF


def width_chain(X: ElementSet, target: ElementSet, fmax: int = 10**4) -> list:
    """Sizes |X^{*1}|, |X^{*2}|, ... up to the first hit of target (or a repeat)."""
    sizes = []
    seen = set()
    for P in star_chain(X, fmax):
        sizes.append(len(P))
        key = P.mask.tobytes()
        if P == target or key in seen:
            break
        seen.add(key)
    return sizes


# -- displacement sets ------------------------------------------------------


def displacement(S: GroupHandle, perm: np.ndarray) -> ElementSet:
    """[S, f] = {s^-1 s^f}, f given as the permutation s -> s^f of S's indices."""
    allx = np.arange(S.order)
    m = np.zeros(S.order, dtype=bool)
    m[S.mul(S.inv[allx], perm)] = True
    return ElementSet(S, m)


def fixed_points(perm: np.ndarray) -> int:
    return int(np.count_nonzero(perm == np.arange(len(perm))))


def conj_perm(S: GroupHandle, g: int) -> np.ndarray:
    return S.conj_perm(g)


@dataclass(frozen=True)
class Ratio:
    """log|[S,f]| / log|S| kept as the exact pair (|[S,f]|, |S|) plus a float."""

    num: int
    den: int

    @property
    def value(self) -> float:
        return math.log(self.num) / math.log(self.den)

    def __lt__(self, other: "Ratio"):
        # num1^(log den2) < num2^(log den1); integer pairs compared via logs with exact ties
        if self.num == other.num and self.den == other.den:
            return False
        return math.log(self.num) * math.log(other.den) < math.log(other.num) * math.log(self.den)

    def __le__(self, other: "Ratio"):
        return self == other or self < other

    def to_json(self):
        return {"disp": self.num, "order": self.den, "value": self.value}


def ratio(S: GroupHandle, perm: np.ndarray) -> Ratio:
    if S.order == 1:
        raise ValueError("ratio undefined for the trivial group")
    return Ratio(len(displacement(S, perm)), S.order)


@dataclass
class EpsilonResult:
    k: int
    chain: list
    x_size: int
    monotone: bool
    containment: bool
    sampled: int


def epsilon_set(S: GroupHandle, D: ElementSet) -> ElementSet:
    """[S,f][S,f^-1] = D * D^-1, which equals the union of the classes meeting D."""
    cls = S.classes
    hit = np.zeros(cls.count, dtype=bool)
    hit[np.unique(cls.class_id[D.mask])] = True
    return cls.expand(hit)


def epsilon_set_bruteforce(S: GroupHandle, D: ElementSet) -> ElementSet:
    return product(D, D.inverse())


def epsilon_width(S: GroupHandle, perm: np.ndarray, samples: int = 16, rng=None) -> EpsilonResult:
    """Least k with ([S,f][S,f^-1])^{*k} = S, plus the containment g^S in X for sampled g in [S,f]."""
    D = displacement(S, perm)
    if len(D) == 1:
        raise ValueError("f acts trivially on S")
    X = epsilon_set(S, D)
    full = S.full()
    chain = []
    prev = None
    monotone = True
    seen = set()
    for P in star_chain(X, 10**4):
        chain.append(len(P))
        if prev is not None and not prev <= P:
            monotone = False
        if P == full:
            break
        key = P.mask.tobytes()
        if key in seen:
            raise ValueError(f"chain stabilizes at {len(P)} < {S.order}: f trivial or S not simple")
        seen.add(key)
        prev = P
    rng = np.random.default_rng(0) if rng is None else rng
    di = D.indices()
    pick = di if len(di) <= samples else np.sort(rng.choice(di, size=samples, replace=False))
    allx = np.arange(S.order)
    ok = True
    for g in pick:
        if not X.mask[S.conj(np.full(S.order, int(g)), allx)].all():
            ok = False
    return EpsilonResult(len(chain), chain, len(X), monotone, ok, len(pick))


# -- twists -------------------------------------------------------------------


@dataclass
class TwistResult:
    s: int  # minimizing s (index in S)
    size: int  # |[S, s f]|
    ratio: Ratio
    exhaustive: bool
    candidate: str | None = None  # best structured candidate
    candidate_size: int | None = None
    agree: bool | None = None
    orbit_sizes: list = field(default_factory=list)
    primary_candidate: str | None = None  # best among candidates not tagged 'x:'
    primary_size: int | None = None
    primary_agree: bool | None = None


def min_twist(R, f, exhaustive_max: int = EXHAUSTIVE_TWIST_MAX) -> TwistResult:
    """Minimize |[S, s f]| over s in S for f in Q(S) (R is a catalog realization).

    |[S, s f]| = |S : C_S(s f)| is the size of the orbit of s under the twisted
    conjugation s -> t^-1 s t^(f^-1), so the exhaustive minimum is the smallest
    orbit.  Ties go to the least index s.
    """
    S = R.S
    f = np.asarray(f, dtype=np.int64)
    if not R.is_in_Q(f):
        raise ValueError(f"{R.spec}: automorphism not in Q(S)")
    k, s0 = R.coset(f)
    r = R.aut_reps[k]
    # s f = (s s0) r
    best_name, best_size = None, None
    prim_name, prim_size = None, None
    cand_rows = []
    for name, h in R.candidates():
        hs = R.inner_element(R.mul(h, R.inv(f)))
        if hs is not None:
            cand_rows.append((name, hs))
    if cand_rows:
        phi = R.aut_perm(R.inv(f))
        sizes = []
        for name, hs in cand_rows:
            sizes.append(_twisted_orbit_size(S, hs, phi))
        j = int(np.argmin(sizes))
        best_name, best_size = cand_rows[j][0], int(sizes[j])
        prim = [i for i, (name, _) in enumerate(cand_rows) if not name.startswith("x:")]
        if prim:
            i = min(prim, key=lambda i: sizes[i])
            prim_name, prim_size = cand_rows[i][0], int(sizes[i])
    if S.order <= exhaustive_max:
        lab = R.twisted_labels(r)
        counts = np.bincount(lab)
        mn = int(counts.min())
        u = np.nonzero(counts[lab] == mn)[0]
        s_all = S.mul(u, S.inv[s0])
        s = int(s_all.min())
        res = TwistResult(s, mn, Ratio(mn, S.order), True, best_name, best_size,
                          None if best_size is None else best_size == mn,
                          sorted(set(int(c) for c in counts)), prim_name, prim_size,
                          None if prim_size is None else prim_size == mn)
        return res
    if best_size is None:
        raise ValueError(f"{R.spec}: no structured candidate in the coset of f")
    hs = dict(cand_rows)[best_name]
    return TwistResult(hs, best_size, Ratio(best_size, S.order), False, best_name, best_size, None,
                       primary_candidate=prim_name, primary_size=prim_size)


def _twisted_orbit_size(S: GroupHandle, s: int, phi: np.ndarray) -> int:
    """|S : C_S(s f)| where phi is the permutation t -> t^(f^-1); counts t with
    t^-1 s phi(t) = s."""
    allx = np.arange(S.order)
    fix = np.count_nonzero(S.mul(S.mul(S.inv[allx], s), phi) == s)
    return S.order // int(fix)


# -- formulas -----------------------------------------------------------------


def k_of_r(r: int) -> int:
    if r < 1:
        raise ValueError("r must be positive")
    return 1 + 4 * (r + 1) * max(r, 7)


def f1_of_r(r: int, f0) -> int:
    f0v = f0(r) if callable(f0) else (f0[r] if isinstance(f0, dict) else int(f0))
    return 1 + f0v + 3 * k_of_r(r)


def f_of_d(d: int, f0) -> int:
    if d < 1:
        raise ValueError("d must be positive")
    return 1 + d + 2 * d * f1_of_r(2 * d, f0)


def bound_formulas(r: int, d: int, f0) -> tuple:
    """(k(r), f1(r), f(d)) for a caller-supplied f0 (constant, dict or callable)."""
    return k_of_r(r), f1_of_r(r, f0), f_of_d(d, f0)


# -- commutator width of products [H, y_i] -------------------------------------


class HypothesisError(ValueError):
    pass


@dataclass
class NewcommCertificate:
    f: float
    target_size: int
    product_size: int
    chain: list
    finite: bool
    f1_bound: int | None = None


def newcomm_verify(G: GroupHandle, H: ElementSet, A: ElementSet, ys: list, f0=None) -> NewcommCertificate:
    """Least f with [H,G] = (prod_i [H, y_i])^{*f}, after checking the hypotheses."""
    problems = []
    if not (H.is_subgroup() and H.is_normal()):
        problems.append("H not a normal subgroup")
    if not A.is_subgroup():
        problems.append("A not a subgroup")
    else:
        ag = A.generators()
        if any(int(G.comm(a, b)) != 0 for a in ag for b in ag):
            problems.append("A not abelian")
        if not A.is_normal():
            problems.append("A not normal")
        if H.is_subgroup():
            hg = H.generators()
            if any(int(G.comm(a, h)) != 0 for a in ag for h in hg):
                problems.append("[A,H] != 1")
    ys = [int(y) for y in ys]
    if sorted(ys) != sorted(int(G.inv[y]) for y in ys):
        problems.append("ys not symmetric")
    if not problems:
        if len(G.closure(ys, start=H)) != G.order:
            problems.append("G != H<ys>")
        if len(G.closure(ys, start=A)) != G.order:
            problems.append("G != A<ys>")
    if problems:
        raise HypothesisError("; ".join(problems))
    target = commutator_subgroup(H, G)
    hi = H.indices()
    P = G.trivial()
    for y in ys:
        Hy = ElementSet(G, np.zeros(G.order, dtype=bool))
        Hy.mask[G.comm(hi, y)] = True
        P = product(P, Hy)
    f = exact_width(P, target)
    chain = width_chain(P, target)
    bound = None
    if f0 is not None:
        bound = f1_of_r(len(ys), f0)
    return NewcommCertificate(f, len(target), len(P), chain, f != INF, bound)
