"""Small simple groups, their automorphisms in closed form, and the subgroup Q(S).

Each supported group comes with a *realization*: the group S itself as a
:class:`GroupHandle`, an ambient algebra whose elements act on S (permutations
of the same points for alternating groups, semilinear triples for matrix
groups), and extra ambient generators for Q(S) and for the realized part of
Aut(S).  Automorphisms are compared by their action on S, never by their
ambient encoding, since different triples may induce the same map.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .algebra import MatAlgebra, PermAlgebra, SemilinearAlgebra
from .gf import GF, field, field_of_order
from .groups import DEFAULT_CAP, CapExceeded, ConcreteElement, GroupHandle, alternating

log = logging.getLogger(__name__)

FAMILIES = ("alt", "psl", "psu", "psp", "pso+", "pso-", "pgl", "pgu", "pgo+", "pgo-")
FIELD_SIZES = (2, 3, 4, 5, 7, 8, 9, 11, 13)
ORDER_LIMIT = 2 * 10**7
_AMBIENT = {"pgl": "psl", "pgu": "psu", "pgo+": "pso+", "pgo-": "pso-"}


class UnsupportedSpec(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    family: str
    n: int
    q: int | None = None

    def __str__(self):
        return f"{self.family}:{self.n}" if self.q is None else f"{self.family}:{self.n}:{self.q}"

    @property
    def simple(self) -> "GroupSpec":
        """The simple group underlying a pgl/pgu/pgo spec (identity otherwise)."""
        return GroupSpec(_AMBIENT.get(self.family, self.family), self.n, self.q)


def parse_spec(s) -> GroupSpec:
    if isinstance(s, GroupSpec):
        return s
    parts = str(s).strip().lower().split(":")
    fam = parts[0]
    if fam not in FAMILIES:
        raise UnsupportedSpec(f"unknown family {fam!r} in {s!r}")
    try:
        nums = [int(x) for x in parts[1:]]
    except ValueError:
        raise UnsupportedSpec(f"malformed spec {s!r}") from None
    if fam == "alt":
        if len(nums) != 1:
            raise UnsupportedSpec(f"expected alt:n, got {s!r}")
        return GroupSpec("alt", nums[0])
    if len(nums) != 2:
        raise UnsupportedSpec(f"expected {fam}:n:q, got {s!r}")
    return GroupSpec(fam, nums[0], nums[1])


def _prod(it):
    out = 1
    for x in it:
        out *= x
    return out


def simple_order(spec: GroupSpec) -> int:
    """Standard order formula for the simple group of a spec."""
    spec = parse_spec(spec).simple
    f, n, q = spec.family, spec.n, spec.q
    if f == "alt":
        return math.factorial(n) // 2
    if f == "psl":
        return q ** (n * (n - 1) // 2) * _prod(q**i - 1 for i in range(2, n + 1)) // math.gcd(n, q - 1)
    if f == "psu":
        return q ** (n * (n - 1) // 2) * _prod(q**i - (-1) ** i for i in range(2, n + 1)) // math.gcd(n, q + 1)
    if f == "psp":
        m = n // 2
        if (m, q) == (2, 2):
            return 360  # Sp(4,2) is not perfect; its derived subgroup has index 2
        return q ** (m * m) * _prod(q ** (2 * i) - 1 for i in range(1, m + 1)) // math.gcd(2, q - 1)
    if f in ("pso+", "pso-"):
        m = n // 2
        sgn = 1 if f == "pso+" else -1
        return (q ** (m * (m - 1)) * (q**m - sgn) * _prod(q ** (2 * i) - 1 for i in range(1, m))
                // math.gcd(4, q**m - sgn))
    raise UnsupportedSpec(str(spec))


def orthogonal_full_order(family: str, dim: int, q: int) -> int:
    m = dim // 2
    sgn = 1 if family in ("pso+", "pgo+") else -1
    return 2 * q ** (m * (m - 1)) * (q**m - sgn) * _prod(q ** (2 * i) - 1 for i in range(1, m))


def q_index_formula(spec: GroupSpec) -> int:
    """|Q(S) : Inn(S)| from the order formulas."""
    spec = parse_spec(spec).simple
    f, n, q = spec.family, spec.n, spec.q
    if f == "alt":
        return 4 if n == 6 else 2
    if f == "psl":
        return math.gcd(n, q - 1)
    if f == "psu":
        return math.gcd(n, q + 1)
    if f == "psp":
        return 1
    full = orthogonal_full_order(f, n, q)
    return full // (2 if q % 2 else 1) // simple_order(spec)


def check_supported(spec: GroupSpec) -> GroupSpec:
    spec = parse_spec(spec)
    s = spec.simple
    f, n, q = s.family, s.n, s.q
    if f == "alt":
        if not 5 <= n <= 9:
            raise UnsupportedSpec(f"{spec}: alternating degree must be in 5..9")
        return spec
    if q not in FIELD_SIZES:
        raise UnsupportedSpec(f"{spec}: field size {q} not in {FIELD_SIZES}")
    if f == "psl":
        if not 2 <= n <= 4:
            raise UnsupportedSpec(f"{spec}: psl needs 2 <= n <= 4")
        if n == 2 and q in (2, 3):
            raise UnsupportedSpec(f"{spec}: PSL(2,{q}) is soluble, not simple")
    elif f == "psu":
        if n != 3 or q not in (2, 3):
            raise UnsupportedSpec(f"{spec}: psu supports n=3, q in (2, 3)")
        if q == 2:
            raise UnsupportedSpec(f"{spec}: PSU(3,2) has order 72 and is soluble, not simple")
    elif f == "psp":
        if n != 4 or q not in (2, 3):
            raise UnsupportedSpec(f"{spec}: psp supports n=4, q in (2, 3)")
    elif f in ("pso+", "pso-"):
        if n % 2 or n < 6:
            raise UnsupportedSpec(f"{spec}: orthogonal families need even dimension >= 6 (D_2 is not simple)")
        if (n // 2, q) not in ((3, 2), (3, 3), (4, 2)):
            raise UnsupportedSpec(f"{spec}: orthogonal (dim, q) must be (6,2), (6,3) or (8,2)")
    if simple_order(s) > ORDER_LIMIT and f == "psl":
        raise UnsupportedSpec(f"{spec}: order {simple_order(s)} above {ORDER_LIMIT}")
    return spec


def rank(spec) -> int:
    """Untwisted Lie rank, or n for Alt(n)."""
    s = parse_spec(spec).simple
    if s.family == "alt":
        return s.n
    if s.family in ("psl", "psu"):
        return s.n - 1
    return s.n // 2


# -- automorphisms ------------------------------------------------------------


@dataclass(frozen=True)
class AutoSpec:
    """x -> g^-1 * ((x^(p^frob))^(-T if graph)) * g; for permutations x -> g^-1 x g."""

    g: ConcreteElement
    frob: int = 0
    graph: int = 0

    def to_json(self):
        return {"g": list(self.g.payload), "frob": self.frob, "graph": self.graph}

    def row(self, R: "Realization") -> np.ndarray:
        g = np.array(self.g.payload, dtype=np.int64)
        if isinstance(R.amb, SemilinearAlgebra):
            return R.amb.canon(np.concatenate([R.amb.mat.canon(g), [self.frob % R.amb.F.k, self.graph]]))
        if self.frob or self.graph:
            raise ValueError("permutation automorphisms carry no field or graph part")
        return g

    @classmethod
    def from_row(cls, R: "Realization", row) -> "AutoSpec":
        row = [int(x) for x in np.asarray(row)]
        if isinstance(R.amb, SemilinearAlgebra):
            nn = R.amb.n ** 2
            return cls(ConcreteElement("projective", tuple(row[:nn])), row[nn], row[nn + 1])
        return cls(ConcreteElement("perm", tuple(row)))


def _twisted_labels(S: GroupHandle, phi_gens: list) -> np.ndarray:
    """Orbit labels of s -> t^-1 s phi(t), t over the generators of S."""
    N = S.order
    allx = np.arange(N)
    rows, cols = [], []
    for t, pt in zip(S.gen_indices(), phi_gens):
        rows.append(allx)
        cols.append(S.mul(S.mul(S.inv[t], allx), pt))
    if not rows:
        return np.zeros(N, dtype=np.int64)
    A = coo_matrix((np.ones(N * len(rows), dtype=np.int8), (np.concatenate(rows), np.concatenate(cols))),
                   shape=(N, N)).tocsr()
    _, lab = connected_components(A, directed=True, connection="weak")
    first = np.full(lab.max() + 1, N, dtype=np.int64)
    np.minimum.at(first, lab, allx)
    order = np.argsort(first)
    rank_ = np.empty_like(order)
    rank_[order] = np.arange(len(order))
    return rank_[lab]


class Realization:
    """S together with an ambient algebra acting on it by automorphisms."""

    def __init__(self, spec: GroupSpec, S: GroupHandle, amb, q_extra, aut_extra, model: str = "",
                 candidates=None):
        self.spec = spec
        self.S = S
        self.amb = amb
        self.q_extra = [np.asarray(r, dtype=np.int64) for r in q_extra]
        self.aut_extra = [np.asarray(r, dtype=np.int64) for r in aut_extra]
        self.model = model or str(spec)
        self._candidates = candidates
        S.enumerate()

    def __repr__(self):
        return f"<Realization {self.spec} |S|={self.S.order} model={self.model}>"

    @property
    def semilinear(self) -> bool:
        return isinstance(self.amb, SemilinearAlgebra)

    def identity(self) -> np.ndarray:
        return self.amb.canon(self.amb.identity()[None])[0]

    def embed(self, idx) -> np.ndarray:
        rows = self.S.row(np.atleast_1d(idx))
        return self.amb.embed(rows) if self.semilinear else rows

    def mul(self, a, b) -> np.ndarray:
        return self.amb.mul(np.atleast_2d(a), np.atleast_2d(b))[0]

    def inv(self, a) -> np.ndarray:
        return np.atleast_2d(self.amb.inv(np.atleast_2d(a)))[0]

    def act_rows(self, a, X) -> np.ndarray:
        if self.semilinear:
            return self.amb.act(a, X)
        a = np.asarray(a, dtype=np.int64)
        return self.amb.mul(self.amb.mul(self.amb.inv(a)[None], X), a[None])

    def images(self, a, idx) -> np.ndarray:
        """Indices of the images of S-elements ``idx`` under a; raises if a leaves S."""
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        out = np.empty(len(idx), dtype=np.int64)
        step = 1 << 16
        for s in range(0, len(idx), step):
            out[s: s + step] = self.S.lookup(self.act_rows(a, self.S.row(idx[s: s + step])))
        if np.any(out < 0):
            raise ValueError(f"{self.spec}: map does not preserve S")
        return out

    def aut_perm(self, a) -> np.ndarray:
        """x -> x^a as a permutation of S's indices."""
        return self.images(a, np.arange(self.S.order))

    def gen_images(self, a) -> np.ndarray:
        return self.images(a, self.S.gen_indices())

    def inner_element(self, a) -> int | None:
        """Least s in S inducing the same map on S as a, or None."""
        S = self.S
        y = self.gen_images(a)
        cand = np.arange(S.order)
        for x, yi in zip(S.gen_indices(), y):
            cand = cand[S.conj(np.full(len(cand), x), cand) == yi]
            if not len(cand):
                return None
        return int(cand[0])

    def is_automorphism(self, a) -> bool:
        try:
            p = self.gen_images(a)
        except ValueError:
            return False
        # a bijection of S compatible with products, checked on the whole table for small S
        if self.S.order <= 10**6:
            perm = self.aut_perm(a)
            if len(np.unique(perm)) != self.S.order:
                return False
        return len(p) == len(self.S.gens)

    def _coset_reps(self, extra) -> list:
        reps = [self.identity()]
        frontier = [reps[0]]
        while frontier:
            new = []
            for r in frontier:
                for e in extra:
                    c = self.mul(r, e)
                    if all(self.inner_element(self.mul(c, self.inv(r2))) is None for r2 in reps):
                        reps.append(c)
                        new.append(c)
            frontier = new
        return reps

    @cached_property
    def q_reps(self) -> list:
        """Coset representatives of Inn(S) in Q(S); the first is the identity."""
        return self._coset_reps(self.q_extra)

    @cached_property
    def aut_reps(self) -> list:
        """Coset representatives of Inn(S) in the realized automorphism group."""
        reps = list(self.q_reps)
        extra = self.q_extra + self.aut_extra
        frontier = list(reps)
        while frontier:
            new = []
            for r in frontier:
                for e in extra:
                    c = self.mul(r, e)
                    if all(self.inner_element(self.mul(c, self.inv(r2))) is None for r2 in reps):
                        reps.append(c)
                        new.append(c)
            frontier = new
        return reps

    @property
    def q_index(self) -> int:
        return len(self.q_reps)

    @property
    def aut_index(self) -> int:
        return len(self.aut_reps)

    def coset(self, a) -> tuple:
        """(k, s) with a = s * aut_reps[k] as maps on S."""
        for k, r in enumerate(self.aut_reps):
            s = self.inner_element(self.mul(a, self.inv(r)))
            if s is not None:
                return k, s
        raise ValueError(f"{self.spec}: automorphism outside the realized automorphism group")

    def is_in_Q(self, a) -> bool:
        if not self.is_automorphism(a):
            raise ValueError(f"{self.spec}: not an automorphism of S")
        return self.coset(a)[0] < self.q_index

    def is_inner(self, a) -> bool:
        return self.inner_element(a) is not None

    def twisted_labels(self, r) -> np.ndarray:
        """Labels of the S-conjugacy classes of the automorphisms s*r, indexed by s."""
        phi = self.gen_images(self.inv(r))
        return _twisted_labels(self.S, list(phi))

    def outer_autos(self, q_only: bool = False, include_inner: bool = False) -> list:
        """Automorphisms outside Inn(S), one per S-conjugacy class, as (label, row, coset)."""
        out = []
        reps = self.q_reps if q_only else self.aut_reps
        for k, r in enumerate(reps):
            if k == 0 and not include_inner:
                continue
            lab = self.twisted_labels(r)
            first = np.full(lab.max() + 1, self.S.order, dtype=np.int64)
            np.minimum.at(first, lab, np.arange(self.S.order))
            for s in first:
                out.append((f"c{k}.s{int(s)}", self.mul(self.embed(int(s))[0], r), k))
        return out

    def candidates(self) -> list:
        """Structured twist candidates as (name, ambient row)."""
        out = [("identity", self.identity())]
        if self._candidates is not None:
            out.extend(self._candidates(self))
        return out

    def q_handle(self, cap: int = DEFAULT_CAP) -> GroupHandle:
        gens = np.concatenate([self.embed(self.S.gen_indices())] + [r[None] for r in self.q_extra]) \
            if self.q_extra else self.embed(self.S.gen_indices())
        return GroupHandle(self.amb, gens, name=f"Q({self.spec})", cap=cap)

    def aut_handle(self, cap: int = DEFAULT_CAP) -> GroupHandle:
        extra = self.q_extra + self.aut_extra
        gens = np.concatenate([self.embed(self.S.gen_indices())] + [r[None] for r in extra]) \
            if extra else self.embed(self.S.gen_indices())
        return GroupHandle(self.amb, gens, name=f"Aut({self.spec})", cap=cap)

    def autospec(self, a) -> AutoSpec:
        return AutoSpec.from_row(self, a)


@dataclass
class QGroupRep:
    spec: GroupSpec
    realization: Realization
    Q: GroupHandle
    index: int

    @property
    def S(self) -> GroupHandle:
        return self.realization.S


# -- constructions ------------------------------------------------------------


def _seed_for(spec: GroupSpec) -> int:
    return sum((i + 1) * ord(c) for i, c in enumerate(str(spec)))


def _random_word(alg, pool, rng, length: int = 12):
    w = pool[rng.integers(len(pool))]
    for _ in range(length - 1):
        w = alg.mul(w[None], pool[rng.integers(len(pool))][None])[0]
    return w


def _find_generators(alg, pool, target: int, spec: GroupSpec, cap: int, tries: int = 40) -> GroupHandle:
    if target > cap:
        raise CapExceeded(f"{spec}: order {target} exceeds cap {cap}", 0)
    rng = np.random.default_rng(_seed_for(spec))
    pool = alg.canon(np.asarray(pool, dtype=np.int64))
    for _ in range(tries):
        gens = np.array([_random_word(alg, pool, rng) for _ in range(2)])
        G = GroupHandle(alg, gens, name=str(spec), cap=cap)
        if G.enumerate() == target:
            return G
    raise RuntimeError(f"{spec}: no generating pair found")


def _diag(F: GF, vals) -> np.ndarray:
    return np.diag(np.asarray(vals, dtype=np.int64)).ravel()


def _elementary(F: GF, n: int, i: int, j: int, a: int) -> np.ndarray:
    M = np.eye(n, dtype=np.int64)
    M[i, j] = a
    return M.ravel()


def _sl_pool(F: GF, n: int) -> list:
    pool = []
    for i in range(n):
        for j in range(n):
            if i != j:
                pool.append(_elementary(F, n, i, j, 1))
                pool.append(_elementary(F, n, i, j, F.generator))
    return pool


def _semilinear_rows(amb: SemilinearAlgebra, mats) -> list:
    return [amb.canon(np.concatenate([amb.mat.canon(np.asarray(m, dtype=np.int64)), [0, 0]])) for m in mats]


def _psl_candidates(R: Realization):
    """Diagonal elements with n-1 unit eigenvalues, then (prefixed 'x:') words of
    length 2 and 3 in a swap reflection, a transvection and diag(g,1..1)."""
    F, n = R.amb.F, R.amb.n
    out = [(f"diag({lam},1..1)", _diag(F, [lam] + [1] * (n - 1))) for lam in range(2, F.q)]
    swap = np.eye(n, dtype=np.int64)
    swap[[0, 1]] = swap[[1, 0]]
    pool = {"P": swap.ravel(), "T": _elementary(F, n, 0, 1, 1), "D": _diag(F, [F.generator] + [1] * (n - 1))}
    mat = R.amb.mat
    seen = set()
    for length in (2, 3):
        for word in itertools.product(pool, repeat=length):
            m = pool[word[0]][None]
            for w in word[1:]:
                m = mat.mul(m, pool[w][None])
            key = mat.canon(m)[0].tobytes()
            if key not in seen:
                seen.add(key)
                out.append(("x:" + "".join(word), m[0]))
    rows = _semilinear_rows(R.amb, [m for _, m in out])
    return [(name, r) for (name, _), r in zip(out, rows)]


def _build_psl(spec: GroupSpec, cap: int) -> Realization:
    n, q = spec.n, spec.q
    F = field_of_order(q)
    mat = MatAlgebra(F, n, projective=True)
    S = _find_generators(mat, _sl_pool(F, n), simple_order(spec), spec, cap)
    amb = SemilinearAlgebra(F, n)
    q_extra = _semilinear_rows(amb, [_diag(F, [F.generator] + [1] * (n - 1))])
    aut_extra = []
    ident = amb.mat.identity()
    if F.k > 1:
        aut_extra.append(np.concatenate([ident, [1, 0]]))
    if n >= 3:
        aut_extra.append(np.concatenate([ident, [0, 1]]))
    return Realization(spec, S, amb, q_extra, aut_extra, candidates=_psl_candidates)


def _alt_candidates(R: Realization):
    n = R.amb.n
    out = []
    for i, j in itertools.combinations(range(n), 2):
        out.append((f"({i + 1} {j + 1})", R.amb.from_cycles((i, j), one_based=False)))
    return out


def _build_alt(spec: GroupSpec, cap: int) -> Realization:
    n = spec.n
    if n == 6:
        # Aut(Alt(6)) is PGammaL(2,9); realize S as PSL(2,9) so that all of it is closed form
        F = field(3, 2)
        mat = MatAlgebra(F, 2, projective=True)
        S = _find_generators(mat, _sl_pool(F, 2), 360, spec, cap)
        amb = SemilinearAlgebra(F, 2, graph=False)
        q_extra = _semilinear_rows(amb, [_diag(F, [F.generator, 1])]) + [np.concatenate([amb.mat.identity(), [1, 0]])]
        return Realization(spec, S, amb, q_extra, [], model="psl:2:9")
    S = alternating(n, cap=cap)
    S.name = str(spec)
    amb = PermAlgebra(n)
    return Realization(spec, S, amb, [amb.from_cycles((1, 2))], [], candidates=_alt_candidates)


def _hermitian_ok(F: GF, M) -> bool:
    sig = F.frob_table(F.k // 2)
    M = np.asarray(M, dtype=np.int64).reshape(3, 3)
    return bool(np.array_equal(F.matmul(sig[M].T, M), np.eye(3, dtype=np.int64)))


def _psu_candidates(R: Realization):
    F = R.amb.F
    q = int(round(math.sqrt(F.q)))
    return [(f"diag({mu},1,1)", _semilinear_rows(R.amb, [_diag(F, [mu, 1, 1])])[0])
            for mu in range(2, F.q) if F.pow(mu, q + 1) == 1]


def _build_psu(spec: GroupSpec, cap: int) -> Realization:
    q = spec.q
    F = field_of_order(q * q)
    sig = F.frob_table(F.k // 2)
    trace0 = [a for a in range(1, F.q) if F.add[a, sig[a]] == 0]
    pool = []
    for v in itertools.product(range(F.q), repeat=3):
        v = np.array(v, dtype=np.int64)
        if not v.any():
            continue
        if F.matmul(sig[v][None], v[:, None])[0, 0] != 0:
            continue
        for a in trace0[:2]:
            T = F.add[np.eye(3, dtype=np.int64), F.mul[a, F.mul[v[:, None], sig[v][None, :]]]]
            if _hermitian_ok(F, T):
                pool.append(T.ravel())
    mat = MatAlgebra(F, 3, projective=True)
    S = _find_generators(mat, pool, simple_order(spec), spec, cap)
    amb = SemilinearAlgebra(F, 3, graph=False)
    mu = next(m for m in range(2, F.q) if F.order_of(m) == q + 1)
    q_extra = _semilinear_rows(amb, [_diag(F, [mu, 1, 1])])
    aut_extra = [np.concatenate([amb.mat.identity(), [1, 0]])]
    return Realization(spec, S, amb, q_extra, aut_extra, candidates=_psu_candidates)


def _sp_form(F: GF, m: int) -> np.ndarray:
    J = np.zeros((2 * m, 2 * m), dtype=np.int64)
    for i in range(m):
        J[i, m + i] = 1
        J[m + i, i] = F.neg[1]
    return J


def _build_psp(spec: GroupSpec, cap: int) -> Realization:
    n, q = spec.n, spec.q
    m = n // 2
    F = field_of_order(q)
    J = _sp_form(F, m)
    trans = []
    for v in itertools.product(range(F.q), repeat=n):
        v = np.array(v, dtype=np.int64)
        if not v.any():
            continue
        vJ = F.matmul(v[None], J)[0]
        trans.append(F.add[np.eye(n, dtype=np.int64), F.mul[v[:, None], vJ[None, :]]].ravel())
    mat = MatAlgebra(F, n, projective=True)
    amb = SemilinearAlgebra(F, n, graph=False)
    if q == 2:
        # Sp(4,2) is not perfect: take pairs of transvections, which lie in the derived subgroup
        rng = np.random.default_rng(_seed_for(spec))
        pairs = [mat.mul(trans[i][None], trans[j][None])[0]
                 for i, j in rng.integers(len(trans), size=(40, 2))]
        S = _find_generators(mat, pairs, 360, spec, cap)
        q_extra = []
        aut_extra = _semilinear_rows(amb, [trans[0]])
    else:
        S = _find_generators(mat, trans, simple_order(spec), spec, cap)
        lam = next(a for a in range(1, F.q) if a not in F.squares())
        q_extra = []
        aut_extra = _semilinear_rows(amb, [_diag(F, [lam] * m + [1] * m)])
    return Realization(spec, S, amb, q_extra, aut_extra)


class QuadraticForm:
    """Q(x) = sum_{i<=j} A_ij x_i x_j over a prime field, with polar form G = A + A^T."""

    def __init__(self, F: GF, A):
        self.F = F
        self.A = np.asarray(A, dtype=np.int64)
        self.G = (self.A + self.A.T) % F.p
        self.dim = len(self.A)

    def value(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        return np.einsum("bi,ij,bj->b", X, self.A, X) % self.F.p

    def polar(self, X, Y) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.int64))
        return np.einsum("bi,ij,bj->b", X, self.G, Y) % self.F.p

    def reflection(self, v) -> np.ndarray:
        """x -> x - (B(v,x)/Q(v)) v, as a matrix on column vectors."""
        F = self.F
        v = np.asarray(v, dtype=np.int64)
        c = int(F.inv[int(self.value(v)[0])])
        vG = (v @ self.G) % F.p
        return ((np.eye(self.dim, dtype=np.int64) - c * np.outer(v, vG)) % F.p).ravel()

    def preserved_by(self, M) -> bool:
        M = np.asarray(M, dtype=np.int64).reshape(self.dim, self.dim)
        E = np.eye(self.dim, dtype=np.int64)
        return bool(np.array_equal(self.value(M.T), self.value(E))
                    and np.array_equal((M.T @ self.G @ M) % self.F.p, self.G))


def orthogonal_form(F: GF, m: int, sign: int) -> QuadraticForm:
    """Hyperbolic form on 2m coordinates, with an anisotropic last plane if sign = -1."""
    dim = 2 * m
    A = np.zeros((dim, dim), dtype=np.int64)
    h = m if sign == 1 else m - 1
    for i in range(h):
        A[i, h + i] = 1
    if sign == -1:
        a, b = dim - 2, dim - 1
        if F.p == 2:
            A[a, a], A[a, b], A[b, b] = 1, 1, 1  # x^2 + xy + y^2 is anisotropic over GF(2)
        else:
            nu = next(x for x in range(1, F.q) if x not in F.squares())
            A[a, a], A[b, b] = 1, F.neg[nu]
    return QuadraticForm(F, A)


def _orth_candidates(R: Realization):
    Qf = R._qform
    F = Qf.F
    vecs = np.array(list(itertools.product(range(F.q), repeat=Qf.dim)), dtype=np.int64)
    vals = Qf.value(vecs)
    # one vector per line: first nonzero coordinate equal to 1
    lead = np.array([v[np.nonzero(v)[0][0]] if v.any() else 0 for v in vecs])
    ns = vecs[(vals != 0) & (lead == 1)]
    refl = [Qf.reflection(v) for v in ns]
    mat = R.amb.mat
    out = [(f"r{i}", r) for i, r in enumerate(refl)]
    for i, j in itertools.combinations(range(len(refl)), 2):
        out.append((f"r{i}r{j}", mat.mul(refl[i][None], refl[j][None])[0]))
    for i in range(min(4, len(refl))):
        for j, k in itertools.combinations(range(len(refl)), 2):
            m3 = mat.mul(mat.mul(refl[i][None], refl[j][None]), refl[k][None])[0]
            out.append((f"r{i}r{j}r{k}", m3))
    return [(name, _semilinear_rows(R.amb, [g])[0]) for name, g in out]


def _build_pso(spec: GroupSpec, cap: int) -> Realization:
    dim, q = spec.n, spec.q
    m = dim // 2
    sign = 1 if spec.family == "pso+" else -1
    F = field_of_order(q)
    Qf = orthogonal_form(F, m, sign)
    vecs = np.array(list(itertools.product(range(F.q), repeat=dim)), dtype=np.int64)
    vals = Qf.value(vecs)
    ones = vecs[vals == 1]
    rng = np.random.default_rng(_seed_for(spec) + 1)
    mat = MatAlgebra(F, dim, projective=True)
    pool = []
    for i, j in rng.integers(len(ones), size=(60, 2)):
        if i != j:
            pool.append(mat.mul(Qf.reflection(ones[i])[None], Qf.reflection(ones[j])[None])[0])
    S = _find_generators(mat, pool, simple_order(spec), spec, cap)
    amb = SemilinearAlgebra(F, dim, graph=False)
    q_mats = [Qf.reflection(ones[0])]
    aut_mats = []
    if q % 2:
        nu = next(x for x in range(1, F.q) if x not in F.squares())
        w = vecs[vals == nu][0]
        q_mats.append(mat.mul(Qf.reflection(ones[0])[None], Qf.reflection(w)[None])[0])
        aut_mats.append(_similitude(F, Qf, m, sign, nu))
    R = Realization(spec, S, amb, _semilinear_rows(amb, q_mats), _semilinear_rows(amb, aut_mats),
                    candidates=_orth_candidates)
    R._qform = Qf
    return R


def _similitude(F: GF, Qf: QuadraticForm, m: int, sign: int, nu: int) -> np.ndarray:
    dim = 2 * m
    D = np.eye(dim, dtype=np.int64)
    h = m if sign == 1 else m - 1
    for i in range(h):
        D[i, i] = nu
    if sign == -1:
        a, b = dim - 2, dim - 1
        for blk in itertools.product(range(F.q), repeat=4):
            D[np.ix_([a, b], [a, b])] = np.array(blk).reshape(2, 2)
            if np.array_equal(Qf.value(D.T), (nu * Qf.value(np.eye(dim, dtype=np.int64))) % F.p) and \
                    np.array_equal((D.T @ Qf.G @ D) % F.p, (nu * Qf.G) % F.p):
                break
        else:
            raise AssertionError("no similitude of the anisotropic plane")
    return D.ravel()


_BUILDERS = {"alt": _build_alt, "psl": _build_psl, "psu": _build_psu, "psp": _build_psp,
             "pso+": _build_pso, "pso-": _build_pso}


@lru_cache(maxsize=64)
def _realize(spec_str: str, cap: int) -> Realization:
    spec = check_supported(parse_spec(spec_str)).simple
    target = simple_order(spec)
    if target > cap:
        raise CapExceeded(f"{spec}: order {target} exceeds cap {cap}", 0)
    log.info("building %s (order %d)", spec, target)
    R = _BUILDERS[spec.family](spec, cap)
    if R.S.order != target:
        raise AssertionError(f"{spec}: enumerated {R.S.order}, expected {target}")
    return R


def realize(spec, cap: int = DEFAULT_CAP) -> Realization:
    return _realize(str(parse_spec(spec)), cap)


def build_simple(spec, cap: int = DEFAULT_CAP) -> GroupHandle:
    """The group named by ``spec``; pgl/pgu/pgo specs give Q of the simple group."""
    spec = check_supported(parse_spec(spec))
    R = realize(spec.simple, cap)
    if spec.family in _AMBIENT:
        Q = R.q_handle(cap)
        Q.enumerate()
        return Q
    return R.S


def q_subgroup(spec, cap: int = DEFAULT_CAP) -> QGroupRep:
    spec = check_supported(parse_spec(spec)).simple
    R = realize(spec, cap)
    return QGroupRep(spec, R, R.q_handle(cap), R.q_index)


def is_in_Q(spec, f, cap: int = DEFAULT_CAP) -> bool:
    R = realize(parse_spec(spec).simple, cap)
    row = f.row(R) if isinstance(f, AutoSpec) else np.asarray(f, dtype=np.int64)
    return R.is_in_Q(row)


TIER1 = ("alt:5", "alt:6", "alt:7", "psl:2:5", "psl:2:7", "psl:2:8", "psl:2:9", "psl:2:11",
         "psl:2:13", "psl:3:2", "psl:3:3", "psl:3:4", "psu:3:3", "psp:4:2", "psp:4:3",
         "pso+:6:2", "pso-:6:2")


def catalog_specs(max_order: int = ORDER_LIMIT) -> list:
    """Every supported simple spec with |S| <= max_order, ordered by (|S|, name)."""
    out = [f"alt:{n}" for n in range(5, 10)]
    for fam, ns in (("psl", (2, 3, 4)), ("psu", (3,)), ("psp", (4,)), ("pso+", (6, 8)), ("pso-", (6, 8))):
        for n in ns:
            for q in FIELD_SIZES:
                try:
                    check_supported(parse_spec(f"{fam}:{n}:{q}"))
                except UnsupportedSpec:
                    continue
                out.append(f"{fam}:{n}:{q}")
    out = [s for s in out if simple_order(parse_spec(s)) <= max_order]
    return sorted(out, key=lambda s: (simple_order(parse_spec(s)), s))
