"""Angle functions on the diagonal torus of SU(n).

A torus point is a vector of eigenvalue arguments in (-pi, pi] whose sum is
0 mod 2*pi.  Permuting the entries is the Weyl group action.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

UNIT_TOL = 1e-9
ANGLE_TOL = 1e-12
EXHAUSTIVE_N = 8
BRANK_THRESHOLD = 1 / (200 * math.pi)


def wrap(theta):
    """Reduce to (-pi, pi]; values within ANGLE_TOL of -pi go to +pi."""
    t = np.mod(np.asarray(theta, dtype=float) + math.pi, 2 * math.pi) - math.pi
    t = np.where(t <= -math.pi + ANGLE_TOL, math.pi, t)
    return t if t.ndim else float(t)


def l_angle(z: complex) -> float:
    """The argument of a unit complex number in (-pi, pi]."""
    if abs(abs(z) - 1) > UNIT_TOL:
        raise ValueError(f"|z| = {abs(z)} is not 1")
    return float(wrap(cmath.phase(z)))


@dataclass(frozen=True)
class TorusPoint:
    angles: tuple

    def __post_init__(self):
        a = wrap(np.asarray(self.angles, dtype=float))
        object.__setattr__(self, "angles", tuple(float(x) for x in np.atleast_1d(a)))
        s = math.remainder(sum(self.angles), 2 * math.pi)
        if abs(s) > 1e-9:
            raise ValueError("angles do not sum to 0 mod 2*pi (determinant != 1)")

    @property
    def n(self) -> int:
        return len(self.angles)

    @classmethod
    def from_free(cls, free) -> "TorusPoint":
        """n-1 free angles; the last is fixed by the determinant."""
        free = list(map(float, free))
        return cls(tuple(free) + (float(wrap(-sum(free))),))

    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.angles))


def _angles(A) -> np.ndarray:
    return np.asarray(A.angles if isinstance(A, TorusPoint) else A, dtype=float)


def gaps(angles) -> np.ndarray:
    """|l(x_i x_{i+1}^-1)| along the last axis."""
    a = np.asarray(angles, dtype=float)
    return np.abs(wrap(a[..., :-1] - a[..., 1:]))


def lambda_su(A) -> float:
    a = _angles(A)
    n = a.shape[-1]
    if n < 2:
        raise ValueError("need n >= 2")
    return gaps(a).sum(axis=-1) / (math.pi * (n - 1))


@lru_cache(maxsize=None)
def _perms(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def lambda_max_exhaustive(A) -> float:
    a = _angles(A)
    n = a.shape[-1]
    if n > EXHAUSTIVE_N:
        raise ValueError(f"exhaustive mode limited to n <= {EXHAUSTIVE_N}")
    return float(lambda_su(a[_perms(n)]).max())


def lambda_max_batch(points: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Exhaustive lambda_max for each row of an (P, n) angle array."""
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    if n > EXHAUSTIVE_N:
        raise ValueError(f"exhaustive mode limited to n <= {EXHAUSTIVE_N}")
    P = _perms(n)
    out = np.empty(len(points))
    for s in range(0, len(points), chunk):
        block = points[s: s + chunk][:, P]
        out[s: s + chunk] = lambda_su(block).max(axis=1)
    return out


def angle_classes(a, tol: float = ANGLE_TOL) -> tuple:
    """(distinct angles, multiplicities) with angles equal within tol merged."""
    vals, counts = [], []
    for x in sorted(np.asarray(a, dtype=float)):
        if vals and abs(wrap(x - vals[-1])) <= tol:
            counts[-1] += 1
        else:
            vals.append(float(x))
            counts.append(1)
    if len(vals) > 1 and abs(wrap(vals[0] - vals[-1])) <= tol:
        counts[0] += counts.pop()
        vals.pop()
    return vals, counts


def lambda_max_two_angle(A) -> float:
    """Closed form for at most two distinct angles: alternate as much as possible."""
    a = _angles(A)
    n = len(a)
    vals, counts = angle_classes(a)
    if len(vals) > 2:
        raise ValueError("more than two distinct angles")
    if len(vals) == 1:
        return 0.0
    d = abs(wrap(vals[0] - vals[1]))
    switches = min(n - 1, 2 * min(counts))
    return switches * d / (math.pi * (n - 1))


def lambda_max_classes(A) -> float:
    """Exact lambda_max for few distinct angles: DP over (class counts used, last class).

    The sum of gaps depends only on the sequence of classes, so the optimum
    over all orderings is a longest path over multiset compositions.
    """
    a = _angles(A)
    n = len(a)
    vals, counts = angle_classes(a)
    k = len(vals)
    if k == 1:
        return 0.0
    if np.prod([c + 1 for c in counts]) * k > 5 * 10**6:
        raise ValueError("too many angle classes for the arrangement optimizer")
    D = np.abs(wrap(np.subtract.outer(vals, vals)))
    best = {}
    for i in range(k):
        used = tuple(1 if j == i else 0 for j in range(k))
        best[(used, i)] = 0.0
    for _ in range(n - 1):
        nxt = {}
        for (used, last), v in best.items():
            for j in range(k):
                if used[j] < counts[j]:
                    u2 = used[:j] + (used[j] + 1,) + used[j + 1:]
                    val = v + D[last, j]
                    if val > nxt.get((u2, j), -1.0):
                        nxt[(u2, j)] = val
        best = nxt
    return max(best.values()) / (math.pi * (n - 1))


def lambda_max(A, mode: str = "auto") -> tuple:
    """(value, mode used).  Modes: exhaustive, two-angle, classes, heuristic (a lower bound)."""
    a = _angles(A)
    n = len(a)
    if mode == "auto":
        k = len(angle_classes(a)[0])
        mode = "two-angle" if k <= 2 else "exhaustive" if n <= EXHAUSTIVE_N else "classes" if k <= 4 else "heuristic"
    if mode == "exhaustive":
        return lambda_max_exhaustive(a), mode
    if mode == "two-angle":
        return lambda_max_two_angle(a), mode
    if mode == "classes":
        return lambda_max_classes(a), mode
    if mode == "heuristic":
        return lambda_su(alternating_arrangement(a)), mode
    raise ValueError(f"unknown mode {mode}")


def eta(A) -> float:
    """max over roots of l(x_i x_j^-1); the roots come in +- pairs, so this is max |l|."""
    a = _angles(A)
    if len(a) < 2:
        raise ValueError("need n >= 2")
    return float(np.abs(wrap(np.subtract.outer(a, a))).max())


def scalar_lemma_check(A, eps: float, lam: float | None = None) -> tuple:
    """(hypothesis held, conclusion held) for the near-scalar statement.

    Hypothesis: lambda(A^w) <= eps for every ordering w.  Conclusion: some
    eigenvalue x has |l(x x_i^-1)| < 20*pi*eps for at least ceil(9n/10) indices i.
    """
    a = _angles(A)
    n = len(a)
    if n > EXHAUSTIVE_N:
        raise ValueError(f"hypothesis check needs n <= {EXHAUSTIVE_N}")
    lam = lambda_max_exhaustive(a) if lam is None else lam
    held = lam <= eps
    close = np.abs(wrap(np.subtract.outer(a, a))) < 20 * math.pi * eps
    concl = bool(close.sum(axis=1).max() >= math.ceil(9 * n / 10))
    return held, concl


def random_points(n: int, count: int, rng, spread=None) -> np.ndarray:
    """Random torus points.  With spread, angles are a central phase (an n-th root
    of unity, so the determinant-fixing entry stays close) plus noise of that scale."""
    if spread is None:
        free = rng.uniform(-math.pi, math.pi, size=(count, n - 1))
    else:
        base = 2 * math.pi * rng.integers(0, n, size=(count, 1)) / n
        free = base + rng.normal(size=(count, n - 1)) * np.asarray(spread).reshape(-1, 1)
    last = -free.sum(axis=1, keepdims=True)
    return wrap(np.concatenate([free, last], axis=1))


@dataclass
class ScalarSweep:
    n: int
    eps: float
    samples: int
    held: int
    failures: list

    def to_json(self):
        return {"n": self.n, "eps": self.eps, "samples": self.samples, "hypothesis_held": self.held,
                "failures": len(self.failures), "pass": not self.failures}


def scalar_sweep(n: int, eps: float, samples: int, seed: int = 0) -> ScalarSweep:
    """Half uniform points, half clustered near a scalar so the hypothesis is exercised."""
    rng = np.random.default_rng(seed)
    half = samples // 2
    pts = np.concatenate([
        random_points(n, half, rng),
        random_points(n, samples - half, rng, spread=rng.uniform(0, 4 * eps, size=samples - half)),
    ])
    lam = lambda_max_batch(pts)
    held, fails = 0, []
    for p, lv in zip(pts, lam):
        h, c = scalar_lemma_check(p, eps, lam=lv)
        held += h
        if h and not c:
            fails.append([float(x) for x in p])
    return ScalarSweep(n, eps, samples, int(held), fails)


# -- the explicit element for large rank -------------------------------------------


def alternating_arrangement(a) -> np.ndarray:
    """Majority class interleaved with everything else, leftovers at the end."""
    vals, counts = angle_classes(a)
    big = int(np.argmax(counts))
    others = [vals[i] for i in range(len(vals)) if i != big for _ in range(counts[i])]
    seq = []
    nb = counts[big]
    for x in others:
        if nb:
            seq.append(vals[big])
            nb -= 1
        seq.append(x)
    seq.extend([vals[big]] * nb)
    return np.array(seq)


@dataclass
class BrankCertificate:
    n: int
    m: int
    a_angles: list
    b_classes: list  # (angle, multiplicity)
    lambda_alternating: float
    lambda_max: float
    threshold: float = BRANK_THRESHOLD

    @property
    def passed(self) -> bool:
        return self.lambda_max > self.threshold

    def to_json(self):
        return {"n": self.n, "m": self.m,
                "angle_multiset": [[v, c] for v, c in self.b_classes],
                "lambda_alternating": self.lambda_alternating,
                "lambda_max": self.lambda_max, "threshold": self.threshold, "pass": self.passed}


def brank_construction(n: int) -> BrankCertificate:
    """a = diag(1, w, -1 each m times, then equal entries fixing det) with w = exp(i pi/3);
    f is complex conjugation, so b = a^-1 a^f = conj(a)^2."""
    if n <= 30:
        raise ValueError("construction needs n > 30")
    m = (n - 1) // 3
    rest = n - 3 * m
    base = [0.0] * m + [math.pi / 3] * m + [math.pi] * m
    psi = -l_angle(cmath.exp(1j * sum(base))) / rest
    a = TorusPoint(tuple(base + [psi] * rest))
    b = wrap(-2 * np.asarray(a.angles))
    vals, counts = angle_classes(b)
    alt = float(lambda_su(alternating_arrangement(b)))
    lm = lambda_max_classes(b)
    return BrankCertificate(n, m, list(a.angles), list(zip(vals, counts)), alt, lm)
