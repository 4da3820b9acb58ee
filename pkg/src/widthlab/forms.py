"""Sesquilinear forms B(v, w) = (v^phi)^T g w and their preserver groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .gf import GF, Matrix

KINDS = ("symmetric", "alternating", "hermitian", "sesquilinear")

CENSUS_CAP = 10**7


class CensusCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class FormSpec:
    """Nondegenerate form with Gram matrix ``gram`` twisted by ``x -> x^(p^frob)``.

    ``kind`` is checked against the Gram matrix: symmetric and alternating
    forms are bilinear (``frob == 0``); hermitian forms need a field of square
    order and ``frob == k/2``.  ``sesquilinear`` accepts any nondegenerate Gram
    matrix and any Frobenius power.
    """

    gram: Matrix
    frob: int = 0
    kind: str = "symmetric"

    def __post_init__(self):
        F, g = self.gram.F, self.gram.a
        if self.kind not in KINDS:
            raise ValueError(f"unknown form kind {self.kind!r}")
        if self.gram.det() == 0:
            raise ValueError("degenerate Gram matrix")
        if not 0 <= self.frob < F.k:
            raise ValueError(f"Frobenius power {self.frob} outside 0..{F.k - 1}")
        if self.kind == "symmetric":
            if self.frob != 0 or not np.array_equal(g, g.T):
                raise ValueError("symmetric form needs frob=0 and a symmetric Gram matrix")
        elif self.kind == "alternating":
            if self.frob != 0 or not np.array_equal(g, F.neg[g.T]) or np.any(np.diag(g)):
                raise ValueError("alternating form needs frob=0 and an alternating Gram matrix")
        elif self.kind == "hermitian":
            if F.k % 2 or self.frob != F.k // 2:
                raise ValueError("hermitian forms need a square-order field and frob = k/2")
            if not np.array_equal(F.frob_table(self.frob)[g.T], g):
                raise ValueError("Gram matrix is not hermitian")

    @property
    def F(self) -> GF:
        return self.gram.F

    @property
    def m(self) -> int:
        return self.gram.m

    def phi(self, x):
        return self.F.frob_table(self.frob)[np.asarray(x, dtype=np.int64)]


def form_eval(B: FormSpec, v, w) -> int:
    """(v^phi)^T g w, as an encoded field element."""
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    if v.shape != (B.m,) or w.shape != (B.m,):
        raise ValueError(f"vectors must have length {B.m}")
    F = B.F
    row = F.matmul(B.phi(v)[None, :], B.gram.a)
    return int(F.matmul(row, w[:, None])[0, 0])


def preserves(B: FormSpec, x: Matrix) -> bool:
    F = B.F
    lhs = F.matmul(F.matmul(B.phi(x.a).T, B.gram.a), x.a)
    return bool(np.array_equal(lhs, B.gram.a))


def form_preserver_census(B: FormSpec, chunk: int = 1 << 16) -> int:
    """Count x in GL(m, q) with (x^phi)^T g x = g by exhaustive enumeration.

    Any x satisfying the identity is invertible, so running over all ``q^(m^2)``
    matrices is the same as running over GL(m, q).
    """
    F, m = B.F, B.m
    total = F.q ** (m * m)
    if m > 3 or total > CENSUS_CAP:
        raise CensusCapExceeded(f"{total} matrices to scan for m={m}, q={F.q}")
    g = B.gram.a
    phi = F.frob_table(B.frob)
    count = 0
    digits = F.q ** np.arange(m * m, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        X = ((codes[:, None] // digits) % F.q).reshape(-1, m, m)
        XphiT = np.swapaxes(phi[X], 1, 2)
        lhs = F.matmul(F.matmul(XphiT, g), X)
        count += int(np.all(lhs == g, axis=(1, 2)).sum())
    return count


def space_bound(q: int, m: int) -> int:
    return q ** (m * (m + 1) // 2)


def standard_forms(F: GF, m: int) -> list:
    """The census table of forms for dimension m over F."""
    out = []
    I = Matrix.identity(F, m)
    out.append(("symmetric-identity", FormSpec(I, 0, "symmetric")))
    anti = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        anti[i, m - 1 - i] = 1
    out.append(("symmetric-antidiagonal", FormSpec(Matrix(F, anti), 0, "symmetric")))
    if F.p != 2:
        nonsq = next(a for a in range(1, F.q) if a not in F.squares())
        d = np.eye(m, dtype=np.int64)
        d[m - 1, m - 1] = nonsq
        out.append(("symmetric-nonsquare", FormSpec(Matrix(F, d), 0, "symmetric")))
    if m % 2 == 0:
        J = np.zeros((m, m), dtype=np.int64)
        h = m // 2
        for i in range(h):
            J[i, h + i] = 1
            J[h + i, i] = int(F.neg[1])
        out.append(("alternating-standard", FormSpec(Matrix(F, J), 0, "alternating")))
    if F.k % 2 == 0:
        out.append(("hermitian-identity", FormSpec(I, F.k // 2, "hermitian")))
        out.append(("hermitian-antidiagonal", FormSpec(Matrix(F, anti), F.k // 2, "hermitian")))
    # a non-symmetric Gram matrix twisted by the Frobenius, the shape met when
    # transpose-inverse composes with a field automorphism
    up = np.eye(m, dtype=np.int64)
    for i in range(m - 1):
        up[i, i + 1] = 1
    for e in range(F.k):
        out.append((f"sesquilinear-unipotent-e{e}", FormSpec(Matrix(F, up), e, "sesquilinear")))
    return out


def all_vectors(F: GF, m: int):
    return [np.array(t, dtype=np.int64) for t in itertools.product(range(F.q), repeat=m)]
