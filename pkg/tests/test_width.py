import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widthlab import lattice, width
from widthlab.catalog import realize
from widthlab.groups import parse_group


def _perm_mul(a, b):  # left to right: apply a then b
    return tuple(b[a[i]] for i in range(len(a)))


def test_bound_formulas_values():
    assert width.k_of_r(1) == 57
    assert width.k_of_r(7) == 225
    assert width.k_of_r(8) == 289
    k, f1, f = width.bound_formulas(3, 2, 10)
    assert k == 1 + 4 * 4 * 7
    assert f1 == 1 + 10 + 3 * k
    assert f == 1 + 2 + 2 * 2 * (1 + 10 + 3 * width.k_of_r(4))
    assert width.f1_of_r(2, {2: 5}) == width.f1_of_r(2, lambda r: 5) == 1 + 5 + 3 * width.k_of_r(2)
    with pytest.raises(ValueError):
        width.k_of_r(0)
    with pytest.raises(ValueError):
        width.f_of_d(0, 1)


@pytest.mark.parametrize("spec", ["alt:5", "alt:6", "psl:2:7", "psl:2:8"])
def test_commutator_set_routes_agree(spec):
    G = parse_group(spec)
    G.enumerate()
    X = width.commutator_set(G.full(), G)
    assert X == width.commutator_set_bruteforce(G.full(), G)
    assert width.exact_width(X, G.full()) == 1


def test_commutator_set_proper_normal_subgroup():
    G = parse_group("sym4")
    G.enumerate()
    for H in lattice.normal_lattice(G).subgroups:
        assert width.commutator_set(H, G) == width.commutator_set_bruteforce(H, G)
    nonnormal = G.closure([1])
    if not nonnormal.is_normal():
        with pytest.raises(ValueError):
            width.commutator_set(nonnormal, G)


def test_transposition_class_width_against_direct_products():
    G = parse_group("sym5")
    G.enumerate()
    trans = [G.index(G.algebra.from_cycles(c)) for c in itertools.combinations(range(1, 6), 2)]
    X = G.set_of(trans)
    A5 = lattice.derived_subgroup(G)
    # oracle: iterate products of tuples of transpositions directly
    rows = {tuple(int(v) for v in G.row(t)) for t in trans}
    cur = set(rows)
    sizes = [len(cur)]
    for _ in range(3):
        cur = {_perm_mul(a, b) for a in cur for b in rows}
        sizes.append(len(cur))
    assert width.width_chain(X, A5)[:4] == sizes
    evens = {tuple(int(v) for v in G.row(x)) for x in A5.indices()}
    assert cur == evens  # four transpositions reach A5; three give the odd coset
    assert width.exact_width(X, A5) == 4


def test_exact_width_infinite_and_errors():
    G = parse_group("sym4")
    G.enumerate()
    t = G.index(G.algebra.from_cycles((1, 2)))
    X = G.set_of([t])
    assert width.exact_width(X, G.full()) == math.inf
    with pytest.raises(ValueError):
        width.star_power(X, 0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["psl:2:7", "psl:2:8", "alt:6", "psl:2:9", "psl:3:2"]), st.data())
def test_displacement_centralizer_duality(spec, data):
    R = realize(spec)
    S = R.S
    autos = R.outer_autos()
    lab, row, k = autos[data.draw(st.integers(0, len(autos) - 1))]
    s = data.draw(st.integers(0, S.order - 1))
    f = R.mul(R.embed(s)[0], row)
    perm = R.aut_perm(f)
    D = width.displacement(S, perm)
    assert len(D) * width.fixed_points(perm) == S.order
    # [S,f] only depends on the S-class of f, and s^-1 s^f is read directly
    allx = np.arange(S.order)
    assert D == S.set_of(S.mul(S.inv[allx], perm[allx]))


@pytest.mark.parametrize("spec", ["psl:2:7", "alt:6", "psl:2:8", "psl:3:2"])
def test_epsilon_set_routes_agree(spec):
    R = realize(spec)
    S = R.S
    for _, row, _ in R.outer_autos():
        D = width.displacement(S, R.aut_perm(row))
        assert width.epsilon_set(S, D) == width.epsilon_set_bruteforce(S, D)


def test_epsilon_width_results():
    R = realize("psl:2:8")
    for _, row, _ in R.outer_autos():
        e = width.epsilon_width(R.S, R.aut_perm(row))
        assert e.monotone and e.containment
        assert e.chain[-1] == R.S.order and e.k == len(e.chain)
    with pytest.raises(ValueError):
        width.epsilon_width(R.S, np.arange(R.S.order))


def test_min_twist_psl27_against_direct_search():
    R = realize("psl:2:7")
    S = R.S
    f = R.aut_reps[1]
    res = width.min_twist(R, f)
    # oracle: loop over every s and count displacement of s f
    sizes = [len(width.displacement(S, R.aut_perm(R.mul(R.embed(s)[0], f)))) for s in range(S.order)]
    assert res.size == min(sizes) == 28
    assert res.exhaustive and res.agree and res.primary_agree
    assert res.candidate.startswith("diag(")
    assert sizes[res.s] == res.size
    assert res.orbit_sizes == [28, 42, 56]
    assert res.ratio.num == 28 and res.ratio.den == 168


def test_min_twist_identity_coset_and_errors():
    R = realize("psl:2:8")
    res = width.min_twist(R, R.aut_reps[0])
    assert res.size == 1 and res.candidate == "identity"
    with pytest.raises(ValueError):
        width.min_twist(R, R.aut_reps[1])  # field automorphism is outside Q


@pytest.mark.parametrize("spec", ["psl:2:5", "psl:2:9", "psl:2:11", "psl:2:13", "psl:3:4"])
def test_min_twist_structured_list_reaches_optimum(spec):
    R = realize(spec)
    for r in R.q_reps:
        res = width.min_twist(R, r)
        assert res.agree


def test_ratio_comparison():
    a, b = width.Ratio(10, 60), width.Ratio(28, 168)
    assert (a < b) == (a.value < b.value)
    assert a <= a and not a < a
    assert a.to_json()["disp"] == 10


def test_newcomm_verify_sym4():
    G = parse_group("sym4")
    G.enumerate()
    H = lattice.derived_subgroup(G)
    gens = [int(x) for x in G.gen_indices()]
    ys = gens + [int(G.inv[y]) for y in gens]
    cert = width.newcomm_verify(G, H, G.trivial(), ys, f0=3)
    assert cert.finite and cert.target_size == 12
    assert cert.f1_bound == width.f1_of_r(len(ys), 3)
    # the product set is a subset of [H,G]; its powers reach it at step f
    assert cert.chain[cert.f - 1] == 12


def test_newcomm_hypothesis_errors():
    G = parse_group("sym4")
    G.enumerate()
    H = lattice.derived_subgroup(G)
    gens = [int(x) for x in G.gen_indices()]
    with pytest.raises(width.HypothesisError, match="symmetric"):
        width.newcomm_verify(G, H, G.trivial(), [gens[1]], None)
    with pytest.raises(width.HypothesisError, match="not abelian"):
        width.newcomm_verify(G, H, G.full(), gens + [int(G.inv[y]) for y in gens])
