import numpy as np
import pytest

from widthlab import catalog
from widthlab.catalog import AutoSpec, UnsupportedSpec, parse_spec, q_index_formula, realize, simple_order

# |Out(S)| from the standard tables; psp:4:2 = Sp(4,2)' is realized inside Sp(4,2) only
OUT_ORDERS = {"alt:5": 2, "psl:2:4": 2, "psl:2:5": 2, "psl:2:7": 2, "psl:3:2": 2, "alt:6": 4, "psl:2:9": 4,
              "psp:4:2": 2, "psl:2:8": 3, "psl:2:11": 2, "psl:2:13": 2, "alt:7": 2, "psl:3:3": 2, "psu:3:3": 2,
              "psl:3:4": 12, "psl:4:2": 2, "pso+:6:2": 2, "pso-:6:2": 2, "psp:4:3": 2}

# orders of simple groups from the ATLAS
ATLAS = {"alt:5": 60, "psl:2:7": 168, "alt:6": 360, "psl:2:8": 504, "psl:2:11": 660, "psl:2:13": 1092,
         "alt:7": 2520, "psl:3:3": 5616, "psu:3:3": 6048, "alt:8": 20160, "psl:3:4": 20160,
         "psp:4:3": 25920, "pso-:6:2": 25920, "alt:9": 181440, "psl:3:5": 372000}


@pytest.mark.parametrize("spec", sorted(OUT_ORDERS))
def test_realized_indices(spec):
    R = realize(spec)
    assert R.S.order == simple_order(parse_spec(spec))
    assert R.aut_index == OUT_ORDERS[spec]
    assert R.q_index == q_index_formula(parse_spec(spec))


def test_order_formula_matches_atlas():
    for spec, n in ATLAS.items():
        assert simple_order(parse_spec(spec)) == n


def test_catalog_listing():
    specs = catalog.catalog_specs(10**6)
    assert len(specs) == 22
    assert set(catalog.TIER1) <= set(specs)
    orders = [simple_order(parse_spec(s)) for s in specs]
    assert orders == sorted(orders)


@pytest.mark.parametrize("bad", ["psl:2:2", "psl:2:3", "psu:3:2", "alt:4", "psl:2:6", "foo:2:3", "psl:2", "pso+:4:3"])
def test_unsupported(bad):
    with pytest.raises(UnsupportedSpec):
        catalog.check_supported(parse_spec(bad))


def test_rank():
    assert catalog.rank("psl:3:4") == 2 and catalog.rank("psp:4:3") == 2 and catalog.rank("pso+:8:2") == 4


@pytest.mark.parametrize("spec", ["psl:2:7", "psl:2:8", "alt:6", "psl:3:4", "psu:3:3", "pso-:6:2"])
def test_coset_reps_are_automorphisms(spec):
    R = realize(spec)
    reps = R.aut_reps
    assert R.is_inner(reps[0])
    for k, r in enumerate(reps):
        assert R.is_automorphism(r)
        assert R.coset(r)[0] == k
        assert R.is_in_Q(r) == (k < R.q_index)
        assert (k == 0) == R.is_inner(r)
        perm = R.aut_perm(r)
        assert sorted(perm) == list(range(R.S.order))


def test_inner_element_roundtrip():
    R = realize("psl:2:11")
    S = R.S
    for s in [0, 5, 17, 300]:
        assert R.inner_element(R.embed(s)[0]) == s
        # conjugation by s agrees with the group's own conjugation
        assert np.array_equal(R.aut_perm(R.embed(s)[0]), S.conj(np.arange(S.order), s))


def test_twisted_classes_partition():
    R = realize("psl:2:7")
    r = R.aut_reps[1]
    lab = R.twisted_labels(r)
    counts = np.bincount(lab)
    assert counts.sum() == 168
    assert sorted(set(counts.tolist())) == [28, 42, 56]
    # one outer automorphism per twisted class
    assert len(R.outer_autos()) == len(counts)


def test_autospec_roundtrip():
    R = realize("psl:3:4")
    for r in R.aut_reps:
        a = R.autospec(r)
        assert np.array_equal(R.aut_perm(a.row(R)), R.aut_perm(r))
        assert set(a.to_json()) == {"g", "frob", "graph"}
    assert isinstance(a, AutoSpec)


def test_q_membership_module_function():
    R = realize("psl:2:9")
    assert catalog.is_in_Q("psl:2:9", R.aut_reps[1])
    assert not catalog.is_in_Q("psl:2:9", R.aut_reps[2])


def test_build_simple_q_groups():
    assert catalog.build_simple(parse_spec("pgl:2:7")).order == 336
    assert catalog.q_subgroup("psl:3:4").index == 3
