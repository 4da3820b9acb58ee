"""End-to-end acceptance checks, one group of tests per numbered criterion.

A summary line per criterion is printed at the end of the pytest run.
"""

import json
import math
import time

import pytest

from widthlab import catalog, dns, kt, lattice, torus, width
from widthlab.cli import render
from widthlab.groups import parse_group
from widthlab.suites import SuiteConfig, rank_records, rank_summary, run_suite


def crit(n, title):
    return pytest.mark.criterion(n, title)


@crit(1, "bound formulas")
def test_c01_bound_formulas():
    t = time.perf_counter()
    assert (width.k_of_r(1), width.k_of_r(7), width.k_of_r(8)) == (57, 225, 289)
    for r in range(1, 12):
        assert width.k_of_r(r) == 1 + 4 * (r + 1) * max(r, 7)
    f0 = {r: 3 * r + 1 for r in range(1, 30)}
    for r in range(1, 10):
        assert width.f1_of_r(r, f0) == 1 + f0[r] + 3 * width.k_of_r(r)
    for d in range(1, 6):
        assert width.f_of_d(d, f0) == 1 + d + 2 * d * width.f1_of_r(2 * d, f0)
    k2 = width.k_of_r(2)
    assert width.bound_formulas(2, 1, lambda r: 0) == (k2, 1 + 3 * k2, 1 + 1 + 2 * (1 + 3 * k2))
    assert time.perf_counter() - t < 0.05


@crit(2, "correction identities, 1000 trials per group")
def test_c02_identities():
    t = time.perf_counter()
    rep = run_suite(SuiteConfig("kt identities", groups=["sym4", "sl23", "alt5", "d8", "q8"], trials=5000, seed=0,
                                params={"m": "2,3,5"}))
    assert [r["trials"] for r in rep.records] == [1000] * 5
    assert rep.summary["uv_held"] == rep.summary["newgens_held"] == 5000
    assert rep.passed
    assert time.perf_counter() - t < 30


@crit(3, "Ore width 1 by brute force")
@pytest.mark.parametrize("spec", ["alt:5", "alt:6", "psl:2:7", "psl:2:8", "psl:2:11", "psl:3:2"])
def test_c03_ore_width(spec):
    S = parse_group(spec)
    S.enumerate()
    X = width.commutator_set_bruteforce(S.full(), S)
    assert width.exact_width(X, S.full()) == 1
    assert X == width.commutator_set(S.full(), S)


@pytest.fixture(scope="module")
def epsilon_census():
    t = time.perf_counter()
    rep = run_suite(SuiteConfig("lemma epsilon", groups=["catalog"], params={"all_autos": True}, threads=4))
    return rep, time.perf_counter() - t


@crit(4, "epsilon-width finite, monotone, containment on catalog groups of order <= 10^6")
def test_c04_epsilon(epsilon_census):
    rep, elapsed = epsilon_census
    groups = {r["group"] for r in rep.records}
    assert groups == {s for s in catalog.catalog_specs(10**6) if catalog.realize(s).aut_index > 1}
    for r in rep.records:
        assert r["eps_width"] >= 1 and r["eps_chain"][-1] == r["order"]
        assert r["monotone"] and r["containment"]
    # every non-inner automorphism up to S-conjugacy is covered
    expect = sum(len(catalog.realize(s).outer_autos()) for s in groups)
    assert len(rep.records) == expect
    assert elapsed < 600


@crit(5, "displacement-centralizer duality")
def test_c05_duality(epsilon_census):
    rep, _ = epsilon_census
    assert all(r["duality"] for r in rep.records)
    for spec in ["psl:2:5", "psl:2:7", "psl:3:4", "alt:6"]:
        R = catalog.realize(spec)
        for rec in rank_records(spec):
            k = int(rec["auto"][1:])
            f = R.mul(R.embed(rec["s"])[0], R.q_reps[k])
            perm = R.aut_perm(f)
            D = width.displacement(R.S, perm)
            assert len(D) * width.fixed_points(perm) == R.S.order
            assert len(D) == rec["min_disp"]


RANK_SPECS = ["psl:2:5", "psl:2:7", "psl:3:2", "psl:3:3"]


@pytest.fixture(scope="module")
def rank_run():
    t = time.perf_counter()
    recs = [r for s in RANK_SPECS + ["psl:3:5"] for r in rank_records(s)]
    return recs, time.perf_counter() - t


@crit(6, "twist optimality and rank trend")
@pytest.mark.xfail(strict=True, reason="psl:2:5: optimal outer twist is a non-split involution (10) while the "
                                       "diagonal candidate gives 30")
def test_c06_candidate_attains_optimum(rank_run):
    recs, elapsed = rank_run
    assert elapsed < 300
    listed = [r for r in recs if r["group"] in RANK_SPECS]
    assert all(r["exhaustive"] for r in listed)
    bad = [(r["group"], r["auto"], r["primary_disp"], r["min_disp"]) for r in listed if not r["primary_agree"]]
    assert not bad, bad


@crit(6, "twist optimality and rank trend")
def test_c06_rank_trend(rank_run):
    recs, _ = rank_run
    summ = rank_summary(recs)
    per = {(p["q"], p["rank"]): p["rho"] for p in summ["per_rank"]}
    assert per[(5, 1)] == pytest.approx(math.log(10) / math.log(60))
    assert per[(7, 1)] == pytest.approx(math.log(28) / math.log(168))
    assert per[(2, 2)] == per[(3, 2)] == per[(5, 2)] == 0.0
    assert summ["comparisons"], "no q has both ranks"
    assert all(c["holds"] for c in summ["comparisons"])
    # the full candidate list always reaches the exhaustive optimum
    assert all(r["agree"] for r in recs if r["exhaustive"])


@crit(7, "space census: preservers <= q^(m(m+1)/2)")
def test_c07_space():
    t = time.perf_counter()
    rep = run_suite(SuiteConfig("lemma space", params={"q": "2,3,4", "m": "1..3"}))
    kinds = {r["kind"] for r in rep.records}
    assert {"symmetric", "alternating", "hermitian"} <= kinds
    assert {(r["q"], r["m"]) for r in rep.records} == {(q, m) for q in (2, 3, 4) for m in (1, 2, 3)}
    assert rep.passed and all(r["count"] <= r["bound"] for r in rep.records)
    assert time.perf_counter() - t < 120


@crit(8, "fiber census on SL(2,3), N = Q8")
def test_c08_fibers():
    t = time.perf_counter()
    G = parse_group("sl23")
    G.enumerate()
    N = lattice.derived_subgroup(G)
    C = lattice.centralizer_of_set(G, G.full())
    ys = kt.random_generating_tuples(G, C, 3, seed=0)
    census = kt.phi_fiber_census(G, N, C, ys, r=2)
    assert census.bound == 2 and census.n_order == 8 and census.nbar_order == 4
    for y in ys:
        assert kt.fiber_counts(G, N, y).sum() == 512
    derived = lattice.derived_subgroup(G, N)
    assert sorted(row.c for row in census.rows) == sorted(int(x) for x in derived.indices())
    for row in census.rows:
        assert row.ok and all(s >= 2 for s in row.sizes)
    assert census.ok
    assert time.perf_counter() - t < 60


@crit(9, "brank certificate for n in 31..40")
def test_c09_brank():
    t = time.perf_counter()
    for n in range(31, 41):
        cert = torus.brank_construction(n)
        assert cert.lambda_max > 1 / (200 * math.pi)
    c31 = torus.brank_construction(31)
    assert c31.lambda_max >= 4 / 9 - 1e-9
    assert abs(c31.lambda_alternating - c31.lambda_max) <= 1e-9
    assert time.perf_counter() - t < 5


@crit(10, "scalar sweep at n = 6")
@pytest.mark.parametrize("eps", [0.01, 0.05])
def test_c10_scalar(eps):
    t = time.perf_counter()
    sw = torus.scalar_sweep(6, eps, 10**4, seed=0)
    assert sw.samples == 10**4
    assert sw.held > 0
    assert sw.failures == []
    assert time.perf_counter() - t < 150


@crit(11, "NG' = NG0 = G implies N = G")
def test_c11_g0():
    t = time.perf_counter()
    rep = run_suite(SuiteConfig("g0 property", seed=0, params={"random": 50, "max_order": 500}))
    rand = [r for r in rep.records if r["group"].startswith("rand")]
    assert len(rand) == 50
    assert all(r["order"] <= 500 for r in rep.records)
    assert any(r["group"] == "psl:2:7" for r in rep.records)
    assert rep.passed and not any(r["violations"] for r in rep.records)
    assert time.perf_counter() - t < 600


@crit(12, "escape certificate for psl:2:5, psl:2:7, psl:2:11")
@pytest.mark.xfail(strict=True, raises=dns.NoEscape,
                   reason="X_2 covers psl:2:7 and psl:2:11 entirely, so no factor after j(1)=0 escapes at level 2")
def test_c12_dns():
    t = time.perf_counter()
    cert = dns.escape_certificate(dns.default_sequence(["psl:2:5", "psl:2:7", "psl:2:11"], 1), 1, [1, 2])
    js = [w.factor for w in cert.levels]
    assert all(a < b for a, b in zip(js, js[1:]))
    assert all(w.recheck_outside for w in cert.levels)
    assert time.perf_counter() - t < 300


DETERMINISM_RUNS = [
    SuiteConfig("width", groups=["alt:5", "psl:2:7", "sym4"], params={"h": "derived"}),
    SuiteConfig("lemma epsilon", groups=["psl:2:7", "psl:2:8", "alt:6", "psl:3:2"], params={"all_autos": True}),
    SuiteConfig("lemma bdedrank", groups=["tier1"]),
    SuiteConfig("lemma notinq", groups=["psl:2:8", "psl:2:9"]),
    SuiteConfig("lemma rank", groups=["psl:2:5", "psl:2:7", "psl:3:2"]),
    SuiteConfig("lemma space", params={"q": "2,3", "m": "1..2"}),
    SuiteConfig("lemma scalar", samples=2000, seed=11, params={"n": 6, "eps": "0.05"}),
    SuiteConfig("torus brank", params={"n": "31..33"}),
    SuiteConfig("kt identities", trials=300, seed=4),
    SuiteConfig("kt fibers", groups=["sl23"], seed=2),
    SuiteConfig("kt search", groups=["sym4"], params={"h": "v4", "mmax": 4}),
    SuiteConfig("dns certify", params={"factors": "psl:2:5,psl:2:7,psl:2:13"}),
    SuiteConfig("g0 property", seed=9, params={"random": 10}),
    SuiteConfig("newcomm", groups=["sym4"]),
]


@crit(13, "byte-identical JSON across thread counts")
@pytest.mark.parametrize("cfg", DETERMINISM_RUNS, ids=[c.suite for c in DETERMINISM_RUNS])
def test_c13_determinism(cfg):
    texts = []
    for threads in (1, 4, 1):
        c = SuiteConfig(**{**cfg.__dict__, "threads": threads})
        texts.append(render(run_suite(c).to_json(), "json"))
    assert texts[0] == texts[1] == texts[2]
    json.loads(texts[0])
