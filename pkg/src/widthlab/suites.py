"""Suite runners: each returns records, a summary and a list of failed assertions."""

from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import catalog, dns, forms, kt, lattice, torus, width
from .gf import field_of_order
from .groups import DEFAULT_CAP, CapExceeded, ElementSet, GroupHandle, parse_group, perm_group

log = logging.getLogger("widthlab")


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    suite: str
    groups: list = field(default_factory=list)
    autos: str = "outer"  # outer | all | q | notq
    samples: int = 10000
    trials: int = 1000
    seed: int = 0
    threads: int = 1
    cap: int = DEFAULT_CAP
    out: str | None = None
    format: str = "json"
    params: dict = field(default_factory=dict)

    def to_json(self):
        return {"suite": self.suite, "groups": list(self.groups), "autos": self.autos, "samples": self.samples,
                "trials": self.trials, "seed": self.seed, "cap": self.cap,
                "params": {k: v for k, v in sorted(self.params.items())}}


@dataclass
class Report:
    suite: str
    config: dict
    records: list
    summary: dict
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self):
        return {"suite": self.suite, "config": self.config, "records": self.records, "summary": self.summary,
                "failures": self.failures, "pass": self.passed}


SUITES = {}


def suite(name):
    def deco(fn):
        SUITES[name] = fn
        return fn
    return deco


def run_suite(cfg: SuiteConfig) -> Report:
    if cfg.suite not in SUITES:
        raise ConfigError(f"unknown suite {cfg.suite!r}; choose from {', '.join(sorted(SUITES))}")
    if cfg.threads < 1:
        raise ConfigError("threads must be positive")
    records, summary, failures = SUITES[cfg.suite](cfg)
    return Report(cfg.suite, cfg.to_json(), records, summary, failures)


def _pmap(cfg: SuiteConfig, fn, items):
    """Map over items on a worker pool; results come back in item order."""
    if cfg.threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
        return list(ex.map(fn, items))


def _need_groups(cfg: SuiteConfig):
    if not cfg.groups:
        raise ConfigError("empty group list")


def expand_groups(specs) -> list:
    out = []
    for s in specs:
        if s == "tier1":
            out.extend(catalog.TIER1)
        elif s == "catalog":
            out.extend(catalog.catalog_specs(10**6))
        else:
            out.append(s)
    return out


def parse_range(text) -> list:
    """'2..4' -> [2, 3, 4]; '1,3' -> [1, 3]."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    text = str(text)
    out = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part.strip():
            out.append(int(part))
    return out


def resolve_subgroup(G: GroupHandle, name: str) -> ElementSet:
    """full | derived | center | trivial | v4 | q8 | order:k (the unique normal subgroup of order k)."""
    name = (name or "full").lower()
    if name == "full":
        return G.full()
    if name == "trivial":
        return G.trivial()
    if name == "derived":
        return lattice.derived_subgroup(G)
    if name == "center":
        return lattice.centralizer_of_set(G, G.full())
    k = {"v4": 4, "q8": 8}.get(name)
    if k is None:
        m = re.fullmatch(r"order:(\d+)", name)
        if not m:
            raise ConfigError(f"unknown subgroup {name!r}")
        k = int(m.group(1))
    found = [N for N in lattice.normal_lattice(G).subgroups if len(N) == k]
    if len(found) != 1:
        raise ConfigError(f"{len(found)} normal subgroups of order {k}")
    return found[0]


def parse_elements(G: GroupHandle, text: str) -> list:
    """Permutations in cycle notation separated by ';', e.g. '(1,2,3,4);(1,2)'."""
    out = []
    for item in text.split(";"):
        cycles = [tuple(int(x) for x in c.split(",") if x.strip()) for c in re.findall(r"\(([^)]*)\)", item)]
        row = G.algebra.from_cycles(*[c for c in cycles if c])
        idx = int(G.lookup(row[None])[0])
        if idx < 0:
            raise ConfigError(f"{item} is not in the group")
        out.append(idx)
    return out


# -- width ----------------------------------------------------------------------


@suite("width")
def suite_width(cfg):
    _need_groups(cfg)
    hname = cfg.params.get("h", "full")

    def one(spec):
        G = parse_group(spec, cfg.cap)
        G.enumerate()
        H = resolve_subgroup(G, hname)
        X = width.commutator_set(H, G)
        target = lattice.commutator_subgroup(H, G)
        rec = {"group": spec, "order": G.order, "h": hname, "h_order": len(H), "commutator_set_size": len(X),
               "target_order": len(target)}
        try:
            rec["brute_force_agrees"] = width.commutator_set_bruteforce(H, G) == X
        except ValueError:
            rec["brute_force_agrees"] = None
        w = width.exact_width(X, target)
        rec["width"] = None if w == math.inf else int(w)
        rec["chain"] = width.width_chain(X, target)
        return rec

    records = _pmap(cfg, one, sorted(expand_groups(cfg.groups)))
    failures = [f"{r['group']}: class and brute-force commutator sets differ" for r in records
                if r["brute_force_agrees"] is False]
    failures += [f"{r['group']}: width infinite" for r in records if r["width"] is None]
    return records, {"widths": {r["group"]: r["width"] for r in records}}, failures


# -- automorphism censuses ----------------------------------------------------------


def _auto_items(R, mode: str) -> list:
    if mode == "all":
        return R.outer_autos(include_inner=False)
    if mode == "q":
        return R.outer_autos(q_only=True)
    if mode == "notq":
        return [a for a in R.outer_autos() if a[2] >= R.q_index]
    if mode == "outer":
        # one representative per coset of Inn(S)
        return [(f"c{k}", r, k) for k, r in enumerate(R.aut_reps) if k]
    raise ConfigError(f"unknown automorphism filter {mode!r}")


def auto_record(R, label, row, k, eps: bool = True) -> dict:
    S = R.S
    perm = R.aut_perm(row)
    D = width.displacement(S, perm)
    cent = width.fixed_points(perm)
    rat = width.ratio(S, perm)
    rec = {"group": str(R.spec), "order": S.order, "auto": label, "disp_size": len(D), "centralizer_size": cent,
           "ratio": rat.value, "in_Q": k < R.q_index, "duality": len(D) * cent == S.order,
           "autospec": R.autospec(row).to_json()}
    if eps:
        e = width.epsilon_width(S, perm)
        rec.update({"eps_width": e.k, "eps_chain": e.chain, "monotone": e.monotone, "containment": e.containment})
    return rec


def _group_autos(cfg, eps: bool, mode: str):
    _need_groups(cfg)
    specs = sorted(expand_groups(cfg.groups))
    items = []
    for spec in specs:
        R = catalog.realize(spec, cfg.cap)
        R.S.classes
        items.extend((R, lab, row, k) for lab, row, k in _auto_items(R, mode))
    return _pmap(cfg, lambda it: auto_record(*it, eps=eps), items)


@suite("lemma epsilon")
def suite_epsilon(cfg):
    mode = "all" if cfg.params.get("all_autos") else cfg.autos
    records = _group_autos(cfg, True, mode)
    failures = []
    for r in records:
        tag = f"{r['group']} {r['auto']}"
        if not r["duality"]:
            failures.append(f"{tag}: |[S,f]| |C_S(f)| != |S|")
        if not (r["monotone"] and r["containment"]):
            failures.append(f"{tag}: chain not monotone or containment failed")
    summary = {"autos": len(records), "max_eps_width": max((r["eps_width"] for r in records), default=None)}
    return records, summary, failures


@suite("lemma bdedrank")
def suite_bdedrank(cfg):
    records = _group_autos(cfg, False, "all")
    failures = [f"{r['group']} {r['auto']}: ratio not positive" for r in records if not r["ratio"] > 0]
    failures += [f"{r['group']} {r['auto']}: duality failed" for r in records if not r["duality"]]
    rmin = min(records, key=lambda r: r["ratio"], default=None)
    summary = {"autos": len(records), "min_ratio": None if rmin is None else rmin["ratio"],
               "min_at": None if rmin is None else f"{rmin['group']} {rmin['auto']}"}
    return records, summary, failures


@suite("lemma notinq")
def suite_notinq(cfg):
    _need_groups(cfg)
    records = []
    for spec in sorted(expand_groups(cfg.groups)):
        R = catalog.realize(spec, cfg.cap)
        for k in range(R.q_index, R.aut_index):
            lab = R.twisted_labels(R.aut_reps[k])
            counts = np.bincount(lab)
            mn = int(counts.min())
            records.append({"group": spec, "order": R.S.order, "auto": f"c{k}", "min_disp": mn,
                            "ratio": math.log(mn) / math.log(R.S.order), "in_Q": False})
    failures = [f"{r['group']} {r['auto']}: ratio not positive" for r in records if not r["ratio"] > 0]
    rmin = min((r["ratio"] for r in records), default=None)
    return records, {"cosets": len(records), "empirical_eps_star": rmin}, failures


def rank_records(spec, cap=DEFAULT_CAP) -> list:
    R = catalog.realize(spec, cap)
    out = []
    for k, r in enumerate(R.q_reps):
        res = width.min_twist(R, r)
        out.append({"group": str(spec), "order": R.S.order, "rank": catalog.rank(spec), "q": R.spec.q,
                    "auto": f"c{k}", "s": res.s, "min_disp": res.size, "ratio": res.ratio.value,
                    "exhaustive": res.exhaustive, "candidate": res.candidate, "candidate_disp": res.candidate_size,
                    "agree": res.agree, "primary_candidate": res.primary_candidate,
                    "primary_disp": res.primary_size, "primary_agree": res.primary_agree})
    return out


def rank_summary(records) -> dict:
    """Per group the worst coset (max over Q-cosets of the min-twist ratio), then per (q, rank) the minimum."""
    per_group = {}
    for r in records:
        g = per_group.setdefault(r["group"], {"q": r["q"], "rank": r["rank"], "rho": 0.0, "disp": 1, "order": r["order"]})
        if r["ratio"] > g["rho"]:
            g.update(rho=r["ratio"], disp=r["min_disp"])
    per_rank = {}
    for name, g in per_group.items():
        key = (g["q"], g["rank"])
        if key not in per_rank or g["rho"] < per_rank[key]["rho"]:
            per_rank[key] = {"group": name, "rho": g["rho"], "disp": g["disp"], "order": g["order"]}
    comparisons = []
    for (q, rk), v in sorted(per_rank.items()):
        lo = per_rank.get((q, rk - 1))
        if lo is not None:
            # exact comparison of log a / log A <= log b / log B
            a, A, b, B = v["disp"], v["order"], lo["disp"], lo["order"]
            holds = a == 1 or math.log(a) * math.log(B) <= math.log(b) * math.log(A)
            comparisons.append({"q": q, "rank": rk, "rho": v["rho"], "lower_rank_rho": lo["rho"], "holds": holds})
    return {"per_group": {k: v["rho"] for k, v in sorted(per_group.items())},
            "per_rank": [{"q": q, "rank": rk, "group": v["group"], "rho": v["rho"]} for (q, rk), v in sorted(per_rank.items())],
            "comparisons": comparisons}


@suite("lemma rank")
def suite_rank(cfg):
    specs = list(expand_groups(cfg.groups))
    fam = cfg.params.get("family")
    if fam:
        for q in parse_range(cfg.params.get("q", "2")):
            for n in parse_range(cfg.params.get("n", "2..4")):
                spec = f"{fam}:{n}:{q}"
                try:
                    catalog.check_supported(catalog.parse_spec(spec))
                except catalog.UnsupportedSpec as e:
                    log.info("skipping %s: %s", spec, e)
                    continue
                specs.append(spec)
    if not specs:
        raise ConfigError("empty group list")
    specs = sorted(set(specs))
    records = [r for recs in _pmap(cfg, lambda s: rank_records(s, cfg.cap), specs) for r in recs]
    failures = [f"{r['group']} {r['auto']}: structured candidate misses the optimum" for r in records
                if r["agree"] is False]
    return records, rank_summary(records), failures


# -- forms ------------------------------------------------------------------------


@suite("lemma space")
def suite_space(cfg):
    qs = parse_range(cfg.params.get("q", "2,3,4"))
    ms = parse_range(cfg.params.get("m", "1..3"))
    items = []
    for q in qs:
        F = field_of_order(q)
        for m in ms:
            for name, B in forms.standard_forms(F, m):
                items.append((q, m, name, B))

    def one(it):
        q, m, name, B = it
        count = forms.form_preserver_census(B)
        bound = forms.space_bound(q, m)
        return {"q": q, "m": m, "form": name, "kind": B.kind, "count": count, "bound": bound, "ok": count <= bound}

    records = _pmap(cfg, one, items)
    failures = [f"q={r['q']} m={r['m']} {r['form']}: {r['count']} > {r['bound']}" for r in records if not r["ok"]]
    return records, {"forms": len(records)}, failures


# -- torus ---------------------------------------------------------------------------


@suite("lemma scalar")
def suite_scalar(cfg):
    n = int(cfg.params.get("n", 6))
    eps_list = [float(x) for x in str(cfg.params.get("eps", "0.01,0.05")).split(",")]
    records = [torus.scalar_sweep(n, e, cfg.samples, seed=cfg.seed).to_json() for e in eps_list]
    failures = [f"eps={r['eps']}: {r['failures']} counterexamples" for r in records if r["failures"]]
    return records, {"hypothesis_held": {str(r["eps"]): r["hypothesis_held"] for r in records}}, failures


SUITES["torus scalar"] = suite_scalar


@suite("torus brank")
def suite_brank(cfg):
    ns = parse_range(cfg.params.get("n", "31..40"))
    records = [torus.brank_construction(n).to_json() for n in ns]
    failures = [f"n={r['n']}: lambda_max {r['lambda_max']} <= threshold" for r in records if not r["pass"]]
    return records, {"min_lambda_max": min(r["lambda_max"] for r in records)}, failures


@suite("torus lambda")
def suite_lambda(cfg):
    text = cfg.params.get("angles")
    if not text:
        raise ConfigError("--angles required")
    ang = [float(x) for x in str(text).split(",")]
    A = torus.TorusPoint.from_free(ang[:-1]) if cfg.params.get("free") else torus.TorusPoint(tuple(ang))
    lm, mode = torus.lambda_max(A)
    rec = {"angles": list(A.angles), "lambda": float(torus.lambda_su(A)), "lambda_max": lm, "mode": mode,
           "eta": torus.eta(A)}
    return [rec], {}, []


# -- commutator tuple machinery---------------------------------------------------------

KT_GROUPS = ("sym4", "sl23", "alt5", "d8", "q8")


def kt_identity_trials(G: GroupHandle, trials: int, ms, rng) -> dict:
    bad_uv = bad_ng = 0
    for t in range(trials):
        m = int(ms[t % len(ms)])
        g = rng.integers(0, G.order, size=m)
        us = rng.integers(0, G.order, size=(3, m))
        as_ = rng.integers(0, G.order, size=(3, m))
        bad_uv += not kt.uv_identity_check(G, g, list(us), list(as_))
        bad_ng += not kt.newgens_check(G, g, us[0])
    return {"uv_failures": int(bad_uv), "newgens_failures": int(bad_ng)}


@suite("kt identities")
def suite_kt_identities(cfg):
    names = list(cfg.groups) or list(KT_GROUPS)
    ms = parse_range(cfg.params.get("m", "2,3,5"))
    rng = np.random.default_rng(cfg.seed)
    per = [cfg.trials // len(names) + (i < cfg.trials % len(names)) for i in range(len(names))]
    records = []
    for name, k in zip(names, per):
        G = parse_group(name, cfg.cap)
        G.enumerate()
        rec = {"group": name, "trials": k}
        rec.update(kt_identity_trials(G, k, ms, rng))
        records.append(rec)
    total = sum(r["trials"] for r in records)
    held = total - sum(r["uv_failures"] for r in records)
    held_ng = total - sum(r["newgens_failures"] for r in records)
    failures = [f"{r['group']}: {r['uv_failures']} u-v and {r['newgens_failures']} newgens failures"
                for r in records if r["uv_failures"] or r["newgens_failures"]]
    return records, {"trials": total, "uv_held": held, "newgens_held": held_ng}, failures


@suite("kt fibers")
def suite_kt_fibers(cfg):
    name = (cfg.groups or ["sl23"])[0]
    G = parse_group(name, cfg.cap)
    G.enumerate()
    N = resolve_subgroup(G, cfg.params.get("h", "derived"))
    C = resolve_subgroup(G, cfg.params.get("c", "center"))
    m = int(cfg.params.get("m", 3))
    ys = kt.random_generating_tuples(G, C, m, seed=cfg.seed)
    census = kt.phi_fiber_census(G, N, C, ys)
    rec = {"group": name, "ys": [list(map(int, y)) for y in ys]}
    rec.update(census.to_json())
    failures = [] if census.ok else ["fiber bound not met for some c in N'"]
    return [rec], {"bound": str(census.bound), "pass": census.ok}, failures


@suite("kt search")
def suite_kt_search(cfg):
    name = (cfg.groups or ["sym4"])[0]
    G = parse_group(name, cfg.cap)
    G.enumerate()
    H = resolve_subgroup(G, cfg.params.get("h", "derived"))
    C = resolve_subgroup(G, cfg.params.get("c", "trivial"))
    gbase = G.gen_indices()
    res = kt.kt_conclusion_search(G, H, C, gbase, int(cfg.params.get("mmax", 6)), seed=cfg.seed)
    rec = {"group": name, "h_order": len(H), "c_order": len(C), "gbase": gbase}
    rec.update(res.to_json())
    failures = [f"h={w.h}: padded witness failed" for w in res.witnesses if w.padded_ok is False]
    return [rec], {"max_m": res.max_m, "complete": res.complete, "bound_m": res.bound_m}, failures


# -- dense normal subgroups --------------------------------------------------------------


@suite("dns certify")
def suite_dns(cfg):
    factors = cfg.params.get("factors") or cfg.groups
    if not factors:
        raise ConfigError("empty factor list")
    if isinstance(factors, str):
        factors = factors.split(",")
    d = int(cfg.params.get("d", 1))
    levels = parse_range(cfg.params.get("levels", "1,2"))
    seq = dns.default_sequence(factors, d)
    try:
        cert = dns.escape_certificate(seq, d, levels)
    except dns.NoEscape as e:
        return [{"factors": list(factors), "error": str(e), "counts": {str(k): v for k, v in e.counts.items()}}], \
            {"pass": False}, [str(e)]
    rec = cert.to_json()
    failures = [] if cert.passed else ["certificate failed recheck"]
    return rec["levels"], {"factors": rec["factors"], "pass": cert.passed}, failures


# -- finite-group facts ----------------------------------------------------------------------


def random_perm_groups(count: int, seed: int, max_order: int = 500, degrees=(4, 5, 6, 7)) -> list:
    """Seeded random 2-generated permutation groups of bounded order."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.choice(degrees))
        gens = [rng.permutation(n) for _ in range(2)]
        G = GroupHandle(perm_group(n, []).algebra, np.array(gens), name=f"rand{len(out)}:S{n}", cap=max_order)
        try:
            G.enumerate()
        except CapExceeded:
            continue
        out.append(G)
    return out


G0_CORPUS = ("trivial", "q8", "d8", "alt4", "sym4", "sl23", "alt5", "sym5", "alt:6", "psl:2:7", "psl:2:8",
             "pgl:2:5", "pgl:2:7", "psp:4:2")


def g0_check(G: GroupHandle) -> dict:
    lat = lattice.normal_lattice(G)
    G0, G2 = lattice.g0_and_gss(G, lat)
    Gd = lattice.derived_subgroup(G)
    bad = [len(N) for N in lat.subgroups if len(N) < G.order and len(N * Gd) == G.order and len(N * G0) == G.order]
    return {"group": G.name, "order": G.order, "normals": len(lat.subgroups), "G0": len(G0), "G2": len(G2),
            "derived": len(Gd), "violations": bad}


@suite("g0 property")
def suite_g0(cfg):
    max_order = int(cfg.params.get("max_order", 500))
    groups = []
    names = list(cfg.groups) or list(dict.fromkeys(G0_CORPUS + tuple(catalog.catalog_specs(max_order))))
    for name in names:
        G = parse_group(name, cfg.cap)
        G.enumerate()
        if G.order <= max_order:
            G.name = name
            groups.append(G)
    groups += random_perm_groups(int(cfg.params.get("random", 50)), cfg.seed, max_order)
    records = _pmap(cfg, g0_check, groups)
    failures = [f"{r['group']}: proper N with NG'=NG0=G" for r in records if r["violations"]]
    return records, {"groups": len(records)}, failures


@suite("newcomm")
def suite_newcomm(cfg):
    name = (cfg.groups or ["sym4"])[0]
    G = parse_group(name, cfg.cap)
    G.enumerate()
    H = resolve_subgroup(G, cfg.params.get("h", "derived"))
    A = resolve_subgroup(G, cfg.params.get("a", "trivial"))
    ys_text = cfg.params.get("ys")
    if ys_text:
        ys = parse_elements(G, ys_text)
    else:
        ys = [int(x) for x in G.gen_indices()]
        ys = ys + [int(G.inv[y]) for y in ys]
    f0 = cfg.params.get("f0")
    try:
        cert = width.newcomm_verify(G, H, A, ys, None if f0 is None else int(f0))
    except width.HypothesisError as e:
        raise ConfigError(f"hypotheses fail: {e}") from e
    rec = {"group": name, "h_order": len(H), "a_order": len(A), "ys": ys, "f": None if cert.f == math.inf else cert.f,
           "target_order": cert.target_size, "product_size": cert.product_size, "chain": cert.chain,
           "f1_bound": cert.f1_bound}
    failures = [] if cert.finite else ["width infinite"]
    return [rec], {"f": rec["f"]}, failures
