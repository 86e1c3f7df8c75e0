"""Acceptance suite.

Each ``criterion_k`` returns ``(passed, summary, report)``.  ``report`` is a
JSON-ready record of everything the criterion computed; the reproducibility
criterion reruns the others and compares the serialised records byte for
byte.  One ``PASS``/``FAIL`` line per criterion is printed at the end of the
pytest run (see ``conftest.py``) and by ``python tests/test_acceptance.py``.
"""

import json
import time

import numpy as np
import pytest

from majoconvex import SamplingPlan
from majoconvex.hulls import (
    HullSpec,
    hull_membership,
    inflate_top,
    rank_one_segment_closure_check,
    sample_hull,
)
from majoconvex.majorization import (
    TTransform,
    apply_chain,
    birkhoff_decompose,
    birkhoff_reconstruct,
    doubly_stochastic_for,
    hlp_equivalence_check,
    permutation_matrix,
    t_transform_chain,
)
from majoconvex.matrix_orders import (
    diag_spectrum_majorization_check,
    loewner_monotonicity_check,
    schur_horn_construct,
    weyl_log_majorization_check,
)
from majoconvex.potentials import (
    bridge_residuals,
    catalog,
    coefficients,
    ellipticity_sweep,
    rank_one_convexity_test,
)
from majoconvex.quasiconvexity import (
    QuadratureGrid,
    deformation_catalog,
    h_is_schur_convex,
    mean_log_stretch,
    texe_hypothesis_check,
)
from majoconvex.reporting import RunConfig, lemma_suite, run
from majoconvex.sampling import _jsonable

CATALOG = catalog()
RESULTS = {}


def _rng(*key):
    return np.random.Generator(np.random.PCG64(list(key)))


def _chain(rng, n, length):
    return [TTransform(*map(int, rng.choice(n, 2, replace=False)), float(rng.random())) for _ in range(length)]


def _digest(report):
    return json.dumps(_jsonable(report), sort_keys=True, indent=2)


# --- 1: majorisation equivalences ------------------------------------------------

def criterion_1():
    worst = {"replay": 0.0, "ds": 0.0}
    hlp_fail = 0
    rows = []
    for n in (2, 3, 4, 6):
        rng = _rng(1, n)
        for k in range(1000):
            y = rng.normal(size=n) * 2
            x = apply_chain(y, _chain(rng, n, int(rng.integers(0, n + 1))))[rng.permutation(n)]
            chain = t_transform_chain(y, x)
            e_replay = float(np.max(np.abs(chain.replay(y) - x)))
            e_ds = float(np.max(np.abs(doubly_stochastic_for(y, x) @ y - x)))
            v = hlp_equivalence_check(x, y, SamplingPlan(seed=1000 * n + k, sample_count=40))
            hlp_fail += not v.verified
            worst["replay"] = max(worst["replay"], e_replay)
            worst["ds"] = max(worst["ds"], e_ds)
            rows.append((n, len(chain.steps), e_replay, e_ds, v.margin))
    ok = worst["replay"] <= 1e-10 and worst["ds"] <= 1e-9 and hlp_fail == 0
    summary = f"4000 pairs, replay {worst['replay']:.1e}, A y error {worst['ds']:.1e}, HLP failures {hlp_fail}"
    return ok, summary, {"worst": worst, "hlp_failures": hlp_fail, "rows": rows}


# --- 2: Birkhoff -------------------------------------------------------------------

def _random_doubly_stochastic(rng, n):
    if rng.random() < 0.5:
        k = int(rng.integers(1, n * n + 1))
        w = rng.dirichlet(np.ones(k))
        return sum(wi * permutation_matrix(rng.permutation(n)) for wi in w)
    # Sinkhorn balancing of a positive matrix gives full support
    A = rng.random((n, n)) + 0.05
    for _ in range(5000):
        A /= A.sum(axis=1, keepdims=True)
        A /= A.sum(axis=0, keepdims=True)
        if np.max(np.abs(A.sum(axis=1) - 1)) <= 1e-15:
            break
    return A


def criterion_2():
    rng = _rng(2)
    worst_err, worst_wsum, over = 0.0, 0.0, 0
    rows = []
    for _ in range(500):
        n = int(rng.integers(2, 7))
        A = _random_doubly_stochastic(rng, n)
        terms = birkhoff_decompose(A)
        err = float(np.max(np.abs(birkhoff_reconstruct(terms) - A)))
        wsum = abs(sum(w for w, _ in terms) - 1.0)
        over += len(terms) > (n - 1) ** 2 + 1
        worst_err, worst_wsum = max(worst_err, err), max(worst_wsum, wsum)
        rows.append((n, len(terms), err, wsum))
    ok = worst_err <= 1e-9 and worst_wsum <= 1e-10 and over == 0
    summary = f"500 matrices, reconstruction {worst_err:.1e}, weight sum {worst_wsum:.1e}, over bound {over}"
    return ok, summary, {"rows": rows}


# --- 3: Schur-Horn ---------------------------------------------------------------------

def criterion_3():
    rng = _rng(3)
    worst_d, worst_s, fails = 0.0, 0.0, 0
    rows = []
    for _ in range(500):
        n = int(rng.integers(2, 6))
        b = rng.normal(size=n) * 2
        a = apply_chain(b, _chain(rng, n, int(rng.integers(0, n + 1))))[rng.permutation(n)]
        M = schur_horn_construct(a, b)
        e_d = float(np.max(np.abs(np.diag(M) - a)))
        e_s = float(np.max(np.abs(np.linalg.eigvalsh(M) - np.sort(b))))
        fails += not diag_spectrum_majorization_check(M).verified
        worst_d, worst_s = max(worst_d, e_d), max(worst_s, e_s)
        rows.append((n, e_d, e_s))
    ok = worst_d <= 1e-10 and worst_s <= 1e-8 and fails == 0
    return ok, f"500 pairs, diagonal {worst_d:.1e}, spectrum {worst_s:.1e}, check failures {fails}", {"rows": rows}


# --- 4: Weyl and Loewner ------------------------------------------------------------------

def criterion_4():
    margins = {"weyl": np.inf, "loewner": np.inf}
    for n in (2, 3, 4):
        rng = _rng(4, n)
        for _ in range(1000):
            F = rng.normal(size=(n, n))
            A = rng.normal(size=(n, n))
            A = A + A.T
            G = rng.normal(size=(n, int(rng.integers(1, n + 1))))
            vw = weyl_log_majorization_check(F)
            vl = loewner_monotonicity_check(A, A + G @ G.T)
            if not (vw.verified and vl.verified):
                margins["failed"] = margins.get("failed", 0) + 1
            margins["weyl"] = min(margins["weyl"], vw.margin)
            margins["loewner"] = min(margins["loewner"], vl.margin)
    ok = margins["weyl"] >= -1e-9 and margins["loewner"] >= -1e-9 and "failed" not in margins
    return ok, f"3000 matrices, min margins weyl {margins['weyl']:.1e}, loewner {margins['loewner']:.1e}", margins


# --- 5: rank-one test against the ellipticity sweep ------------------------------------------

def criterion_5():
    out, ok = {}, True
    for name, spec in CATALOG.items():
        plan = SamplingPlan.cube(3, 0.2, 5.0, seed=5, sample_count=1000)
        v = rank_one_convexity_test(spec, plan)
        low, wit = ellipticity_sweep(spec, plan, count=10_000)
        agree = v.verified == (low > -1e-4)
        ok &= agree
        out[name] = {"rank_one": v.to_dict(), "sweep_min": low, "sweep_witness": wit, "agree": agree}
    ns = CATALOG["neg_sum"]
    plan = SamplingPlan.cube(3, 0.2, 5.0, seed=5, sample_count=1000)
    again = rank_one_convexity_test(ns, plan)
    wit = again.witness or {}
    reproducible = (again.refuted and again.to_dict() == out["neg_sum"]["rank_one"]
                    and coefficients(ns, wit["y"]).G[tuple(wit["pair"])] < 0)
    ok &= bool(reproducible)
    agreed = sum(r["agree"] for r in out.values())
    summary = f"{agreed}/{len(out)} potentials agree, neg_sum witness reproducible: {bool(reproducible)}"
    return ok, summary, out


# --- 6: coefficient identities --------------------------------------------------------------

def criterion_6():
    out, ok = {}, True
    for name, spec in CATALOG.items():
        rng = _rng(6, len(out))
        res = {"gamma_printed": 0.0, "xi_printed": 0.0, "prolongation": 0.0}
        for _ in range(1000):
            y = rng.uniform(0.2, 5.0, 3)
            r = bridge_residuals(coefficients(spec, y))
            res["gamma_printed"] = max(res["gamma_printed"], float(r["gamma_printed"].max()))
            res["xi_printed"] = max(res["xi_printed"], float(r["xi_printed"].max()))
        for _ in range(100):
            s, t = rng.uniform(0.2, 5.0, 2)
            y_eq = np.array([s, s, t])
            y_near = np.array([s * (1 + 1e-7), s, t])
            b = coefficients(spec, y_eq)
            g1 = spec.grad(y_near)
            den = y_near[0] ** 2 - y_near[1] ** 2
            direct = ((y_near[0] * g1[0] - y_near[1] * g1[1]) / den,
                      (y_near[1] * g1[0] - y_near[0] * g1[1]) / den)
            for got, want in zip((b.G[0, 1], b.Hbar[0, 1]), direct):
                res["prolongation"] = max(res["prolongation"], abs(got - want) / max(1.0, abs(want)))
        ok &= res["gamma_printed"] <= 1e-7 and res["xi_printed"] <= 1e-7 and res["prolongation"] <= 1e-4
        out[name] = res
    worst = {k: max(r[k] for r in out.values()) for k in ("gamma_printed", "xi_printed", "prolongation")}
    summary = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return ok, f"worst relative residuals: {summary}", out


# --- 7: lemma suite -----------------------------------------------------------------------------

def criterion_7():
    out, ok, used = {}, True, []
    for name, spec in CATALOG.items():
        if not h_is_schur_convex(spec, 3, seed=7).verified:
            continue
        used.append(name)
        verdicts, _ = lemma_suite(spec, 3, 7, 1000)
        out[name] = {k: v.to_dict() for k, v in verdicts.items()}
        ok &= all(v.verified and v.margin >= -1e-9 for v in verdicts.values())
    worst = min(v["margin"] for r in out.values() for v in r.values())
    return ok, f"{len(used)} potentials x 1000 inputs, worst margin {worst:.1e}", out


# --- 8: quadrature ------------------------------------------------------------------------------

def criterion_8():
    cfg = RunConfig("sweep", {"potentials": ["log_trace_inv_U", "modified_ogden(2)"], "m": 64, "levels": 3})
    rep = run(cfg)
    rows = rep.result["rows"]
    bad = [r for r in rows if not r["margin"] >= -r["error_estimate"]]
    ident = all(r["margin"] == 0.0 for r in rows if r["deformation"] == "identity")
    ok = not bad and ident and len(rows) == 2 * 4 * 3
    return ok, f"{len(rows)} rows, {len(bad)} below error estimate, identity rows exact: {ident}", rep.to_dict()


# --- 9: mean log stretch --------------------------------------------------------------------------

def criterion_9():
    out, ok = {}, True
    for n, m in ((2, 64), (3, 32)):
        for kind, d in deformation_catalog(n).items():
            _, v = mean_log_stretch(d, QuadratureGrid(m=m))
            out[f"{kind}/n={n}"] = v.to_dict()
            ok &= v.verified
    failed = sorted(k for k, v in out.items() if v["status"] != "verified")
    return ok, f"{len(out) - len(failed)}/{len(out)} deformations pass; failing: {failed}", out


# --- 10: hulls ----------------------------------------------------------------------------------------

def criterion_10():
    out, ok = {}, True
    for a in ((2, 0.5), (2, 1, 0.5), (4, 2, 1, 1 / 8)):
        spec = HullSpec(a)
        plan = SamplingPlan(seed=10, sample_count=1000)
        pts = sample_hull(spec, plan)
        inside = agree = outside = 0
        for F in pts:
            rec = hull_membership(F, spec)
            inside += rec["in_hull"]
            agree += rec["in_hull"] == rec["thompson_leq"]
            neg = hull_membership(inflate_top(F, 1.05), spec)
            outside += not neg["in_hull"]
            agree += neg["in_hull"] == neg["thompson_leq"]
        v = rank_one_segment_closure_check(spec, plan, count=500)
        good = inside == 1000 and outside == 1000 and agree == 2000 and v.verified and v.samples_checked > 0
        ok &= good
        out[str(spec.a)] = {"inside": inside, "outside": outside, "agree": agree, "closure": v.to_dict()}
    return ok, "; ".join(f"{k}: in {r['inside']}, out {r['outside']}, closure {r['closure']['status']}"
                         for k, r in out.items()), out


# --- 11: hypotheses imply rank-one convexity ------------------------------------------------------------

def criterion_11():
    out, ok = {}, True
    for name, spec in CATALOG.items():
        hyp = texe_hypothesis_check(spec, SamplingPlan.cube(3, -1.5, 1.5, seed=11, sample_count=1000))
        r1 = None
        if hyp.verified:
            r1 = rank_one_convexity_test(spec, SamplingPlan.cube(3, np.exp(-1.5), np.exp(1.5), seed=11))
            ok &= r1.verified
        out[name] = {"hypotheses": hyp.to_dict(), "rank_one": None if r1 is None else r1.to_dict()}
    broken = sorted(k for k, r in out.items() if r["rank_one"] and r["rank_one"]["status"] != "verified")
    passing = sorted(k for k, r in out.items() if r["rank_one"])
    return ok, f"hypotheses hold for {passing}; rank-one convexity fails for {broken}", out


CRITERIA = {
    1: (criterion_1, 10),
    2: (criterion_2, 10),
    3: (criterion_3, 10),
    4: (criterion_4, 10),
    5: (criterion_5, 60),
    6: (criterion_6, 10),
    7: (criterion_7, 30),
    8: (criterion_8, 120),
    9: (criterion_9, 60),
    10: (criterion_10, 60),
    11: (criterion_11, 30),
}


def evaluate(k):
    fn, budget = CRITERIA[k]
    t0 = time.perf_counter()
    ok, summary, report = fn()
    elapsed = time.perf_counter() - t0
    ok = bool(ok) and elapsed < budget
    RESULTS[k] = {"ok": ok, "digest": _digest(report)}
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {summary} ({elapsed:.1f} s, limit {budget} s)"
    return ok, line


def criterion_12():
    mismatched = []
    for k in CRITERIA:
        if k not in RESULTS:
            evaluate(k)
        first = RESULTS[k]["digest"]
        _, _, report = CRITERIA[k][0]()
        if _digest(report) != first:
            mismatched.append(k)
    return not mismatched, f"reran criteria 1-11, mismatched reports: {mismatched}", {}


LINES = {}


@pytest.mark.parametrize("k", list(CRITERIA))
def test_criterion(k):
    ok, line = evaluate(k)
    LINES[k] = line
    print(line)
    assert ok, line


def test_criterion_12_reproducibility():
    ok, summary, _ = criterion_12()
    line = f"{'PASS' if ok else 'FAIL'} criterion 12: {summary}"
    LINES[12] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    for k in CRITERIA:
        print(evaluate(k)[1], flush=True)
    ok, summary, _ = criterion_12()
    print(f"{'PASS' if ok else 'FAIL'} criterion 12: {summary}")
