"""Run configurations, command dispatch and deterministic reports.

Every command returns a :class:`Report`.  ``Report.to_json()`` is
byte-deterministic for a fixed :class:`RunConfig`; wall time lives in
``Report.timing`` and is only serialised on request.
"""

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._validation import DomainError, as_square
from .hulls import HullSpec, hull_membership, rank_one_segment_closure_check, sample_hull
from .majorization import (
    birkhoff_decompose,
    birkhoff_reconstruct,
    doubly_stochastic_for,
    hlp_equivalence_check,
    majorization_relation,
    partial_sum_margins,
    t_transform_chain,
)
from .matrix_orders import diag_spectrum_majorization_check, schur_horn_construct
from .potentials import (
    PotentialSpec,
    bridge_residuals,
    catalog,
    coefficients,
    h_schur_convexity,
    rank_one_convexity_test,
)
from .quasiconvexity import (
    QuadratureGrid,
    TestDeformation,
    deformation_catalog,
    h_is_schur_convex,
    lemma_exponential_product_check,
    lemma_weyl_domination_check,
    mean_log_stretch,
    quasiconvexity_quadrature,
    thompson_power_check,
    thompson_similarity_check,
)
from .sampling import INCONCLUSIVE, REFUTED, VERIFIED, SamplingPlan, Verdict, _jsonable, combine, random_rotation

COMMANDS = (
    "majorize", "chain", "birkhoff", "schur-horn", "schur-convex", "rank1",
    "coefficients", "quasiconvex", "lemmas", "hull", "sweep",
)
EXIT_CODES = {VERIFIED: 0, REFUTED: 1, INCONCLUSIVE: 2}
EXIT_USAGE = 3
THREADS_ENV = "MAJOCONVEX_THREADS"


class UsageError(ValueError):
    """Malformed input; the message names the offending field."""


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    seed: int = 0
    sample_count: int = 1000
    tol: float = None
    out: str = None
    format: str = "json"

    def echo(self):
        return {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "tol": self.tol,
            "format": self.format,
        }


@dataclass
class Report:
    command: str
    config: dict
    status: str
    result: dict
    verdicts: dict
    version: str = __version__
    timing: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        return EXIT_CODES[self.status]

    def to_dict(self, include_timing=False):
        doc = {
            "command": self.command,
            "config": self.config,
            "status": self.status,
            "exit_code": self.exit_code,
            "result": self.result,
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
            "version": self.version,
        }
        if include_timing:
            doc["timing"] = self.timing
        return _jsonable(doc)

    def to_json(self, include_timing=False):
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2) + "\n"


# --- input decoding --------------------------------------------------------

def _require(inputs, key):
    if key not in inputs or inputs[key] is None:
        raise UsageError(f"{key}: missing")
    return inputs[key]


def decode_vector(inputs, key):
    v = _require(inputs, key)
    if not isinstance(v, list) or not v:
        raise UsageError(f"{key}: expected a non-empty JSON list of numbers")
    for i, e in enumerate(v):
        if isinstance(e, bool) or not isinstance(e, (int, float)):
            raise UsageError(f"{key}[{i}]: expected a number, got {e!r}")
    return np.array(v, dtype=float)


def decode_matrix(inputs, key, value=None):
    M = _require(inputs, key) if value is None else value
    if not isinstance(M, list) or not M:
        raise UsageError(f"{key}: expected a JSON list of rows")
    n = len(M)
    for i, row in enumerate(M):
        if not isinstance(row, list) or len(row) != n:
            raise UsageError(f"{key}[{i}]: expected a row of length {n}")
        for j, e in enumerate(row):
            if isinstance(e, bool) or not isinstance(e, (int, float)):
                raise UsageError(f"{key}[{i}][{j}]: expected a number, got {e!r}")
    return np.array(M, dtype=float)


def decode_potential(doc, key="potential"):
    if isinstance(doc, str):
        cat = catalog()
        if doc in cat:
            return cat[doc]
        raise UsageError(f"{key}: unknown catalog name {doc!r} (known: {', '.join(cat)})")
    if not isinstance(doc, dict):
        raise UsageError(f"{key}: expected a JSON object or catalog name")
    if "kind" not in doc:
        raise UsageError(f"{key}.kind: missing")
    if "params" in doc and not isinstance(doc["params"], dict):
        raise UsageError(f"{key}.params: expected a JSON object")
    try:
        return PotentialSpec.from_dict(doc)
    except (DomainError, TypeError, ValueError) as e:
        raise UsageError(f"{key}: {e}") from None


def decode_deformation(doc, n, key="deformation"):
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict) or "kind" not in doc:
        raise UsageError(f"{key}.kind: missing")
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise UsageError(f"{key}.params: expected a JSON object")
    try:
        return TestDeformation(doc["kind"], int(doc.get("n", n)), dict(params))
    except (DomainError, TypeError, ValueError) as e:
        raise UsageError(f"{key}: {e}") from None


def _box(inputs, default):
    lo, hi = inputs.get("box", default)
    return float(lo), float(hi)


def _tol(config, default):
    return default if config.tol is None else float(config.tol)


def _bool_status(flag):
    return VERIFIED if flag else REFUTED


# --- commands --------------------------------------------------------------

def _cmd_majorize(cfg):
    x = decode_vector(cfg.inputs, "x")
    y = decode_vector(cfg.inputs, "y")
    if x.size != y.size:
        raise UsageError(f"y: length {y.size} differs from x ({x.size})")
    rel = majorization_relation(x, y, _tol(cfg, 1e-10))
    result = {
        "majorized": "majorized" in rel,
        "submajorized": "submajorized" in rel,
        "componentwise_leq": "componentwise_leq" in rel,
        "partial_sum_margins": partial_sum_margins(x, y),
    }
    return _bool_status(result["majorized"]), result, {}


def _cmd_chain(cfg):
    y = decode_vector(cfg.inputs, "y")
    x = decode_vector(cfg.inputs, "x")
    chain = t_transform_chain(y, x, _tol(cfg, 1e-10))
    A = doubly_stochastic_for(y, x)
    result = {
        "steps": [s.to_dict() for s in chain.steps],
        "permutation": list(map(int, chain.permutation)),
        "replay_error": float(np.max(np.abs(chain.replay(y) - x))),
        "doubly_stochastic": A,
        "matrix_error": float(np.max(np.abs(A @ y - x))),
    }
    verdicts = {"hlp": hlp_equivalence_check(x, y, SamplingPlan(cfg.seed, cfg.sample_count))}
    return verdicts["hlp"].status, result, verdicts


def _cmd_birkhoff(cfg):
    A = decode_matrix(cfg.inputs, "matrix")
    terms = birkhoff_decompose(A, tol=_tol(cfg, 1e-8))
    n = A.shape[0]
    result = {
        "terms": [{"weight": w, "permutation": list(map(int, p))} for w, p in terms],
        "term_count": len(terms),
        "term_bound": (n - 1) ** 2 + 1,
        "reconstruction_error": float(np.max(np.abs(birkhoff_reconstruct(terms) - A))),
        "weight_sum": float(sum(w for w, _ in terms)),
    }
    return VERIFIED, result, {}


def _cmd_schur_horn(cfg):
    a = decode_vector(cfg.inputs, "a")
    b = decode_vector(cfg.inputs, "b")
    M = schur_horn_construct(a, b, _tol(cfg, 1e-10))
    result = {
        "matrix": M,
        "diag_error": float(np.max(np.abs(np.diag(M) - a))),
        "spectrum_error": float(np.max(np.abs(np.linalg.eigvalsh(M) - np.sort(b)))),
    }
    v = diag_spectrum_majorization_check(M)
    return v.status, result, {"diag_spectrum": v}


def _plan(cfg, n, default_box):
    lo, hi = _box(cfg.inputs, default_box)
    return SamplingPlan.cube(n, lo, hi, seed=cfg.seed, sample_count=cfg.sample_count)


def _cmd_schur_convex(cfg):
    spec = decode_potential(_require(cfg.inputs, "potential"))
    n = int(cfg.inputs.get("n", 3))
    v = h_schur_convexity(spec, _plan(cfg, n, (-1.5, 1.5)))
    return v.status, {"potential": spec.label, "n": n}, {"h_schur_convex": v}


def _cmd_rank1(cfg):
    spec = decode_potential(_require(cfg.inputs, "potential"))
    n = int(cfg.inputs.get("n", 3))
    tol = _tol(cfg, 1e-9)
    v = rank_one_convexity_test(spec, _plan(cfg, n, (0.2, 5.0)), tol_a=tol, tol_b=tol)
    return v.status, {"potential": spec.label, "n": n}, {"rank_one_convexity": v}


def _cmd_coefficients(cfg):
    spec = decode_potential(_require(cfg.inputs, "potential"))
    y = decode_vector(cfg.inputs, "y")
    if np.any(y <= 0):
        raise UsageError("y: singular values must be positive")
    bundle = coefficients(spec, y)
    result = {"potential": spec.label, "coefficients": bundle.to_dict(), "bridge_residuals": bridge_residuals(bundle)}
    return VERIFIED, result, {}


def _grid(cfg):
    return QuadratureGrid(int(cfg.inputs.get("m", 64)), int(cfg.inputs.get("levels", 3)))


def _cmd_quasiconvex(cfg):
    spec = decode_potential(_require(cfg.inputs, "potential"))
    F = decode_matrix(cfg.inputs, "matrix")
    n = F.shape[0]
    grid = _grid(cfg)
    defs = ([decode_deformation(cfg.inputs["deformation"], n)] if "deformation" in cfg.inputs
            else list(deformation_catalog(n).values()))
    rows, verdicts = [], {}
    for d in defs:
        rep = quasiconvexity_quadrature(spec, F, d, grid)
        rows.append(dict(rep.to_dict(), deformation=d.to_dict()))
        status = VERIFIED if rep.verified else REFUTED
        wit = None if rep.verified else {"F": F, "deformation": d.to_dict(), "margin": rep.margin}
        verdicts[d.kind] = Verdict(status, 1, rep.margin + rep.error_estimate, wit,
                                   details={"error_estimate": rep.error_estimate})
        _, mls = mean_log_stretch(d, grid)
        verdicts[f"mean_log_stretch:{d.kind}"] = mls
    quad = combine([v for k, v in verdicts.items() if ":" not in k])
    return quad.status, {"potential": spec.label, "grid": grid.to_dict(), "rows": rows}, verdicts


def _random_gl_plus(rng, n, spread=1.0):
    # log singular values in [-spread, spread]: powers up to X**6 stay well above rounding
    return random_rotation(rng, n) @ np.diag(np.exp(rng.uniform(-spread, spread, n))) @ random_rotation(rng, n)


def _random_sym(rng, n, scale=1.0):
    S = rng.standard_normal((n, n)) * scale
    return 0.5 * (S + S.T)


def lemma_suite(spec, n, seed, count, tol=1e-9):
    """Both lemmas and the two Thompson conditions on ``count`` seeded inputs each."""
    h_schur = h_is_schur_convex(spec, n, seed=seed)
    rng = np.random.Generator(np.random.PCG64([seed, 51]))
    weyl, expo, sim, power = [], [], [], []
    for _ in range(count):
        F = _random_gl_plus(rng, n)
        weyl.append(lemma_weyl_domination_check(spec, F, tol, h_schur))
        A, B = _random_sym(rng, n), _random_sym(rng, n)
        expo.append(lemma_exponential_product_check(spec, A, B, tol, h_schur))
        X = _random_gl_plus(rng, n)
        Y = random_rotation(rng, n) @ np.diag(np.exp(rng.uniform(-1, 1, n)))
        Y = Y @ Y.T
        sim.append(thompson_similarity_check(spec, X, Y, tol))
        Xp = _random_gl_plus(rng, n, 0.5)
        for m in (1, 2, 3):
            power.append(thompson_power_check(spec, Xp, m, tol))
    return {
        "weyl_domination": combine(weyl),
        "exponential_product": combine(expo),
        "thompson_similarity": combine(sim),
        "thompson_power": combine(power),
    }, h_schur


def _cmd_lemmas(cfg):
    spec = decode_potential(_require(cfg.inputs, "potential"))
    n = int(cfg.inputs.get("n", 3))
    verdicts, h_schur = lemma_suite(spec, n, cfg.seed, cfg.sample_count, _tol(cfg, 1e-9))
    verdicts["h_schur_convex"] = h_schur
    status = combine(v for k, v in verdicts.items() if k != "h_schur_convex").status
    return status, {"potential": spec.label, "n": n}, verdicts


def _cmd_hull(cfg):
    a = _require(cfg.inputs, "a")
    try:
        spec = HullSpec.from_dict({"a": a})
    except (DomainError, TypeError, ValueError) as e:
        raise UsageError(f"a: {e}") from None
    tol = _tol(cfg, 1e-8)
    result = {"hull": spec.to_dict()}
    if "matrix" in cfg.inputs:
        F = decode_matrix(cfg.inputs, "matrix")
        if F.shape[0] != spec.n:
            raise UsageError(f"matrix: dimension {F.shape[0]} differs from len(a) = {spec.n}")
        rec = hull_membership(F, spec, tol)
        result["membership"] = rec
        return _bool_status(rec["in_hull"] and rec["thompson_leq"]), result, {}
    plan = SamplingPlan(cfg.seed, cfg.sample_count)
    pts = sample_hull(spec, plan)
    result["sampled"] = len(pts)
    v = rank_one_segment_closure_check(spec, plan, tol=tol)
    return v.status, result, {"segment_closure": v}


DEFAULT_SWEEP_MATRICES = {
    "I": np.eye(2),
    "Diag(2,1/2)": np.diag([2.0, 0.5]),
    "R30*Diag(3,1/3)": np.array([[np.cos(np.pi / 6), -np.sin(np.pi / 6)],
                                 [np.sin(np.pi / 6), np.cos(np.pi / 6)]]) @ np.diag([3.0, 1.0 / 3.0]),
}


def _sweep_item(item):
    spec, d, name, F, grid = item
    rep = quasiconvexity_quadrature(spec, F, d, grid)
    return {
        "potential": spec.label,
        "deformation": d.kind,
        "F_name": name,
        "F": F.tolist(),
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "margin": rep.margin,
        "error_estimate": rep.error_estimate,
        "verified": rep.verified,
    }


def worker_count():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _cmd_sweep(cfg):
    pots = cfg.inputs.get("potentials", ["log_trace_inv_U", "modified_ogden(2)"])
    if not isinstance(pots, list) or not pots:
        raise UsageError("potentials: expected a non-empty JSON list")
    specs = [decode_potential(p, f"potentials[{i}]") for i, p in enumerate(pots)]
    if "matrices" in cfg.inputs:
        ms = cfg.inputs["matrices"]
        if not isinstance(ms, list) or not ms:
            raise UsageError("matrices: expected a non-empty JSON list of matrices")
        mats = {f"F{i}": decode_matrix(cfg.inputs, f"matrices[{i}]", M) for i, M in enumerate(ms)}
    else:
        mats = DEFAULT_SWEEP_MATRICES
    sizes = {M.shape[0] for M in mats.values()}
    if len(sizes) != 1:
        raise UsageError("matrices: all matrices must have the same size")
    n = sizes.pop()
    grid = _grid(cfg)
    defs = list(deformation_catalog(n).values())
    items = [(s, d, name, F, grid) for s in specs for d in defs for name, F in mats.items()]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        rows = list(pool.map(_sweep_item, items))
    status = VERIFIED if all(r["verified"] for r in rows) else REFUTED
    return status, {"kind": "quasiconvex_sweep", "grid": grid.to_dict(), "rows": rows}, {}


HANDLERS = {
    "majorize": _cmd_majorize,
    "chain": _cmd_chain,
    "birkhoff": _cmd_birkhoff,
    "schur-horn": _cmd_schur_horn,
    "schur-convex": _cmd_schur_convex,
    "rank1": _cmd_rank1,
    "coefficients": _cmd_coefficients,
    "quasiconvex": _cmd_quasiconvex,
    "lemmas": _cmd_lemmas,
    "hull": _cmd_hull,
    "sweep": _cmd_sweep,
}


def run(config):
    """Dispatch ``config.command``; usage and domain errors propagate to the caller."""
    if config.command not in HANDLERS:
        raise UsageError(f"command: unknown {config.command!r}")
    if config.format not in ("json", "csv"):
        raise UsageError(f"format: expected json or csv, got {config.format!r}")
    start = time.perf_counter()
    status, result, verdicts = HANDLERS[config.command](config)
    elapsed = time.perf_counter() - start
    return Report(config.command, _jsonable(config.echo()), status, _jsonable(result), verdicts,
                  timing={"wall_time_s": elapsed})


# --- tables ----------------------------------------------------------------

SWEEP_COLUMNS = ("potential", "deformation", "F_name", "F", "lhs", "rhs", "margin", "error_estimate", "verified")


def emit_sweep_tables(reports):
    """One CSV row per (potential, deformation, F) across sweep reports."""
    reports = list(reports)
    kinds = {r.result.get("kind") if isinstance(r, Report) else r.get("kind") for r in reports}
    if kinds != {"quasiconvex_sweep"}:
        raise ValueError(f"emit_sweep_tables needs sweep reports only, got kinds {sorted(map(str, kinds))}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in reports:
        rows = r.result["rows"] if isinstance(r, Report) else r["rows"]
        for row in rows:
            writer.writerow([
                row["potential"], row["deformation"], row["F_name"], json.dumps(row["F"]),
                repr(float(row["lhs"])), repr(float(row["rhs"])), repr(float(row["margin"])),
                repr(float(row["error_estimate"])), str(bool(row["verified"])).lower(),
            ])
    return buf.getvalue()


def parse_sweep_table(text):
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({
            "potential": rec["potential"],
            "deformation": rec["deformation"],
            "F_name": rec["F_name"],
            "F": json.loads(rec["F"]),
            "lhs": float(rec["lhs"]),
            "rhs": float(rec["rhs"]),
            "margin": float(rec["margin"]),
            "error_estimate": float(rec["error_estimate"]),
            "verified": rec["verified"] == "true",
        })
    return rows


def verdict_table(report):
    """Flat CSV export of a non-sweep report's verdicts."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("command", "name", "status", "samples_checked", "margin"))
    writer.writerow((report.command, "overall", report.status, "", ""))
    for name, v in report.verdicts.items():
        writer.writerow((report.command, name, v.status, v.samples_checked, repr(float(v.margin))))
    return buf.getvalue()


def render(report, include_timing=False):
    if report.config.get("format") == "csv":
        if report.result.get("kind") == "quasiconvex_sweep":
            return emit_sweep_tables([report])
        return verdict_table(report)
    return report.to_json(include_timing)
