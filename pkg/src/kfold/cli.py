"""Command-line front end.

    kfold tables   --k 4 --d 4
    kfold audit    --k 2 --d 4,5
    kfold sample   --config run.json --seed 7 --out runs/
    kfold analyze  --config run.json --seed 7
    kfold verify   --seed 1
    kfold hciz     --a 0,1 --b 0,1 --t 1 --seed 3

Exit codes: 0 success, 1 internal error, 2 configuration error,
3 resource cap, 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import traceback
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from . import commutant as C
from . import ensembles as E
from . import hc
from . import repcore as R
from . import spectra as S
from . import stats as St
from . import tensor as T
from .errors import InvalidArgumentError, NotPositiveDefiniteError, NumericalDegeneracyError, ResourceLimitError
from .rng import as_generator, haar_unitary, sample_seed
from .svgplot import histogram_svg

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_CAP, EXIT_FAILED = 0, 1, 2, 3, 4
SCHEMA_VERSION = 1
MAX_TABLE_K = 4
COMMANDS = ("tables", "audit", "sample", "analyze", "verify", "hciz")
DEFAULT_FORMATS = {
    "tables": ["csv", "json"],
    "audit": ["csv", "json"],
    "sample": ["json"],
    "analyze": ["csv", "json", "svg"],
    "verify": ["json"],
    "hciz": ["json"],
}
NEEDS_SEED = ("sample", "analyze", "verify", "hciz")


class ConfigError(Exception):
    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(message)


# ---------------------------------------------------------------------------
# configuration


def load_schema() -> dict:
    return json.loads(resources.files("kfold").joinpath("config_schema.json").read_text(encoding="utf-8"))


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def validate_config(cfg) -> None:
    """Raise ConfigError carrying the JSON pointer of the most relevant violation."""
    err = best_match(Draft202012Validator(load_schema()).iter_errors(cfg))
    if err is None:
        return
    path = list(err.absolute_path)
    if err.validator == "required" and isinstance(err.instance, dict):
        missing = [p for p in err.validator_value if p not in err.instance]
        path += missing[:1]
    elif err.validator == "additionalProperties" and isinstance(err.instance, dict):
        known = err.schema.get("properties", {})
        extra = sorted(p for p in err.instance if p not in known)
        path += extra[:1]
    raise ConfigError(err.message, _pointer(path))


@dataclass
class RunConfig:
    command: str
    data: dict
    seed: int | None
    samples: int
    threads: int
    out: Path
    formats: list

    def section(self, name) -> dict:
        return self.data.get(name, {})


def _env_threads():
    raw = os.environ.get("KFOLD_THREADS")
    if raw is None or raw == "":
        return None
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"KFOLD_THREADS must be a positive integer, got {raw!r}", "/threads") from None
    if val < 1:
        raise ConfigError(f"KFOLD_THREADS must be a positive integer, got {raw!r}", "/threads")
    return val


def build_config(args) -> RunConfig:
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        validate_config(data)
    else:
        data = {"schema_version": SCHEMA_VERSION}
    data = dict(data)
    for key in ("seed", "samples", "threads", "out"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.format:
        fmts = []
        for item in args.format:
            fmts += [f.strip() for f in item.split(",") if f.strip()]
        data["formats"] = list(dict.fromkeys(fmts))
    _apply_command_flags(args, data)
    validate_config(data)
    if args.command in NEEDS_SEED and "seed" not in data:
        raise ConfigError("a seed is required (--seed or \"seed\" in the config)", "/seed")
    threads = data.get("threads") or _env_threads() or 1
    return RunConfig(
        command=args.command,
        data=data,
        seed=data.get("seed"),
        samples=int(data.get("samples", 200)),
        threads=int(threads),
        out=Path(data.get("out", "kfold_out")),
        formats=data.get("formats", DEFAULT_FORMATS[args.command]),
    )


def _floats(text, name):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{name} must be a comma-separated list of numbers", f"/hciz/{name}") from None


def _apply_command_flags(args, data):
    cmd = args.command
    if cmd == "tables":
        sec = dict(data.get("tables", {}))
        if args.k is not None:
            sec["k"] = args.k
        if args.d is not None:
            sec["d"] = args.d
        data["tables"] = sec
    elif cmd == "audit":
        sec = dict(data.get("audit", {}))
        if args.k is not None:
            sec["k"] = args.k
        if args.d is not None:
            try:
                sec["d"] = [int(x) for x in args.d.split(",") if x.strip()]
            except ValueError:
                raise ConfigError("--d must be a comma-separated list of integers", "/audit/d") from None
        data["audit"] = sec
    elif cmd == "analyze" and args.batch:
        data["batch"] = args.batch
    elif cmd == "hciz":
        sec = dict(data.get("hciz", {}))
        if args.a is not None:
            sec["a"] = _floats(args.a, "a")
        if args.b is not None:
            sec["b"] = _floats(args.b, "b")
        if args.t is not None:
            sec["t"] = args.t
        if "samples" in data and "samples" not in sec:
            sec["samples"] = data["samples"]
        data["hciz"] = sec
    elif cmd == "verify":
        data.setdefault("verify", {})


# ---------------------------------------------------------------------------
# output helpers


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(obj):
    """Replace NaN and infinities by None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(obj) -> str:
    obj = json.loads(json.dumps(obj, default=_json_default))
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


class Writer:
    def __init__(self, rc: RunConfig):
        self.rc = rc
        self.written = []

    def wants(self, fmt) -> bool:
        return fmt in self.rc.formats

    def _path(self, name) -> Path:
        self.rc.out.mkdir(parents=True, exist_ok=True)
        p = self.rc.out / name
        self.written.append(str(p))
        return p

    def json(self, name, obj):
        if self.wants("json"):
            self._path(name).write_text(dumps(obj), encoding="utf-8")

    def csv(self, name, header, rows):
        if self.wants("csv"):
            with self._path(name).open("w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)

    def svg(self, name, text):
        if self.wants("svg"):
            self._path(name).write_text(text, encoding="utf-8")


def _envelope(rc: RunConfig, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": rc.command, "seed": rc.seed, **body}


# ---------------------------------------------------------------------------
# tables


def cmd_tables(rc: RunConfig, w: Writer) -> int:
    sec = rc.section("tables")
    k = int(sec.get("k", 4))
    d = int(sec.get("d", 4))
    if k > MAX_TABLE_K:
        raise ResourceLimitError(f"tables require k <= {MAX_TABLE_K}, got {k}")
    ct = R.character_table(k)
    cls = [str(c) for c in ct.classes]
    w.csv(f"character_table_k{k}.csv", ["partition"] + cls,
          [[str(lam)] + list(ct.row(lam)) for lam in ct.partitions])

    parts = R.enumerate_partitions(k)
    kron = [[str(a), str(b), str(m), R.kronecker(a, b, m)] for a in parts for b in parts for m in parts]
    kron = [r for r in kron if r[3]]
    w.csv(f"kronecker_k{k}.csv", ["lambda", "lambda2", "mu", "coefficient"], kron)

    branch = {}
    for k1 in range(1, k // 2 + 1):
        rows = []
        for mu in parts:
            for (a, b), m in R.branching(mu, k1, k - k1).items():
                rows.append([str(mu), R.sign_label(a), R.sign_label(b), m])
        branch[f"{k1}x{k - k1}"] = rows
        w.csv(f"branching_k{k}_{k1}x{k - k1}.csv", ["mu", "lambda", "lambda2", "multiplicity"], rows)

    body = {
        "k": k,
        "d": d,
        "character_table": {"classes": cls, "rows": {str(lam): list(ct.row(lam)) for lam in ct.partitions}},
        "kronecker": [dict(zip(("lambda", "lambda2", "mu", "coefficient"), r)) for r in kron],
        "branching": {key: [dict(zip(("mu", "lambda", "lambda2", "multiplicity"), r)) for r in rows]
                      for key, rows in branch.items()},
    }
    if k % 2 == 0:
        fold = k // 2
        split = R.c_coefficients(fold, d)
        rows = [[str(mu), R.sign_label(mu_s), s, v] for (mu, mu_s, s), v in split.items()]
        w.csv(f"c_coefficients_k{fold}_d{d}.csv", ["mu", "mu_s", "exchange_sign", "C"], rows)
        collapsed = R.collapse_sign(split)
        body["c_coefficients"] = {
            "fold": fold,
            "split": [dict(zip(("mu", "mu_s", "exchange_sign", "C"), r)) for r in rows],
            "collapsed": [{"mu": str(mu), "mu_s": R.sign_label(ms), "C": v} for (mu, ms), v in collapsed.items()],
            "sum_of_squares_collapsed": R.sum_of_squares(collapsed),
            "sum_of_squares_split": R.sum_of_squares(split),
        }
    if k == 4:
        comp = {
            "character_table": R.compare_s4_table(),
            "branching_2x2": R.compare_s4_branching(),
            "c_coefficients": R.compare_c_table(2, d),
        }
        kron2 = []
        for (a, b, m), ref in R.REFERENCE_S2_KRONECKER.items():
            got = R.kronecker(_s2(a), _s2(b), _s2(m))
            kron2.append({"key": a + b + m, "computed": got, "published": ref, "match": got == ref})
        comp["s2_kronecker"] = kron2
        disc_rows = []
        for table, entries in comp.items():
            for e in entries:
                key = ";".join(str(e[x]) for x in e if x not in ("computed", "published", "match"))
                disc_rows.append([table, key, e["computed"], e["published"], e["match"]])
        w.csv("discrepancies.csv", ["table", "key", "computed", "published", "match"], disc_rows)
        body["discrepancies"] = {
            "mismatches": [dict(zip(("table", "key", "computed", "published"), r[:4])) for r in disc_rows if not r[4]],
            "counts": {t: sum(not e["match"] for e in es) for t, es in comp.items()},
        }
        n_bad = len(body["discrepancies"]["mismatches"])
        print(f"tables: k={k} d={d}, {n_bad} mismatches against published values")
    else:
        print(f"tables: k={k} d={d}")
    w.json(f"tables_k{k}.json", _envelope(rc, body))
    return EXIT_OK


def _s2(label):
    return (2,) if label == "+" else (1, 1)


# ---------------------------------------------------------------------------
# audit


def _fmt_gap(g):
    return "full_rank" if g is None else f"{g:.6g}"


def cmd_audit(rc: RunConfig, w: Writer) -> int:
    sec = rc.section("audit")
    k = int(sec.get("k", 2))
    ds = [int(x) for x in sec.get("d", [4, 5])]
    for d in ds:
        if d ** (2 * k) > C.MAX_VEC_DIM:
            raise ResourceLimitError(f"audit needs d^(2k) <= {C.MAX_VEC_DIM}, got d={d}, k={k}")
    report = C.dimension_audit(k, ds)
    rows = []
    for entry in report["rows"]:
        for name, summ in entry["subsets"].items():
            spans = summ["spans"]
            rows.append([entry["d"], name, summ["complex_commutant_dim"], summ["hermitian_dim"], summ["form_dim"],
                         ";".join(f"{key}:{_fmt_gap(v['gap'])}" for key, v in spans.items())])
        if "warning" in entry:
            print("warning:", entry["warning"], file=sys.stderr)
    w.csv(f"audit_k{k}.csv", ["d", "constraints", "complex_dim", "hermitian_dim", "form_dim", "gaps"], rows)
    w.json(f"audit_k{k}.json", _envelope(rc, report))
    for entry in report["rows"]:
        full = entry["subsets"]["perm+half_swap"]
        print(f"audit: k={k} d={entry['d']} complex={full['complex_commutant_dim']} hermitian={full['hermitian_dim']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ensembles from config


def _group_table(name):
    if name == "S3":
        return E.symmetric_group_table(3)
    return E.cyclic_group(int(name[1:]))


def build_spec(ens: dict) -> E.EnsembleSpec:
    v = ens["variant"]
    scale = ens.get("scale", 1.0)
    if v in ("GUE", "GOE", "Poisson"):
        return E.EnsembleSpec(v, {"n": ens["n"], "scale": scale})
    if v == "KFold":
        k, d = ens["k"], ens["d"]
        cons = ens.get("constraints", {})
        fam = C.symmetrized_family(C.ConstraintSet(
            k, d,
            include_permutation_symmetry=cons.get("permutation_symmetry", True),
            permutation_sign=cons.get("permutation_sign", "trivial"),
            include_half_swap=cons.get("half_swap", True),
        ))
        pc = ens["precision"]
        kind = pc["kind"]
        if kind == "random":
            prec = C.random_precision(fam, pc.get("seed", 0), pc.get("margin", 1.0))
        elif kind == "identity":
            prec = C.build_precision(fam, pc.get("lambda", 1.0) * fam.identity_coefficients())
        elif kind == "coefficients":
            if "coefficients" not in pc:
                raise ConfigError("'coefficients' is a required property", "/ensemble/precision/coefficients")
            prec = C.build_precision(fam, pc["coefficients"])
        else:
            prec = C.corrupted_precision(fam, pc.get("strength", 0.9), pc.get("seed", 0))
        return E.EnsembleSpec(v, {"k": k, "d": d, "precision": dict(pc)}, prec)
    if v == "TensorProductGUE":
        return E.EnsembleSpec(v, {"dims": list(ens["dims"]), "scale": scale})
    if v == "PowerFold":
        return E.EnsembleSpec(v, {"k": ens["k"], "n": ens["n"], "scale": scale})
    if v in ("Heisenberg", "O3Model"):
        graph = [list(e) for e in E.chain(ens["sites"], ens.get("coupling", 1.0), ens.get("periodic", False))]
        params = {"graph": graph, "n_sites": ens["sites"]}
        if v == "Heisenberg":
            params["noise_scale"] = ens.get("noise_scale", 0.0)
        else:
            params["orthogonal"] = ens.get("orthogonal", "haar")
        return E.EnsembleSpec(v, params)
    if v == "QuantumDouble":
        return E.EnsembleSpec(v, {"table": _group_table(ens["group"]).tolist(),
                                  "width": ens.get("width", 2), "height": ens.get("height", 2)})
    raise AssertionError(v)


def _require_ensemble(rc: RunConfig) -> dict:
    if "ensemble" not in rc.data:
        raise ConfigError("'ensemble' is a required property", "/ensemble")
    return rc.data["ensemble"]


def _draw(rc: RunConfig):
    spec = build_spec(_require_ensemble(rc))
    if spec.dimension() > E.MAX_DIM:
        raise ResourceLimitError(f"dimension {spec.dimension()} exceeds cap {E.MAX_DIM}")
    return E.sample_batch(spec, rc.samples, rc.seed, rc.threads)


def cmd_sample(rc: RunConfig, w: Writer) -> int:
    batch = _draw(rc)
    obj = E.batch_to_json(batch)
    obj["ensemble"] = rc.data["ensemble"]
    w.json("batch.json", obj)
    header, rows = E.batch_csv_rows(batch)
    w.csv("batch.csv", header, rows)
    print(f"sample: {len(batch)} x {batch.spec.variant} (n={batch.samples.shape[1]}) seed={rc.seed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _load_batch(path):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load batch {path}: {exc}", "/batch") from None
    if obj.get("schema_version") != SCHEMA_VERSION or "samples" not in obj:
        raise ConfigError("batch file lacks schema_version 1 or samples", "/batch")
    return obj, E.samples_from_json(obj)


def _window(w, window):
    if window is None:
        return w
    lo, hi = window
    n = len(w)
    return w[int(lo * n) : max(int(hi * n), int(lo * n) + 3)]


def analyze_samples(samples, analysis: dict, seed: int, threads: int = 1) -> dict:
    """Aggregate spectral statistics of a batch; returns JSON-ready data plus arrays for plotting."""
    split = analysis.get("entanglement_split")
    words = analysis.get("words", [])
    word_d = analysis.get("word_d")
    window = analysis.get("window")
    if words and word_d is None:
        raise ConfigError("'word_d' is required when words are given", "/analysis/word_d")
    summaries = []
    for H in samples:
        summaries.append(S.summarize(H, split, words, word_d, window))
    ratios = np.concatenate([s.ratios for s in summaries])
    per_mean = np.array([s.mean_ratio for s in summaries])
    out = {
        "samples": len(summaries),
        "n": int(samples.shape[1]),
        "window": window,
        "mean_ratio": float(ratios.mean()),
        "mean_ratio_se": float(per_mean.std(ddof=1) / math.sqrt(len(per_mean))) if len(per_mean) > 1 else None,
        "merged_spacings": int(sum(s.merged for s in summaries)),
        "reference": {"gue_mean_ratio": 0.5996, "poisson_mean_ratio": S.POISSON_MEAN_R},
    }
    raw = []
    spectra = []
    for s in summaries:
        e = _window(s.eigenvalues, window)
        spectra.append(e)
        sp_ = np.diff(e)
        sp_ = sp_[sp_ > S.DEGENERATE_RTOL * max(e[-1] - e[0], 1e-300)]
        if sp_.size:
            raw.append(sp_ / sp_.mean())
    raw = np.concatenate(raw) if raw else np.zeros(0)
    unfolded = None
    if analysis.get("spacings", True):
        try:
            unfolded = S.unfold_batch(spectra, analysis.get("unfold_degree", 7), analysis.get("trim", 0.1))
            unfolded = unfolded / unfolded.mean()
            gof = S.surmise_chi2(unfolded, bins=analysis.get("bins", 20))
            out["unfolded"] = {"count": int(unfolded.size), "chi2": gof.statistic, "pvalue": gof.pvalue,
                               "consistent_with_surmise": bool(gof.pvalue >= 0.05)}
        except (InvalidArgumentError, NumericalDegeneracyError) as exc:
            out["unfolded"] = {"error": str(exc)}
            unfolded = None
    if split is not None:
        out["mean_top_schmidt"] = float(np.mean([s.entanglement[:, 0].mean() for s in summaries]))
    if words:
        out["word_traces_mean"] = {
            key: float(np.mean([s.word_traces[key].real for s in summaries])) for key in summaries[0].word_traces
        }
    if analysis.get("compare_gue", False):
        ref = E.sample_batch(E.EnsembleSpec("GUE", {"n": int(samples.shape[1])}), len(summaries),
                             sample_seed(seed, 1 << 32), threads)
        ref_r = np.concatenate([S.spacing_ratios(_window(np.linalg.eigvalsh(H), window)).ratios for H in ref.samples])
        stat, p = St.ks_two_sample(ratios, ref_r)
        out["gue_comparison"] = {"ks_statistic": stat, "pvalue": p, "gue_mean_ratio": float(ref_r.mean()),
                                 "distinct_at_1pct": bool(p < 0.01)}
    return {"aggregate": out, "summaries": summaries, "ratios": ratios, "raw": raw, "unfolded": unfolded}


def cmd_analyze(rc: RunConfig, w: Writer) -> int:
    if "batch" in rc.data:
        obj, samples = _load_batch(rc.data["batch"])
        source = {"batch": rc.data["batch"], "variant": obj.get("variant")}
    else:
        batch = _draw(rc)
        samples = batch.samples
        source = {"ensemble": rc.data["ensemble"]}
    res = analyze_samples(samples, rc.section("analysis"), rc.seed or 0, rc.threads)
    agg = res["aggregate"]
    summary_rows = []
    spectra_rows = []
    for i, s in enumerate(res["summaries"]):
        summary_rows.append([i, len(s.eigenvalues), repr(s.mean_ratio), s.merged])
        _, rows = s.csv_rows()
        spectra_rows += [[i] + r for r in rows]
    w.csv("summary.csv", ["sample", "n", "mean_ratio", "merged"], summary_rows)
    w.csv("spectra.csv", ["sample", "index", "eigenvalue", "spacing", "ratio"], spectra_rows)
    w.json("summary.json", _envelope(rc, {"source": source, "analysis": rc.section("analysis"), "aggregate": agg}))
    bins = np.linspace(0, 4, 41)
    curves = [("Wigner surmise", S.wigner_surmise), ("Poisson", S.poisson_spacing)]
    w.svg("spacing_raw.svg", histogram_svg(np.clip(res["raw"], 0, 4), bins, "Raw spacings (mean-normalized)", "s", curves))
    if res["unfolded"] is not None:
        w.svg("spacing_unfolded.svg",
              histogram_svg(np.clip(res["unfolded"], 0, 4), bins, "Unfolded spacings", "s", curves))
    w.svg("ratio.svg", histogram_svg(res["ratios"], np.linspace(0, 1, 26), "Spacing ratio", "r",
                                     [("GUE surmise", S.gue_ratio_density), ("Poisson", S.poisson_ratio_density)]))
    print(f"analyze: {agg['samples']} samples, mean r = {agg['mean_ratio']:.4f}")
    if "gue_comparison" in agg:
        g = agg["gue_comparison"]
        print(f"analyze: KS vs GUE p = {g['pvalue']:.3g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

VERIFY_DEFAULTS = {
    "invariance_samples": 4000,
    "n_boot": 40,
    "kfold_d": 3,
    "heisenberg_sites": 4,
    "corrupt": False,
    "trace_samples": 10,
    "schur_weyl": [[2, 2], [2, 3]],
    "hciz_problems": 4,
    "hciz_samples": 20000,
    "checks": ["invariance", "trace_identity", "schur_weyl", "quantum_double", "hciz"],
}


def _check(name, passed, **details):
    return {"name": name, "passed": bool(passed), "details": details}


def _inv_details(r):
    d = r.as_dict()
    d["within_threshold"] = d.pop("passed")
    return d


def _invariance_checks(opt, seed, threads):
    N, nb, d = opt["invariance_samples"], opt["n_boot"], opt["kfold_d"]
    fam = C.symmetrized_family(C.ConstraintSet(2, d))
    V = T.kron_power(haar_unitary(d, sample_seed(seed, 101)), 2)
    out = []
    if opt["corrupt"]:
        prec, label = C.corrupted_precision(fam, 0.9, sample_seed(seed, 102)), "corrupted"
    else:
        prec, label = C.random_precision(fam, sample_seed(seed, 102)), "random"
    b = E.sample_batch(E.EnsembleSpec("KFold", {}, prec), N, sample_seed(seed, 103), threads)
    r = St.invariance_under(b.samples, V, nb, sample_seed(seed, 104))
    out.append(_check("invariance/kfold", r.passed, k=2, d=d, precision=label, samples=N, **_inv_details(r)))

    n = opt["heisenberg_sites"]
    spec = E.EnsembleSpec("Heisenberg", {"graph": E.chain(n), "noise_scale": 0.5, "n_sites": n})
    b = E.sample_batch(spec, N, sample_seed(seed, 105), threads)
    Vh = T.kron_power(haar_unitary(2, sample_seed(seed, 106)), n)
    r = St.invariance_under(b.samples, Vh, nb, sample_seed(seed, 107))
    out.append(_check("invariance/heisenberg", r.passed, sites=n, samples=N, **_inv_details(r)))

    ctrl = C.corrupted_precision(fam, 0.9, sample_seed(seed, 108))
    b = E.sample_batch(E.EnsembleSpec("KFold", {}, ctrl), N, sample_seed(seed, 109), threads)
    r = St.invariance_under(b.samples, V, nb, sample_seed(seed, 110))
    out.append(_check("invariance/control_rejected", not r.passed, samples=N, **_inv_details(r)))
    return out


def _trace_checks(opt, seed):
    worst = {}
    for d in (2, 3):
        rng = as_generator(sample_seed(seed, 200 + d))
        rel = 0.0
        for _ in range(opt["trace_samples"]):
            H = E.sample_gue(d * d, 1.0, rng)
            a, b = S.swap_trace_direct(H, d), S.swap_trace_schmidt(H, d)
            rel = max(rel, abs(a - b) / abs(a))
        worst[str(d)] = rel
    out = [_check("trace_identity/schmidt", max(worst.values()) < 1e-8, max_rel_error=worst)]
    d = 2
    rng = as_generator(sample_seed(seed, 210))
    words = S.words_up_to(2, 4)
    rel = 0.0
    for _ in range(opt["trace_samples"]):
        H = E.sample_gue(d * d, 1.0, rng)
        U = T.kron_power(haar_unitary(d, rng), 2)
        H2 = U @ H @ U.conj().T
        for wd in words:
            a = S.invariant_word_trace(H, wd, d)
            b = S.invariant_word_trace(H2, wd, d)
            rel = max(rel, abs(a - b) / max(abs(a), 1e-300))
    out.append(_check("trace_identity/words", rel < 1e-9, words=len(words), max_rel_error=rel))
    return out


def _schur_weyl_checks(opt, seed):
    out = []
    for i, (k, d) in enumerate(opt["schur_weyl"]):
        if d ** (2 * k) > C.MAX_VEC_DIM:
            raise ResourceLimitError(f"Schur-Weyl check needs d^(2k) <= {C.MAX_VEC_DIM}")
        r = S.schur_weyl_residual(k, d, seed=sample_seed(seed, 300 + i))
        out.append(_check(f"schur_weyl/k{k}_d{d}", r.residual < 1e-6, residual=r.residual,
                          commutant_dim=r.commutant_dim, twirl_defect=r.twirl_defect))
    return out


def quantum_double_report(table, width=2, height=2) -> dict:
    qd = E.quantum_double(table, width, height)
    ops = list(qd.vertex_ops) + list(qd.plaquette_ops)
    dense = [np.asarray(o.toarray() if hasattr(o, "toarray") else o) for o in ops]
    comm = 0.0
    for A in dense:
        for B in dense:
            comm = max(comm, float(np.abs(A @ B - B @ A).max()))
    gauge = {}
    modes = ("left", "conjugate") if _abelian(qd.table) else ("conjugate",)
    for mode in modes:
        dev = 0.0
        for q in range(qd.order):
            P = qd.relabel_operator(q, mode)
            P = np.asarray(P.toarray() if hasattr(P, "toarray") else P)
            for A in dense:
                dev = max(dev, float(np.abs(P @ A @ P.T - A).max()))
        gauge[mode] = dev
    H = np.asarray(qd.hamiltonian)
    e0 = float(np.linalg.eigvalsh(H)[0])
    predicted = -float(qd.order * len(qd.vertex_ops) + len(qd.plaquette_ops))
    return {"order": qd.order, "max_commutator": comm, "gauge_deviation": gauge,
            "ground_energy": e0, "predicted_ground_energy": predicted}


def _abelian(M) -> bool:
    M = np.asarray(M)
    return bool(np.array_equal(M, M.T))


def _quantum_double_checks(opt, seed):
    rep = quantum_double_report(E.cyclic_group(2))
    ok = (rep["max_commutator"] < 1e-12 and max(rep["gauge_deviation"].values()) < 1e-12
          and abs(rep["ground_energy"] - rep["predicted_ground_energy"]) < 1e-9)
    return [_check("quantum_double/Z2_2x2", ok, **rep)]


def _hciz_checks(opt, seed):
    out = []
    v = hc.hciz_exact(hc.HcizProblem((0, 1), (0, 1), 1.0)).value
    out.append(_check("hciz/closed_form", abs(v - (math.e - 1)) < 1e-10, value=v, expected=math.e - 1))
    rng = as_generator(sample_seed(seed, 400))
    worst = 0.0
    probs = []
    for i in range(opt["hciz_problems"]):
        n = 2 + i % 2
        p = hc.HcizProblem(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), float(rng.uniform(0.5, 1.5)))
        ex = hc.hciz_exact(p).value
        mean, se = hc.hciz_monte_carlo(p, opt["hciz_samples"], sample_seed(seed, 401 + i))
        z = abs(ex - mean) / se
        worst = max(worst, z)
        probs.append({"n": n, "exact": ex, "mc_mean": mean, "mc_se": se, "z": z})
    out.append(_check("hciz/monte_carlo", worst < 3.0, max_z=worst, problems=probs))
    return out


def run_verify(opt: dict, seed: int, threads: int = 1) -> list:
    opt = {**VERIFY_DEFAULTS, **opt}
    runners = {
        "invariance": lambda: _invariance_checks(opt, seed, threads),
        "trace_identity": lambda: _trace_checks(opt, seed),
        "schur_weyl": lambda: _schur_weyl_checks(opt, seed),
        "quantum_double": lambda: _quantum_double_checks(opt, seed),
        "hciz": lambda: _hciz_checks(opt, seed),
    }
    checks = []
    for name in VERIFY_DEFAULTS["checks"]:
        if name in opt["checks"]:
            checks += runners[name]()
    return checks


def cmd_verify(rc: RunConfig, w: Writer) -> int:
    opt = {**VERIFY_DEFAULTS, **rc.section("verify")}
    checks = run_verify(opt, rc.seed, rc.threads)
    ok = all(c["passed"] for c in checks)
    report = _envelope(rc, {"options": opt, "passed": ok, "checks": checks})
    w.json("verify.json", report)
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}")
    return EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# hciz


def cmd_hciz(rc: RunConfig, w: Writer) -> int:
    sec = rc.section("hciz")
    if "a" not in sec or "b" not in sec:
        raise ConfigError("'a' and 'b' are required (--a/--b or the hciz section)", "/hciz")
    if len(sec["a"]) != len(sec["b"]):
        raise ConfigError("a and b must have the same length", "/hciz/b")
    p = hc.HcizProblem(sec["a"], sec["b"], sec.get("t", 1.0))
    ex = hc.hciz_exact(p)
    samples = int(sec.get("samples", 100_000))
    mean, se = hc.hciz_monte_carlo(p, samples, rc.seed)
    weyl = hc.compare_with_weyl_sum(p)
    body = {
        "problem": {"a": list(p.a), "b": list(p.b), "t": p.t},
        "exact": {"value": ex.value, "error_estimate": ex.error_estimate, "method": ex.method},
        "monte_carlo": {"mean": mean, "se": se, "samples": samples},
        "z": abs(ex.value - mean) / se if se > 0 else 0.0,
        "weyl_sum": weyl,
    }
    w.json("hciz.json", _envelope(rc, body))
    ratio = weyl["ratio"]
    w.csv("hciz.csv", ["n", "t", "exact", "method", "mc_mean", "mc_se", "weyl_sum", "ratio"],
          [[p.n, p.t, ex.value, ex.method, mean, se, weyl["weyl_sum"], "" if ratio is None else ratio]])
    shown = "n/a" if ratio is None else f"{ratio:.6g}"
    print(f"hciz: exact={ex.value:.12g} ({ex.method}) mc={mean:.6g}+-{se:.2g} weyl_ratio={shown}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", action="append", help="csv, json or svg; repeat or comma-separate")
    common.add_argument("--samples", type=int, help="number of samples")
    common.add_argument("--threads", type=int, help="worker threads (fallback: KFOLD_THREADS)")

    p = argparse.ArgumentParser(prog="kfold", description="k-fold invariant Gaussian ensembles")
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("tables", parents=[common], help="character, branching, Kronecker and C tables")
    t.add_argument("--k", type=int)
    t.add_argument("--d", type=int)
    a = sub.add_parser("audit", parents=[common], help="invariant-family dimension audit")
    a.add_argument("--k", type=int)
    a.add_argument("--d", help="comma-separated local dimensions")
    sub.add_parser("sample", parents=[common], help="draw a batch of samples")
    an = sub.add_parser("analyze", parents=[common], help="spectral statistics of a batch")
    an.add_argument("--batch", help="batch.json written by 'sample'")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    h = sub.add_parser("hciz", parents=[common], help="HCIZ integral, exact and Monte Carlo")
    h.add_argument("--a", help="comma-separated eigenvalues of A")
    h.add_argument("--b", help="comma-separated eigenvalues of B")
    h.add_argument("--t", type=float)
    return p


HANDLERS = {
    "tables": cmd_tables,
    "audit": cmd_audit,
    "sample": cmd_sample,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "hciz": cmd_hciz,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        rc = build_config(args)
        w = Writer(rc)
        return HANDLERS[rc.command](rc, w)
    except ConfigError as exc:
        where = f" at {exc.pointer}" if exc.pointer else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InvalidArgumentError, NotPositiveDefiniteError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
