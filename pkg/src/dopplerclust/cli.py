"""Batch driver: ``synth``, ``sweep``, ``evaluate`` and ``embed``.

Configuration comes from built-in defaults, then an optional TOML/JSON file
(``--config``), then command-line flags. The fully resolved configuration is
written to ``provenance.json`` in the output directory and can be passed
back through ``--config`` to reproduce the run byte for byte.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Set ``DOPPLERCLUST_THREADS`` to run evaluation folds in parallel.
"""
from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

from .clustering import METHODS, ClustererConfig
from .data import LAYOUTS, SynthConfig, generate_synthetic, load_dataset, save_dataset
from .evaluation import run_experiment, summary_markdown
from .features.extractors import EXTRACTORS, ExtractorConfig
from .manifold import TSNE_DEFAULTS, lle, mds, tsne
from .validity import DEFAULT_KS, sweep_k

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EMBED_METHODS = ("tsne", "mds", "lle")
THREADS_ENV = "DOPPLERCLUST_THREADS"

DEFAULTS = {
    "dataset": {"path": None, "layout": "vector6400", "synthetic": None},
    "extractors": None,  # per-command default, see COMMAND_EXTRACTORS
    "extractor_params": {
        "patch_sizes": [10, 20, 40, 80],
        "plan": None,
        "strategy": None,
        "bins": 32,
        "variance_target": 0.95,
    },
    "clusterers": ["kmedoids"],
    "clusterer_params": {"n_init": 10, "max_iter": 300, "tol": 1e-6},
    "k": 5,
    "ks": list(DEFAULT_KS),
    "seed": 0,
    "method": "tsne",
    "embed_params": {
        "perplexity": TSNE_DEFAULTS["perplexity"],
        "tsne_iters": TSNE_DEFAULTS["iters"],
        "mds_iters": 1000,
        "neighbors": 10,
    },
    "output": "out",
}


COMMAND_EXTRACTORS = {"sweep": ["raw"], "evaluate": ["local_dct"], "embed": ["raw"], "synth": []}


class ConfigError(Exception):
    """Bad user input; maps to exit code 2."""


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def read_config_file(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_bytes()
    try:
        if path.suffix.lower() == ".toml":
            cfg = tomllib.loads(text.decode())
        else:
            cfg = json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    cfg.pop("command", None)
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def _parse_ks(text):
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def _parse_k(text):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer or 'auto', got {text!r}") from None


def _flag_overrides(args):
    o = {}
    ds = {}
    if args.data is not None:
        ds["path"] = args.data
        ds["synthetic"] = None
    if args.layout is not None:
        ds["layout"] = args.layout
    synth = {k: v for k, v in {
        "n_subjects": args.n_subjects,
        "reps_per_activity": args.reps,
        "n_activities": args.n_activities,
        "noise_level": args.noise,
        "seed": args.synth_seed,
    }.items() if v is not None}
    if args.synthetic or synth:
        ds["synthetic"] = synth
        ds["path"] = None
    if ds:
        o["dataset"] = ds
    for name in ("extractors", "clusterers"):
        val = getattr(args, name, None)
        if val:
            o[name] = val
    if getattr(args, "k", None) is not None:
        o["k"] = args.k
    if getattr(args, "ks", None) is not None:
        o["ks"] = _parse_ks(args.ks)
    if args.seed is not None:
        o["seed"] = args.seed
    if args.out is not None:
        o["output"] = args.out
    if getattr(args, "method", None) is not None:
        o["method"] = args.method
    ep = {k: v for k, v in {
        "perplexity": getattr(args, "perplexity", None),
        "neighbors": getattr(args, "neighbors", None),
    }.items() if v is not None}
    if ep:
        o["embed_params"] = ep
    xp = {}
    if getattr(args, "plan", None) is not None:
        xp["plan"] = [int(v) for v in args.plan.split(",")]
    if getattr(args, "strategy", None) is not None:
        xp["strategy"] = args.strategy
    if getattr(args, "bins", None) is not None:
        xp["bins"] = args.bins
    if xp:
        o["extractor_params"] = xp
    return o


def resolve_config(args):
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        cfg = _merge(cfg, read_config_file(args.config))
    cfg = _merge(cfg, _flag_overrides(args))
    if cfg["extractors"] is None:
        cfg["extractors"] = list(COMMAND_EXTRACTORS[args.command])
    if getattr(args, "iters", None) is not None:
        cfg["embed_params"]["mds_iters" if cfg["method"] == "mds" else "tsne_iters"] = args.iters
    ds = cfg["dataset"]
    if ds.get("synthetic") is not None:
        ds["synthetic"] = {**SynthConfig().__dict__, **ds["synthetic"]}
    for name in cfg["extractors"]:
        if name not in EXTRACTORS:
            raise ConfigError(f"invalid extractor {name!r}; valid extractors: {', '.join(EXTRACTORS)}")
    for name in cfg["clusterers"]:
        if name not in METHODS:
            raise ConfigError(f"invalid clusterer {name!r}; valid clusterers: {', '.join(METHODS)}")
    if cfg["method"] not in EMBED_METHODS:
        raise ConfigError(f"invalid embedding method {cfg['method']!r}; valid: {', '.join(EMBED_METHODS)}")
    if not (cfg["k"] == "auto" or (isinstance(cfg["k"], int) and cfg["k"] >= 1)):
        raise ConfigError(f"k must be a positive integer or 'auto', got {cfg['k']!r}")
    if ds.get("layout") not in LAYOUTS:
        raise ConfigError(f"invalid layout {ds.get('layout')!r}; valid: {', '.join(LAYOUTS)}")
    return cfg


def load_configured_dataset(cfg):
    ds = cfg["dataset"]
    if ds.get("synthetic") is not None:
        try:
            return generate_synthetic(SynthConfig(**ds["synthetic"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid synthetic config: {exc}") from None
    if not ds.get("path"):
        raise ConfigError("no dataset given: pass --data PATH or --synthetic")
    path = Path(ds["path"])
    if not path.is_file():
        raise ConfigError(f"dataset file not found: {path}")
    return load_dataset(path, ds["layout"])


def _extractor(cfg, name):
    xp = cfg["extractor_params"]
    return ExtractorConfig(
        name=name,
        patch_sizes=tuple(xp["patch_sizes"]),
        plan=None if xp.get("plan") is None else tuple(xp["plan"]),
        strategy=xp.get("strategy"),
        bins=xp["bins"],
        variance_target=xp["variance_target"],
    )


def _clusterer(cfg, method, k=None):
    cp = cfg["clusterer_params"]
    return ClustererConfig(method, cfg["k"] if k is None else k, cp["n_init"], cp["max_iter"], cp["tol"])


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_provenance(out, command, cfg):
    prov = {"command": command, **cfg}
    _write(out / "provenance.json", json.dumps(prov, indent=2, sort_keys=True) + "\n")


def _progress(msg):
    print(msg, flush=True)


def _features_for(cfg, ds, name, k):
    ex = _extractor(cfg, name)
    if ex.needs_k and k == "auto":
        raise ConfigError(f"extractor {name!r} selects its patch by clustering and needs an integer k")
    fitted = ex.fit(ds.X, k=k if k != "auto" else 2, seed=cfg["seed"])
    return fitted.transform(ds.X), fitted


def cmd_synth(cfg, out_path):
    synth = cfg["dataset"].get("synthetic") or SynthConfig().__dict__
    ds = generate_synthetic(SynthConfig(**synth))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    layout = "cube" if out_path.suffix == ".npz" else "vector6400"
    save_dataset(ds, out_path, layout)
    _progress(f"wrote {len(ds)} samples to {out_path}")
    return ds


def cmd_sweep(cfg):
    ds = load_configured_dataset(cfg)
    out = Path(cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    name = cfg["extractors"][0]
    F, _ = _features_for(cfg, ds, name, cfg["k"])
    ks = [k for k in cfg["ks"]]
    if max(ks) > len(ds):
        raise ConfigError(f"largest candidate K={max(ks)} exceeds the {len(ds)} samples")
    _progress(f"sweeping K in {ks} on {name} features ({F.shape[0]} x {F.shape[1]})")
    report = sweep_k(F, ks, _clusterer(cfg, "kmeans", 2), seed=cfg["seed"])
    _write(out / "ksweep.csv", report.to_csv())
    summary = report.summary()
    summary["extractor"] = name
    _write(out / "ksweep.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_provenance(out, "sweep", cfg)
    _progress(f"recommended K = {report.recommended_k}")
    return report


def cmd_evaluate(cfg):
    ds = load_configured_dataset(cfg)
    if ds.labels is None:
        raise ConfigError("evaluate needs a labelled dataset")
    out = Path(cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    n_jobs = max(1, int(os.environ.get(THREADS_ENV, "1") or 1))
    reports = []
    for ex_name in cfg["extractors"]:
        for cl_name in cfg["clusterers"]:
            _progress(f"evaluating {ex_name}+{cl_name}")
            r = run_experiment(ds, _extractor(cfg, ex_name), _clusterer(cfg, cl_name), cfg["seed"], n_jobs)
            reports.append(r)
            for i, fold in enumerate(r.folds):
                _write(out / f"confusion_{ex_name}_{cl_name}_subject{fold.held_out_subject}.csv",
                       r.confusion_csv(i))
    payload = {"experiments": [r.to_dict() for r in reports]}
    _write(out / "report.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write(out / "summary.md", "# Leave-one-subject-out accuracy (mean ± std over folds)\n\n"
           + summary_markdown(reports))
    _write_provenance(out, "evaluate", cfg)
    return reports


def cmd_embed(cfg, method=None):
    method = method or cfg["method"]
    ds = load_configured_dataset(cfg)
    if method == "mds" and len(ds) < 3:
        raise ConfigError(f"MDS needs at least 3 samples (n >= 3), got {len(ds)}")
    out = Path(cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    ep = cfg["embed_params"]
    results = {}
    for name in cfg["extractors"]:
        F, _ = _features_for(cfg, ds, name, cfg["k"])
        _progress(f"embedding {name} features ({F.shape[1]} dims) with {method}")
        if method == "tsne":
            emb = tsne(F, ep["perplexity"], cfg["seed"], ep["tsne_iters"])
        elif method == "mds":
            emb = mds(F, ep["mds_iters"], cfg["seed"])
        else:
            emb = lle(F, ep["neighbors"])
        _write(out / f"embedding_{method}_{name}.csv", emb.to_csv(range(len(ds)), ds.labels))
        meta = {"method": method, "extractor": name, "final_loss": emb.final_loss,
                "iterations": emb.iterations, "seed": emb.seed, "params": emb.params}
        _write(out / f"embedding_{method}_{name}.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
        results[name] = emb
    _write_provenance(out, "embed", {**cfg, "method": method})
    return results


def build_parser():
    parser = argparse.ArgumentParser(prog="dopplerclust", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, extractors=True):
        p.add_argument("--config", help="TOML or JSON config file (flags override it)")
        p.add_argument("--data", help="dataset file (CSV vector6400 or .npz cube)")
        p.add_argument("--layout", choices=LAYOUTS)
        p.add_argument("--synthetic", action="store_true", help="use the synthetic generator")
        p.add_argument("--n-subjects", type=int)
        p.add_argument("--reps", type=int, help="repetitions per activity")
        p.add_argument("--n-activities", type=int)
        p.add_argument("--noise", type=float)
        p.add_argument("--synth-seed", type=int)
        p.add_argument("--seed", type=int, help="root seed for every random stage")
        p.add_argument("--out", help="output directory")
        if extractors:
            p.add_argument("--extractor", dest="extractors", action="append",
                           help=f"feature extractor, repeatable ({', '.join(EXTRACTORS)})")
            p.add_argument("--k", type=_parse_k, help="number of clusters or 'auto'")
            p.add_argument("--plan", help="fixed local DCT patch as SIZE,INDEX (skips selection)")
            p.add_argument("--strategy", help="fixed entropy strategy (skips selection)")
            p.add_argument("--bins", type=int, help="entropy histogram bins")

    p = sub.add_parser("synth", help="write a synthetic dataset")
    common(p, extractors=False)
    p.add_argument("output_file", help="CSV (or .npz for the cube layout) to write")

    p = sub.add_parser("sweep", help="estimate the number of clusters")
    common(p)
    p.add_argument("--ks", help="candidate K values, e.g. 2..10 or 2,3,5")

    p = sub.add_parser("evaluate", help="leave-one-subject-out evaluation")
    common(p)
    p.add_argument("--clusterer", dest="clusterers", action="append",
                   help=f"clustering method, repeatable ({', '.join(METHODS)})")

    p = sub.add_parser("embed", help="2-D embedding export")
    common(p)
    p.add_argument("--method", choices=EMBED_METHODS)
    p.add_argument("--perplexity", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--neighbors", type=int)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            args.extractors = None
            cfg = resolve_config(args)
            cmd_synth(cfg, args.output_file)
        else:
            cfg = resolve_config(args)
            if args.command == "sweep":
                cmd_sweep(cfg)
            elif args.command == "evaluate":
                cmd_evaluate(cfg)
            else:
                cmd_embed(cfg)
    except ConfigError as exc:
        print(f"dopplerclust: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - any failure after validation is a runtime error
        print(f"dopplerclust: runtime failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
