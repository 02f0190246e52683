"""Command-line access to the engine with deterministic, golden-file-friendly output.

Exit codes: 0 success; 1 usage error; 2 input/parse error; 3 non-convergence
(explain-cf under --strict). Exactly one JSON document (or CSV with
--format csv) goes to stdout; logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, documents
from .attribution import (
    BaselineConfig,
    Scheme,
    attribute,
    resolve_baseline,
)
from .counterfactual import (
    DistanceConfig,
    SearchConfig,
    TargetSpec,
    find_counterfactual,
    render_contrast,
)
from .distill import BoxRegion, case_based, global_tree_surrogate
from .errors import ConfigError, ModelProbeError, SchemaViolation, SpecError
from .fidelity import (
    RegionSpec,
    classify_analogies,
    compare_schemes,
    normalized_l1,
    validity_profile,
)
from .models import Model, load_model
from .schema import Dataset

SCHEME_NAMES = {
    "gradient": "gradient",
    "edge": "edge_from_data",
    "shapley": "shapley_exact",
    "shapley-sampled": "shapley_sampled",
    "banzhaf": "banzhaf_exact",
    "banzhaf-sampled": "banzhaf_sampled",
    "lime": "lime_kernel",
}
SAMPLED_SCHEMES = {"shapley-sampled", "banzhaf-sampled", "lime"}
BASELINE_NAMES = {
    "zero": "zero",
    "reference": "reference",
    "median": "dataset_median",
    "mean": "dataset_mean",
}

BENCH_HEADER = "fixture,scheme,baseline,argmax_feature,divergence_vs_shapley,validity_radius"
BENCH_SCHEMES = ("edge", "shapley", "banzhaf", "lime")
BENCH_RADII = (0.5, 1.0, 2.0, 4.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1, not argparse's default 2
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="modelprobe", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        p.add_argument("--model", required=True, help="model-spec JSON file")
        p.add_argument("--input", required=True,
                       help="data point as JSON (array or {name: value}), or @file")
        if data:
            p.add_argument("--data", help="dataset CSV file")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("predict", help="score one data point")
    common(p)

    p = sub.add_parser("explain-attr", help="local linear attribution")
    common(p)
    p.add_argument("--scheme", required=True, choices=sorted(SCHEME_NAMES))
    p.add_argument("--baseline", choices=sorted(BASELINE_NAMES), default="zero")
    p.add_argument("--reference", help="reference baseline point (JSON or @file)")
    p.add_argument("--samples", type=int, help="samples / permutations for sampled modes")
    p.add_argument("--sigma", type=float, help="lime kernel width")
    p.add_argument("--seed", type=int)
    p.add_argument("--class-index", type=int, dest="class_index")

    p = sub.add_parser("explain-cf", help="counterfactual search")
    common(p)
    p.add_argument("--target", type=float, help="target score")
    p.add_argument("--target-class", dest="target_class", help="target class label")
    p.add_argument("--tolerance", type=float, default=0.01)
    p.add_argument("--distance", default="mad",
                   help="'l2', 'mad', or comma-separated per-feature weights")
    p.add_argument("--lock", help="comma-separated feature names that must not change")
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--max-evals", type=int, dest="max_evals", default=400)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when the search does not converge")

    p = sub.add_parser("fidelity", help="validity profile and analogy report")
    common(p)
    p.add_argument("--scheme", required=True, choices=sorted(SCHEME_NAMES))
    p.add_argument("--baseline", choices=sorted(BASELINE_NAMES), default="zero")
    p.add_argument("--reference")
    p.add_argument("--radii", required=True, help="comma-separated ascending radii")
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--class-index", type=int, dest="class_index")

    p = sub.add_parser("compare", help="cross-scheme divergence matrix")
    common(p)
    p.add_argument("--scheme", required=True,
                   help="comma-separated scheme names to compare")
    p.add_argument("--baseline", default="zero",
                   help="comma-separated baseline names")
    p.add_argument("--reference")
    p.add_argument("--samples", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--class-index", type=int, dest="class_index")

    p = sub.add_parser("casebase", help="nearest training cases")
    common(p)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--metric", choices=["score_space", "input_mad", "blended"],
                   default="input_mad")
    p.add_argument("--alpha", type=float, default=0.5)

    p = sub.add_parser("tree-surrogate", help="global decision-tree distillation")
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--log-dir", dest="log_dir", default="./sessions")
    p.add_argument("--ui-dir", dest="ui_dir")

    p = sub.add_parser("bench", help="scheme x baseline sweep over shipped fixtures")
    p.add_argument("--seed", type=int)
    p.add_argument("--fixtures", help="directory with an index.json fixture suite")
    p.add_argument("--samples", type=int, default=256)
    return parser


# ---------------------------------------------------------------------------
# input plumbing
# ---------------------------------------------------------------------------

def _read_text(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise SpecError(f"{what} file not found: {path}", locus=path)
    return p.read_text()


def _parse_json_arg(raw: str, what: str):
    text = _read_text(raw[1:], what) if raw.startswith("@") else raw
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON for {what}: {exc.msg}",
                        locus=f"line {exc.lineno} column {exc.colno}") from None


def _load_model_arg(args) -> Model:
    return load_model(_read_text(args.model, "model"))


def _load_dataset_arg(args, model: Model) -> Dataset | None:
    path = getattr(args, "data", None)
    if not path:
        return None
    return Dataset.from_csv(model.schema, _read_text(path, "dataset"))


def _point_arg(args, model: Model) -> np.ndarray:
    return model.schema.point(_parse_json_arg(args.input, "--input"))


def _require_seed(args, why: str) -> int:
    if args.seed is None:
        raise UsageError(f"--seed is required {why}")
    return args.seed


def _scheme_arg(name: str, args, dataset) -> Scheme:
    kind = SCHEME_NAMES[name]
    seed = args.seed
    n = getattr(args, "samples", None)
    if name in SAMPLED_SCHEMES:
        seed = _require_seed(args, f"for the sampled scheme {name!r}")
        if n is None:
            raise UsageError(f"--samples is required for scheme {name!r}")
    return Scheme(kind=kind, n=n, sigma=getattr(args, "sigma", None), seed=seed)


def _baseline_arg(name: str, args, model, dataset) -> BaselineConfig:
    strategy = BASELINE_NAMES[name]
    reference = None
    if strategy == "reference":
        if not getattr(args, "reference", None):
            raise UsageError("--reference is required for the reference baseline")
        reference = _parse_json_arg(args.reference, "--reference")
        reference = model.schema.point(reference)
    return resolve_baseline(model.schema, strategy, reference=reference, dataset=dataset)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_predict(args) -> tuple[str, int]:
    if args.format != "json":
        raise UsageError("predict only supports --format json")
    model = _load_model_arg(args)
    point = _point_arg(args, model)
    doc = documents.prediction_document(model, point, model.score(point))
    return documents.dumps(doc), 0


def cmd_explain_attr(args) -> tuple[str, int]:
    if args.format != "json":
        raise UsageError("explain-attr only supports --format json")
    model = _load_model_arg(args)
    dataset = _load_dataset_arg(args, model)
    point = _point_arg(args, model)
    scheme = _scheme_arg(args.scheme, args, dataset)
    baseline = None
    if scheme.kind != "gradient":
        baseline = _baseline_arg(args.baseline, args, model, dataset)
    explanation = attribute(model, point, scheme, baseline, class_index=args.class_index)
    return documents.dumps(explanation.to_document(seed=args.seed)), 0


def cmd_explain_cf(args) -> tuple[str, int]:
    if args.format != "json":
        raise UsageError("explain-cf only supports --format json")
    model = _load_model_arg(args)
    dataset = _load_dataset_arg(args, model)
    point = _point_arg(args, model)
    seed = _require_seed(args, "for explain-cf (restart perturbations are seeded)")
    if (args.target is None) == (args.target_class is None):
        raise UsageError("set exactly one of --target / --target-class")
    target = TargetSpec(score=args.target, target_class=args.target_class,
                        tolerance=args.tolerance)
    locked = []
    if args.lock:
        locked = [model.schema.index_of(n.strip()) for n in args.lock.split(",") if n.strip()]
    if args.distance == "l2":
        distance = DistanceConfig.l2(model.schema, locked)
    elif args.distance == "mad":
        if dataset is not None:
            distance = DistanceConfig.mad_weighted(dataset, locked)
        else:
            print("note: --distance mad without --data uses unit weights", file=sys.stderr)
            distance = DistanceConfig.unit_l1(model.schema, locked)
    else:
        weights = [float(w) for w in args.distance.split(",")]
        distance = DistanceConfig.custom(weights, locked)
    search = SearchConfig(seed=seed, restarts=args.restarts, max_inner_evals=args.max_evals)
    result = find_counterfactual(model, point, target, distance, search)
    statement = render_contrast(model, point, result)
    doc = documents.counterfactual_document(result, statement, target, distance, search, seed)
    code = 3 if (args.strict and not result.converged) else 0
    return documents.dumps(doc), code


def cmd_fidelity(args) -> tuple[str, int]:
    model = _load_model_arg(args)
    dataset = _load_dataset_arg(args, model)
    point = _point_arg(args, model)
    seed = _require_seed(args, "for fidelity sampling")
    radii = [float(r) for r in args.radii.split(",")]
    scheme = _scheme_arg(args.scheme, args, dataset)
    baseline = None
    if scheme.kind != "gradient":
        baseline = _baseline_arg(args.baseline, args, model, dataset)
    explanation = attribute(model, point, scheme, baseline, class_index=args.class_index)
    profile = validity_profile(
        model, explanation, point, radii, args.threshold, args.samples, seed,
        dataset=dataset,
    )
    if args.format == "csv":
        return profile.to_csv(), 0
    scales = dataset.effective_scale() if dataset is not None else None
    region = RegionSpec.around(model.schema, point, radii[-1], args.samples, seed,
                               scales=scales)
    report = classify_analogies(model, explanation, region)
    doc = documents.fidelity_document(
        profile, report, args.samples, seed,
        config_echo={"radii": radii, "threshold": args.threshold},
    )
    return documents.dumps(doc), 0


def cmd_compare(args) -> tuple[str, int]:
    if args.format != "json":
        raise UsageError("compare only supports --format json")
    model = _load_model_arg(args)
    dataset = _load_dataset_arg(args, model)
    point = _point_arg(args, model)
    scheme_names = [s.strip() for s in args.scheme.split(",") if s.strip()]
    baseline_names = [b.strip() for b in args.baseline.split(",") if b.strip()]
    unknown = [s for s in scheme_names if s not in SCHEME_NAMES]
    unknown += [b for b in baseline_names if b not in BASELINE_NAMES]
    if unknown:
        raise UsageError(f"unknown scheme/baseline names: {unknown}")
    combos = []
    for s in scheme_names:
        scheme = _scheme_arg(s, args, dataset)
        if scheme.kind == "gradient":
            combos.append((scheme, None))
            continue
        for b in baseline_names:
            combos.append((scheme, _baseline_arg(b, args, model, dataset)))
    dm = compare_schemes(model, point, combos, class_index=args.class_index)
    doc = dm.to_document()
    doc["engine_version"] = __version__
    doc["seed"] = args.seed
    return documents.dumps(doc), 0


def cmd_casebase(args) -> tuple[str, int]:
    if args.format != "json":
        raise UsageError("casebase only supports --format json")
    model = _load_model_arg(args)
    dataset = _load_dataset_arg(args, model)
    if dataset is None:
        raise UsageError("casebase requires --data")
    point = _point_arg(args, model)
    out = case_based(model, dataset, point, k=args.k, metric=args.metric, alpha=args.alpha)
    doc = out.to_document(model.schema)
    doc["engine_version"] = __version__
    return documents.dumps(doc), 0


def cmd_tree_surrogate(args) -> tuple[str, int]:
    model = load_model(_read_text(args.model, "model"))
    seed = _require_seed(args, "for tree-surrogate sampling")
    region = BoxRegion.from_schema(model.schema)
    out = global_tree_surrogate(model, region, max_depth=args.depth,
                                n_samples=args.samples, seed=seed)
    doc = out.to_document()
    doc["engine_version"] = __version__
    doc["seed"] = seed
    return documents.dumps(doc), 0


def cmd_serve(args) -> tuple[str, int]:
    from .service import run

    run(bind=args.bind, log_dir=args.log_dir, ui_dir=args.ui_dir)
    return "", 0


def _bench_suite(fixtures_dir: str | None):
    """(name, model, anchor, reference, dataset) tuples in deterministic order."""
    from . import fixtures as shipped

    if fixtures_dir is None:
        names = shipped.fixture_names()
        for name in names:
            info = shipped.fixture_info(name)
            model = shipped.load_fixture(name)
            yield (name, model, model.schema.point(info["anchor"]),
                   model.schema.point(info["reference"]), shipped.fixture_dataset(name))
        return
    base = Path(fixtures_dir)
    index_path = base / "index.json"
    if not index_path.is_file():
        raise SpecError(f"fixture index not found: {index_path}", locus=str(index_path))
    index = json.loads(index_path.read_text())
    for name in sorted(index):
        info = index[name]
        model = load_model((base / info["model"]).read_text())
        dataset = None
        if "dataset" in info:
            dataset = Dataset.from_csv(model.schema, (base / info["dataset"]).read_text())
        yield (name, model, model.schema.point(info["anchor"]),
               model.schema.point(info["reference"]), dataset)


def cmd_bench(args) -> tuple[str, int]:
    seed = _require_seed(args, "for bench")
    lines = [BENCH_HEADER]
    for name, model, anchor, reference, dataset in _bench_suite(args.fixtures):
        baselines = [
            ("zero", BaselineConfig.zero(model.schema)),
            ("reference", BaselineConfig.reference(model.schema, reference)),
        ]
        scales = dataset.effective_scale() if dataset is not None else None
        for bname, baseline in baselines:
            reference_expl = attribute(
                model, anchor, Scheme(kind="shapley_exact"), baseline
            )
            for sname in BENCH_SCHEMES:
                kind = SCHEME_NAMES[sname]
                scheme = Scheme(kind=kind, n=args.samples, sigma=None, seed=seed)
                explanation = attribute(model, anchor, scheme, baseline)
                divergence = normalized_l1(explanation.weights, reference_expl.weights)
                argmax = model.schema.features[
                    int(np.argmax(np.abs(explanation.weights)))
                ].name
                profile = validity_profile(
                    model, explanation, anchor, list(BENCH_RADII), 0.95,
                    args.samples, seed, scales=scales,
                )
                vr = "" if profile.validity_radius is None else repr(profile.validity_radius)
                lines.append(
                    f"{name},{sname},{bname},{argmax},{divergence!r},{vr}"
                )
    return "\n".join(lines) + "\n", 0


DISPATCH = {
    "predict": cmd_predict,
    "explain-attr": cmd_explain_attr,
    "explain-cf": cmd_explain_cf,
    "fidelity": cmd_fidelity,
    "compare": cmd_compare,
    "casebase": cmd_casebase,
    "tree-surrogate": cmd_tree_surrogate,
    "serve": cmd_serve,
    "bench": cmd_bench,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        output, code = DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ModelProbeError as exc:
        locus = getattr(exc, "locus", None) or getattr(exc, "feature", None)
        doc = {"error": {
            "code": "config" if isinstance(exc, ConfigError) else "input",
            "message": str(exc),
            "locus": locus,
        }}
        sys.stdout.write(documents.dumps(doc))
        return 2
    sys.stdout.write(output)
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
