"""Config-driven experiment harness.

One JSON document describes a whole run: where the data comes from (a CSV
plus schema, or a synthetic-corpus recipe), which segment to model, how to
split/resample, the model matrix, and the threshold sweep. ``run_experiment``
executes it and writes every artifact (metrics CSV, per-model ROC/score CSVs,
persisted models, a combined ROC figure, a rendered table, and a manifest)
into the output directory. All randomness flows from one master seed through
labelled derived seeds, so adding a model never perturbs the others.
"""

import dataclasses
import hashlib
import json
import re
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, dataset, features, report
from .dataset import Dataset, Schema, load_csv, save_csv, segment, summarize
from .ensemble import StackedClassifier, VotingClassifier
from .errors import AllModelsFailed, InvalidConfig
from .evaluation import (
    MetricsRow,
    auc,
    grid_search,
    roc_curve,
    stratified_kfold,
    sweep_thresholds,
    write_metrics_csv,
    write_roc_csv,
    write_scores_csv,
    _apply_resample,
)
from .features import (
    SynthConfig,
    derive_age,
    fit_encoder,
    generate_births,
    generate_synthetic,
    join_births,
    load_births_csv,
    stratified_split,
    transform,
)
from .imbalance import (
    AdaBoostClassifier,
    BoostConfig,
    EasyEnsembleClassifier,
    ResampleSpec,
    RusBoostClassifier,
)
from .models import (
    DecisionTree,
    ForestConfig,
    GbtConfig,
    GradientBoosting,
    LogisticRegression,
    LogRegConfig,
    Mlp,
    MlpConfig,
    RandomForest,
    TreeConfig,
)
from .models.persist import feature_space_hash, save_model
from .seeding import derive_seed

DEFAULT_THRESHOLD_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))

SEGMENTS = ("bd1", "bd2")
_SEGMENT_KIND = {"bd1": "child", "bd2": "pregnant"}

MODEL_KINDS = (
    "logreg",
    "tree",
    "forest",
    "gbt",
    "mlp",
    "adaboost",
    "rusboost",
    "easy_ensemble",
    "voting",
    "stacking",
)

_NAME_RE = re.compile(r"[A-Za-z0-9_\-]+")


def _tree_config(d: dict) -> TreeConfig:
    return TreeConfig(**d)


def _boost_config(d: dict) -> BoostConfig:
    d = dict(d)
    base_tree = _tree_config(d.pop("base_tree", {"max_depth": 1}))
    return BoostConfig(base_tree=base_tree, **d)


def build_model(kind: str, config: dict):
    """Instantiate an unfitted model from its kind and a plain config dict
    (the same shapes the JSON config uses). Ensembles nest member specs as
    {"kind": ..., "config": {...}} dictionaries."""
    config = dict(config or {})
    if kind == "logreg":
        return LogisticRegression(LogRegConfig(**config))
    if kind == "tree":
        return DecisionTree(_tree_config(config))
    if kind == "forest":
        tree = _tree_config(config.pop("tree", {}))
        return RandomForest(ForestConfig(tree=tree, **config))
    if kind == "gbt":
        return GradientBoosting(GbtConfig(**config))
    if kind == "mlp":
        return Mlp(MlpConfig(**config))
    if kind == "adaboost":
        return AdaBoostClassifier(_boost_config(config))
    if kind == "rusboost":
        target_ratio = config.pop("target_ratio", 1.0)
        return RusBoostClassifier(_boost_config(config), target_ratio=target_ratio)
    if kind == "easy_ensemble":
        n_subsets = config.pop("n_subsets", 10)
        return EasyEnsembleClassifier(_boost_config(config), n_subsets=n_subsets)
    if kind == "voting":
        members = config.pop("members", [])
        if config:
            raise InvalidConfig(f"voting config only takes 'members', got {sorted(config)}")
        return VotingClassifier(
            [build_model(m.get("kind"), m.get("config", {})) for m in members]
        )
    if kind == "stacking":
        bases = config.pop("bases", [])
        meta = config.pop("meta", {})
        n_folds = config.pop("n_folds", 5)
        if config:
            raise InvalidConfig(
                f"stacking config takes 'bases', 'meta' and 'n_folds', got extra {sorted(config)}"
            )
        return StackedClassifier(
            [build_model(m.get("kind"), m.get("config", {})) for m in bases],
            meta_config=LogRegConfig(**meta),
            n_folds=n_folds,
        )
    raise InvalidConfig(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


@dataclass
class ModelEntry:
    """One cell of the model matrix: a unique name (used in file names and
    the results table), the model kind/config, a display label for the
    imbalance adjustments, and an optional resample override."""

    name: str
    kind: str
    config: dict = field(default_factory=dict)
    adjustments: str = ""
    resample: ResampleSpec | None = None

    def __post_init__(self):
        if not _NAME_RE.fullmatch(self.name):
            raise InvalidConfig(
                f"model name {self.name!r} must match [A-Za-z0-9_-]+ (it names files)"
            )
        if self.kind not in MODEL_KINDS:
            raise InvalidConfig(f"unknown model kind {self.kind!r}")


@dataclass
class ExperimentConfig:
    """Everything one experiment run needs, mirroring the JSON layout."""

    seed: int
    segment: str
    out_dir: str
    models: list[ModelEntry]
    synth: SynthConfig | None = None
    csv_path: str | None = None
    schema_path: str | None = None
    births_path: str | None = None
    age: tuple[str, str] | None = None  # (birth column, reference column)
    test_fraction: float = 0.2
    split_seed: int | None = None
    resample: ResampleSpec = field(default_factory=ResampleSpec)
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLD_GRID
    objective: str = "max_f1"
    precision_floor: float | None = None
    cv_folds: int = 5
    grids: dict[str, dict] = field(default_factory=dict)
    raw: dict | None = None  # original JSON document, for the digest

    def __post_init__(self):
        if self.segment not in SEGMENTS:
            raise InvalidConfig(f"segment must be one of {SEGMENTS}, got {self.segment!r}")
        if not self.models:
            raise InvalidConfig("experiment needs at least one model")
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise InvalidConfig(f"model names must be unique, got {names}")
        has_synth = self.synth is not None
        has_csv = self.csv_path is not None or self.schema_path is not None
        if has_synth == has_csv:
            raise InvalidConfig("data must be either a synth recipe or a csv+schema pair")
        if has_csv and (self.csv_path is None or self.schema_path is None):
            raise InvalidConfig("csv data needs both 'csv' and 'schema' paths")
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidConfig("test_fraction must be in (0,1)")
        if self.cv_folds < 2:
            raise InvalidConfig("cv n_folds must be >= 2")
        unknown = set(self.grids) - set(names)
        if unknown:
            raise InvalidConfig(f"grid entries for unknown models: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        """Build a config from a parsed JSON document. Relative data paths
        are resolved against ``base_dir`` (the config file's directory)."""
        if not isinstance(doc, dict):
            raise InvalidConfig("experiment config must be a JSON object")
        known = {
            "seed", "segment", "out", "data", "births", "age",
            "split", "resample", "thresholds", "cv", "models", "grid",
        }
        unknown = set(doc) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in doc:
            raise InvalidConfig("config must set a master 'seed' (reproducibility)")
        base = Path(base_dir)

        def resolve(p: str) -> str:
            return str(p) if Path(p).is_absolute() else str(base / p)

        data = doc.get("data")
        if not isinstance(data, dict):
            raise InvalidConfig("config must set 'data' to a synth recipe or csv+schema pair")
        synth = csv_path = schema_path = None
        if "synth" in data and ("csv" in data or "schema" in data):
            raise InvalidConfig("data must be either a synth recipe or a csv+schema pair")
        if "synth" in data:
            synth = SynthConfig(**data["synth"])
        else:
            csv_path = resolve(data["csv"]) if "csv" in data else None
            schema_path = resolve(data["schema"]) if "schema" in data else None

        split = doc.get("split", {})
        age = doc.get("age")
        if age is not None:
            age = (age["birth_column"], age["reference_column"])
        thresholds = doc.get("thresholds", {})
        models = [
            ModelEntry(
                name=m.get("name", m.get("kind", "")),
                kind=m.get("kind", ""),
                config=m.get("config", {}),
                adjustments=m.get("adjustments", ""),
                resample=ResampleSpec(**m["resample"]) if "resample" in m else None,
            )
            for m in doc.get("models", [])
        ]
        return cls(
            seed=int(doc["seed"]),
            segment=doc.get("segment", ""),
            out_dir=resolve(doc["out"]) if "out" in doc else ".",
            models=models,
            synth=synth,
            csv_path=csv_path,
            schema_path=schema_path,
            births_path=resolve(doc["births"]) if "births" in doc else None,
            age=age,
            test_fraction=float(split.get("test_fraction", 0.2)),
            split_seed=split.get("seed"),
            resample=ResampleSpec(**doc["resample"]) if "resample" in doc else ResampleSpec(),
            thresholds=tuple(thresholds.get("grid", DEFAULT_THRESHOLD_GRID)),
            objective=thresholds.get("objective", "max_f1"),
            precision_floor=thresholds.get("precision_floor"),
            cv_folds=int(doc.get("cv", {}).get("n_folds", 5)),
            grids=doc.get("grid", {}),
            raw=doc,
        )

    def digest(self) -> str:
        """SHA-256 of the canonical JSON serialization; stable under
        key reordering and whitespace changes."""
        doc = self.raw if self.raw is not None else _config_as_doc(self)
        canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _config_as_doc(cfg: ExperimentConfig) -> dict:
    doc: dict = {
        "seed": cfg.seed,
        "segment": cfg.segment,
        "out": cfg.out_dir,
        "split": {"test_fraction": cfg.test_fraction},
        "resample": dataclasses.asdict(cfg.resample),
        "thresholds": {"grid": list(cfg.thresholds), "objective": cfg.objective},
        "cv": {"n_folds": cfg.cv_folds},
        "models": [
            {
                "name": m.name,
                "kind": m.kind,
                "config": m.config,
                "adjustments": m.adjustments,
                **({"resample": dataclasses.asdict(m.resample)} if m.resample else {}),
            }
            for m in cfg.models
        ],
    }
    if cfg.synth is not None:
        doc["data"] = {"synth": dataclasses.asdict(cfg.synth)}
    else:
        doc["data"] = {"csv": cfg.csv_path, "schema": cfg.schema_path}
    if cfg.births_path:
        doc["births"] = cfg.births_path
    if cfg.age:
        doc["age"] = {"birth_column": cfg.age[0], "reference_column": cfg.age[1]}
    if cfg.precision_floor is not None:
        doc["thresholds"]["precision_floor"] = cfg.precision_floor
    if cfg.split_seed is not None:
        doc["split"]["seed"] = cfg.split_seed
    if cfg.grids:
        doc["grid"] = cfg.grids
    return doc


@dataclass
class RunManifest:
    """Everything needed to audit a run: what config produced it, which
    files it wrote, the per-model results, and any data-quality warnings
    or model failures. Timestamps are the only non-deterministic bytes."""

    config_digest: str
    version: str
    segment: str
    started_at: str
    finished_at: str
    outputs: dict[str, str]
    results: dict[str, dict]
    warnings: list[str]
    failures: list[dict]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, ensure_ascii=False, sort_keys=True)
            fh.write("\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class PreparedData:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    feature_names: list[str]
    warnings: list[str]


def _load_full_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.synth is not None:
        return generate_synthetic(cfg.synth)
    schema = Schema.load(cfg.schema_path)
    return load_csv(cfg.csv_path, schema)


def prepare_data(cfg: ExperimentConfig) -> PreparedData:
    """Load → segment → drop inapplicable columns → optional age/births
    derivations → stratified split → encode with train-only statistics."""
    captured: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        full = _load_full_dataset(cfg)
        bd1, bd2 = segment(full)
        ds = bd1 if cfg.segment == "bd1" else bd2
        ds = dataset.drop_inapplicable(ds, _SEGMENT_KIND[cfg.segment])
        if cfg.age is not None:
            ds = derive_age(ds, cfg.age[0], cfg.age[1])
        if cfg.births_path is not None:
            ds = join_births(ds, load_births_csv(cfg.births_path))
        split_seed = (
            cfg.split_seed if cfg.split_seed is not None else derive_seed(cfg.seed, "split")
        )
        split = stratified_split(ds.labels, cfg.test_fraction, split_seed)
        train = ds.subset(split.train)
        test = ds.subset(split.test)
        encoder = fit_encoder(train)
        X_train = transform(encoder, train)
        X_test = transform(encoder, test)
    seen = set()
    for w in caught:
        text = f"{w.category.__name__}: {w.message}"
        if text not in seen:
            seen.add(text)
            captured.append(text)
    return PreparedData(
        X_train.values,
        train.labels.astype(np.float64),
        X_test.values,
        test.labels.astype(np.float64),
        list(X_train.column_names),
        captured,
    )


class _StepFailure(Exception):
    """Internal wrapper: which pipeline step a model failed in."""

    def __init__(self, step: str, cause: Exception):
        super().__init__(str(cause))
        self.step = step
        self.cause = cause


def _run_one_model(cfg: ExperimentConfig, entry: ModelEntry, data: PreparedData, out: Path):
    """Fit/evaluate one model matrix cell and write its artifacts.
    Returns (metric rows incl. the trailing best row, ROC curve, result
    summary, output file map)."""
    model_seed = derive_seed(cfg.seed, cfg.segment, entry.name)
    spec = entry.resample if entry.resample is not None else cfg.resample
    config = dict(entry.config)
    step = "build"
    try:
        step = "grid_search"
        grid = cfg.grids.get(entry.name)
        if grid:
            plan = stratified_kfold(data.y_train, cfg.cv_folds, derive_seed(model_seed, "cv"))
            found = grid_search(
                lambda **params: build_model(entry.kind, {**config, **params}),
                grid,
                data.X_train,
                data.y_train,
                plan,
                resample=spec,
                seed=derive_seed(model_seed, "grid"),
            )
            config.update(found.best_params)

        step = "resample"
        X_fit, y_fit = _apply_resample(
            data.X_train, data.y_train, spec, derive_seed(model_seed, "resample")
        )

        step = "fit"
        model = build_model(entry.kind, config)
        model.fit(X_fit, y_fit, seed=derive_seed(model_seed, "fit"))

        step = "score"
        scores = model.score(data.X_test)
        curve = roc_curve(data.y_test, scores)
        test_auc = auc(curve)

        step = "sweep"
        sweep = sweep_thresholds(
            data.y_test,
            scores,
            cfg.thresholds,
            objective=cfg.objective,
            precision_floor=cfg.precision_floor,
            algorithm=entry.name,
            adjustments=entry.adjustments,
        )
        best_row = next(r for r in sweep.rows if r.threshold == sweep.best_threshold)

        step = "outputs"
        files = {
            f"roc_{entry.name}": f"roc_{entry.name}.csv",
            f"scores_{entry.name}": f"scores_{entry.name}.csv",
            f"model_{entry.name}": f"model_{entry.name}.json",
        }
        write_roc_csv(curve, out / files[f"roc_{entry.name}"])
        write_scores_csv(data.y_test, scores, out / files[f"scores_{entry.name}"])
        save_model(
            model,
            out / files[f"model_{entry.name}"],
            schema_hash=feature_space_hash(data.feature_names),
            seed=model_seed,
        )
    except Exception as exc:
        raise _StepFailure(step, exc) from exc
    result = {
        "kind": entry.kind,
        "adjustments": entry.adjustments,
        "auc": test_auc,
        "best_threshold": sweep.best_threshold,
        "best_f1": best_row.f1,
        "floor_met": sweep.floor_met,
        **({"grid_best_params": config} if grid else {}),
    }
    return sweep.rows + [best_row], curve, result, files


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute the full model matrix and write every artifact plus the
    manifest into ``cfg.out_dir``. Individual model failures are recorded
    and skipped; if every model fails, AllModelsFailed is raised after the
    manifest is written."""
    started = _now()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = prepare_data(cfg)

    all_rows: list[MetricsRow] = []
    curves = []
    results: dict[str, dict] = {}
    outputs: dict[str, str] = {}
    failures: list[dict] = []
    best_rows: list[MetricsRow] = []
    for entry in cfg.models:
        try:
            rows, curve, result, files = _run_one_model(cfg, entry, data, out)
        except _StepFailure as failure:  # fail fast per model, keep the rest going
            failures.append(
                {
                    "model": entry.name,
                    "step": failure.step,
                    "error": f"{type(failure.cause).__name__}: {failure.cause}",
                }
            )
            continue
        all_rows.extend(rows)
        best_rows.append(rows[-1])
        curves.append((entry.name, curve))
        results[entry.name] = result
        outputs.update(files)

    if all_rows:
        metrics_name = f"metrics_{cfg.segment}.csv"
        write_metrics_csv(all_rows, out / metrics_name)
        outputs["metrics"] = metrics_name

        # the rendered table shows one line per model: its best-threshold row
        table = report.render_table([(cfg.segment, best_rows)])
        table_name = f"table_{cfg.segment}.txt"
        (out / table_name).write_text(table, encoding="utf-8")
        outputs["table"] = table_name

        figure_name = f"roc_{cfg.segment}.png"
        report.save_roc_figure(
            curves, out / figure_name, title=f"Curvas ROC ({cfg.segment})"
        )
        outputs["roc_figure"] = figure_name

    manifest = RunManifest(
        config_digest=cfg.digest(),
        version=__version__,
        segment=cfg.segment,
        started_at=started,
        finished_at=_now(),
        outputs=outputs,
        results=results,
        warnings=data.warnings,
        failures=failures,
    )
    manifest.save(out / "manifest.json")
    if not results:
        raise AllModelsFailed(
            f"all {len(cfg.models)} models failed; see {out / 'manifest.json'}"
        )
    return manifest


def run_synth(doc: dict, out_dir: str | Path, seed_override: int | None = None) -> dict[str, str]:
    """Generate a synthetic corpus: data CSV + schema JSON + births CSV.
    Deterministic per config; returns the map of written files."""
    if not isinstance(doc, dict) or "synth" not in doc:
        raise InvalidConfig("synth config must contain a 'synth' recipe object")
    recipe = dict(doc["synth"])
    if seed_override is not None:
        recipe["seed"] = seed_override
    cfg = SynthConfig(**recipe)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = generate_synthetic(cfg)
    save_csv(ds, out / "data.csv")
    ds.schema.save(out / "schema.json")
    births = generate_births(cfg.seed)
    with open(out / "births.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("department,births\n")
        for name in sorted(births):
            fh.write(f"{name},{repr(float(births[name]))}\n")
    counts = summarize(ds)
    return {
        "data": str(out / "data.csv"),
        "schema": str(out / "schema.json"),
        "births": str(out / "births.csv"),
        "typology_counts": {str(k): v for k, v in counts.items()},
    }
