"""End-to-end experiment harness.

One trial = draw data, split, train an ensemble, score the calibration
points (fresh model draw per point by default), calibrate, measure
coverage and mean normalized set size on held-out test points, then
evaluate every configured set-size bound from the training side of the
split.  Sweeps run the Cartesian product of the configured grids with
per-point derived seeds, write partial results per grid point (so an
interrupted sweep resumes without redoing or reusing streams), and emit a
records CSV with a fixed column schema plus an aggregated summary.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import (
    BoundQuery,
    SlackSpec,
    classification_set_size_bound,
    expected_set_size_bound,
    regression_set_size_bound,
)
from .calibration import (
    CalibrationSet,
    TrialDraw,
    conformal_quantile,
    predict_set,
)
from .cdf_models import training_cdf
from .dataio import CsvSchema, Dataset, generate_synthetic, load_csv, split_dataset
from .learners import (
    TrainConfig,
    ensemble_accuracy,
    train_classifier,
    train_regressor,
)
from .scores import (
    Discrete,
    Interval,
    gamma_closed_form,
    label_measure,
    lp_power_score,
    nc_score,
    zero_one_score,
)

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "RECORD_CSV_COLUMNS",
    "SweepError",
    "load_config",
    "config_from_dict",
    "run_trial",
    "run_sweep",
    "render_report",
    "make_score_trial_sampler",
]

RECORD_CSV_COLUMNS = (
    "seed",
    "n_tr",
    "n_cal",
    "alpha",
    "coverage",
    "coverage_se",
    "mean_size_norm",
    "size_se",
    "bound_thm1",
    "bound_cls_or_reg",
    "bound_cor1",
    "r_min",
    "slack_mode",
    "tail_mode",
    "clamped",
    "wall_ms",
)

WORKERS_ENV_VAR = "CPBOUNDS_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; config-file keys match these field names."""

    task: str
    data_source: dict
    train: TrainConfig
    n_tr: tuple
    n_cal: tuple
    alphas: tuple
    delta: float = 0.1
    mi_constant: float = 1.0
    slack_modes: tuple = ("beta",)
    tail_mode: str = "integral"
    n_trials: int = 20
    n_test: int = 2000
    seed: int = 0
    out_dir: str = "out"
    score_p: float = 2.0
    per_point_model_draws: bool = True

    def __post_init__(self):
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        if not self.n_tr or not self.n_cal or not self.alphas:
            raise ValueError("n_tr, n_cal and alphas grids must be nonempty")
        if any(not 0 < a < 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1)")
        if self.n_trials < 1 or self.n_test < 1:
            raise ValueError("n_trials and n_test must be positive")
        for mode in self.slack_modes:
            if mode not in ("oracle", "beta", "beta_mu"):
                raise ValueError(f"unknown slack mode {mode!r}")


@dataclass(frozen=True)
class TrialRecord:
    """One Monte Carlo trial outcome with full provenance.

    ``wall_ms`` is excluded from equality comparisons: it is the only field
    that varies between otherwise identical runs.
    """

    seed: int
    n_tr: int
    n_cal: int
    alpha: float
    coverage: float
    coverage_se: float
    mean_size_norm: float
    size_se: float
    bound_thm1: float
    bound_cls_or_reg: float
    bound_cor1: float
    r_min: float
    slack_mode: str
    tail_mode: str
    clamped: bool
    wall_ms: float = field(compare=False)
    train_digest: str = ""

    def __post_init__(self):
        for name in ("coverage", "mean_size_norm", "bound_thm1", "bound_cls_or_reg", "bound_cor1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def csv_row(self) -> list:
        return [str(getattr(self, c)) for c in RECORD_CSV_COLUMNS]

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in RECORD_CSV_COLUMNS}
        d["train_digest"] = self.train_digest
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        return cls(
            seed=int(d["seed"]),
            n_tr=int(d["n_tr"]),
            n_cal=int(d["n_cal"]),
            alpha=float(d["alpha"]),
            coverage=float(d["coverage"]),
            coverage_se=float(d["coverage_se"]),
            mean_size_norm=float(d["mean_size_norm"]),
            size_se=float(d["size_se"]),
            bound_thm1=float(d["bound_thm1"]),
            bound_cls_or_reg=float(d["bound_cls_or_reg"]),
            bound_cor1=float(d["bound_cor1"]),
            r_min=float(d["r_min"]),
            slack_mode=str(d["slack_mode"]),
            tail_mode=str(d["tail_mode"]),
            clamped=d["clamped"] in (True, "True", "true"),
            wall_ms=float(d["wall_ms"]),
            train_digest=str(d.get("train_digest", "")),
        )


class SweepError(RuntimeError):
    """Raised when one or more grid points of a sweep failed."""

    def __init__(self, failures: dict):
        self.failures = failures
        lines = "; ".join(f"{k}: {v}" for k, v in failures.items())
        super().__init__(f"{len(failures)} grid point(s) failed: {lines}")


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed config-file mapping."""
    doc = dict(doc)
    train_doc = dict(doc.pop("train", {}))
    if "hidden" in train_doc:
        train_doc["hidden"] = tuple(train_doc["hidden"])
    train = TrainConfig(**train_doc)
    for key in ("n_tr", "n_cal", "alphas", "slack_modes"):
        if key in doc:
            doc[key] = tuple(doc[key])
    return ExperimentConfig(train=train, **doc)


def load_config(path) -> ExperimentConfig:
    """Load an ExperimentConfig from a JSON or TOML file (by extension)."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    elif path.suffix == ".toml":
        try:
            import tomllib as toml_reader
        except ImportError:
            import tomli as toml_reader
        with open(path, "rb") as fh:
            doc = toml_reader.load(fh)
    else:
        raise ValueError(f"config must be .json or .toml, got {path.suffix!r}")
    return config_from_dict(doc)


def _load_source_dataset(cfg: ExperimentConfig, n_needed: int, data_seed: int) -> Dataset:
    src = cfg.data_source
    kind = src.get("kind", "synthetic")
    if kind == "synthetic":
        params = dict(src.get("params", {}))
        gen_kind = cfg.task
        return generate_synthetic(gen_kind, n_needed, data_seed, **params)
    if kind == "csv":
        space_doc = src["space"]
        if cfg.task == "classification":
            space = Discrete(int(space_doc["n_labels"]))
        else:
            space = Interval(float(space_doc["lo"]), float(space_doc["hi"]))
        schema = CsvSchema(
            feature_columns=tuple(src["feature_columns"]),
            target_column=src.get("target_column", "y"),
            space=space,
        )
        data = load_csv(src["path"], schema)
        if data.n < n_needed:
            raise ValueError(f"CSV has {data.n} rows, trial needs {n_needed}")
        return data
    raise ValueError(f"unknown data source kind {kind!r}")


def _grouped_predictions(members, member_idx: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Predict each row with its assigned ensemble member, batched per member."""
    out = None
    for j in np.unique(member_idx):
        rows = np.nonzero(member_idx == j)[0]
        preds = np.asarray(members[j](X[rows]))
        if out is None:
            out = np.empty(X.shape[0], dtype=preds.dtype)
        out[rows] = preds
    return out


def _cdf_digest(cdf) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(cdf.xs).tobytes())
    h.update(np.ascontiguousarray(cdf.ys).tobytes())
    return "cdf:" + h.hexdigest()[:12]


def run_trial(cfg: ExperimentConfig, point, trial_seed: int):
    """Run one full pipeline trial at a grid point.

    Returns one TrialRecord per configured slack mode (the trained pipeline
    and the empirical estimates are shared; only the bound evaluations
    differ).  Fully deterministic given (cfg, point, trial_seed) apart from
    the wall-time field.

    Raises
    ------
    RuntimeError
        On any stage failure, naming the stage and the grid point.
    """
    n_tr, n_cal, alpha = int(point[0]), int(point[1]), float(point[2])
    t0 = time.perf_counter()
    stage = "seed-derivation"
    try:
        streams = np.random.SeedSequence(trial_seed).generate_state(5)
        data_seed, split_seed, train_seed, eval_seed, draw_seed = (int(s) for s in streams)

        stage = "data"
        data = _load_source_dataset(cfg, n_tr + n_cal + cfg.n_test, data_seed)
        split = split_dataset(data, n_tr, n_cal, cfg.n_test, split_seed)
        space = data.space

        stage = "train"
        train_cfg = replace(cfg.train, seed=train_seed)
        if cfg.task == "classification":
            ensemble = train_classifier(split.train, train_cfg)
            spec = zero_one_score()
        else:
            ensemble = train_regressor(split.train, train_cfg)
            spec = lp_power_score(cfg.score_p, space)

        stage = "calibration-scores"
        rng = np.random.default_rng(eval_seed)
        members = ensemble.members
        if cfg.per_point_model_draws:
            cal_idx = rng.integers(0, len(members), size=n_cal)
        else:
            cal_idx = np.full(n_cal, int(rng.integers(0, len(members))))
        cal_preds = _grouped_predictions(members, cal_idx, split.cal.features)
        cal_scores = np.asarray(nc_score(spec, cal_preds, split.cal.targets))
        q = conformal_quantile(CalibrationSet(cal_scores, r_max=spec.r_max), alpha)

        stage = "test-evaluation"
        test_idx = rng.integers(0, len(members), size=cfg.n_test)
        test_preds = _grouped_predictions(members, test_idx, split.test.features)
        total = label_measure(space)
        covered = np.empty(cfg.n_test)
        sizes = np.empty(cfg.n_test)
        for i in range(cfg.n_test):
            pset = predict_set(spec, space, test_preds[i], q)
            covered[i] = 1.0 if pset.contains(split.test.targets[i]) else 0.0
            sizes[i] = pset.measure / total
        coverage = float(np.mean(covered))
        coverage_se = float(np.std(covered, ddof=1) / math.sqrt(cfg.n_test))
        mean_size = float(np.mean(sizes))
        size_se = float(np.std(sizes, ddof=1) / math.sqrt(cfg.n_test))

        stage = "training-cdf"
        avg_cdf = training_cdf(members, split.train.features, split.train.targets, spec, "averaged")
        draw_rng = np.random.default_rng(draw_seed)
        per_point = [members[int(j)] for j in draw_rng.integers(0, len(members), size=n_tr)]
        dbl_cdf = training_cdf(per_point, split.train.features, split.train.targets, spec, "doubly_empirical")
        if cfg.task == "classification":
            p_tr_hat = ensemble_accuracy(ensemble, split.train.features, split.train.targets)
            digest = repr(p_tr_hat)
        else:
            p_tr_hat = None
            digest = _cdf_digest(avg_cdf)
        gamma = gamma_closed_form(spec, space)

        stage = "bounds"
        records = []
        wall_ms = (time.perf_counter() - t0) * 1000.0
        for mode in cfg.slack_modes:
            slack = SlackSpec(mode=mode, c=cfg.mi_constant, delta=cfg.delta)
            thm1 = expected_set_size_bound(
                BoundQuery(
                    n_tr=n_tr,
                    n_cal=n_cal,
                    alpha=alpha,
                    cdf=avg_cdf,
                    gamma=gamma,
                    slack=slack,
                    r_max=spec.r_max,
                    tail_mode=cfg.tail_mode,
                )
            )
            if cfg.task == "classification":
                spec_bound = classification_set_size_bound(
                    p_tr_hat, space.n_labels, n_cal, alpha, slack, n_tr
                )
            else:
                spec_bound = regression_set_size_bound(
                    avg_cdf, cfg.score_p, space.lo, space.hi, n_cal, alpha, slack, n_tr, cfg.tail_mode
                )
            cor1_slack = slack if mode == "oracle" else SlackSpec("beta_mu", c=cfg.mi_constant, delta=cfg.delta)
            cor1 = expected_set_size_bound(
                BoundQuery(
                    n_tr=n_tr,
                    n_cal=n_cal,
                    alpha=alpha,
                    cdf=dbl_cdf,
                    gamma=gamma,
                    slack=cor1_slack,
                    r_max=spec.r_max,
                    tail_mode=cfg.tail_mode,
                )
            )
            records.append(
                TrialRecord(
                    seed=trial_seed,
                    n_tr=n_tr,
                    n_cal=n_cal,
                    alpha=alpha,
                    coverage=coverage,
                    coverage_se=coverage_se,
                    mean_size_norm=mean_size,
                    size_se=size_se,
                    bound_thm1=thm1.normalized_bound,
                    bound_cls_or_reg=spec_bound.normalized_bound,
                    bound_cor1=cor1.normalized_bound,
                    r_min=thm1.r_min,
                    slack_mode=mode,
                    tail_mode=cfg.tail_mode,
                    clamped=thm1.clamped,
                    wall_ms=wall_ms,
                    train_digest=digest,
                )
            )
        return tuple(records)
    except Exception as exc:
        raise RuntimeError(
            f"stage {stage!r} failed at point (n_tr={n_tr}, n_cal={n_cal}, alpha={alpha}), "
            f"trial seed {trial_seed}: {exc}"
        ) from exc


def _trial_seed(master_seed: int, i_tr: int, i_cal: int, i_alpha: int, trial: int) -> int:
    return int(np.random.SeedSequence((master_seed, i_tr, i_cal, i_alpha, trial)).generate_state(1)[0])


def _run_point(cfg: ExperimentConfig, indices) -> list:
    i_tr, i_cal, i_alpha = indices
    point = (cfg.n_tr[i_tr], cfg.n_cal[i_cal], cfg.alphas[i_alpha])
    records = []
    for t in range(cfg.n_trials):
        records.extend(run_trial(cfg, point, _trial_seed(cfg.seed, i_tr, i_cal, i_alpha, t)))
    return records


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _grid_indices(cfg: ExperimentConfig):
    for i_tr in range(len(cfg.n_tr)):
        for i_cal in range(len(cfg.n_cal)):
            for i_alpha in range(len(cfg.alphas)):
                yield (i_tr, i_cal, i_alpha)


def run_sweep(cfg: ExperimentConfig):
    """Run the full Cartesian grid of (n_tr, n_cal, alpha) x n_trials.

    Results for each grid point are written to
    ``out_dir/partial/g{i_tr}-{i_cal}-{i_alpha}.jsonl`` as they complete;
    on rerun, points whose partial file already exists are loaded instead
    of recomputed, so an interrupted sweep resumes with the remaining
    points only (per-trial seeds depend only on the master seed and the
    grid indices, never on execution order).  The final records CSV and a
    per-point summary CSV are written atomically.

    Returns ``(records, summary_rows)``.  Raises :class:`SweepError` after
    attempting every point if any of them failed.

    The environment variable ``CPBOUNDS_WORKERS`` (integer > 1) runs grid
    points on a process pool; output is identical to a serial run.
    """
    out_dir = Path(cfg.out_dir)
    partial_dir = out_dir / "partial"
    partial_dir.mkdir(parents=True, exist_ok=True)

    todo = []
    done: dict[tuple, list] = {}
    for indices in _grid_indices(cfg):
        pfile = partial_dir / "g{}-{}-{}.jsonl".format(*indices)
        if pfile.exists():
            lines = [ln for ln in pfile.read_text(encoding="utf-8").splitlines() if ln.strip()]
            expected = cfg.n_trials * len(cfg.slack_modes)
            if len(lines) == expected:
                done[indices] = [TrialRecord.from_dict(json.loads(ln)) for ln in lines]
                continue
        todo.append(indices)

    failures: dict[tuple, str] = {}
    workers = int(os.environ.get(WORKERS_ENV_VAR, "1") or "1")
    if workers > 1 and todo:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {idx: pool.submit(_run_point, cfg, idx) for idx in todo}
            for idx, fut in futures.items():
                try:
                    done[idx] = fut.result()
                except Exception as exc:
                    failures[idx] = str(exc)
    else:
        for idx in todo:
            try:
                done[idx] = _run_point(cfg, idx)
            except Exception as exc:
                failures[idx] = str(exc)

    for idx in todo:
        if idx in done:
            pfile = partial_dir / "g{}-{}-{}.jsonl".format(*idx)
            _atomic_write(pfile, "\n".join(json.dumps(r.as_dict()) for r in done[idx]) + "\n")

    records = []
    for indices in _grid_indices(cfg):
        if indices in done:
            records.extend(done[indices])

    header = ",".join(RECORD_CSV_COLUMNS)
    body = "\n".join(",".join(r.csv_row()) for r in records)
    _atomic_write(out_dir / "records.csv", header + "\n" + body + ("\n" if body else ""))
    summary = _summarize(records)
    _write_summary(out_dir / "summary.csv", summary)

    if failures:
        raise SweepError({f"g{i}-{j}-{k}": msg for (i, j, k), msg in failures.items()})
    return records, summary


_SUMMARY_COLUMNS = (
    "n_tr",
    "n_cal",
    "alpha",
    "slack_mode",
    "n_records",
    "coverage_mean",
    "coverage_sem",
    "size_mean",
    "size_sem",
    "bound_thm1_mean",
    "bound_cls_or_reg_mean",
    "bound_cor1_mean",
)


def _summarize(records: Sequence[TrialRecord]) -> list:
    groups: dict[tuple, list] = {}
    for r in records:
        groups.setdefault((r.n_tr, r.n_cal, r.alpha, r.slack_mode), []).append(r)
    rows = []
    for key in sorted(groups):
        rs = groups[key]
        cov = np.array([r.coverage for r in rs])
        size = np.array([r.mean_size_norm for r in rs])
        rows.append(
            {
                "n_tr": key[0],
                "n_cal": key[1],
                "alpha": key[2],
                "slack_mode": key[3],
                "n_records": len(rs),
                "coverage_mean": float(cov.mean()),
                "coverage_sem": float(cov.std(ddof=1) / math.sqrt(len(rs))) if len(rs) > 1 else 0.0,
                "size_mean": float(size.mean()),
                "size_sem": float(size.std(ddof=1) / math.sqrt(len(rs))) if len(rs) > 1 else 0.0,
                "bound_thm1_mean": float(np.mean([r.bound_thm1 for r in rs])),
                "bound_cls_or_reg_mean": float(np.mean([r.bound_cls_or_reg for r in rs])),
                "bound_cor1_mean": float(np.mean([r.bound_cor1 for r in rs])),
            }
        )
    return rows


def _write_summary(path: Path, rows: list) -> None:
    lines = [",".join(_SUMMARY_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in _SUMMARY_COLUMNS))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_records_csv(path) -> list:
    """Read a records CSV back into TrialRecords, validating the schema."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty records CSV") from None
        if tuple(header) != RECORD_CSV_COLUMNS:
            missing = set(RECORD_CSV_COLUMNS) - set(header)
            extra = set(header) - set(RECORD_CSV_COLUMNS)
            problem = ", ".join(sorted(missing | extra)) or "column order"
            raise ValueError(f"{path}: records CSV schema mismatch ({problem})")
        rows = [TrialRecord.from_dict(dict(zip(header, row))) for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: records CSV has no data rows")
    return rows


def render_report(records_csv, out_dir) -> dict:
    """Render SVG curves and a markdown summary from a records CSV.

    One figure: mean normalized set size (with standard-error bars) and the
    evaluated bound versus the reliability level 1 - alpha, one curve per
    (n_tr, n_cal) pair.  Rendering is deterministic: rerunning on the same
    CSV produces byte-identical SVG output.

    Returns a dict with the written file paths.
    """
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    records = read_records_csv(records_csv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(records_csv).stem

    groups: dict[tuple, dict[float, list]] = {}
    for r in records:
        groups.setdefault((r.n_tr, r.n_cal), {}).setdefault(r.alpha, []).append(r)

    plt.rcParams["svg.hashsalt"] = "cpbounds"
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for gi, key in enumerate(sorted(groups)):
        n_tr, n_cal = key
        by_alpha = groups[key]
        alphas = sorted(by_alpha)
        rel = [1.0 - a for a in alphas]
        size_mean, size_err, bound_mean = [], [], []
        for a in alphas:
            rs = by_alpha[a]
            sizes = np.array([r.mean_size_norm for r in rs])
            size_mean.append(float(sizes.mean()))
            if len(rs) > 1:
                size_err.append(float(sizes.std(ddof=1) / math.sqrt(len(rs))))
            else:
                size_err.append(float(np.mean([r.size_se for r in rs])))
            bound_mean.append(float(np.mean([r.bound_thm1 for r in rs])))
        color = colors[gi % len(colors)]
        ax.errorbar(
            rel, size_mean, yerr=size_err, color=color, marker="o", markersize=3,
            capsize=2, label=f"empirical n_tr={n_tr}, n_cal={n_cal}",
        )
        ax.plot(rel, bound_mean, color=color, linestyle="--", label=f"bound n_tr={n_tr}, n_cal={n_cal}")
    ax.set_xlabel("reliability level 1 - alpha")
    ax.set_ylabel("normalized set size")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    svg_path = out_dir / f"{stem}_set_size.svg"
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)

    md_path = out_dir / f"{stem}_report.md"
    summary = _summarize(records)
    lines = [
        "# Sweep report",
        "",
        f"Records: `{records_csv}` ({len(records)} rows)",
        "",
        f"![set size]({svg_path.name})",
        "",
        "| n_tr | n_cal | alpha | slack | coverage | size | bound |",
        "|---|---|---|---|---|---|---|",
    ]
    for row in summary:
        lines.append(
            "| {n_tr} | {n_cal} | {alpha:g} | {slack_mode} | {coverage_mean:.4f} "
            "| {size_mean:.4f} | {bound_thm1_mean:.4f} |".format(**row)
        )
    md_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"svg": str(svg_path), "markdown": str(md_path)}


def make_score_trial_sampler(ensemble, data_sampler, spec, space, n_cal: int):
    """Build a trial sampler for score-level Monte Carlo studies.

    Each trial draws ``n_cal + 1`` fresh points from
    ``data_sampler(rng, n)``, scores each with an independently drawn
    ensemble member, and uses the last point as the test point; the
    normalized set size is computed from the test prediction through
    :func:`cpbounds.calibration.predict_set` once the quantile is known.
    """
    total = label_measure(space)
    members = ensemble.members

    def sampler(rng: np.random.Generator) -> TrialDraw:
        X, y = data_sampler(rng, n_cal + 1)
        idx = rng.integers(0, len(members), size=n_cal + 1)
        preds = _grouped_predictions(members, idx, np.asarray(X))
        scores = np.asarray(nc_score(spec, preds, np.asarray(y)))
        test_pred = preds[-1]

        def normalized_size(q) -> float:
            return predict_set(spec, space, test_pred, q).measure / total

        return TrialDraw(cal_scores=scores[:-1], test_score=float(scores[-1]), normalized_size=normalized_size)

    return sampler
