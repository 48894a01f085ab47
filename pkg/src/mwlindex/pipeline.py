"""Pipeline stages and their on-disk layout.

Every stage reads the files written by the stage before it under the output
directory and writes its own::

    denoised/     sub{NN}_{lo|hi}.npz, removals.json, removals_summary.csv
    labels.csv    subject, condition, rating, class
    indexes.csv   one row per (subject, condition, index, window)
    features/     {index}.csv, extraction_report.json, catalog.json
    selection/    {index}.json, {index}_corr.csv
    selected/     {index}.csv
    synth/        {index}.csv, quality.json
    results/      metrics_long.csv, summary.json, resamples.json
    models/       {dataset}_{index}_{learner}.json
    report/       performance.csv, learner_comparison.csv, ratio_vs_constituent.csv,
                  ratio_vs_ratio.csv, density.csv, quality_report.json

Numeric files contain no timestamps, so identical inputs and seed give
identical bytes.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .bandindex import compute_indexes, read_index_csv, write_index_csv
from .config import PipelineConfig
from .dataio import (DatasetManifest, load_dataset, load_feature_matrix, load_recording_npz, map_rating_to_class,
                     save_feature_matrix, save_recording_npz)
from .featex import FeatureCatalog, extract_all, full_catalog
from .learn import METRIC_NAMES, Family, ModelSpec, train
from .montecarlo import (ExperimentConfig, ExperimentResult, accuracy_evaluator, compare_indexes, density_series,
                         read_long_csv, run_experiment, write_long_csv, write_rows)
from .preprocess import denoise
from .records import Condition, FeatureMatrix
from .select import select_features
from .synth import matrix_quality, save_quality, synthesize_matrix

log = logging.getLogger(__name__)

STAGES = ("denoise", "indexes", "features", "select", "synth", "train", "report")


class MissingInputError(FileNotFoundError):
    """A stage input is absent; the message names the file and the stage that writes it."""


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MissingInputError(f"missing input {path} (run the '{producer}' stage first)")
    return path


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _rec_name(subject_id: int, condition: Condition) -> str:
    return f"sub{subject_id:02d}_{'lo' if condition is Condition.REST else 'hi'}"


def _cond_code(condition: Condition) -> int:
    return 0 if condition is Condition.REST else 1


def run_denoise(cfg: PipelineConfig) -> None:
    if cfg.manifest is None:
        raise MissingInputError("missing input: no manifest given (use --manifest or the config 'manifest' field)")
    out = Path(cfg.out)
    manifest = DatasetManifest.load(_require(Path(cfg.manifest), "make-demo"))
    recordings, ratings = load_dataset(manifest)
    ddir = out / "denoised"
    ddir.mkdir(parents=True, exist_ok=True)
    p = cfg.preprocess
    reports, summary = [], []
    for rec in sorted(recordings, key=lambda r: (r.subject_id, _cond_code(r.condition))):
        clean, rep = denoise(rec, seed=[cfg.seed, rec.subject_id, _cond_code(rec.condition)],
                             threshold=p.z_threshold, highpass_order=p.highpass_order, cutoff_hz=p.cutoff_hz,
                             ica_tol=p.ica_tol, ica_max_iter=p.ica_max_iter)
        if not rep.converged:
            log.warning("ICA did not converge for subject %d %s", rec.subject_id, rec.condition.value)
        save_recording_npz(clean, ddir / f"{_rec_name(rec.subject_id, rec.condition)}.npz")
        reports.append(rep.to_json())
        summary.append({"subject": rec.subject_id, "condition": rec.condition.value, "n_removed": rep.n_removed,
                        "removed": " ".join(map(str, rep.removed_indices)), "ica_converged": rep.converged})
        log.info("denoised subject %d %s: removed %s", rec.subject_id, rec.condition.value, rep.removed_indices)
    _dump(reports, ddir / "removals.json")
    write_rows(summary, ddir / "removals_summary.csv",
               ["subject", "condition", "n_removed", "removed", "ica_converged"])
    rows = [{"subject": r.subject_id, "condition": r.condition.value, "rating": r.score,
             "class": "" if map_rating_to_class(r.score) is None else map_rating_to_class(r.score).label}
            for r in sorted(ratings, key=lambda r: (r.subject_id, _cond_code(r.condition)))]
    write_rows(rows, out / "labels.csv", ["subject", "condition", "rating", "class"])


def read_labels(path: Path) -> dict:
    labels = {}
    with path.open(newline="") as fh:
        for r in csv.DictReader(fh):
            labels[(int(r["subject"]), r["condition"])] = map_rating_to_class(int(r["rating"]))
    return labels


def run_indexes(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    ddir = _require(out / "denoised", "denoise")
    files = sorted(ddir.glob("*.npz"))
    if not files:
        raise MissingInputError(f"missing input: no denoised recordings in {ddir} (run the 'denoise' stage first)")
    keep = set(cfg.bandindex.indexes)
    series = []
    for f in files:
        rec = load_recording_npz(f)
        series += [s for s in compute_indexes(rec, cfg.bandindex.window_s) if s.index_id in keep]
    write_index_csv(series, out / "indexes.csv")
    log.info("wrote %d index series", len(series))


def _catalog(cfg: PipelineConfig) -> FeatureCatalog:
    cat = full_catalog()
    return cat if cfg.features.catalog == "full" else cat.subset(cfg.features.catalog)


def run_features(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    series = read_index_csv(_require(out / "indexes.csv", "indexes"))
    labels = read_labels(_require(out / "labels.csv", "denoise"))
    fdir = out / "features"
    fdir.mkdir(parents=True, exist_ok=True)
    catalog = _catalog(cfg)
    catalog.save(fdir / "catalog.json")
    reports = {}
    for index in cfg.bandindex.indexes:
        subset = [s for s in series if s.index_id == index]
        fm, rep = extract_all(subset, labels, catalog, cfg.features.sampling_rate)
        if fm.n_rows == 0:
            raise ValueError(f"index {index}: no labelled rows left after extraction")
        save_feature_matrix(fm, fdir / f"{index}.csv")
        reports[index] = rep.to_json()
        log.info("features for %s: %d rows, %d degenerate cells", index, fm.n_rows, len(rep.degenerate_cells))
    _dump(reports, fdir / "extraction_report.json")


def _search_spec(cfg: PipelineConfig) -> ModelSpec:
    fam = Family.parse(cfg.select.search_learner)
    for spec in cfg.learner_specs():
        if spec.family is fam:
            return spec
    return ModelSpec(fam)


def run_select(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    sdir, kept = out / "selection", out / "selected"
    sdir.mkdir(parents=True, exist_ok=True)
    kept.mkdir(parents=True, exist_ok=True)
    s, mc = cfg.select, cfg.montecarlo
    for index in cfg.bandindex.indexes:
        fm = load_feature_matrix(_require(out / "features" / f"{index}.csv", "features"))
        evaluator = None
        if s.k_search:
            evaluator = accuracy_evaluator(_search_spec(cfg), s.search_iterations, mc.train_fraction, cfg.seed)
        res = select_features(fm, evaluator, s.correlation_threshold, k=None if s.k_search else s.k)
        res.save(sdir / f"{index}.json")
        res.save_correlation(sdir / f"{index}_corr.csv")
        save_feature_matrix(fm.select_columns(res.chosen), kept / f"{index}.csv")
        log.info("selection for %s: K=%d, kept %d", index, res.k, len(res.chosen))


def run_synth(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    ydir = out / "synth"
    ydir.mkdir(parents=True, exist_ok=True)
    reports = {}
    for i, index in enumerate(cfg.bandindex.indexes):
        fm = load_feature_matrix(_require(out / "selected" / f"{index}.csv", "select"))
        syn = synthesize_matrix(fm, cfg.synth.n_subjects, seed=[cfg.seed, i])
        save_feature_matrix(syn, ydir / f"{index}.csv")
        reports[index] = matrix_quality(fm, syn)
        log.info("synthetic %s: %d rows, overall quality %.2f", index, syn.n_rows, reports[index].overall)
    save_quality(reports, ydir / "quality.json")


def load_matrices(cfg: PipelineConfig, dataset: str) -> dict[str, FeatureMatrix]:
    out = Path(cfg.out)
    mats = {}
    for index in cfg.bandindex.indexes:
        fm = load_feature_matrix(_require(out / "selected" / f"{index}.csv", "select"))
        if dataset == "combined":
            fm = FeatureMatrix.concat([fm, load_feature_matrix(_require(out / "synth" / f"{index}.csv", "synth"))])
        mats[index] = fm
    return mats


def run_train(cfg: PipelineConfig) -> ExperimentResult:
    out = Path(cfg.out)
    rdir, mdir = out / "results", out / "models"
    rdir.mkdir(parents=True, exist_ok=True)
    mdir.mkdir(parents=True, exist_ok=True)
    specs = cfg.learner_specs()
    result = None
    for dataset in cfg.datasets():
        mats = load_matrices(cfg, dataset)
        ecfg = ExperimentConfig(tuple(cfg.bandindex.indexes), specs, cfg.montecarlo.train_fraction,
                                cfg.montecarlo.iterations, cfg.seed, dataset)
        part = run_experiment(ecfg, mats)
        for r in part.resamples:
            r["dataset"] = dataset
        result = part if result is None else result.merge(part)
        # final models on every row of the dataset, for later reuse
        for index, fm in mats.items():
            for spec in specs:
                model = train(spec, fm.values, fm.labels, seed=cfg.seed, feature_names=fm.feature_names)
                model.save(mdir / f"{dataset}_{index}_{spec.family.short}.json")
        log.info("Monte Carlo on %s data done", dataset)
    write_long_csv(result, rdir / "metrics_long.csv")
    _dump(result.summary(), rdir / "summary.json")
    _dump(result.resamples, rdir / "resamples.json")
    return result


def metric_table(result: ExperimentResult, indexes, datasets, learners) -> list[dict]:
    """One row per (index, metric); mean and sd columns per learner and dataset."""
    rows = []
    for index in indexes:
        for metric in METRIC_NAMES:
            row = {"index": index, "metric": metric}
            for dataset in datasets:
                for learner in learners:
                    v = result.values.get((dataset, index, learner, metric))
                    row[f"{learner}_{dataset}_mean"] = float(np.mean(v)) if v is not None else float("nan")
                    row[f"{learner}_{dataset}_sd"] = float(np.std(v, ddof=1)) if v is not None and len(v) > 1 \
                        else float("nan")
            rows.append(row)
    return rows


def run_report(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    result = read_long_csv(_require(out / "results" / "metrics_long.csv", "train"))
    rep = out / "report"
    rep.mkdir(parents=True, exist_ok=True)
    datasets = [d for d in cfg.datasets() if any(k[0] == d for k in result.values)]
    learners = [s.family.short for s in cfg.learner_specs()]
    write_rows(metric_table(result, cfg.bandindex.indexes, datasets, learners), rep / "performance.csv")
    tables = {"learners": [], "ratio_vs_constituent": [], "ratio_vs_ratio": []}
    for d in datasets:
        for name, rows in compare_indexes(result, d, learners).items():
            tables[name] += rows
    for name, fname in (("learners", "learner_comparison.csv"), ("ratio_vs_constituent", "ratio_vs_constituent.csv"),
                        ("ratio_vs_ratio", "ratio_vs_ratio.csv")):
        write_rows(tables[name], rep / fname)
    dens = []
    for (d, i, l, m), v in sorted(result.values.items()):
        grid, y = density_series(v)
        dens += [{"dataset": d, "index": i, "learner": l, "metric": m, "x": float(x), "density": float(yy)}
                 for x, yy in zip(grid, y)]
    write_rows(dens, rep / "density.csv", ["dataset", "index", "learner", "metric", "x", "density"])
    qpath = out / "synth" / "quality.json"
    quality = json.loads(qpath.read_text()) if qpath.exists() else {}
    _dump(quality, rep / "quality_report.json")


STAGE_FUNCS = {"denoise": run_denoise, "indexes": run_indexes, "features": run_features, "select": run_select,
               "synth": run_synth, "train": run_train, "report": run_report}


def run_all(cfg: PipelineConfig) -> None:
    for stage in STAGES:
        if stage == "synth" and not cfg.synth.enabled:
            log.info("synthesis disabled; skipping")
            continue
        STAGE_FUNCS[stage](cfg)
