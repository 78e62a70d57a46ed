"""Batch front end: TOML experiment configs in, CSV/JSON result tables out."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .boundary import compute_distances, top_outliers
from .dataset import Dataset, load_csv, load_idx, split, synth_generate
from .harness import ANALYSES, DEFAULT_LEVELS, ExperimentResult, ExperimentSpec, derive_seed, run_sweep
from .models import FAMILIES, default_config, train

OUTDIR_ENV = "OUTLIERPOISON_OUTDIR"

CELL_COLUMNS = (
    "dataset", "family", "level", "accuracy", "macro_precision", "macro_recall",
    "macro_f1", "macro_fpr", "variance", "lambda", "asr", "disagreement", "seed", "status",
)
SERIES_COLUMNS = ("level", "accuracy", "precision", "recall", "f1", "fpr")


class ConfigError(ValueError):
    """The configuration document is malformed; nothing has been written."""


# -- config parsing ---------------------------------------------------------

_EXPERIMENT_KEYS = {"seed", "ratio", "levels", "rule", "families", "analyses", "k_values"}
_OUTPUT_KEYS = {"directory", "formats", "emit_plot_series"}
_DATASET_KEYS = {
    "csv": {"type", "name", "path", "label_column", "scaling"},
    "idx": {"type", "name", "images", "labels", "subsample", "seed"},
    "synthetic": {"type", "name", "means", "scales", "counts", "label_noise", "seed"},
}


def _reject_unknown(section: str, mapping: dict, allowed: set[str]) -> None:
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}]")


def parse_config(path) -> dict:
    """Parse and validate a TOML run configuration; rejects unknown keys."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"invalid TOML: {err}") from None
    _reject_unknown("<root>", doc, {"version", "experiment", "output", "datasets"})
    if doc.get("version", 1) != 1:
        raise ConfigError(f"unsupported config version {doc.get('version')!r}")

    experiment = doc.get("experiment", {})
    _reject_unknown("experiment", experiment, _EXPERIMENT_KEYS)
    output = doc.get("output", {})
    _reject_unknown("output", output, _OUTPUT_KEYS)
    formats = output.get("formats", ["csv"])
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {fmt!r}")
    families = experiment.get("families", list(FAMILIES))
    for fam in families:
        if fam not in FAMILIES:
            raise ConfigError(f"unknown family {fam!r} in [experiment]")
    analyses = experiment.get("analyses", [])
    for name in analyses:
        if name not in ANALYSES:
            raise ConfigError(f"unknown analysis {name!r} in [experiment]")

    raw_datasets = doc.get("datasets", [])
    if not raw_datasets:
        raise ConfigError("config defines no [[datasets]]")
    for i, block in enumerate(raw_datasets):
        kind = block.get("type")
        if kind not in _DATASET_KEYS:
            raise ConfigError(f"datasets[{i}]: unknown type {kind!r} (csv, idx or synthetic)")
        _reject_unknown(f"datasets[{i}]", block, _DATASET_KEYS[kind])

    return {
        "seed": int(experiment.get("seed", 42)),
        "ratio": float(experiment.get("ratio", 0.75)),
        "levels": tuple(float(v) for v in experiment.get("levels", DEFAULT_LEVELS)),
        "rule": str(experiment.get("rule", "cyclic-next")),
        "families": tuple(families),
        "analyses": tuple(analyses),
        "k_values": tuple(int(k) for k in experiment.get("k_values", (3, 5, 10, 15))),
        "directory": str(output.get("directory", "results")),
        "formats": tuple(formats),
        "emit_plot_series": bool(output.get("emit_plot_series", False)),
        "datasets": raw_datasets,
        "base_dir": path.parent,
    }


def _load_datasets(cfg: dict) -> list[Dataset]:
    base = cfg["base_dir"]
    loaded = []
    for block in cfg["datasets"]:
        kind = block["type"]
        if kind == "csv":
            ds = load_csv(base / block["path"], block["label_column"],
                          scaling=block.get("scaling", "none"))
        elif kind == "idx":
            ds = load_idx(
                base / block["images"], base / block["labels"],
                subsample=block.get("subsample"),
                seed=int(block.get("seed", derive_seed(cfg["seed"], block.get("name", "idx"), "subsample"))),
            )
        else:
            ds = synth_generate(
                block["means"], block.get("scales", 1.0), block["counts"],
                label_noise=float(block.get("label_noise", 0.0)),
                seed=int(block.get("seed", derive_seed(cfg["seed"], block.get("name", "synthetic"), "synth"))),
                name=block.get("name", "synthetic"),
            )
        if "name" in block:
            ds = Dataset(block["name"], ds.features, ds.labels, ds.n_classes,
                         ds.feature_names, ds.metadata)
        loaded.append(ds)
    return loaded


def _resolve_outdir(cfg: dict) -> Path:
    override = os.environ.get(OUTDIR_ENV)
    directory = Path(override) if override else Path(cfg["directory"])
    if not directory.is_absolute():
        directory = cfg["base_dir"] / directory
    return directory


# -- output writing ---------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        return f"{value:.6g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if np.isnan(value):
            return None
        return float(f"{value:.6g}")
    return value


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_table(outdir: Path, stem: str, columns, rows: list[dict], formats) -> None:
    if "csv" in formats:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in columns])
        _atomic_write(outdir / f"{stem}.csv", buf.getvalue())
    if "json" in formats:
        payload = [{col: _json_value(row.get(col)) for col in columns} for row in rows]
        _atomic_write(outdir / f"{stem}.json", json.dumps(payload, indent=2) + "\n")


def _cell_rows(result: ExperimentResult) -> list[dict]:
    rows = []
    for c in result.cells:
        m = c.metrics
        rows.append({
            "dataset": c.dataset, "family": c.family, "level": c.level,
            "accuracy": m.accuracy if m else None,
            "macro_precision": m.macro_precision if m else None,
            "macro_recall": m.macro_recall if m else None,
            "macro_f1": m.macro_f1 if m else None,
            "macro_fpr": m.macro_fpr if m else None,
            "variance": m.variance if m else None,
            "lambda": c.lambda_ if m else None,
            "asr": c.asr if m else None,
            "disagreement": c.disagreement if m else None,
            "seed": c.seed,
            "status": "failed" if c.failed else "ok",
        })
    return rows


def _series_rows(cell_rows: list[dict]) -> dict[tuple[str, str], list[dict]]:
    series: dict[tuple[str, str], list[dict]] = {}
    for row in cell_rows:
        if row["status"] != "ok":
            continue
        series.setdefault((row["dataset"], row["family"]), []).append({
            "level": row["level"],
            "accuracy": row["accuracy"],
            "precision": row["macro_precision"],
            "recall": row["macro_recall"],
            "f1": row["macro_f1"],
            "fpr": row["macro_fpr"],
        })
    for rows in series.values():
        rows.sort(key=lambda r: r["level"])
    return series


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def _write_run_outputs(outdir: Path, result: ExperimentResult, cfg: dict) -> None:
    rows = _cell_rows(result)
    _write_table(outdir, "cells", CELL_COLUMNS, rows, cfg["formats"])
    timing_rows = [
        {"dataset": c.dataset, "family": c.family, "level": c.level, "wall_ms": c.wall_ms}
        for c in result.cells
    ]
    _write_table(outdir, "timings", ("dataset", "family", "level", "wall_ms"),
                 timing_rows, cfg["formats"])
    for name, table in result.analyses.items():
        if table:
            _write_table(outdir, f"analysis_{name}", tuple(table[0].keys()), table, cfg["formats"])
    _atomic_write(outdir / "provenance.json", json.dumps(result.provenance, indent=2) + "\n")
    if cfg["emit_plot_series"]:
        for (ds_name, family), series in _series_rows(rows).items():
            _write_table(outdir, f"series_{_safe(ds_name)}_{family}", SERIES_COLUMNS,
                         series, cfg["formats"])


# -- commands ---------------------------------------------------------------

def cmd_run(config_path, workers: int = 1) -> int:
    """Run the configured sweep; 0 on success, 1 on config error, 2 when a cell failed."""
    try:
        cfg = parse_config(config_path)
        datasets = _load_datasets(cfg)
    except (ConfigError, OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    spec = ExperimentSpec(
        datasets=tuple(datasets),
        families=cfg["families"],
        levels=cfg["levels"],
        rule=cfg["rule"],
        ratio=cfg["ratio"],
        seed=cfg["seed"],
        analyses=cfg["analyses"],
        k_values=cfg["k_values"],
    )
    result = run_sweep(spec, workers=workers)
    _write_run_outputs(_resolve_outdir(cfg), result, cfg)
    return 2 if any(c.failed for c in result.cells) else 0


def cmd_distances(config_path, family: str, dataset_name: str) -> int:
    """Write the per-point distance ranking a sweep would use for one (dataset, family)."""
    try:
        cfg = parse_config(config_path)
        if family not in FAMILIES:
            raise ConfigError(f"unknown family {family!r}")
        datasets = _load_datasets(cfg)
        matches = [d for d in datasets if d.name == dataset_name]
        if not matches:
            raise ConfigError(f"dataset {dataset_name!r} not in config "
                              f"(have {[d.name for d in datasets]})")
    except (ConfigError, OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    ds = matches[0]
    pair = split(ds, cfg["ratio"], derive_seed(cfg["seed"], ds.name, "split"))
    config = default_config(family, seed=derive_seed(cfg["seed"], ds.name, family, "model"))
    surrogate = train(config, pair.train)
    report = compute_distances(surrogate, pair.train)
    order = top_outliers(report, len(report))
    rank = np.empty(len(report), dtype=np.int64)
    rank[order] = np.arange(1, len(report) + 1)
    nonzero_levels = [lv for lv in cfg["levels"] if lv > 0]
    columns = ["index", "distance", "rank"] + [f"selected_at_{lv:g}" for lv in nonzero_levels]
    rows = []
    for i in range(len(report)):
        row = {"index": i, "distance": float(report.distances[i]), "rank": int(rank[i])}
        for lv in nonzero_levels:
            cut = int(np.floor(lv / 100.0 * len(report)))
            row[f"selected_at_{lv:g}"] = bool(rank[i] <= cut)
        rows.append(row)
    outdir = _resolve_outdir(cfg)
    _write_table(outdir, f"distances_{_safe(ds.name)}_{family}", tuple(columns), rows,
                 cfg["formats"])
    return 0


def cmd_plotdata(result_dir) -> int:
    """Derive per-(dataset, family) metric series files from an existing cells.csv."""
    result_dir = Path(result_dir)
    cells_path = result_dir / "cells.csv"
    if not cells_path.exists():
        print(f"error: missing cells file {cells_path}", file=sys.stderr)
        return 1
    with open(cells_path, newline="", encoding="utf-8") as fh:
        raw = list(csv.DictReader(fh))
    rows = []
    for r in raw:
        if r["status"] != "ok":
            continue
        rows.append({
            "dataset": r["dataset"], "family": r["family"], "status": "ok",
            "level": float(r["level"]),
            "accuracy": float(r["accuracy"]),
            "macro_precision": float(r["macro_precision"]),
            "macro_recall": float(r["macro_recall"]),
            "macro_f1": float(r["macro_f1"]),
            "macro_fpr": float(r["macro_fpr"]),
        })
    for (ds_name, family), series in _series_rows(rows).items():
        _write_table(result_dir, f"series_{_safe(ds_name)}_{family}", SERIES_COLUMNS,
                     series, ("csv",))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="outlierpoison",
        description="Poisoning sweeps over multiclass classifiers, boundary-distance guided.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a configured sweep")
    p_run.add_argument("config", help="TOML run configuration")
    p_run.add_argument("--workers", type=int, default=1, help="parallel (dataset, family) groups")
    p_dist = sub.add_parser("distances", help="export a distance ranking")
    p_dist.add_argument("config")
    p_dist.add_argument("family", choices=FAMILIES)
    p_dist.add_argument("dataset", help="dataset name from the config")
    p_plot = sub.add_parser("plotdata", help="emit plot-ready series from a results directory")
    p_plot.add_argument("results", help="directory holding cells.csv")
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, workers=args.workers)
    if args.command == "distances":
        return cmd_distances(args.config, args.family, args.dataset)
    return cmd_plotdata(args.results)


if __name__ == "__main__":
    raise SystemExit(main())
