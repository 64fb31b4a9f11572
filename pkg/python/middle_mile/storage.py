"""
Artifact Storage

Every file the planner writes (scenario documents, plan reports, batch
CSVs) goes through an atomic write: the content lands in a temporary
file next to the target and is renamed over it, so a failed run never
leaves a partial artifact behind.

CSV numbers use 6 significant digits with '.' as decimal separator and
LF line endings, so identical runs give identical bytes on any platform.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from .evaluation import RECORD_COLUMNS, BatchSummary, CdfResult, ScenarioRecord, records_frame
from .topology import TopologyKind

FLOAT_FORMAT = "%.6g"


def _stage(path: Path, data: bytes) -> str:
    """Write data to a synced temp file next to path and return its name"""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
    except BaseException:
        _discard([tmp_name])
        raise
    return tmp_name


def _discard(tmp_names: Sequence[str]):
    for name in tmp_names:
        try:
            os.unlink(name)
        except FileNotFoundError:
            pass


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> Path:
    """Write data to path via temp file + rename"""
    path = Path(path)
    tmp_name = _stage(path, data)
    try:
        os.replace(tmp_name, path)
    except BaseException:
        _discard([tmp_name])
        raise
    logger.debug(f"Wrote {path} ({len(data)} bytes)")
    return path


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _render_csv(frame: pd.DataFrame) -> str:
    frame = frame.copy()
    for column in frame.columns:
        if frame[column].dtype == bool:
            frame[column] = frame[column].map({True: "true", False: "false"})
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="")


def render_results_csv(records: Sequence[ScenarioRecord]) -> str:
    """One row per (scenario, topology)"""
    frame = records_frame(records)[RECORD_COLUMNS].copy()
    # uint64 seeds overflow pandas' int64
    frame["master_seed"] = frame["master_seed"].map(str)
    frame["scenario_seed"] = frame["scenario_seed"].map(str)
    frame["feasible"] = frame["feasible"].astype(bool)
    frame["excluded"] = frame["excluded"].astype(bool)
    frame["alpha"] = pd.to_numeric(frame["alpha"], errors="coerce")
    return _render_csv(frame)


def render_summary_csv(summary: BatchSummary) -> str:
    return _render_csv(summary.table)


def render_cdf_csv(cdf: CdfResult) -> str:
    """One row per sample: served load and F at that sample"""
    # ties share the CDF value of their last occurrence
    at_or_below = np.searchsorted(cdf.samples, cdf.samples, side="right")
    frame = pd.DataFrame({"served_mbps": cdf.samples, "cdf": at_or_below / cdf.samples.size})
    return _render_csv(frame)


def write_batch_outputs(
    output_dir: Union[str, Path],
    records: Sequence[ScenarioRecord],
    summary: BatchSummary,
) -> List[Path]:
    """
    Write results.csv, summary.csv and cdf_<topology>.csv.

    Everything is rendered in memory, then every file is staged as a
    synced temp file; only when all are staged are they renamed into
    place, back to back. A failure before that point leaves the previous
    set untouched. Each rename is atomic on its own, the set is not.
    """
    output_dir = Path(output_dir)
    rendered: Dict[str, str] = {
        "results.csv": render_results_csv(records),
        "summary.csv": render_summary_csv(summary),
    }
    for kind in TopologyKind:
        if kind in summary.cdfs:
            rendered[f"cdf_{kind.value}.csv"] = render_cdf_csv(summary.cdfs[kind])

    staged: Dict[Path, str] = {}
    try:
        for name, text in rendered.items():
            staged[output_dir / name] = _stage(output_dir / name, text.encode("utf-8"))
        for path, tmp_name in staged.items():
            os.replace(tmp_name, path)
    except BaseException:
        _discard(list(staged.values()))
        raise

    written = list(staged)
    logger.info(f"💾 Wrote {len(written)} files to {output_dir}")
    return written


def canonical_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_plan_report(path: Union[str, Path], report: Dict[str, Any]) -> Path:
    return atomic_write_text(path, canonical_json(report))
