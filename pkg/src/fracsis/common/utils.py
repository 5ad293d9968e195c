# this_file: fracsis/src/fracsis/common/utils.py
"""Utility functions for fracsis: files, CSV output and terminal helpers."""

from __future__ import annotations

import csv
import json
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import platformdirs
from loguru import logger
from pydantic import BaseModel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

APP_NAME = "fracsis"
FLOAT_FORMAT = "{:.17g}"


def get_default_output_dir() -> Path:
    """Directory used for run artifacts when no output directory is configured."""
    return Path(platformdirs.user_data_dir(APP_NAME, appauthor=False)) / "runs"


def ensure_directory(path: Path | str) -> Path:
    """Create ``path`` (and parents) if needed and return it as a Path."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def format_float(value: float) -> str:
    """Round-trippable decimal representation (17 significant digits)."""
    return FLOAT_FORMAT.format(float(value))


def format_tag(value: float) -> str:
    """Compact representation of a number for use inside file names."""
    return f"{float(value):g}"


def write_csv(path: Path | str, header: Sequence[str], columns: Sequence[Sequence[float] | np.ndarray]) -> Path:
    """Write equally long numeric columns under ``header``."""
    path = Path(path)
    ensure_directory(path.parent)
    lengths = {len(col) for col in columns}
    if len(lengths) > 1:
        msg = f"columns for {path.name} have different lengths: {sorted(lengths)}"
        raise ValueError(msg)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns, strict=True):
            writer.writerow([format_float(v) for v in row])
    logger.debug(f"Wrote {path}")
    return path


def read_csv_columns(path: Path | str) -> dict[str, np.ndarray]:
    """Read a numeric CSV with a header row into named columns."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        names = reader.fieldnames or []
    return {name.strip(): np.array([float(row[name]) for row in rows]) for name in names}


def write_model_json(path: Path | str, model: BaseModel) -> Path:
    """Dump a pydantic model as indented JSON."""
    path = Path(path)
    ensure_directory(path.parent)
    path.write_text(model.model_dump_json(indent=2) + "\n")
    return path


def write_models_json(path: Path | str, models: Sequence[BaseModel]) -> Path:
    """Dump a list of pydantic models as an indented JSON array."""
    path = Path(path)
    ensure_directory(path.parent)
    path.write_text(json.dumps([m.model_dump(mode="json") for m in models], indent=2) + "\n")
    return path


def write_gnuplot_script(path: Path | str, title: str, plots: Sequence[tuple[str, str]], xlabel: str = "x") -> Path:
    """Write a gnuplot script plotting ``(csv_file, label)`` pairs (columns 1:2)."""
    path = Path(path)
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
    ]
    items = [f"'{name}' using 1:2 with lines title '{label}'" for name, label in plots]
    lines.append("plot " + ", \\\n     ".join(items))
    path.write_text("\n".join(lines) + "\n")
    return path


def create_progress_bar(disable: bool = False) -> Progress:
    """Progress bar for batch runs."""
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        disable=disable,
    )
