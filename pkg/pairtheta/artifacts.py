"""Result files written by a run.

Every CSV opens with two comment lines, the units of its columns and the
manifest hash, followed by a header row. The manifest hash covers the
config text and package version only, never timings, so identical runs
produce identical CSV bytes. Plots are emitted as gnuplot scripts next to
the data.
"""

import csv
import hashlib
import json
import logging
import math
import platform
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__

logger = logging.getLogger(__name__)


def canonical_json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def manifest_hash(config_text: str) -> str:
    """sha256 over the config echo and package version."""
    payload = canonical_json({"config": config_text, "version": __version__})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return format(value, ".17g")
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


class Table:
    """A named CSV table with column units and optional plot hints."""

    def __init__(self, name: str, columns: list[str], units: list[str], rows=None,
                 plot: tuple[str, list[str]] | None = None, logscale: str = ""):
        if len(columns) != len(units):
            raise ValueError(f"{len(columns)} columns but {len(units)} units")
        self.name = name
        self.columns = columns
        self.units = units
        self.rows = list(rows or [])
        self.plot = plot
        """(x column, [y columns]) for the gnuplot script"""
        self.logscale = logscale

    def append(self, row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row of {len(row)} cells for {len(self.columns)} columns")
        self.rows.append(row)

    def write_csv(self, directory: Path, digest: str) -> Path:
        path = directory / f"{self.name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write("# units: " + ",".join(self.units) + "\n")
            f.write(f"# manifest: {digest}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([format_cell(cell) for cell in row])
        return path

    def write_gnuplot(self, directory: Path) -> Path | None:
        if self.plot is None:
            return None
        x, ys = self.plot
        col = {name: i + 1 for i, name in enumerate(self.columns)}
        lines = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            f"set xlabel '{x}'",
            "set terminal pngcairo size 900,600",
            f"set output '{self.name}.png'",
        ]
        if self.logscale:
            lines.append(f"set logscale {self.logscale}")
        plots = [f"'{self.name}.csv' skip 2 using {col[x]}:{col[y]} with linespoints title '{y}'"
                 for y in ys]
        lines.append("plot " + ", \\\n     ".join(plots))
        path = directory / f"{self.name}.gp"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def versions() -> dict:
    return {
        "pairtheta": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def write_run(directory, config_text: str, subcommand: str, tables: list[Table],
              timings: dict, summary: dict | None = None, hash_text: str | None = None) -> dict:
    """Write all tables, their plot scripts and manifest.json.

    hash_text is the config text the hash is taken over; it defaults to
    config_text and omits settings that cannot change results.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digest = manifest_hash(config_text if hash_text is None else hash_text)
    outputs = []
    for table in tables:
        outputs.append(table.write_csv(directory, digest).name)
        script = table.write_gnuplot(directory)
        if script is not None:
            outputs.append(script.name)
    (directory / "run.cfg").write_text(config_text, encoding="utf-8")
    manifest = {
        "subcommand": subcommand,
        "manifest_hash": digest,
        "config": config_text,
        "versions": versions(),
        "outputs": outputs,
        "summary": summary or {},
        "timings": timings,
    }
    with open(directory / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=format_cell)
    logger.info("wrote %d artifacts to %s", len(outputs) + 2, directory)
    return manifest


def write_error(directory, error: Exception, subcommand: str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    record = {"error": type(error).__name__, "message": str(error), "subcommand": subcommand}
    for attribute in ("predicted", "budget", "path", "line"):
        if hasattr(error, attribute):
            record[attribute] = getattr(error, attribute)
    path = directory / "error.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(record, f, indent=2, sort_keys=True)
    return path
