"""
Flat-file outputs of a run: CSV tables, JSON documents, SVG plots and the
run manifest with per-file SHA-256 checksums
"""

import hashlib
import json
import logging
import platform
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

PACKAGE_VERSION = "0.1.0"
CSV_FLOAT_FORMAT = "%.12g"


class RunManifest(BaseModel):
    """Provenance record written next to the outputs of one run"""
    experiment: str
    config: Dict[str, Any]
    versions: Dict[str, str]
    wall_clock_seconds: float
    checksums: Dict[str, str]
    checks: List[Dict[str, Any]]
    passed: bool


def library_versions() -> Dict[str, str]:
    versions = {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "entlab": PACKAGE_VERSION,
    }
    for package in ("pydantic", "langgraph", "matplotlib"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "not installed"
    return versions


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class OutputManager:
    """Write run artifacts into one directory and remember their checksums"""

    def __init__(self, run_dir: Path):
        """
        Args:
            run_dir: Output directory of the run (created if missing)
        """
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.checksums: Dict[str, str] = {}

    def _record(self, path: Path) -> str:
        self.checksums[path.name] = sha256_file(path)
        logger.debug("Wrote %s (%s)", path, self.checksums[path.name][:12])
        return str(path)

    def write_csv(self, name: str, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
        """
        Write records as CSV

        Args:
            name: File name inside the run directory
            rows: One dict per row
            columns: Column order (defaults to the keys of the first row)

        Returns:
            Path of the written file
        """
        frame = pd.DataFrame.from_records(list(rows), columns=columns)
        path = self.run_dir / name
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return self._record(path)

    def write_frame(self, name: str, frame: pd.DataFrame) -> str:
        path = self.run_dir / name
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return self._record(path)

    def write_json(self, name: str, data: Any) -> str:
        path = self.run_dir / name
        with open(path, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")
        return self._record(path)

    def write_line_plot(
        self,
        name: str,
        series: Dict[str, tuple],
        xlabel: str,
        ylabel: str,
        title: str = "",
    ) -> str:
        """
        Draw labelled (x, y) series into one SVG figure

        Args:
            name: File name (.svg)
            series: label -> (x values, y values)
            xlabel, ylabel: Axis labels
            title: Figure title
        """
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        # fixed hash salt keeps SVG ids stable between runs
        matplotlib.rcParams["svg.hashsalt"] = "entlab"
        fig, ax = plt.subplots(1, 1, figsize=(5, 3.5))
        for label, (x, y) in series.items():
            ax.plot(x, y, marker="o", markersize=3, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(fontsize=8)
        path = self.run_dir / name
        fig.savefig(path, bbox_inches="tight", metadata={"Date": None})
        plt.close(fig)
        return self._record(path)

    def write_manifest(self, manifest: RunManifest) -> str:
        """manifest.json is not listed in its own checksums"""
        path = self.run_dir / "manifest.json"
        with open(path, "w") as f:
            f.write(manifest.model_dump_json(indent=2))
            f.write("\n")
        return str(path)


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, BaseModel):
        return value.model_dump()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
