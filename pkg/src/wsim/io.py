"""CSV and manifest emission.

Every run directory gets a ``manifest.json`` recording the exact
configuration (as re-parseable text), the parameters behind each output
file, any validity warnings, and the full list of emitted files.  Output is
deterministic: fixed formatting, sorted keys, no timestamps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import config_sha256, render_config
from .dynamics import Trajectory
from .model import SystemConfig

try:  # installed distribution name; fall back for source checkouts
    from importlib.metadata import version as _dist_version

    TOOL_VERSION = _dist_version("wsim")
except Exception:  # pragma: no cover
    TOOL_VERSION = "0.1.0"

TRAJECTORY_HEADER = "t,fidelity,p_e00,p_g10,p_g01,p_g00,trace_err,min_eig,purity"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    """Write one trajectory with the fixed nine-column header.

    Times are in the active unit system of the run that produced the
    trajectory; values carry 12 significant digits and the final row is
    newline-terminated.
    """
    path = Path(path)
    columns = (
        traj.times,
        traj.fidelity,
        traj.p_e00,
        traj.p_g10,
        traj.p_g01,
        traj.p_g00,
        traj.trace_err,
        traj.min_eig,
        traj.purity,
    )
    lines = [TRAJECTORY_HEADER]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Read a trajectory CSV back as a column dict (round-trip checks, plots)."""
    text = Path(path).read_text().strip().splitlines()
    names = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    return {name: data[:, k] for k, name in enumerate(names)}


def write_series_csv(path, header: list[str], rows) -> Path:
    """Write a generic numeric series CSV with 12-significant-digit values."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class RunManifest:
    """Reproducibility record for one CLI run or figure reproduction."""

    subcommand: str
    unit_mode: str
    config_text: str
    config_sha256: str
    parameters: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    tool_version: str = TOOL_VERSION

    @classmethod
    def for_config(cls, subcommand: str, cfg: SystemConfig, **parameters) -> "RunManifest":
        return cls(
            subcommand=subcommand,
            unit_mode=cfg.unit_mode,
            config_text=render_config(cfg),
            config_sha256=config_sha256(cfg),
            parameters=parameters,
        )

    def add_output(self, path, base_dir) -> None:
        self.outputs.append(str(Path(path).relative_to(Path(base_dir))))

    def write(self, directory) -> Path:
        path = Path(directory) / "manifest.json"
        payload = {
            "subcommand": self.subcommand,
            "unit_mode": self.unit_mode,
            "config_text": self.config_text,
            "config_sha256": self.config_sha256,
            "parameters": self.parameters,
            "warnings": list(self.warnings),
            "outputs": sorted(self.outputs + ["manifest.json"]),
            "tool_version": self.tool_version,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path
