"""CSV data files with JSON sidecars."""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Sequence

import numpy as np

from stark import __version__

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, columns: Mapping[str, Sequence[Any]]) -> Path:
    """One header row, one row per sample, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    lengths = {len(columns[name]) for name in names}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: {sorted(lengths)}")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*(columns[name] for name in names)):
            writer.writerow([_cell(value) for value in row])
    logger.info("wrote %s", path)
    return path


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_plain(payload), handle, indent=2, sort_keys=True, allow_nan=True)
        handle.write("\n")
    logger.info("wrote %s", path)
    return path


def provenance(command: str, config: Dict[str, Any], **extra: Any) -> Dict[str, Any]:
    """Everything needed to rerun the command that produced a file."""
    record = {"package": "stark-dephasing", "version": __version__, "command": command, "config": config}
    record.update(extra)
    return record


def write_with_sidecar(path: Path, columns: Mapping[str, Sequence[Any]], sidecar: Dict[str, Any]) -> Path:
    """Write ``path`` as CSV and ``path`` with a .json suffix as the sidecar."""
    path = write_csv(path, columns)
    write_json(path.with_name(path.stem + ".json"), dict(sidecar, data_file=path.name, columns=list(columns)))
    return path


def _with_extension(path: Path, extension: str) -> Path:
    # stems may carry tags like q0.001; append rather than replace
    path = Path(path)
    return path if path.suffix == extension else path.with_name(path.name + extension)


def write_table(path: Path, columns: Mapping[str, Sequence[Any]], sidecar: Dict[str, Any], fmt: str) -> Path:
    """CSV plus sidecar, or a single JSON document holding both."""
    if fmt == "json":
        path = _with_extension(path, ".json")
        return write_json(path, dict(sidecar, data={name: list(values) for name, values in columns.items()}))
    return write_with_sidecar(_with_extension(path, ".csv"), columns, sidecar)
