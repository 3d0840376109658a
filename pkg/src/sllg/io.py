"""Deterministic on-disk formats.

* CSV: header line plus rows, floats printed with 17 significant digits.
* Snapshot binary, all little-endian::

      magic    8 bytes  b"SLLGSNP1"
      version  uint32
      n_modes  uint32
      n_comp   uint32   (always 3)
      count    uint32   number of records
      records  count x (float64 time, float64[n_modes * n_comp] coefficients, row major)

* Manifest: JSON with the config echo, generator identity, package version,
  seeds, wall-clock seconds and a sha256 inventory of the emitted files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .diagnostics import COLUMNS
from .wiener import GENERATOR_ID

MAGIC = b"SLLGSNP1"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sIIII")


def package_version():
    from . import __version__

    return __version__


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _field(v):
    try:
        return float(v)
    except ValueError:
        return v


def read_csv(path):
    """Header and rows; numeric fields come back as float, labels as str."""
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    return header, [tuple(_field(v) for v in line.split(",")) for line in text[1:]]


def write_timeseries(path, record):
    write_csv(path, COLUMNS, record.rows)


def write_snapshots(path, times, states):
    states = [np.asarray(s, dtype="<f8") for s in states]
    if len(times) != len(states):
        raise ValueError("one time per snapshot required")
    n_modes = states[0].shape[0] if states else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, SNAPSHOT_VERSION, n_modes, 3, len(states)))
        for t, s in zip(times, states):
            if s.shape != (n_modes, 3):
                raise ValueError("all snapshots must share one shape")
            fh.write(np.float64(t).astype("<f8").tobytes())
            fh.write(np.ascontiguousarray(s).tobytes())


def read_snapshots(path):
    """Return ``(times, states)`` with ``states`` of shape ``(count, n_modes, 3)``."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, ver, n_modes, n_comp, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if ver != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {ver}")
    width = 1 + n_modes * n_comp
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != count * width:
        raise ValueError(f"{path}: expected {count} records, payload has {body.size} values")
    body = body.reshape(count, width)
    return body[:, 0].copy(), body[:, 1:].reshape(count, n_modes, n_comp).copy()


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, config, files, seeds, wall_clock, extra=None):
    out_dir = Path(out_dir)
    manifest = {
        "config": config.model_dump(mode="json"),
        "generator": GENERATOR_ID,
        "version": package_version(),
        "seeds": seeds,
        "wall_clock_seconds": wall_clock,
        "files": {name: sha256(out_dir / name) for name in sorted(files)},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def verify_manifest(path):
    """Names of inventory files whose checksum no longer matches."""
    path = Path(path)
    manifest = json.loads(path.read_text())
    return [name for name, digest in manifest["files"].items()
            if not (path.parent / name).is_file() or sha256(path.parent / name) != digest]


def config_from_manifest(path):
    from .config import validate_config

    return validate_config(json.loads(Path(path).read_text())["config"])
