"""CSV dialect and run manifests.

Every output file starts with '#'-prefixed metadata lines, then a header
row, then data rows. Fields are comma-separated with '.' decimals, floats
carry 17 significant digits, and line endings are LF. Files are written
atomically (temp file in the target directory, then rename). Nothing in a
file depends on wall-clock time, so re-running a manifest reproduces the
output byte for byte.
"""

import json
import os
from dataclasses import dataclass, field

from .validation import SchemaError

__all__ = [
    "format_float",
    "format_value",
    "metadata_block",
    "parse_metadata_lines",
    "write_table_csv",
    "read_table_csv",
    "require_columns",
    "RunManifest",
]


def format_float(x):
    return format(float(x), ".17g")


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def metadata_block(meta):
    lines = [f"# {key}: {format_value(value)}" for key, value in meta.items()]
    return "".join(line + "\n" for line in lines)


def parse_metadata_lines(lines):
    meta = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if ": " in body:
            key, value = body.split(": ", 1)
            meta[key] = value
        elif body:
            meta[body] = ""
    return meta


def _atomic_write(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_table_csv(path, metadata, columns, rows):
    """Write a metadata block, a header row, and formatted data rows."""
    parts = [metadata_block(metadata)]
    parts.append(",".join(columns) + "\n")
    for row in rows:
        parts.append(",".join(format_value(v) for v in row) + "\n")
    _atomic_write(path, "".join(parts))


def read_table_csv(path):
    """Read a dialect CSV; returns (metadata dict, column list, rows of strings)."""
    meta_lines = []
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                meta_lines.append(line)
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise SchemaError(f"{path}: no header row found")
    return parse_metadata_lines(meta_lines), header, rows


def require_columns(header, needed, path):
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required column(s): {', '.join(missing)}")
    return [header.index(c) for c in needed]


@dataclass
class RunManifest:
    """Resolved parameters of one CLI run; embedded verbatim in output headers."""

    command: str
    seed: int
    params: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    version: str = ""

    def to_json(self):
        payload = {
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "outputs": self.outputs,
            "version": self.version,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def header_metadata(self):
        return {"manifest": self.to_json()}

    def write(self, path):
        _atomic_write(path, self.to_json() + "\n")
