"""Reading amplitude data and writing results.

Supported inputs:

``csv_amplitudes``
    One value per line; a non-numeric first line is taken as a header.
``raw_f64le``
    Headerless little-endian float64 values.
``raw_u16le_raster``
    Headerless little-endian uint16 raster; needs ``shape=(rows, cols)``.
``pgm_raster``
    Netpbm graymap, plain (P2) or binary (P5), 8- or 16-bit.

Raster formats accept an optional patch ``(row, col, height, width)``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError

OUTPUT_DIR_ENV = "CRSAR_OUTPUT_DIR"


class InputFormat(str, Enum):
    CSV = "csv_amplitudes"
    RAW_F64 = "raw_f64le"
    RAW_U16 = "raw_u16le_raster"
    PGM = "pgm_raster"


@dataclass(frozen=True)
class InputDataset:
    path: Path
    format: InputFormat = InputFormat.CSV
    patch: tuple[int, int, int, int] | None = None
    shape: tuple[int, int] | None = None  # raw_u16le_raster only

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        object.__setattr__(self, "format", InputFormat(self.format))


def _read_csv(path: Path) -> np.ndarray:
    values = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            field = text.split(",")[0].strip()
            try:
                v = float(field)
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise DataError(f"{path}:{lineno}: cannot parse {field!r} as a number") from None
            if not math.isfinite(v) or v < 0:
                raise DataError(f"{path}:{lineno}: amplitude {field!r} must be finite and >= 0")
            values.append(v)
    return np.asarray(values, dtype=float)


def _read_raw_f64(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) % 8:
        bad = len(raw) - len(raw) % 8
        raise DataError(f"{path}: truncated float64 record at byte offset {bad} (file is {len(raw)} bytes)")
    x = np.frombuffer(raw, dtype="<f8").astype(float)
    bad = np.flatnonzero(~np.isfinite(x) | (x < 0))
    if bad.size:
        i = int(bad[0])
        raise DataError(f"{path}: value {x[i]!r} at index {i} (byte offset {8 * i}) must be finite and >= 0")
    return x


def _read_raw_u16(path: Path, shape) -> np.ndarray:
    if shape is None:
        raise DataError("raw_u16le_raster needs the raster shape (rows, cols)")
    rows, cols = (int(v) for v in shape)
    raw = path.read_bytes()
    expected = 2 * rows * cols
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes for a {rows}x{cols} u16 raster, found {len(raw)}")
    return np.frombuffer(raw, dtype="<u2").reshape(rows, cols).astype(float)


def _pgm_tokens(data: bytes, count: int, pos: int):
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DataError("PGM header ended early")
        tokens.append(data[start:pos])
    return tokens, pos


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise DataError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise DataError(f"{path}: malformed PGM header") from None
    if not (w > 0 and h > 0 and 0 < maxval < 65536):
        raise DataError(f"{path}: bad PGM dimensions or maxval")
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        size = w * h * np.dtype(dtype).itemsize
        body = data[pos:pos + size]
        if len(body) != size:
            raise DataError(f"{path}: PGM raster truncated at byte offset {pos + len(body)}")
        img = np.frombuffer(body, dtype=dtype).reshape(h, w).astype(float)
    else:
        toks = data[pos:].split()
        if len(toks) < w * h:
            raise DataError(f"{path}: PGM raster has {len(toks)} samples, expected {w * h}")
        try:
            img = np.array([int(t) for t in toks[: w * h]], dtype=float).reshape(h, w)
        except ValueError:
            raise DataError(f"{path}: non-integer sample in plain PGM") from None
    if img.max() > maxval:
        r, c = np.unravel_index(int(np.argmax(img)), img.shape)
        raise DataError(f"{path}: sample at row {r}, column {c} exceeds maxval {maxval}")
    return img


def _patch(img: np.ndarray, patch, path) -> np.ndarray:
    if patch is None:
        return img
    r0, c0, h, w = (int(v) for v in patch)
    rows, cols = img.shape
    if r0 < 0 or c0 < 0 or h < 1 or w < 1 or r0 + h > rows or c0 + w > cols:
        raise DataError(f"{path}: patch {patch} outside the {rows}x{cols} raster")
    return img[r0:r0 + h, c0:c0 + w]


def load_dataset(d: InputDataset) -> np.ndarray:
    """Flattened amplitudes of the file, or of the selected raster patch."""
    if not d.path.is_file():
        raise DataError(f"input file not found: {d.path}")
    if d.patch is not None and d.format in (InputFormat.CSV, InputFormat.RAW_F64):
        raise DataError("patch geometry applies to raster formats only")
    if d.format is InputFormat.CSV:
        x = _read_csv(d.path)
    elif d.format is InputFormat.RAW_F64:
        x = _read_raw_f64(d.path)
    else:
        img = _read_raw_u16(d.path, d.shape) if d.format is InputFormat.RAW_U16 else _read_pgm(d.path)
        x = _patch(img, d.patch, d.path).ravel()
    if x.size == 0:
        raise DataError(f"{d.path}: no amplitudes found")
    return x


def fmt(v) -> str:
    """17 significant digits, enough to round-trip any float64."""
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def to_csv(rows: list[dict], fields) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        out = []
        for f in fields:
            v = row.get(f)
            if isinstance(v, bool) or v is None:
                out.append("" if v is None else str(v).lower())
            elif isinstance(v, (float, np.floating)):
                out.append(fmt(v) if math.isfinite(v) else ("inf" if v > 0 else "nan"))
            else:
                out.append(str(v))
        writer.writerow(out)
    return buf.getvalue()


def resolve_output(path) -> Path:
    """Relative output paths land in ``$CRSAR_OUTPUT_DIR`` when it is set."""
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def atomic_write(path: Path, data: bytes | str) -> None:
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(path: Path) -> Path:
    return Path(str(path) + ".json")
