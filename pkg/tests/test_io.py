import json
import math

import numpy as np
import pytest

from crsar.errors import DataError
from crsar.io import (
    InputDataset,
    InputFormat,
    atomic_write,
    fmt,
    load_dataset,
    resolve_output,
    sidecar_path,
    to_csv,
    to_json,
)


def write_pgm16(path, img, plain=False):
    h, w = img.shape
    if plain:
        body = "\n".join(" ".join(str(int(v)) for v in row) for row in img)
        path.write_text(f"P2\n# made by a test\n{w} {h}\n65535\n{body}\n")
    else:
        path.write_bytes(f"P5\n{w} {h}\n65535\n".encode() + img.astype(">u2").tobytes())


class TestCsv:
    def test_simple(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("1.5\n2.0\n")
        np.testing.assert_array_equal(load_dataset(InputDataset(f)), [1.5, 2.0])

    def test_header_blank_lines_extra_columns(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("amplitude,label\n\n3,x\n4e2,y\n")
        np.testing.assert_array_equal(load_dataset(InputDataset(f, "csv_amplitudes")), [3.0, 400.0])

    @pytest.mark.parametrize("bad,line", [("1\nabc\n", 2), ("1\n2\n-3\n", 3), ("1\nnan\n", 2), ("x\ny\n", 2)])
    def test_errors_name_line(self, tmp_path, bad, line):
        f = tmp_path / "a.csv"
        f.write_text(bad)
        with pytest.raises(DataError, match=f":{line}:"):
            load_dataset(InputDataset(f))

    def test_empty(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("amplitude\n")
        with pytest.raises(DataError, match="no amplitudes"):
            load_dataset(InputDataset(f))

    def test_missing(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_dataset(InputDataset(tmp_path / "nope.csv"))

    def test_patch_rejected(self, tmp_path):
        f = tmp_path / "a.csv"
        f.write_text("1\n")
        with pytest.raises(DataError, match="raster"):
            load_dataset(InputDataset(f, patch=(0, 0, 1, 1)))


class TestRawF64:
    def test_round_trip(self, tmp_path):
        f = tmp_path / "a.bin"
        x = np.array([0.0, 1.25, 1e300])
        f.write_bytes(x.astype("<f8").tobytes())
        np.testing.assert_array_equal(load_dataset(InputDataset(f, InputFormat.RAW_F64)), x)

    def test_truncated(self, tmp_path):
        f = tmp_path / "a.bin"
        f.write_bytes(b"\x00\x00\x00\x00")
        with pytest.raises(DataError, match="byte offset 0"):
            load_dataset(InputDataset(f, "raw_f64le"))
        f.write_bytes(np.ones(2).tobytes() + b"\x01\x02\x03")
        with pytest.raises(DataError, match="byte offset 16"):
            load_dataset(InputDataset(f, "raw_f64le"))

    def test_negative_value(self, tmp_path):
        f = tmp_path / "a.bin"
        f.write_bytes(np.array([1.0, 2.0, -1.0]).astype("<f8").tobytes())
        with pytest.raises(DataError, match="index 2 .byte offset 16"):
            load_dataset(InputDataset(f, "raw_f64le"))


class TestRasters:
    def test_pgm16_full_patch(self, tmp_path):
        img = np.random.default_rng(0).integers(0, 65536, (200, 200))
        f = tmp_path / "a.pgm"
        write_pgm16(f, img)
        x = load_dataset(InputDataset(f, "pgm_raster", patch=(0, 0, 200, 200)))
        assert x.size == 40_000 and x.min() >= 0 and x.max() <= 65535
        np.testing.assert_array_equal(x, img.ravel())

    def test_pgm_plain_and_patch(self, tmp_path):
        img = np.arange(12).reshape(3, 4) * 1000
        f = tmp_path / "a.pgm"
        write_pgm16(f, img, plain=True)
        x = load_dataset(InputDataset(f, "pgm_raster", patch=(1, 1, 2, 2)))
        np.testing.assert_array_equal(x, [5000, 6000, 9000, 10000])

    def test_pgm_8bit(self, tmp_path):
        f = tmp_path / "a.pgm"
        f.write_bytes(b"P5 2 1 255\n" + bytes([7, 250]))
        np.testing.assert_array_equal(load_dataset(InputDataset(f, "pgm_raster")), [7, 250])

    @pytest.mark.parametrize("patch", [(0, 0, 201, 1), (-1, 0, 1, 1), (0, 199, 1, 2), (0, 0, 0, 5)])
    def test_patch_out_of_bounds(self, tmp_path, patch):
        f = tmp_path / "a.pgm"
        write_pgm16(f, np.zeros((200, 200)))
        with pytest.raises(DataError, match="outside"):
            load_dataset(InputDataset(f, "pgm_raster", patch=patch))

    @pytest.mark.parametrize(
        "content,match",
        [(b"P6\n1 1\n255\n\x00\x00\x00", "not a PGM"), (b"P5\n2 2\n255\n\x00", "truncated"),
         (b"P5\n2", "header"), (b"P2\n2 1\n10\n3 11\n", "exceeds maxval"), (b"P2\n2 1\n10\n3\n", "samples")],
    )
    def test_pgm_errors(self, tmp_path, content, match):
        f = tmp_path / "a.pgm"
        f.write_bytes(content)
        with pytest.raises(DataError, match=match):
            load_dataset(InputDataset(f, "pgm_raster"))

    def test_raw_u16(self, tmp_path):
        img = np.array([[1, 2, 3], [4, 5, 65535]], dtype="<u2")
        f = tmp_path / "a.u16"
        f.write_bytes(img.tobytes())
        x = load_dataset(InputDataset(f, "raw_u16le_raster", shape=(2, 3), patch=(0, 1, 2, 2)))
        np.testing.assert_array_equal(x, [2, 3, 5, 65535])
        with pytest.raises(DataError, match="shape"):
            load_dataset(InputDataset(f, "raw_u16le_raster"))
        with pytest.raises(DataError, match="expected 8 bytes"):
            load_dataset(InputDataset(f, "raw_u16le_raster", shape=(2, 2)))


class TestOutput:
    def test_fmt_round_trip(self):
        for v in (0.1, 1 / 3, math.pi * 1e-300, 2.0**0.5 * 1e300):
            assert float(fmt(v)) == v

    def test_json(self):
        s = to_json({"a": np.float64(1 / 3), "b": math.inf, "c": InputFormat.CSV, "d": (np.int64(2), True)})
        d = json.loads(s)
        assert d == {"a": 1 / 3, "b": None, "c": "csv_amplitudes", "d": [2, True]}

    def test_csv(self):
        s = to_csv([{"m": "x", "v": 0.1, "ok": True, "e": None}, {"m": "y", "v": math.inf}], ("m", "v", "ok", "e"))
        assert s == "m,v,ok,e\nx,0.10000000000000001,true,\ny,inf,,\n"

    def test_resolve_output(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CRSAR_OUTPUT_DIR", str(tmp_path))
        assert resolve_output("out.csv") == tmp_path / "out.csv"
        assert resolve_output("/abs/out.csv").is_absolute() and str(resolve_output("/abs/out.csv")) == "/abs/out.csv"
        monkeypatch.delenv("CRSAR_OUTPUT_DIR")
        assert str(resolve_output("out.csv")) == "out.csv"

    def test_atomic_write(self, tmp_path):
        target = tmp_path / "sub" / "f.txt"
        atomic_write(target, "hello")
        assert target.read_text() == "hello"
        atomic_write(target, b"bye")
        assert target.read_bytes() == b"bye"
        assert sorted(p.name for p in target.parent.iterdir()) == ["f.txt"]
        assert sidecar_path(target).name == "f.txt.json"

    def test_atomic_write_failure_leaves_nothing(self, tmp_path):
        target = tmp_path / "f.txt"
        with pytest.raises(TypeError):
            atomic_write(target, 123)
        assert list(tmp_path.iterdir()) == []
