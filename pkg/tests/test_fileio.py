import struct

import numpy as np
import pytest

from rcbeam import (
    FileFormatError,
    ImageGrid,
    RfDataSet,
    read_rf_file,
    read_volume_file,
    write_csv,
    write_pgm,
    write_rf_file,
    write_volume_file,
)
from rcbeam.encoding import DECODED


def rf_set(rng, shape=(2, 4, 3, 16), state="encoded"):
    # store-what-you-wrote data: values already representable in float32
    data = rng.standard_normal(shape).astype(np.float32).astype(np.float64)
    return RfDataSet(data, 20e6, state=state)


def test_rf_round_trip_bit_exact(tmp_path, rng):
    path = tmp_path / "a.rcrf"
    rf = rf_set(rng)
    write_rf_file(path, rf)
    back = read_rf_file(path)
    assert np.array_equal(back.data, rf.data)
    assert back.sampling_rate == rf.sampling_rate
    assert back.state == rf.state
    # and the re-written file is identical byte for byte
    path2 = tmp_path / "b.rcrf"
    write_rf_file(path2, back)
    assert path.read_bytes() == path2.read_bytes()


def test_rf_state_flag_round_trip(tmp_path, rng):
    path = tmp_path / "d.rcrf"
    write_rf_file(path, rf_set(rng, state=DECODED))
    assert read_rf_file(path).state == DECODED


def test_rf_header_layout(tmp_path, rng):
    path = tmp_path / "a.rcrf"
    write_rf_file(path, rf_set(rng, shape=(1, 2, 3, 4)))
    raw = path.read_bytes()
    magic, version, state_flag, _, p, t, c, n, fs = struct.unpack_from(
        "<4sHBBIIIId", raw
    )
    assert magic == b"RCRF"
    assert version == 1
    assert state_flag == 0
    assert (p, t, c, n) == (1, 2, 3, 4)
    assert fs == 20e6
    assert len(raw) == struct.calcsize("<4sHBBIIIId") + 1 * 2 * 3 * 4 * 4 + 4


def test_rf_detects_corruption(tmp_path, rng):
    path = tmp_path / "a.rcrf"
    write_rf_file(path, rf_set(rng))
    raw = bytearray(path.read_bytes())
    flip = len(raw) // 2
    raw[flip] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(FileFormatError, match="CRC"):
        read_rf_file(path)


def test_rf_detects_truncation_and_bad_magic(tmp_path, rng):
    path = tmp_path / "a.rcrf"
    write_rf_file(path, rf_set(rng))
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 5])
    with pytest.raises(FileFormatError, match="truncated"):
        read_rf_file(path)
    path.write_bytes(raw[:10])
    with pytest.raises(FileFormatError, match="truncated"):
        read_rf_file(path)
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FileFormatError, match="magic"):
        read_rf_file(path)
    bad_version = raw[:4] + struct.pack("<H", 9) + raw[6:]
    path.write_bytes(bad_version)
    with pytest.raises(FileFormatError, match="version"):
        read_rf_file(path)


def test_volume_round_trip(tmp_path, rng):
    grid = ImageGrid(-1e-3, -2e-3, 5e-3, 1e-4, 2e-4, 3e-4, 4, 5, 6)
    values = rng.standard_normal((4, 5, 6)).astype(np.float32).astype(np.float64)
    path = tmp_path / "v.rcbv"
    write_volume_file(path, grid, values)
    grid2, values2 = read_volume_file(path)
    assert grid2 == grid
    assert np.array_equal(values2, values)
    path2 = tmp_path / "w.rcbv"
    write_volume_file(path2, grid2, values2)
    assert path.read_bytes() == path2.read_bytes()


def test_volume_payload_is_x_fastest(tmp_path):
    grid = ImageGrid(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2, 2, 2)
    values = np.arange(8, dtype=np.float64).reshape(2, 2, 2)
    path = tmp_path / "v.rcbv"
    write_volume_file(path, grid, values)
    raw = path.read_bytes()
    header = struct.calcsize("<4sHHddddddIII")
    payload = np.frombuffer(raw, dtype="<f4", count=8, offset=header)
    # x index varies fastest: v[0,0,0], v[1,0,0], v[0,1,0], ...
    assert payload.tolist() == [0.0, 4.0, 2.0, 6.0, 1.0, 5.0, 3.0, 7.0]
    assert raw[:4] == b"RCBV"


def test_volume_shape_mismatch_and_corruption(tmp_path, rng):
    grid = ImageGrid(0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2, 2, 2)
    with pytest.raises(FileFormatError):
        write_volume_file(tmp_path / "v.rcbv", grid, np.zeros((2, 2, 3)))
    path = tmp_path / "v.rcbv"
    write_volume_file(path, grid, rng.standard_normal((2, 2, 2)))
    raw = bytearray(path.read_bytes())
    raw[-6] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(FileFormatError, match="CRC"):
        read_volume_file(path)


def test_pgm_format(tmp_path):
    img = np.array([[0.0, -30.0], [-60.0, -90.0], [-15.0, 0.0]])
    path = tmp_path / "i.pgm"
    write_pgm(path, img, 60.0)
    raw = path.read_bytes()
    header, pixels = raw.rsplit(b"\n255\n", 1)
    lines = header.decode("ascii").split("\n")
    assert lines[0] == "P5"
    assert lines[1].startswith("#") and "[-60, 0]" in lines[1]
    assert lines[2] == "2 3"
    assert len(pixels) == 6
    # 0 dB -> 255, -30 dB -> half scale, anything at or below -60 dB -> 0
    assert pixels[0] == 255 and pixels[1] == 128
    assert pixels[2] == 0 and pixels[3] == 0
    with pytest.raises(ValueError):
        write_pgm(path, img[None], 60.0)
    with pytest.raises(ValueError):
        write_pgm(path, img, -5.0)


def test_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["name", "value"], [["a", 0.1], ["b", 2], ["c", 1e-7]])
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0] == "name,value"
    assert lines[1] == "a,0.1"
    assert lines[2] == "b,2"
    assert float(lines[3].split(",")[1]) == 1e-7
    assert text.endswith("\n")
