from __future__ import annotations

import os
import stat

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import cn
from jamsense import matfile
from jamsense.calibration import SampleSet
from jamsense.detectors import DetectorSpec, Kind, evaluate_batch
from jamsense.matfile import MatrixFileError


def test_file_size_formula(tmp_path, rng):
    A = cn(rng, (10, 3, 20))
    p = tmp_path / "a.jdmx"
    matfile.write_matrices(p, A)
    assert os.path.getsize(p) == 32 + 10 * 3 * 20 * 16 == matfile.file_size(3, 20, 10)
    assert matfile.read_header(p) == (3, 20, 10)
    assert p.read_bytes()[:8] == b"JDMX1\0\0\0"


def test_layout_is_row_major_real_imag(tmp_path):
    A = np.array([[[1 + 2j, 3 + 4j], [5 + 6j, 7 + 8j]]])
    p = tmp_path / "b.jdmx"
    matfile.write_matrices(p, A)
    body = np.frombuffer(p.read_bytes()[32:], dtype="<f8")
    assert body.tolist() == [1, 2, 3, 4, 5, 6, 7, 8]


@given(st.integers(1, 4), st.integers(2, 6), st.integers(1, 5), st.integers(0, 2**32))
def test_round_trip_bitwise(tmp_path_factory, count, K, N, seed):
    A = cn(np.random.default_rng(seed), (count, K, N))
    p = tmp_path_factory.mktemp("rt") / "x.jdmx"
    matfile.write_matrices(p, A)
    assert np.array_equal(matfile.read_matrices(p), A)


def test_round_trip_statistics(tmp_path, rng):
    A = cn(rng, (50, 4, 12))
    p = tmp_path / "s.jdmx"
    matfile.write_matrices(p, A)
    s = SampleSet.from_file(p)
    for k in (Kind.SSV, Kind.RSV, Kind.ED):
        det = DetectorSpec(k, sigma2_w=1.0)
        assert np.allclose(evaluate_batch(det, s.matrices), evaluate_batch(det, A), rtol=1e-15, atol=0)
    assert s.provenance.startswith("external(")


def test_single_matrix_accepted(tmp_path, rng):
    p = tmp_path / "one.jdmx"
    matfile.write_matrices(p, cn(rng, (3, 5)))
    assert matfile.read_matrices(p).shape == (1, 3, 5)


def test_bad_magic(tmp_path, rng):
    p = tmp_path / "m.jdmx"
    matfile.write_matrices(p, cn(rng, (2, 3, 5)))
    raw = bytearray(p.read_bytes())
    raw[:5] = b"XXXXX"
    p.write_bytes(bytes(raw))
    with pytest.raises(MatrixFileError, match="magic"):
        matfile.read_matrices(p)


@pytest.mark.parametrize("cut", [10, 33, 16])
def test_truncated(tmp_path, rng, cut):
    p = tmp_path / "t.jdmx"
    matfile.write_matrices(p, cn(rng, (2, 3, 5)))
    raw = p.read_bytes()
    p.write_bytes(raw[:cut] if cut < 32 else raw[:-cut])
    with pytest.raises(MatrixFileError):
        matfile.read_matrices(p)


def test_trailing_bytes_rejected(tmp_path, rng):
    p = tmp_path / "x.jdmx"
    matfile.write_matrices(p, cn(rng, (2, 3, 5)))
    with open(p, "ab") as fh:
        fh.write(b"\0")
    with pytest.raises(MatrixFileError, match="length"):
        matfile.read_matrices(p)


def test_bad_rank(tmp_path):
    with pytest.raises(MatrixFileError):
        matfile.write_matrices(tmp_path / "r.jdmx", np.zeros(4))


def test_atomic_write_leaves_no_partial_file(tmp_path):
    p = tmp_path / "out.txt"
    p.write_text("old")

    def chunks():
        yield b"new"
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        matfile.atomic_write_bytes(p, chunks())
    assert p.read_text() == "old"
    assert [f.name for f in tmp_path.iterdir()] == ["out.txt"]


def test_atomic_write_respects_umask(tmp_path):
    old = os.umask(0o022)
    try:
        matfile.atomic_write_bytes(tmp_path / "f", [b"x"])
    finally:
        os.umask(old)
    assert stat.S_IMODE(os.stat(tmp_path / "f").st_mode) == 0o644
