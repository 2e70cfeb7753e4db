"""Store file format: bit-exact round-trips and corruption detection."""

from __future__ import annotations

import os
import struct

import numpy as np
import pytest

from catlas import load_store, save_store
from catlas.errors import CorruptStore

from conftest import make_store, random_unit_rows


@pytest.fixture
def store():
    matrix = random_unit_rows(17, 24, seed=11)
    geos = [(float(i), float(2 * i)) if i % 3 == 0 else None for i in range(17)]
    return make_store(matrix, geos=geos, backend_name="toy")


def test_round_trip_bit_exact(tmp_path, store):
    path = tmp_path / "corpus.catl"
    save_store(store, path)
    loaded = load_store(path)
    assert loaded.matrix.tobytes() == store.matrix.tobytes()
    assert loaded.records == store.records
    assert loaded.backend_name == store.backend_name
    assert loaded.dimensionality == store.dimensionality


def test_double_round_trip_identical_files(tmp_path, store):
    p1 = tmp_path / "one.catl"
    p2 = tmp_path / "two.catl"
    save_store(store, p1)
    save_store(load_store(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_read_only_file(tmp_path, store):
    path = tmp_path / "corpus.catl"
    save_store(store, path)
    os.chmod(path, 0o444)
    loaded = load_store(path)
    assert loaded.count == store.count


def test_magic_checked(tmp_path, store):
    path = tmp_path / "corpus.catl"
    save_store(store, path)
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptStore) as err:
        load_store(path)
    assert err.value.offset == 0


def test_version_bump_names_versions(tmp_path, store):
    path = tmp_path / "corpus.catl"
    save_store(store, path)
    data = bytearray(path.read_bytes())
    data[4:6] = struct.pack("<H", 9)
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptStore) as err:
        load_store(path)
    assert err.value.offset == 4
    assert "9" in str(err.value) and "1" in str(err.value)


def test_truncated_matrix(tmp_path, store):
    path = tmp_path / "corpus.catl"
    save_store(store, path)
    data = path.read_bytes()
    header_len = 22 + len(store.backend_name.encode("utf-8"))
    cut = header_len + (store.count * store.dimensionality * 4) // 2
    path.write_bytes(data[:cut])
    with pytest.raises(CorruptStore) as err:
        load_store(path)
    assert "matrix" in str(err.value)


def test_truncated_record_table(tmp_path, store):
    path = tmp_path / "corpus.catl"
    save_store(store, path)
    data = path.read_bytes()
    path.write_bytes(data[:-5])
    with pytest.raises(CorruptStore):
        load_store(path)


def test_empty_file(tmp_path):
    path = tmp_path / "corpus.catl"
    path.write_bytes(b"")
    with pytest.raises(CorruptStore) as err:
        load_store(path)
    assert err.value.offset == 0
