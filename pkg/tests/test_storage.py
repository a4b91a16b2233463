import numpy as np
import pytest

import frontlab as fl
from frontlab import storage


def test_csv_roundtrip_with_hash(tmp_path):
    p = tmp_path / "data.csv"
    t = np.linspace(0, 1, 7)
    storage.write_csv(p, "t,value", [t, t**2], config_hash="abc123")
    header, data, h = storage.read_csv(p)
    assert header == "t,value"
    assert h == "abc123"
    assert np.allclose(data[:, 1], t**2, rtol=1e-16)


def test_spectral_csv_roundtrip(tmp_path, harmonic_basis):
    p = tmp_path / "basis.csv"
    storage.spectral_basis_to_csv(harmonic_basis, p, config_hash="deadbeef")
    vals, vecs = storage.read_spectral_csv(p)
    assert np.allclose(vals, harmonic_basis.eigenvalues, rtol=1e-15)
    assert vecs.shape == harmonic_basis.eigenvectors.shape
    assert np.allclose(vecs, harmonic_basis.eigenvectors, rtol=1e-15)


def test_field_binary_roundtrip(tmp_path):
    p = tmp_path / "field.bin"
    u = np.arange(12.0).reshape(3, 4) / 7.0
    storage.write_field_binary(p, u, {"t": 0.5, "n_x": 3, "n_y": 4,
                                      "L_x": 1.0, "R_y": 2.0}, config_hash="c0ffee")
    back, meta = storage.read_field_binary(p)
    assert np.array_equal(back, u)
    assert meta["t"] == 0.5 and meta["config_hash"] == "c0ffee"


def test_trace_csv_roundtrip(tmp_path):
    p = tmp_path / "trace.csv"
    trace = fl.FrontTrace(np.array([0.0, 1.0, 2.0]), np.array([-1.0, -2.0, -3.0]),
                          np.array([1.0, 2.0, 3.0]), theta=0.01)
    storage.trace_to_csv(trace, p, config_hash="aa")
    back = storage.read_trace_csv(p)
    assert np.allclose(back.times, trace.times)
    assert np.allclose(back.x_plus, trace.x_plus)


def test_consistency_check_flags_mismatch(tmp_path):
    storage.write_csv(tmp_path / "a.csv", "t,v", [np.arange(3.0), np.arange(3.0)],
                      config_hash="samesame")
    storage.write_csv(tmp_path / "b.csv", "t,v", [np.arange(3.0), np.arange(3.0)],
                      config_hash="samesame")
    assert storage.check_run_consistency(tmp_path) == {}
    storage.write_csv(tmp_path / "c.csv", "t,v", [np.arange(3.0), np.arange(3.0)],
                      config_hash="different")
    bad = storage.check_run_consistency(tmp_path)
    assert list(bad) == ["c.csv"]


def test_write_is_deterministic(tmp_path):
    t = np.linspace(0, 1, 11)
    p1, p2 = tmp_path / "one.csv", tmp_path / "two.csv"
    storage.write_csv(p1, "t,v", [t, np.sin(t)], config_hash="h")
    storage.write_csv(p2, "t,v", [t, np.sin(t)], config_hash="h")
    assert p1.read_bytes() == p2.read_bytes()
