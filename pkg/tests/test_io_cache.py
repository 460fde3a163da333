"""CSV schemas, manifests, rasters and the spectrum cache contract."""

import json
from fractions import Fraction

import numpy as np
import pytest

from openbaker import csvio
from openbaker.cache import CacheError, SpectrumCache, cache_key
from openbaker.classical import OpeningSpec
from openbaker.propagator import PropagatorSpec
from openbaker.spectra import resonance_set
from openbaker.stats import synthetic_power_law_points
from openbaker.trapped import SurvivalSeries, area_series


def test_sweep_csv_schema(tmp_path):
    path = tmp_path / "sweep.csv"
    rows = [(Fraction(0), Fraction(1, 3)), (Fraction(1, 20), Fraction(9, 10))]
    csvio.write_sweep_csv(path, Fraction(1, 10), 9, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "q_c,delta_q,t,area"
    assert lines[1] == "0,0.1,9,0.333333333333"
    assert lines[2] == "0.05,0.1,9,0.9"


def test_series_csv_schema(tmp_path):
    path = tmp_path / "series.csv"
    series = area_series(OpeningSpec(0.5, 0.1), 2)
    csvio.write_series_csv(path, series)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,area"
    assert lines[1] == "0,0.9"
    assert lines[2] == "1,0.8"


def test_spectrum_csv_roundtrip(tmp_path):
    path = tmp_path / "spec.csv"
    values = np.array([1.0 + 0j, 0.5 - 0.25j, 0.0 + 0j])
    csvio.write_spectrum_csv(path, values)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,re,im,modulus,gamma"
    assert lines[3].endswith(",inf")
    assert lines[3].startswith("2,0,0,0,")
    back = csvio.read_spectrum_csv(path)
    assert np.abs(back - values).max() < 1e-14
    # serialize the parse-back: stable bytes
    path2 = tmp_path / "spec2.csv"
    csvio.write_spectrum_csv(path2, back)
    assert path2.read_bytes() == path.read_bytes()


def test_read_spectrum_rejects_other_headers(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("nu,n\n0.5,1\n")
    with pytest.raises(ValueError, match="header"):
        csvio.read_spectrum_csv(path)


def test_weyl_csv_schema(tmp_path):
    path = tmp_path / "weyl.csv"
    csvio.write_weyl_csv(path, synthetic_power_law_points(n_points=4)[:2])
    lines = path.read_text().splitlines()
    assert lines[0] == "N,count,log10N,log10count"
    assert lines[1].startswith("32,48,")


def test_pgm_bytes(tmp_path):
    path = tmp_path / "img.pgm"
    img = np.array([[True, False], [False, True]])
    csvio.write_pgm(path, img)
    data = path.read_bytes()
    assert data == b"P5\n2 2\n255\n" + bytes([0, 255, 255, 0])
    with pytest.raises(ValueError):
        csvio.write_pgm(path, img.astype(int))


def test_manifest_records_checksum(tmp_path):
    target = tmp_path / "data.csv"
    target.write_text("a,b\n1,2\n")
    man = csvio.write_manifest(target, {"alpha": 1, "beta": "x"})
    record = json.loads(man.read_text())
    assert record["sha256"] == csvio.sha256_file(target)
    assert record["parameters"] == {"alpha": 1, "beta": "x"}
    assert record["file"] == "data.csv"
    again = csvio.write_manifest(target, {"alpha": 1, "beta": "x"})
    assert again.read_bytes() == man.read_bytes()


def test_cache_key_canonicalizes_parameters():
    a = PropagatorSpec(64, OpeningSpec(0.1, 0.25))
    b = PropagatorSpec(64, OpeningSpec(Fraction(1, 10), Fraction(1, 4)))
    c = PropagatorSpec(64, OpeningSpec("0.1", "0.25"))
    assert cache_key(a) == cache_key(b) == cache_key(c)
    assert cache_key(a) != cache_key(PropagatorSpec(66, OpeningSpec(0.1, 0.25)))


def test_cache_roundtrip(tmp_path):
    cache = SpectrumCache(tmp_path / "cache")
    spec = PropagatorSpec(16, OpeningSpec(0.3, 0.1))
    rs, hit = cache.get_or_compute(spec)
    assert not hit
    rs2, hit2 = cache.get_or_compute(spec)
    assert hit2
    assert (rs.values == rs2.values).all()
    # payload equals the direct serialization of the solved spectrum
    direct = resonance_set(spec)
    assert np.abs(rs.values - direct.values).max() < 1e-13


def test_cache_recompute_bitwise_identical(tmp_path):
    spec = PropagatorSpec(24, OpeningSpec(0.5, 0.2))
    first = SpectrumCache(tmp_path / "a")
    second = SpectrumCache(tmp_path / "b")
    first.get_or_compute(spec)
    second.get_or_compute(spec)
    assert (
        first.payload_path(spec).read_bytes() == second.payload_path(spec).read_bytes()
    )


def test_cache_detects_corruption(tmp_path):
    cache = SpectrumCache(tmp_path)
    spec = PropagatorSpec(16, OpeningSpec(0.3, 0.1))
    cache.get_or_compute(spec)
    payload = cache.payload_path(spec)
    data = payload.read_bytes()
    payload.write_bytes(data.replace(b"index", b"indEx", 1))
    with pytest.raises(CacheError, match="checksum"):
        cache.load(spec)


def test_cache_trace_check_catches_consistent_tampering(tmp_path):
    cache = SpectrumCache(tmp_path)
    spec = PropagatorSpec(16, OpeningSpec(0.3, 0.1))
    rs, _ = cache.get_or_compute(spec)
    tampered = rs.values.copy()
    tampered[0] = 0.9 + 0.1j
    payload = cache.payload_path(spec)
    csvio.write_spectrum_csv(payload, tampered)
    manifest = json.loads(cache.manifest_path(spec).read_text())
    manifest["sha256"] = csvio.sha256_file(payload)
    cache.manifest_path(spec).write_text(json.dumps(manifest))
    with pytest.raises(CacheError, match="trace"):
        cache.load(spec)


def test_cache_dimension_mismatch(tmp_path):
    cache = SpectrumCache(tmp_path)
    spec16 = PropagatorSpec(16, OpeningSpec(0.3, 0.1))
    spec18 = PropagatorSpec(18, OpeningSpec(0.3, 0.1))
    cache.get_or_compute(spec16)
    cache.get_or_compute(spec18)
    # graft the wrong payload under the 18-site key
    cache.payload_path(spec18).write_bytes(cache.payload_path(spec16).read_bytes())
    manifest = json.loads(cache.manifest_path(spec18).read_text())
    manifest["sha256"] = csvio.sha256_file(cache.payload_path(spec18))
    cache.manifest_path(spec18).write_text(json.dumps(manifest))
    with pytest.raises(CacheError, match="modes"):
        cache.load(spec18)
