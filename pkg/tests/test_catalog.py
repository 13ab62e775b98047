import json

import pytest

from mavcodesign.catalog import (
    CATALOG_ENV,
    CatalogError,
    builtin_catalog,
    builtin_platforms,
    default_catalog,
    load_catalog,
    loads_catalog,
    validate_platform,
)
from mavcodesign.dynamics import ComputePlatform

DECLARED = {"i9-9940X": 0.318, "i7-4790K": 0.65, "Jetson Xavier": 0.894, "Jetson TX2": 1.119}


def test_four_builtins():
    ps = builtin_platforms()
    assert [p.name for p in ps] == list(DECLARED)
    by = {p.name: p for p in ps}
    assert by["i9-9940X"].response_s == pytest.approx(0.3182, abs=1e-4)
    assert by["Jetson TX2"].response_s == pytest.approx(1.1186, abs=1e-4)
    assert by["Jetson Xavier"].mass_kg == pytest.approx(0.380)


@pytest.mark.parametrize("p", builtin_platforms(), ids=lambda p: p.name)
def test_builtins_validate_against_declared_totals(p):
    validate_platform(p, DECLARED[p.name])


def test_validate_examples():
    validate_platform(ComputePlatform("Xavier", 0.586, 3.25, 30, 0.38), 0.894)
    validate_platform(ComputePlatform("i7", 0.426, 4.46, 88, 0.768), 0.65)
    with pytest.raises(CatalogError, match="declared total"):
        validate_platform(ComputePlatform("i7", 0.426, 4.46, 88, 0.768), 0.80)
    with pytest.raises(CatalogError, match="tdp_w"):
        validate_platform(ComputePlatform("bad", 0.4, 4, -1, 0.5))


def test_bundled_file_matches_builtins():
    cat = builtin_catalog()
    assert len(cat.platforms) == 4
    for a, b in zip(cat.platforms, builtin_platforms()):
        assert a.name == b.name
        assert a.mass_kg == pytest.approx(b.mass_kg)
        assert a.sa_latency_s == b.sa_latency_s
    assert cat.body().name == "DJI-M100"
    assert cat.power_models["DJI"].coeffs[-1] == 433.9


def _write(tmp_path, doc):
    path = tmp_path / "cat.json"
    path.write_text(json.dumps(doc))
    return path


def test_round_trip(tmp_path):
    cat = builtin_catalog()
    path = tmp_path / "c.json"
    path.write_text(cat.dumps())
    again = load_catalog(path)
    assert again.dumps() == cat.dumps()
    assert again.to_dict() == cat.to_dict()


def test_grams_and_kilograms_agree(tmp_path):
    rec = {"name": "X", "sa_latency_s": 0.5, "sa_throughput_hz": 2, "tdp_w": 10}
    g = load_catalog(_write(tmp_path, {"platforms": [dict(rec, mass_g=250)]}))
    kg = loads_catalog(json.dumps({"platforms": [dict(rec, mass_kg=0.25)]}))
    assert g.platforms[0] == kg.platforms[0]


def test_negative_tdp_rejected(tmp_path):
    doc = {"platforms": [{"name": "X", "sa_latency_s": 0.5, "sa_throughput_hz": 2, "tdp_w": -5, "mass_g": 100}]}
    with pytest.raises(CatalogError):
        load_catalog(_write(tmp_path, doc))


def test_inconsistent_total_rejected(tmp_path):
    doc = {"platforms": [{"name": "i9", "sa_latency_s": 0.243, "sa_throughput_hz": 13.3,
                          "tdp_w": 165, "mass_g": 1109, "total_s": 0.50}]}
    with pytest.raises(CatalogError, match="1%"):
        load_catalog(_write(tmp_path, doc))


def test_duplicate_names_rejected(tmp_path):
    rec = {"name": "X", "sa_latency_s": 0.5, "sa_throughput_hz": 2, "tdp_w": 10, "mass_g": 100}
    with pytest.raises(CatalogError, match="duplicate"):
        load_catalog(_write(tmp_path, {"platforms": [rec, rec]}))


def test_parse_error_has_line_context(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "platforms": [\n    {"name": "X",}\n  ]\n}\n')
    with pytest.raises(CatalogError) as exc:
        load_catalog(path)
    msg = str(exc.value)
    assert ":3:" in msg and '{"name": "X",}' in msg


def test_unknown_lookup_raises_keyerror():
    with pytest.raises(KeyError):
        builtin_catalog().platform("nosuch")


def test_env_var_overrides_default(tmp_path, monkeypatch):
    rec = {"name": "Only", "sa_latency_s": 0.5, "sa_throughput_hz": 2, "tdp_w": 10, "mass_g": 100}
    monkeypatch.setenv(CATALOG_ENV, str(_write(tmp_path, {"platforms": [rec]})))
    assert default_catalog().platform_names() == ["Only"]
