import json
import math

import pytest

from steklov_geom import verify, zoo
from steklov_geom.surface import FlatCylinder, ThinNeckComposite, triangulate

EXPECTED = {"cyl-unit", "cyl-n1", "cyl-n2", "cyl-n4", "collar-std", "thin-neck-eps0.2", "thin-neck-eps0.1",
            "thin-neck-eps0.05", "hyp-neck", "hyp-neck-wide", "profile-waist"}


def test_zoo_names():
    assert set(zoo.names()) == EXPECTED
    with pytest.raises(KeyError):
        zoo.get("missing")


def test_zoo_entries_are_versioned_and_build():
    for e in zoo.entries():
        assert e.version >= 1
        assert e.description
        s = e.surface()
        assert s.name == e.name
        assert 0 < e.default_h() < max(s.boundary_lengths)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_growing_cylinder_presets(n):
    e = zoo.get(f"cyl-n{n}")
    assert e.spec == FlatCylinder(1.0, 2 * math.pi * n)


def test_thin_neck_presets():
    for eps in (0.2, 0.1, 0.05):
        spec = zoo.get(f"thin-neck-eps{eps:g}").spec
        assert isinstance(spec, ThinNeckComposite)
        assert (spec.a, spec.L, spec.eps) == (1.0, 0.3, eps)
        assert spec.neck_length == pytest.approx(1 / eps)


def test_neck_test_function_energy():
    e = zoo.get("thin-neck-eps0.1")
    mesh = triangulate(e.surface(), e.default_h())
    f = verify.neck_test_function(mesh, e.spec)
    assert f.min() == -1.0 and f.max() == 1.0
    from steklov_geom.fem import assemble_stiffness, energy

    assert energy(assemble_stiffness(mesh), f) == pytest.approx(4 * 0.1 ** 2, rel=0.01)


def test_resolve_suites():
    assert verify.resolve_suites("all") == verify.SUITES
    assert verify.resolve_suites("cheeger") == ("cheeger",)
    with pytest.raises(KeyError):
        verify.resolve_suites("nope")


def test_report_structure():
    rep = verify.run("constants")
    doc = json.loads(rep.to_json())
    assert doc["toolkit"] == "steklov-geom"
    assert doc["suites"] == ["constants"]
    ids = [r["check_id"] for r in doc["records"]]
    assert ids == sorted(ids)
    s = doc["summary"]
    assert s["pass"] + s["fail"] + s["not-applicable"] == s["total"] == len(ids)
    assert rep.ok


def test_exceptions_become_fail_records(monkeypatch):
    def broken(bench):
        yield verify.CheckRecord("constants/first", "-", None, {"x": 1.0}, "pass")
        raise RuntimeError("boom")

    monkeypatch.setitem(verify.RUNNERS, "constants", broken)
    rep = verify.run("constants")
    assert [r.verdict for r in rep.records] == ["pass", "fail"]
    assert "boom" in rep.records[1].values["error"]
    assert not rep.ok


def test_clean_values():
    import numpy as np

    out = verify._clean({"a": np.float64(1.5), "b": [np.int64(2), np.bool_(True)], "c": float("inf")})
    assert out == {"a": 1.5, "b": [2, True], "c": "inf"}
    assert type(out["a"]) is float
