import math

import pytest

import lorenzlab as ll


def test_strip_metric_and_kg():
    m = ll.Model.strip(1)
    E, F, G = m.metric(1 / 16, 0.3)
    assert E == pytest.approx(math.sin(math.pi / 4))
    assert F == pytest.approx(math.cos(math.pi / 4))
    assert G == pytest.approx(-math.sin(math.pi / 4))
    assert ll.compute_kg(m) == 1
    assert abs(ll.rotation_number(m, (1, 0))) == 1
    assert ll.predicted_counts(3) == (12, 6, 6)


def test_riemannian_model_rejected():
    with pytest.raises(ll.ModelRejected):
        ll.Model.flat(1, 0, 1)


def test_shoot_flat_vertical_line():
    rec = ll.shoot(ll.Model.flat(1, 0, -1), (0, 1), (0.0, 0.0, 0.0, 1.0))
    assert rec is not None
    assert rec["causal"] == "timelike"
    assert rec["length"] == pytest.approx(1.0, abs=1e-9)
    assert rec["residual"] <= 1e-9
    assert rec["trace"].shape[1] == 5


def test_geodesic_energy_conserved():
    path = ll.geodesic(ll.Model.flat(1, 0, -1), (0.1, 0.2, 1.0, 0.5), 5.0)
    assert path["exit"] == "completed"
    assert max(path["energy"]) - min(path["energy"]) < 1e-12


def test_atlas_strip_leaves():
    a = ll.atlas(ll.Model.strip(1))
    xs = sorted(l["intercept"] for l in a["leaves"])
    assert xs == pytest.approx([0.0, 0.25, 0.5, 0.75], abs=1e-8)
    assert a["class"] == "B"
    assert len(a["traces"]) == 4


def test_maximize_galloway():
    r = ll.maximize(ll.Model.galloway(0.2), (0, 1))
    assert r["length"] == pytest.approx(math.sqrt(0.2), abs=1e-4)
    assert r["certified"] is not None


def test_flat_survey_classes():
    s = ll.survey(ll.Model.flat(1, 0, -1), classes=[(0, 1), (1, 0), (1, 1), (2, 1)])
    assert len(s["records"]) == 4
    for r in s["records"]:
        pts = [(row[1], row[2]) for row in r["trace"]]
        assert ll.self_intersections(pts) == []


def test_config_text():
    m = ll.Model.from_config("[model]\nfamily = galloway\neps = 0.2\n")
    assert m.name == "galloway_eps(0.2)"
    with pytest.raises(ll.ConfigError):
        ll.Model.from_config("[model]\nfamily = nope\n")
