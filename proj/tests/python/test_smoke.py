import json
import math
from pathlib import Path

import pytest

import gwspeed as g

U14 = "1:0.25,2:0.25,3:0.25,4:0.25"
U12 = "1:0.5,2:0.5"


def test_progeny_roundtrip():
    p = g.Progeny(U14)
    assert p.support == [1, 2, 3, 4]
    assert p.mean == pytest.approx(2.5)
    assert str(g.Progeny(str(p))) == str(p)
    draws = p.sample(4000, seed=3)
    assert set(draws) <= {1, 2, 3, 4}
    assert p.sample(10, seed=3) == p.sample(10, seed=3)


def test_invalid_literal_raises():
    with pytest.raises(g.Error):
        g.Progeny("0:1")


def test_coupling_is_monotone():
    rows = g.quantile_coupling(g.Progeny(U14), g.Progeny(U12))
    assert all(z1 >= z2 for z1, z2, _ in rows)
    assert sum(p for *_, p in rows) == pytest.approx(1.0)


def test_beta1_exact_sums():
    r = g.beta1(g.Progeny(U14), g.Progeny(U12))
    # E[1/Z2] - E[1/Z1] = 3/4 - 25/48 = 11/48; numerator P(Z1=1, Z2=2)/2 = 1/16.
    assert r["den"] == pytest.approx(11 / 48)
    assert r["ratio_a_exact"] == "3/11"
    assert r["beta0"] == pytest.approx(23 / 4 + 0.01)
    with pytest.raises(g.DegenerateCoupling):
        g.beta1(g.Progeny(U12), g.Progeny(U12))


def test_thresholds():
    p, q = g.Progeny(U14), g.Progeny(U12)
    t = g.numeric_threshold(p, q)
    assert math.isfinite(t) and t > 23 / 4
    assert g.lower_bound_gap(p, q, t)["value"] > 0
    with pytest.raises(g.SeriesDivergent):
        g.lower_bound_gap(p, q, 5.0)
    assert g.ell_constant() == pytest.approx(6.75 * 243 ** (1 / 3))
    assert g.ell_threshold(0.0, 2) == pytest.approx(5.76)


def test_closed_form_speed():
    e = g.speed_ergodic(g.Progeny.point_mass(2), 2.0, 5000, 40, seed=1)
    assert abs(e["value"] - 0.6) < 4 * e["std_error"]
    a = g.speed_aidekon(g.Progeny.point_mass(2), 2.0, 200, seed=1)
    assert a["value"] == pytest.approx(0.6, abs=1e-9)


def test_regen_gap_positive_for_ordered_supports():
    r = g.speed_regen(g.Progeny.point_mass(3), g.Progeny.point_mass(2), 8.0, 20000, seed=5)
    assert r["gap"]["value"] > 0
    assert r["diagnostics"]["odd_gaps"] == 0


def test_run_experiment(tmp_path: Path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nseed = 4\n\n[compare]\np1 = 3:1\np2 = 2:1\nbetas = 6, 8\nblocks = 5000\n")
    a = g.run_experiment("compare", cfg, out=tmp_path / "a")
    b = g.run_experiment("compare", cfg, out=tmp_path / "b", workers=3)
    assert a["exit_code"] == 0
    assert a["summary"]["files"]["compare.csv"]["rows"] == 2
    assert (tmp_path / "a" / "compare.csv").read_bytes() == (tmp_path / "b" / "compare.csv").read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["complete"] is True
    assert len(manifest["task_seeds"]) == 2


def test_missing_seed_is_config_error(tmp_path: Path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[compare]\np1 = 3:1\np2 = 2:1\nbetas = 6\n")
    assert g.run_experiment("compare", cfg, out=tmp_path / "o")["exit_code"] == 2
