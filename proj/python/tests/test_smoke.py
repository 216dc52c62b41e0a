import math

import pytest

import surfwave as sw


def test_surface_values():
    layer = sw.DielectricSpec(2.4, 0.0155, 26e9, 2e-3)
    silver = sw.MetalSpec(3.15e6)
    assert sw.skin_depth(26e9, silver) == pytest.approx(1.759e-6, rel=1e-3)
    assert sw.surface_impedance(26e9, layer, silver).imag == pytest.approx(240.0, rel=0.01)
    assert sw.porosity(sw.PorosityGeometry()) == pytest.approx(0.19635, rel=1e-4)
    assert sw.effective_permittivity(2.8, 0.19635) == pytest.approx(2.394, rel=5e-4)
    mode = sw.solve_surface_wave(26e9, sw.DielectricSpec(2.8, 0.0155, 26e9, 2e-3), silver,
                                 sw.PorosityGeometry())
    assert 1.0 < mode.n_eff < math.sqrt(2.4)
    db, sigma = sw.equivalent_loss_rate(26e9, 1.185, 0.0155, 1.0)
    assert db == pytest.approx(43.5, rel=2e-3)
    assert sigma > 0


def test_layout_round_trip():
    text = sw.preset_program("corner", 4)
    first = sw.parse_layout(text)
    second = sw.parse_layout(first["text"])
    assert first["pins"] == second["pins"]
    assert second["text"] == first["text"]
    assert sw.corner_width(4) * 1e3 == pytest.approx(8.485, abs=1e-3)
    with pytest.raises(sw.LayoutError):
        sw.parse_layout("GRID 5 5 2mm\nFILL 9 9\n")


def test_analysis():
    f = [21e9 + 0.1e9 * i for i in range(91)]
    s = [-4.0 - 0.8 * (x / 1e9 - 25.0) ** 2 for x in f]
    peak = sw.optimal_frequency(f, s)
    assert peak.frequency == pytest.approx(25e9, abs=0.05e9)
    lo, hi = sw.half_power_band(f, s)
    assert lo < peak.frequency < hi
    d = [0.05, 0.07, 0.09, 0.11]
    slope, _, r2 = sw.attenuation_fit(d, [-28.56 * x for x in d])
    assert slope == pytest.approx(28.56)
    assert r2 == pytest.approx(1.0)


def test_raytrace():
    out = sw.raytrace()
    assert out["d"][0] == 1.0 and out["d"][-1] == 50.0
    assert all(p >= c - 1e-9 >= g - 2e-9 for p, c, g in zip(out["pec"], out["copper"], out["galinstan"]))
    assert -out["galinstan"][-1] < 40.0


def test_short_straight_run():
    out = sw.straight_run(profile="ci", length=0.04, frequencies=[24e9, 26e9, 28e9])
    assert out["converged"]
    assert out["frequencies"] == [24e9, 26e9, 28e9]
    d10, c10 = out["curves"]["c10"]
    d30, c30 = out["curves"]["c30"]
    assert d10 < d30
    assert all(math.isfinite(v) for v in c10 + c30)
