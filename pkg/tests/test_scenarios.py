import dataclasses
import math

import numpy as np
import pytest

from photonwf import BOSON, FERMION, ConfigError, NumericalGuardError, default_config, emit_csv, run_scenario
from photonwf.correlation import photon_width
from photonwf.scenarios import (CSV_HEADER, SCENARIOS, ScanResult, central_overlap, csv_text, format_config,
                                format_number, packets, parse_config_text, pc_exchange_overlap)


def small(name, **kw):
    return default_config(name, **kw)


def test_defaults_validate():
    for name in SCENARIOS:
        cfg = default_config(name)
        if SCENARIOS[name].entangled(cfg) and cfg.sigma is None:
            continue
        cfg.validate()


@pytest.mark.parametrize("change, field", [
    (dict(steps=1), "steps"),
    (dict(scan_min=3.0, scan_max=3.0), "max"),
    (dict(axis="tau1"), "axis"),
    (dict(sigma=1.0), "sigma"),
    (dict(bandwidth=-1.0), "bandwidth"),
    (dict(center=math.nan), "center"),
])
def test_validation_names_the_field(change, field):
    with pytest.raises(ConfigError, match=field):
        dataclasses.replace(default_config("hom"), **change).validate()


def test_entangled_needs_sigma():
    with pytest.raises(ConfigError, match="sigma"):
        default_config("hom_entangled", sigma=None).validate()
    with pytest.raises(ConfigError, match="sigma"):
        default_config("postponed_compensation", entangled=True).validate()


def test_unknown_scenario():
    with pytest.raises(ConfigError, match="name"):
        default_config("nope")


def test_parse_config_text():
    cfg = parse_config_text("[scenario]\nname = hom\nstats = fermion\n[scan]\nmin = -2\nmax = 2\nsteps = 5\n")
    assert cfg.stats == FERMION and cfg.scan_min == -2.0 and cfg.steps == 5
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("[scenario]\nname = hom\ncolour = red\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config_text("[scenario]\nname = hom\n[extra]\na = 1\n")
    with pytest.raises(ConfigError, match="steps"):
        parse_config_text("[scenario]\nname = hom\n[scan]\nsteps = many\n")
    with pytest.raises(ConfigError, match="name"):
        parse_config_text("[grid]\nn_points = 64\n")


def test_format_config_round_trip():
    for name, kw in [("hom", {}), ("postponed_compensation", dict(entangled=True, sigma=0.5)),
                     ("eraser", dict(with_diagonal_pbs=False)), ("no_meeting", {})]:
        cfg = default_config(name, **kw)
        assert parse_config_text(format_config(cfg)) == cfg


def test_hom_scan_examples():
    r = run_scenario(small("hom", scan_min=0.0, scan_max=10.0, steps=3))
    rate = dict(zip(r.params, r.rate))
    base = rate[10.0]
    assert rate[0.0] <= 1e-6 * base
    assert r.extra["same_port_rate"][-1] == pytest.approx(base, rel=1e-6)
    assert r.extra["same_port_rate"][0] == pytest.approx(2 * r.direct[0], rel=1e-6)
    assert rate[5.0] == pytest.approx(base * (1 - math.exp(-25)), rel=1e-6)
    assert r.check_invariants() == []


def test_fermion_hom_is_an_anti_dip():
    r = run_scenario(small("hom", stats=FERMION, scan_min=-6.0, scan_max=6.0, steps=5))
    assert r.visibility() == pytest.approx(-1.0, abs=1e-6)
    assert r.check_invariants() == []


def test_entangled_hom_limits():
    wide = run_scenario(small("hom_entangled", sigma=1e6, scan_min=0.0, scan_max=2.0, steps=3))
    plain = run_scenario(small("hom", scan_min=0.0, scan_max=2.0, steps=3))
    assert np.allclose(wide.rate, plain.rate, rtol=1e-5, atol=1e-5 * plain.rate.max())
    r = run_scenario(small("hom_entangled", sigma=1.0, scan_min=0.0, scan_max=8.0, steps=3))
    assert r.rate[0] <= 1e-6 * r.rate[-1]
    assert abs(r.exchange[-1]) <= 1e-8 * r.direct[-1]


def test_sigma_scan_builds_each_state():
    r = run_scenario(small("hom_entangled", axis="sigma", delta_t=0.5, scan_min=0.5, scan_max=4.0, steps=3))
    # equal-width Gaussians: the kernel only reshapes the sum frequency, which is
    # independent of the difference frequency that sets the dip, so
    # exchange / direct = -exp(-dt^2) for every sigma
    assert np.allclose(-r.exchange / r.direct, math.exp(-0.25), rtol=1e-6)


def test_eraser_with_and_without_pbs():
    with_pbs = run_scenario(small("eraser", scan_min=0.0, scan_max=8.0, steps=3))
    assert with_pbs.rate[0] <= 1e-6 * with_pbs.rate[-1]
    without = run_scenario(small("eraser", with_diagonal_pbs=False, scan_min=-3.0, scan_max=3.0, steps=7))
    assert np.ptp(without.rate) <= 1e-6 * without.rate.mean()


def test_postponed_compensation_separable_is_flat():
    r = run_scenario(small("postponed_compensation", scan_min=8.0, scan_max=12.0, steps=5))
    assert r.visibility() <= 1e-6
    mid = int(np.argmin(np.abs(r.params - 10.0)))
    assert abs(r.exchange[mid]) <= 1e-8 * r.direct[mid]


def test_postponed_compensation_pair_overlap():
    cfg = small("postponed_compensation")
    beta = photon_width(packets(cfg)[0], "a")
    T = np.linspace(-15.0, 5.0, 41)
    ov = pc_exchange_overlap(cfg, [0.0], T)[0]
    assert np.all(ov <= 1 + 1e-12)
    # the exchange product survives only for |tau1 + (T - t)| < beta
    outside = np.abs(cfg.tau1 + T) >= beta
    assert np.all(ov[outside] <= 1e-6)
    assert ov[np.argmin(np.abs(T + cfg.tau1))] == pytest.approx(1.0, abs=1e-3)


def test_no_meeting():
    cfg = small("no_meeting", scan_min=0.0, scan_max=20.0, steps=3)
    r = run_scenario(cfg)
    assert r.visibility() == pytest.approx(1.0, abs=1e-6)
    assert np.max(r.extra["central_overlap"]) <= 1e-12
    assert central_overlap(cfg) <= 1e-12
    assert r.check_invariants() == []


def test_scenarios_are_deterministic_and_thread_safe():
    cfg = small("hom", steps=9)
    a = csv_text(run_scenario(cfg))
    b = csv_text(run_scenario(cfg))
    c = csv_text(run_scenario(cfg, threads=3))
    assert a == b == c


def test_csv_format(tmp_path):
    r = run_scenario(small("hom", scan_min=-1.0, scan_max=1.0, steps=3))
    path = tmp_path / "out.csv"
    emit_csv(r, path)
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.all(np.diff(rows[:, 0]) > 0)
    assert not any("e" in v.lower() for line in lines[1:] for v in line.split(","))
    ref = np.column_stack([r.params, r.rate, r.direct, r.exchange])
    # 12 significant digits bound the round-trip error by half a unit in the 12th digit
    assert np.allclose(rows, ref, rtol=5e-12, atol=0)


def test_csv_rows_sorted_even_for_descending_scan():
    z = np.zeros(3)
    r = ScanResult(np.array([2.0, 0.0, 1.0]), np.array([3.0, 1.0, 2.0]), np.array([3.0, 1.0, 2.0]), z)
    lines = csv_text(r).splitlines()
    assert [float(l.split(",")[0]) for l in lines[1:]] == [0.0, 1.0, 2.0]


def test_format_number():
    assert format_number(-0.0) == "0.00000000000"
    assert format_number(1.0) == "1.00000000000"
    assert format_number(1234.5678901234567) == "1234.56789012"
    assert "e" not in format_number(7e-32)
    assert float(format_number(7.123456789012345e-32)) == pytest.approx(7.12345678901e-32, rel=1e-12)


def test_csv_refuses_broken_split():
    r = ScanResult(np.array([0.0, 1.0]), np.array([1.0, 1.0]), np.array([1.0, 0.5]), np.zeros(2))
    with pytest.raises(NumericalGuardError):
        csv_text(r)
    assert r.check_invariants()


def test_invariants_flag_negative_rate():
    r = ScanResult(np.array([0.0, 1.0]), np.array([-1.0, 1.0]), np.array([-1.0, 1.0]), np.zeros(2))
    assert any("negative" in p for p in r.check_invariants())


def test_boson_default_is_boson():
    assert default_config("hom").stats == BOSON
