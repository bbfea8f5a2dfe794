import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonwf import (BOSON, FERMION, BiphotonState, CoincidenceWindow, ConfigError, DetectionPoint,
                      OnePhotonState, UndersampledWindowError, UnknownModeError, ZeroNormError,
                      apply_to_state, entangled_gaussian_state, exchange_decomposition, first_order_rate,
                      photon_width, propagate, second_order_rate, separable_state, single_photon_wavefunction,
                      two_photon_amplitude, visibility, wavepacket_amplitude, windowed_coincidence,
                      windowed_decomposition)
from photonwf.correlation import amplitude_halfwidth, check_sampling, displaced_pair_rates
from photonwf.scenarios import ScanResult, eraser_network, hom_network
from photonwf.spectral import apply_delay_phase, make_gaussian_amplitude


def test_single_photon_wavefunction(packet):
    ph = OnePhotonState.single(packet, "a")
    for t in (-1.0, 0.0, 0.7):
        p = DetectionPoint("a", 0.3, t)
        assert single_photon_wavefunction(ph, p) == pytest.approx(wavepacket_amplitude(packet, 0.3, t), abs=1e-15)
        assert single_photon_wavefunction(ph, DetectionPoint("b", 0.3, t)) == 0
        assert first_order_rate(ph, p) == pytest.approx(abs(wavepacket_amplitude(packet, 0.3, t)) ** 2, rel=1e-12)
    with pytest.raises(ConfigError):
        single_photon_wavefunction(packet, DetectionPoint("a"))


def test_wavefunction_after_beamsplitter(packet):
    out = propagate(hom_network(0.0), OnePhotonState.single(packet, "a"))
    p = DetectionPoint("c", 0.0, 0.4)
    assert single_photon_wavefunction(out, p) == pytest.approx(-1j * wavepacket_amplitude(packet, 0.0, 0.4) / math.sqrt(2), abs=1e-15)


def test_total_first_order_rate_is_conserved(packet):
    out = propagate(hom_network(1.0), OnePhotonState.single(packet, "a"))
    x = np.linspace(-40, 40, 4001)
    totals = []
    for t in (-2.0, 0.0, 3.0):
        dens = sum(np.abs(single_photon_wavefunction(out, DetectionPoint(m, xx, t))) ** 2 for m in ("c", "d") for xx in x)
        totals.append(dens * (x[1] - x[0]))
    assert np.allclose(totals, totals[0], rtol=1e-10)


def test_input_region_amplitude(packet):
    q = apply_delay_phase(packet, 1.1)
    s = separable_state(packet, "a", q, "b")
    p1, p2 = DetectionPoint("a", 0.0, 0.2), DetectionPoint("b", 0.0, 0.9)
    expected = wavepacket_amplitude(packet, 0.0, 0.2) * wavepacket_amplitude(q, 0.0, 0.9) / math.sqrt(2)
    assert two_photon_amplitude(s, p1, p2) == pytest.approx(expected, abs=1e-14)


def test_hom_cross_port_amplitude_vanishes(packet):
    out = apply_to_state(hom_network(0.0), separable_state(packet, "a", packet, "b"))
    for t1, t2 in [(0.0, 0.0), (0.3, -0.5), (1.0, 1.2)]:
        assert abs(two_photon_amplitude(out, DetectionPoint("c", 0, t1), DetectionPoint("d", 0, t2))) < 1e-14
    with pytest.raises(UnknownModeError):
        second_order_rate(out, DetectionPoint("a"), DetectionPoint("d"))


@settings(max_examples=30, deadline=None)
@given(dt=st.floats(-3, 3), t1=st.floats(-2, 2), t2=st.floats(-2, 2), stats=st.sampled_from([BOSON, FERMION]))
def test_exchange_symmetry_of_amplitude(packet, dt, t1, t2, stats):
    q = apply_delay_phase(packet, 0.8)
    out = apply_to_state(hom_network(dt), separable_state(packet, "a", q, "b", stats))
    p1, p2 = DetectionPoint("c", 0.1, t1), DetectionPoint("d", -0.2, t2)
    a = two_photon_amplitude(out, p1, p2)
    b = two_photon_amplitude(out, p2, p1)
    assert abs(a - int(stats) * b) < 1e-13


@settings(max_examples=30, deadline=None)
@given(dt=st.floats(-3, 3), t1=st.floats(-2, 2), t2=st.floats(-2, 2), sigma=st.floats(0.3, 10))
def test_rate_is_direct_plus_exchange_and_nonnegative(packet, dt, t1, t2, sigma):
    s = entangled_gaussian_state(packet, "a", packet, "b", sigma, 20.0)
    out = apply_to_state(hom_network(dt), s)
    for m1, m2 in (("c", "d"), ("c", "c")):
        p1, p2 = DetectionPoint(m1, 0, t1), DetectionPoint(m2, 0, t2)
        w2 = second_order_rate(out, p1, p2)
        direct, exchange = exchange_decomposition(out, p1, p2)
        assert w2 >= 0
        assert w2 == pytest.approx(direct + exchange, abs=1e-12 * max(1.0, direct))


def test_eraser_without_pbs_has_no_interference_term(packet):
    dt = 0.9
    out = apply_to_state(eraser_network(dt, with_diagonal_pbs=False), separable_state(packet, "aH", packet, "bV"))
    t1, t2 = 0.3, 0.6
    vp = lambda t: wavepacket_amplitude(packet, 0.0, t)
    phi2 = sum(abs(two_photon_amplitude(out, DetectionPoint(m1, 0, t1), DetectionPoint(m2, 0, t2))) ** 2
               for m1 in ("cH", "cV") for m2 in ("dH", "dV"))
    expected = (abs(vp(t1) * vp(t2 - dt)) ** 2 + abs(vp(t1 - dt) * vp(t2)) ** 2) / 8
    assert phi2 == pytest.approx(expected, rel=1e-12)
    w2 = second_order_rate(out, DetectionPoint(("cH", "cV"), 0, t1), DetectionPoint(("dH", "dV"), 0, t2))
    assert w2 == pytest.approx(2 * phi2, rel=1e-12)


def test_hom_pointwise_decomposition(packet):
    out = apply_to_state(hom_network(0.0), separable_state(packet, "a", packet, "b"))
    p1, p2 = DetectionPoint("c", 0, 0.2), DetectionPoint("d", 0, -0.3)
    direct, exchange = exchange_decomposition(out, p1, p2)
    assert exchange == pytest.approx(-direct, rel=1e-12)
    same = DetectionPoint("c", 0, -0.3)
    d_same, e_same = exchange_decomposition(out, p1, same)
    assert e_same == pytest.approx(d_same, rel=1e-12)


def test_fermion_cross_port_doubles(packet):
    q = apply_delay_phase(packet, 0.0)
    b = apply_to_state(hom_network(0.0), separable_state(packet, "a", q, "b", BOSON))
    f = apply_to_state(hom_network(0.0), separable_state(packet, "a", q, "b", FERMION))
    p1, p2 = DetectionPoint("c", 0, 0.1), DetectionPoint("d", 0, 0.4)
    direct, _ = exchange_decomposition(b, p1, p2)
    assert second_order_rate(f, p1, p2) == pytest.approx(2 * direct, rel=1e-12)


def test_decomposition_needs_factors(grid, rng):
    small = type(grid)(4.0, 16.0, 32)
    f = rng.normal(size=(2, 32, 2, 32)) + 0j
    s = BiphotonState(("a", "b"), small, f)
    with pytest.raises(ConfigError):
        exchange_decomposition(s, DetectionPoint("a"), DetectionPoint("b"))
    assert second_order_rate(s, DetectionPoint("a"), DetectionPoint("b")) >= 0


def test_disjoint_spectra_have_no_exchange(grid):
    p = make_gaussian_amplitude(7.0, 0.3, grid)
    q = make_gaussian_amplitude(13.0, 0.3, grid)
    out = apply_to_state(hom_network(0.0), separable_state(p, "a", q, "b"))
    win = CoincidenceWindow(-30, 30, 1024, ("c", "d"))
    rate, direct, exchange = windowed_decomposition(out, win)
    assert abs(exchange) < 1e-12 * direct


@pytest.mark.parametrize("dt", [0.0, 0.5, 1.0, 2.0])
def test_windowed_hom_matches_closed_form(wide_packet, dt):
    out = apply_to_state(hom_network(dt), separable_state(wide_packet, "a", wide_packet, "b"))
    win = CoincidenceWindow(-30, 30, 768, ("c", "d"))
    rate, direct, exchange = windowed_decomposition(out, win)
    # time integrals of |V|^2 give 2 pi each; the overlap of the delayed packets is e^{-dt^2/2}
    assert rate == pytest.approx(2 * math.pi**2 * (1 - math.exp(-(dt**2))), abs=1e-8)
    assert direct == pytest.approx(2 * math.pi**2, rel=1e-9)
    assert windowed_coincidence(out, win) == pytest.approx(rate, abs=1e-12)


def test_same_port_equals_cross_port_when_distinguishable(packet):
    out = apply_to_state(hom_network(10.0), separable_state(packet, "a", packet, "b"))
    cross = windowed_coincidence(out, CoincidenceWindow(-30, 30, 512, ("c", "d")))
    same = windowed_coincidence(out, CoincidenceWindow(-30, 30, 512, ("c", "c")))
    assert same == pytest.approx(cross, rel=1e-6)


def test_nyquist_guard(packet):
    out = apply_to_state(hom_network(0.0), separable_state(packet, "a", packet, "b"))
    with pytest.raises(UndersampledWindowError, match="Nyquist guard"):
        windowed_decomposition(out, CoincidenceWindow(-30, 30, 64, ("c", "d")))
    check_sampling(out, CoincidenceWindow(-30, 30, 512, ("c", "d")))


def test_window_validation():
    with pytest.raises(ConfigError):
        CoincidenceWindow(1.0, 0.0, 128, ("c", "d"))
    with pytest.raises(ConfigError):
        CoincidenceWindow(0.0, 1.0, 10, ("c", "d"))
    with pytest.raises(ConfigError):
        CoincidenceWindow(0.0, 1.0, 128, ("c",))


def _scan(params, rate):
    z = np.zeros(len(params))
    return ScanResult(np.asarray(params, float), np.asarray(rate, float), z, z)


def test_visibility_cases():
    p = np.linspace(-5, 5, 11)
    assert visibility(_scan(p, np.ones(11))) == 0.0
    dip = 1 - np.exp(-p**2)
    assert visibility(_scan(p, dip)) == pytest.approx(1.0, abs=1e-10)
    assert visibility(_scan(p, 1 + np.exp(-p**2))) == pytest.approx(-1.0, abs=1e-10)
    with pytest.raises(ZeroDivisionError):
        visibility(_scan(p, np.zeros(11)))


def test_photon_widths(wide_packet):
    # |V(t)| = exp(-t^2) for unit bandwidth
    assert amplitude_halfwidth(wide_packet, "a") == pytest.approx(math.sqrt(math.log(1e6)), rel=1e-2)
    assert photon_width(wide_packet, "a") == pytest.approx(math.sqrt(2 * math.log(1e6)), rel=1e-2)


def test_displaced_pairs_reproduce_windowed_rates(packet):
    s = entangled_gaussian_state(packet, "a", packet, "b", 1.0, 20.0)
    net = hom_network(0.5)
    win = CoincidenceWindow(-30, 30, 512, ("c", "d"))
    dense = windowed_decomposition(apply_to_state(net, s), win)
    pairs = displaced_pair_rates(s, net, win)
    assert np.allclose(pairs, dense, rtol=1e-6)


def test_fermion_same_packet_same_mode_refused(packet):
    with pytest.raises(ZeroNormError):
        separable_state(packet, "a", packet, "a", FERMION)
