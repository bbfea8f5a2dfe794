"""Detection amplitudes, Glauber rates and the direct/exchange split.

The two-photon amplitude at detection events ``p1``, ``p2`` is

    Phi = N / sqrt2 * (A12 + sign * A21),
    A12 = sum_{l, l'} w w' f(l, l') e1(l) e2(l'),   A21 = same with f(l', l),

where ``e_p(m, k) = delta(m, p.mode) exp(i(k x - k t))``. The coincidence rate
is ``w2 = 2 |Phi|^2`` summed over the polarization components a detector
accepts. ``N^2 (|A12|^2 + |A21|^2)`` is the classical independent-particle
(direct) part; the cross term ``2 sign N^2 Re(conj(A12) A21)`` is the exchange
part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .biphoton import BiphotonState
from .errors import ConfigError, UndersampledWindowError, UnknownModeError
from .modes import ModeLabel, mode
from .spectral import OnePhotonState, SpectralAmplitude, plane_waves

if TYPE_CHECKING:
    from .scenarios import ScanResult

SAMPLES_PER_BEAT = 8
MIN_WINDOW_SAMPLES = 64


def _modes(spec) -> tuple[ModeLabel, ...]:
    if isinstance(spec, (str, ModeLabel)):
        return (mode(spec),)
    out = tuple(mode(m) for m in spec)
    if not out:
        raise ConfigError("a detector must accept at least one mode")
    return out


@dataclass(frozen=True)
class DetectionPoint:
    """A detection event: accepted mode(s), position in the port and time.

    Several modes model a detector that does not resolve polarization
    (e.g. ``("cH", "cV")``).
    """

    mode: ModeLabel | tuple[ModeLabel, ...]
    x: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", _modes(self.mode))

    @property
    def modes(self) -> tuple[ModeLabel, ...]:
        return self.mode


@dataclass(frozen=True)
class Detector:
    """Detector placement inside a coincidence window (time left open)."""

    mode: ModeLabel | tuple[ModeLabel, ...]
    x: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", _modes(self.mode))

    @property
    def modes(self) -> tuple[ModeLabel, ...]:
        return self.mode


@dataclass(frozen=True)
class CoincidenceWindow:
    t_start: float
    t_end: float
    n_time_samples: int
    detectors: tuple[Detector, Detector]

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ConfigError("window needs t_end > t_start")
        if self.n_time_samples < MIN_WINDOW_SAMPLES:
            raise ConfigError(f"window needs at least {MIN_WINDOW_SAMPLES} time samples")
        dets = tuple(d if isinstance(d, Detector) else Detector(d) for d in self.detectors)
        if len(dets) != 2:
            raise ConfigError("a coincidence window has exactly two detectors")
        object.__setattr__(self, "detectors", dets)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_time_samples)

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / (self.n_time_samples - 1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_time_samples, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w


# -- one photon ---------------------------------------------------------------

def _photon(photon, at=None) -> OnePhotonState:
    if isinstance(photon, SpectralAmplitude):
        if at is None:
            raise ConfigError("a bare SpectralAmplitude needs the mode it occupies")
        return OnePhotonState.single(photon, at)
    return photon


def _photon_field(photon: OnePhotonState, m: ModeLabel, x, t) -> np.ndarray:
    if m not in photon.modes:
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape, dtype=complex)
    return plane_waves(photon.grid, x, t) @ photon.component(m)


def single_photon_wavefunction(photon, p: DetectionPoint, at=None) -> complex:
    """``Phi(mode, x, t)`` of a one-photon state; exactly 0 in modes it does not occupy."""
    photon = _photon(photon, at)
    if len(p.modes) != 1:
        raise ConfigError("wave function needs a single detected mode")
    return complex(_photon_field(photon, p.modes[0], p.x, p.t))


def first_order_rate(photon, p: DetectionPoint, at=None) -> float:
    """``w1 = sum over accepted modes of |Phi|^2``."""
    photon = _photon(photon, at)
    return float(sum(abs(complex(_photon_field(photon, m, p.x, p.t))) ** 2 for m in p.modes))


# -- two photons --------------------------------------------------------------

def _require_modes(state: BiphotonState, modes: Sequence[ModeLabel]) -> None:
    missing = [m for m in modes if m not in state.modes]
    if missing:
        raise UnknownModeError(f"detected modes {tuple(map(str, missing))} not in state modes "
                               f"{tuple(map(str, state.modes))}")


def pair_amplitudes(state: BiphotonState, m1, x1, t1, m2, x2, t2) -> tuple[np.ndarray, np.ndarray]:
    """``(A12, A21)`` on the outer grid ``t1 x t2`` for single modes ``m1``, ``m2``."""
    m1, m2 = mode(m1), mode(m2)
    t1 = np.atleast_1d(np.asarray(t1, dtype=float))
    t2 = np.atleast_1d(np.asarray(t2, dtype=float))
    if state.is_separable:
        p, q = state.factors
        p1, p2 = _photon_field(p, m1, x1, t1), _photon_field(p, m2, x2, t2)
        q1, q2 = _photon_field(q, m1, x1, t1), _photon_field(q, m2, x2, t2)
        return np.outer(p1, q2), np.outer(q1, p2)
    e1 = plane_waves(state.grid, x1, t1)
    e2 = plane_waves(state.grid, x2, t2)
    a12 = e1 @ state.block(m1, m2) @ e2.T
    a21 = e1 @ state.block(m2, m1).T @ e2.T
    return a12, a21


def two_photon_amplitude(state: BiphotonState, p1: DetectionPoint, p2: DetectionPoint) -> complex:
    """``Phi(p1, p2)``; satisfies ``Phi(p1, p2) = sign * Phi(p2, p1)``."""
    if len(p1.modes) != 1 or len(p2.modes) != 1:
        raise ConfigError("amplitude needs one detected mode per event")
    _require_modes(state, p1.modes + p2.modes)
    a12, a21 = pair_amplitudes(state, p1.modes[0], p1.x, p1.t, p2.modes[0], p2.x, p2.t)
    return complex(state.norm_factor / math.sqrt(2) * (a12 + int(state.stats) * a21)[0, 0])


def _rate_grids(state: BiphotonState, d1, t1, d2, t2, split: bool):
    """Rate (and direct/exchange parts) on the ``t1 x t2`` grid, summed over modes."""
    _require_modes(state, d1.modes + d2.modes)
    n2 = state.norm_factor**2
    s = int(state.stats)
    rate = direct = exchange = 0.0
    for m1 in d1.modes:
        for m2 in d2.modes:
            a12, a21 = pair_amplitudes(state, m1, d1.x, t1, m2, d2.x, t2)
            rate = rate + n2 * np.abs(a12 + s * a21) ** 2
            if split:
                direct = direct + n2 * (np.abs(a12) ** 2 + np.abs(a21) ** 2)
                exchange = exchange + 2 * s * n2 * np.real(np.conj(a12) * a21)
    return rate, direct, exchange


def second_order_rate(state: BiphotonState, p1: DetectionPoint, p2: DetectionPoint) -> float:
    """Glauber coincidence rate ``w2 = 2 sum |Phi|^2`` over accepted polarization components."""
    rate, _, _ = _rate_grids(state, p1, p1.t, p2, p2.t, split=False)
    return float(rate[0, 0])


def _check_decomposable(state: BiphotonState) -> None:
    if state.factors is None:
        raise ConfigError("exchange decomposition needs a separable state or an entangled state "
                          "built from single-photon factors (displaced-pair form)")


def exchange_decomposition(state: BiphotonState, p1: DetectionPoint, p2: DetectionPoint) -> tuple[float, float]:
    """``(direct, exchange)`` parts of the coincidence rate; they sum to ``w2``."""
    _check_decomposable(state)
    _, direct, exchange = _rate_grids(state, p1, p1.t, p2, p2.t, split=True)
    return float(direct[0, 0]), float(exchange[0, 0])


# -- detection windows --------------------------------------------------------

def _marginal_density(state: BiphotonState, m: ModeLabel) -> np.ndarray:
    """Spectral density of photons in mode ``m`` (either photon of the pair)."""
    w = state.grid.weights
    if state.is_separable:
        return sum(np.abs(ph.component(m)) ** 2 for ph in state.factors)
    rho = np.zeros(state.grid.n_points)
    for other in state.modes:
        rho += np.abs(state.block(m, other)) ** 2 @ w
        rho += w @ np.abs(state.block(other, m)) ** 2
    return rho


def beat_bandwidth(state: BiphotonState, modes: Sequence[ModeLabel]) -> float:
    """Spectral spread that sets the fastest time variation of the rate.

    Four times the rms width of the detected marginal spectrum, maximized over
    the given modes. Two packets of different colors in one mode widen it to
    cover their beat note.
    """
    k = state.grid.nodes
    w = state.grid.weights
    spread = 0.0
    for m in modes:
        rho = w * _marginal_density(state, m)
        tot = rho.sum()
        if tot <= 0:
            continue
        mean = (rho * k).sum() / tot
        rms = math.sqrt(max((rho * (k - mean) ** 2).sum() / tot, 0.0))
        spread = max(spread, 4.0 * rms)
    return spread


def check_sampling(state: BiphotonState, window: CoincidenceWindow) -> None:
    """Raise if the window has fewer than 8 samples per shortest beat period."""
    modes = [m for d in window.detectors for m in d.modes]
    _require_modes(state, modes)
    spread = beat_bandwidth(state, modes)
    if spread == 0:
        return
    max_step = 2 * math.pi / spread / SAMPLES_PER_BEAT
    if window.step > max_step:
        need = math.ceil((window.t_end - window.t_start) / max_step) + 1
        raise UndersampledWindowError(
            f"Nyquist guard: window step {window.step:.4g} exceeds {max_step:.4g} "
            f"({SAMPLES_PER_BEAT} samples per beat period at spread {spread:.4g}); "
            f"use at least {need} time samples"
        )


def windowed_decomposition(state: BiphotonState, window: CoincidenceWindow,
                           split: bool = True) -> tuple[float, float, float]:
    """``(rate, direct, exchange)`` integrated over ``(t1, t2)`` in the window squared."""
    if split:
        _check_decomposable(state)
    check_sampling(state, window)
    t = window.times
    w = window.weights
    d1, d2 = window.detectors
    rate, direct, exchange = _rate_grids(state, d1, t, d2, t, split)
    if not split:
        return float(w @ rate @ w), math.nan, math.nan
    return float(w @ rate @ w), float(w @ direct @ w), float(w @ exchange @ w)


def windowed_coincidence(state: BiphotonState, window: CoincidenceWindow) -> float:
    """Coincidence rate integrated over the detection window."""
    return windowed_decomposition(state, window, split=False)[0]


# -- summaries ----------------------------------------------------------------

def visibility(scan: "ScanResult") -> float:
    """Dip depth relative to the large-parameter baseline.

    The baseline is the rate at the largest ``|param|`` (averaged over ties).
    Returns ``(baseline - min) / baseline`` unless the scan rises above the
    baseline more than twice as far as it falls below it; then it reports the
    anti-dip ``(baseline - max) / baseline``, which is negative.
    """
    params = np.asarray(scan.params, dtype=float)
    rate = np.asarray(scan.rate, dtype=float)
    if params.size == 0:
        raise ConfigError("empty scan")
    far = np.abs(params)
    baseline = float(np.mean(rate[far == far.max()]))
    if baseline == 0:
        raise ZeroDivisionError("visibility undefined for zero baseline")
    dip = baseline - float(rate.min())
    peak = float(rate.max()) - baseline
    v = dip / baseline if dip >= 0.5 * peak else -peak / baseline
    return float(np.clip(v, -1.0, 1.0))


def amplitude_halfwidth(photon, at=None, tol: float = 1e-6, n_samples: int = 8192) -> float:
    """Smallest ``h`` with ``|V(t)| < tol * max|V|`` whenever ``|t - t_peak| > h``.

    Measured over one period ``2 pi / spacing`` of the sampled amplitude.
    """
    amp = _centered_envelope(_photon(photon, at), n_samples)
    half = n_samples // 2
    dt = 2 * math.pi / _photon(photon, at).grid.spacing / n_samples
    above = np.nonzero(amp > tol * amp.max())[0]
    return float(np.max(np.abs(above - half)) * dt)


def _centered_envelope(photon: OnePhotonState, n_samples: int) -> np.ndarray:
    period = 2 * math.pi / photon.grid.spacing
    t = np.linspace(-period / 2, period / 2, n_samples, endpoint=False)
    amp = np.sqrt(sum(np.abs(_photon_field(photon, m, 0.0, t)) ** 2 for m in photon.modes))
    return np.roll(amp, n_samples // 2 - int(np.argmax(amp)))


def photon_width(photon, at=None, tol: float = 1e-6, n_samples: int = 4096) -> float:
    """Smallest ``beta`` with ``|V(t) V(t + a)| <= tol * max|V|^2`` for all ``|a| > beta``.

    This makes the finite-support idealization ``V(t) V(t + a) = 0 for |a| > beta``
    hold to ``tol`` for packets (like Gaussians) without compact support. The
    hard spectral cut at the grid edges leaves slowly decaying time-domain
    tails, so a Gaussian needs its grid to reach about 8 bandwidths from the
    center before ``beta`` approaches the ideal ``2 sqrt(ln(1 / tol)) / (sqrt2 D)``.
    """
    photon = _photon(photon, at)
    amp = _centered_envelope(photon, n_samples)
    peak2 = amp.max() ** 2
    dt = 2 * math.pi / photon.grid.spacing / n_samples
    # max over t of |V(t)||V(t+a)| for each shift, via circular shifts
    shifts = np.arange(n_samples // 2)
    prod = np.array([np.max(amp * np.roll(amp, -s)) for s in shifts])
    above = np.nonzero(prod > tol * peak2)[0]
    return float((above.max() + 1) * dt) if above.size else 0.0


# -- displaced pairs ------------------------------------------------------------

def displaced_pair_rates(state: BiphotonState, network, window: CoincidenceWindow,
                         t_nodes=None) -> tuple[float, float, float]:
    """Windowed ``(rate, direct, exchange)`` of an entangled state via its displaced pairs.

    Each node ``t`` contributes the separable pair ``(P_t, Q_t)``; the pair
    amplitudes after ``network`` are ``A12(t) = P_t(d1) Q_t(d2)`` and
    ``A21(t) = Q_t(d1) P_t(d2)``. The exchange term is the double sum over
    nodes ``2 sign Re sum_{t, T} conj(c_t A12(t)) c_T A21(T)``, which factors
    into products of the single sums ``sum_t c_t A(t)``.
    """
    from .biphoton import displaced_pair_decomposition
    from .optics import _as_network, propagate

    net = _as_network(network)
    pairs = displaced_pair_decomposition(state, t_nodes)
    d1, d2 = window.detectors
    waves1 = plane_waves(state.grid, d1.x, window.times)
    waves2 = plane_waves(state.grid, d2.x, window.times)
    s = int(state.stats)
    rate = direct = exchange = 0.0
    w = window.weights
    for m1 in d1.modes:
        for m2 in d2.modes:
            a12 = np.zeros((window.n_time_samples,) * 2, dtype=complex)
            a21 = np.zeros_like(a12)
            for pair in pairs:
                p, q = propagate(net, pair.p), propagate(net, pair.q)
                c = pair.dt * pair.weight
                a12 += c * np.outer(waves1 @ p.component(m1), waves2 @ q.component(m2))
                a21 += c * np.outer(waves1 @ q.component(m1), waves2 @ p.component(m2))
            rate += w @ (np.abs(a12 + s * a21) ** 2) @ w
            direct += w @ (np.abs(a12) ** 2 + np.abs(a21) ** 2) @ w
            exchange += w @ (2 * s * np.real(np.conj(a12) * a21)) @ w
    return float(rate), float(direct), float(exchange)
