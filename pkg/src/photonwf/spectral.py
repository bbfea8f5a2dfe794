"""Frequency grids, one-photon spectral amplitudes and wave-packet evaluation.

Units: c = 1, so the angular frequency of wavenumber ``k`` is ``k`` itself and
times and lengths share one unit. The field prefactor of each plane-wave mode
is set to 1, so rates come out in arbitrary units; only ratios and zeros are
physical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import optimize

from .errors import ConfigError, GridMismatchError, TruncationError, UnknownModeError
from .modes import ModeLabel, mode

NORM_TOL = 1e-10
TRUNCATION_TOL = 1e-8


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform wavenumber grid with quadrature weights.

    ``rule="trapezoid"`` approximates integrals over ``[k_min, k_max]``.
    ``rule="discrete"`` gives unit weights, so the same machinery evaluates
    plain mode sums over a handful of discrete frequencies.
    """

    k_min: float
    k_max: float
    n_points: int
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.rule not in ("trapezoid", "discrete"):
            raise ConfigError(f"unknown quadrature rule {self.rule!r}")
        if not (math.isfinite(self.k_min) and math.isfinite(self.k_max)):
            raise ConfigError("grid bounds must be finite")
        if self.k_min <= 0:
            raise ConfigError(f"k_min must be positive, got {self.k_min}")
        if self.rule == "trapezoid":
            if self.n_points < 16:
                raise ConfigError(f"n_points must be >= 16, got {self.n_points}")
            if self.k_max <= self.k_min:
                raise ConfigError("k_max must exceed k_min")
        elif self.n_points < 1 or (self.n_points > 1 and self.k_max <= self.k_min):
            raise ConfigError("discrete grid needs n_points >= 1 and k_max > k_min")

    @classmethod
    def discrete(cls, values: Iterable[float]) -> "FrequencyGrid":
        """Unit-weight grid on equally spaced values (mode sums, no integration)."""
        v = np.asarray(list(values), dtype=float)
        if v.size > 1 and not np.allclose(np.diff(v), v[1] - v[0], rtol=1e-12, atol=0):
            raise ConfigError("discrete grid values must be equally spaced")
        return cls(float(v[0]), float(v[-1]), int(v.size), rule="discrete")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / max(self.n_points - 1, 1)

    @property
    def weights(self) -> np.ndarray:
        if self.rule == "discrete":
            return np.ones(self.n_points)
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    def refined(self) -> "FrequencyGrid":
        """Same span with the spacing halved."""
        return FrequencyGrid(self.k_min, self.k_max, 2 * self.n_points - 1, self.rule)

    def require_same(self, other: "FrequencyGrid") -> None:
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


@dataclass(frozen=True, eq=False)
class SpectralAmplitude:
    """Normalized one-photon amplitude ``g(k)`` tabulated on a grid."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ConfigError(f"expected {self.grid.n_points} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: FrequencyGrid, fn, normalize: bool = True) -> "SpectralAmplitude":
        values = np.asarray(fn(grid.nodes), dtype=complex)
        if normalize:
            values = values / math.sqrt(_norm2(grid, values))
        return cls(grid, values)

    @property
    def norm(self) -> float:
        return math.sqrt(_norm2(self.grid, self.values))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol

    def mean_frequency(self) -> float:
        p = self.grid.weights * np.abs(self.values) ** 2
        return float(np.sum(p * self.grid.nodes) / np.sum(p))


def _norm2(grid: FrequencyGrid, values: np.ndarray) -> float:
    return float(np.sum(grid.weights * np.abs(values) ** 2))


def gaussian_tail_mass(center_freq: float, bandwidth: float, k_min: float, k_max: float) -> float:
    """Probability of a Gaussian |g|^2 (std ``bandwidth``) lying outside [k_min, k_max]."""
    s = bandwidth * math.sqrt(2.0)
    return 0.5 * math.erfc((center_freq - k_min) / s) + 0.5 * math.erfc((k_max - center_freq) / s)


def make_gaussian_amplitude(center_freq: float, bandwidth: float, grid: FrequencyGrid) -> SpectralAmplitude:
    """Gaussian packet with |g|^2 of standard deviation ``bandwidth``, normalized on ``grid``."""
    if not bandwidth > 0:
        raise ConfigError(f"bandwidth must be positive, got {bandwidth}")
    tail = gaussian_tail_mass(center_freq, bandwidth, grid.k_min, grid.k_max)
    if tail > TRUNCATION_TOL:
        raise TruncationError(
            f"grid [{grid.k_min}, {grid.k_max}] truncates {tail:.3g} of the packet's probability "
            f"(limit {TRUNCATION_TOL:g}); widen it to cover center +/- 6 bandwidths"
        )
    return SpectralAmplitude.from_function(
        grid, lambda k: np.exp(-((k - center_freq) ** 2) / (4.0 * bandwidth**2))
    )


def inner_product(p: SpectralAmplitude, q: SpectralAmplitude) -> complex:
    """Overlap ``sum_k w_k conj(p(k)) q(k)``."""
    p.grid.require_same(q.grid)
    return complex(np.sum(p.grid.weights * np.conj(p.values) * q.values))


def apply_delay_phase(g: SpectralAmplitude, delay: float) -> SpectralAmplitude:
    """Delay a packet in time: multiply by exp(i k delay)."""
    return SpectralAmplitude(g.grid, g.values * np.exp(1j * g.grid.nodes * delay))


def plane_waves(grid: FrequencyGrid, x, t) -> np.ndarray:
    """Weighted plane-wave factors ``w_k exp(i(k x - k t))``, shape ``broadcast(x, t) + (n,)``."""
    x = np.asarray(x, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    k = grid.nodes
    return grid.weights * np.exp(1j * k * (x - t))


def wavepacket_amplitude(g: SpectralAmplitude, x, t):
    """Evaluate ``V(x, t) = sum_k w_k g(k) exp(i(k x - k t))``.

    ``x`` and ``t`` broadcast against each other; scalars give a Python complex.
    """
    out = plane_waves(g.grid, x, t) @ g.values
    return complex(out) if out.ndim == 0 else out


def envelope_halfwidth(g: SpectralAmplitude, x: float = 0.0, n_samples: int = 2001) -> float:
    """1/e half-width in time of ``|V(x, t)|^2`` around its peak.

    For a Gaussian packet of bandwidth D this is ``1 / (sqrt(2) D)``.
    """
    span = 0.5 * math.pi / g.grid.spacing
    t = np.linspace(x - span, x + span, n_samples)
    i2 = np.abs(wavepacket_amplitude(g, x, t)) ** 2
    i_pk = int(np.argmax(i2))
    level = i2[i_pk] / math.e

    def excess(tt):
        return abs(wavepacket_amplitude(g, x, tt)) ** 2 - level

    right = i_pk + int(np.argmax(i2[i_pk:] < level))
    left = i_pk - int(np.argmax(i2[i_pk::-1] < level))
    t_right = optimize.brentq(excess, t[right - 1], t[right], xtol=1e-14)
    t_left = optimize.brentq(excess, t[left], t[left + 1], xtol=1e-14)
    return 0.5 * (t_right - t_left)


@dataclass(frozen=True, eq=False)
class OnePhotonState:
    """One-photon spectral amplitude spread over several modes.

    ``values[i]`` is the amplitude in ``modes[i]``. A photon prepared in a single
    port is ``OnePhotonState.single(g, mode)``; linear networks spread it out.
    """

    modes: tuple[ModeLabel, ...]
    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        modes = tuple(mode(m) for m in self.modes)
        if len(set(modes)) != len(modes):
            raise ConfigError(f"duplicate modes in {modes}")
        v = np.array(self.values, dtype=complex).reshape(len(modes), self.grid.n_points)
        v.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "values", v)

    @classmethod
    def single(cls, g: SpectralAmplitude, at) -> "OnePhotonState":
        return cls((mode(at),), g.grid, g.values[None, :])

    @classmethod
    def from_components(cls, grid: FrequencyGrid, comps: Mapping) -> "OnePhotonState":
        items = sorted((mode(m), v) for m, v in comps.items())
        return cls(tuple(m for m, _ in items), grid, np.array([v for _, v in items]))

    def index(self, m) -> int:
        m = mode(m)
        try:
            return self.modes.index(m)
        except ValueError:
            raise UnknownModeError(f"mode {m} not in {tuple(map(str, self.modes))}") from None

    def component(self, m) -> np.ndarray:
        """Amplitude in mode ``m``; zeros for modes the photon never reaches."""
        m = mode(m)
        if m not in self.modes:
            return np.zeros(self.grid.n_points, dtype=complex)
        return self.values[self.modes.index(m)]

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.grid.weights * np.abs(self.values) ** 2)))

    def delayed(self, delay: float) -> "OnePhotonState":
        return OnePhotonState(self.modes, self.grid, self.values * np.exp(1j * self.grid.nodes * delay))
