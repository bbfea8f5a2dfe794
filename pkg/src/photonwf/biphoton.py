"""Two-photon states over labeled modes.

The pair amplitude ``f`` is stored as a dense array of shape ``(M, n, M, n)``
indexed ``[mode, k, mode', k']`` and is *not* symmetrized; exchange symmetry
enters only when the state is detected (see :func:`symmetrized_amplitude`).
The state is ``N * sum f(l, l') a+(l) a+(l') |vac>`` with ``N`` fixed by
``<T|T> = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, UnknownModeError, ZeroNormError
from .modes import BOSON, ExchangeStatistics, ModeLabel, mode
from .spectral import FrequencyGrid, OnePhotonState, SpectralAmplitude

MAX_GRID_POINTS = 1024
NORM_FACTOR_TOL = 1e-9
PROBABILITY_TOL = 1e-8
MAX_PAIR_NODES = 20001


def _swap(f: np.ndarray) -> np.ndarray:
    """``f(l', l)`` as an array indexed like ``f(l, l')``."""
    return f.transpose(2, 3, 0, 1)


def normalization_sums(f: np.ndarray, grid: FrequencyGrid) -> tuple[float, complex]:
    """Direct and exchange double sums ``sum |f|^2`` and ``sum conj(f(l',l)) f(l,l')``."""
    w = grid.weights
    ww = w[None, :, None, None] * w[None, None, None, :]
    direct = float(np.sum(ww * np.abs(f) ** 2))
    cross = complex(np.sum(ww * np.conj(_swap(f)) * f))
    return direct, cross


def normalization_factor(f: np.ndarray, grid: FrequencyGrid, stats=BOSON) -> float:
    """``(sum |f|^2 + sign * sum conj(f(l',l)) f(l,l'))^(-1/2)``."""
    return _norm_from_sums(*normalization_sums(f, grid), stats)


def _norm_from_sums(direct: float, cross: complex, stats) -> float:
    total = direct + int(stats) * cross.real
    if not total > 1e-300 or total <= 1e-14 * max(direct, 1e-300):
        raise ZeroNormError("two-photon amplitude has zero norm under the chosen exchange statistics")
    return 1.0 / math.sqrt(total)


@dataclass(frozen=True)
class EntanglementKernel:
    """Gaussian frequency-sum kernel ``exp(-(k + k' - peak_sum_freq)^2 / sigma^2)``."""

    sigma: float
    peak_sum_freq: float

    def __call__(self, k, kp):
        return np.exp(-((k + kp - self.peak_sum_freq) ** 2) / self.sigma**2)


@dataclass(frozen=True, eq=False)
class BiphotonState:
    """``N * sum f(l, l') a+(l) a+(l') |vac>`` over ``modes`` x ``grid``.

    ``f`` may be ``None`` when the state is given by ``factors`` (and, for an
    entangled pair, ``kernel``): ``f = kernel(k, k') P(m, k) Q(m', k')``. The
    dense array is then built only if something asks for it; norms, blocks
    and network propagation go through the factors instead.
    """

    modes: tuple[ModeLabel, ...]
    grid: FrequencyGrid
    f: np.ndarray | None = field(repr=False)
    stats: ExchangeStatistics = BOSON
    norm_factor: float | None = None
    entanglement_width: float | None = None
    # provenance used by the exchange decomposition: the two single-photon
    # factors (before the kernel, for entangled states) and the kernel itself
    factors: tuple[OnePhotonState, OnePhotonState] | None = field(default=None, repr=False)
    kernel: EntanglementKernel | None = None

    def __post_init__(self):
        modes = tuple(mode(m) for m in self.modes)
        if len(set(modes)) != len(modes):
            raise ConfigError(f"duplicate modes {modes}")
        n = self.grid.n_points
        if n > MAX_GRID_POINTS:
            raise ConfigError(f"pair grid {n}x{n} exceeds the {MAX_GRID_POINTS}^2 limit")
        stats = ExchangeStatistics.parse(self.stats)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "stats", stats)
        if self.f is None:
            if self.factors is None:
                raise ConfigError("f can only be omitted for a state given by its factors")
            p, q = self.factors
            for ph in (p, q):
                ph.grid.require_same(self.grid)
                if not set(ph.modes) <= set(modes):
                    raise ConfigError(f"factor modes {tuple(map(str, ph.modes))} not in state modes")
            object.__delattr__(self, "f")  # built on demand by __getattr__
            if self.kernel is None:
                expected = separable_norm_factor(p, q, stats)
            else:
                expected = _norm_from_sums(*self._block_sums(), stats)
        else:
            f = np.array(self.f, dtype=complex)
            if f.shape != (len(modes), n, len(modes), n):
                raise ConfigError(f"f has shape {f.shape}, expected {(len(modes), n, len(modes), n)}")
            f.setflags(write=False)
            object.__setattr__(self, "f", f)
            expected = normalization_factor(f, self.grid, stats)
        if self.norm_factor is None:
            object.__setattr__(self, "norm_factor", expected)
        elif abs(self.norm_factor - expected) > NORM_FACTOR_TOL * expected:
            raise ConfigError(f"norm_factor {self.norm_factor} disagrees with {expected}")
        if self.kernel is not None and self.entanglement_width is None:
            object.__setattr__(self, "entanglement_width", self.kernel.sigma)

    def __getattr__(self, name):
        if name != "f":
            raise AttributeError(name)
        p, q = self.factors
        f = _pair_array(self.modes, self.grid, p, q)
        if self.kernel is not None:
            f *= self.kernel_matrix()[None, :, None, :]
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        return f

    @property
    def is_dense(self) -> bool:
        """Whether the full ``(M, n, M, n)`` array is held in memory."""
        return "f" in self.__dict__

    def index(self, m) -> int:
        m = mode(m)
        try:
            return self.modes.index(m)
        except ValueError:
            raise UnknownModeError(f"mode {m} not in state modes {tuple(map(str, self.modes))}") from None

    def block(self, m1, m2) -> np.ndarray:
        """``f((m1, k), (m2, k'))`` as an ``(n, n)`` array; zeros for absent modes."""
        m1, m2 = mode(m1), mode(m2)
        if m1 not in self.modes or m2 not in self.modes:
            return np.zeros((self.grid.n_points,) * 2, dtype=complex)
        if not self.is_dense:
            p, q = self.factors
            b = np.outer(p.component(m1), q.component(m2))
            return b if self.kernel is None else b * self.kernel_matrix()
        return self.f[self.modes.index(m1), :, self.modes.index(m2), :]

    def kernel_matrix(self) -> np.ndarray:
        """``kernel(k, k')`` on the grid (cached)."""
        km = self.__dict__.get("_kernel_matrix")
        if km is None:
            k = self.grid.nodes
            km = self.kernel(k[:, None], k[None, :])
            km.setflags(write=False)
            object.__setattr__(self, "_kernel_matrix", km)
        return km

    def _block_sums(self) -> tuple[float, complex]:
        """``normalization_sums`` for ``f = K(k, k') P(m, k) Q(m', k')`` without the dense array.

        Summing over modes first leaves bilinear forms in the kernel matrix.
        """
        p, q = self.factors
        w = self.grid.weights
        km = self.kernel_matrix()
        pp = w * np.sum(np.abs(p.values) ** 2, axis=0)
        qq = w * np.sum(np.abs(q.values) ** 2, axis=0)
        modes = sorted(set(p.modes) | set(q.modes))
        qp = w * sum(np.conj(q.component(m)) * p.component(m) for m in modes)
        direct = float(pp @ np.abs(km) ** 2 @ qq)
        cross = complex(qp @ (np.conj(km.T) * km) @ np.conj(qp))
        return direct, cross

    def total_probability(self) -> float:
        if self.is_dense:
            direct, cross = normalization_sums(self.f, self.grid)
        elif self.kernel is None:
            p, q = self.factors
            return (self.norm_factor / separable_norm_factor(p, q, self.stats)) ** 2
        else:
            direct, cross = self._block_sums()
        return self.norm_factor**2 * (direct + int(self.stats) * cross.real)

    @property
    def is_separable(self) -> bool:
        return self.factors is not None and self.kernel is None

    def with_stats(self, stats) -> "BiphotonState":
        """Same amplitude reinterpreted under other statistics (renormalized)."""
        f = self.f if self.is_dense else None
        return BiphotonState(self.modes, self.grid, f, ExchangeStatistics.parse(stats),
                             factors=self.factors, kernel=self.kernel)


def separable_norm_factor(p: OnePhotonState, q: OnePhotonState, stats=BOSON) -> float:
    """Closed form ``(|P|^2 |Q|^2 + sign |<P|Q>|^2)^(-1/2)`` for ``f = P (x) Q``."""
    p.grid.require_same(q.grid)
    w = p.grid.weights
    overlap = sum(complex(np.sum(w * np.conj(q.component(m)) * p.component(m))) for m in set(p.modes) | set(q.modes))
    scale = (p.norm * q.norm) ** 2
    total = scale + int(ExchangeStatistics.parse(stats)) * abs(overlap) ** 2
    if not scale > 0 or total <= 1e-14 * scale:
        raise ZeroNormError("identical fermions in the same state: Pauli exclusion gives zero norm")
    return 1.0 / math.sqrt(total)


def _union_modes(*photons: OnePhotonState) -> tuple[ModeLabel, ...]:
    return tuple(sorted(set().union(*(p.modes for p in photons))))


def _pair_array(modes, grid, p: OnePhotonState, q: OnePhotonState) -> np.ndarray:
    n = grid.n_points
    f = np.zeros((len(modes), n, len(modes), n), dtype=complex)
    for i, mi in enumerate(p.modes):
        for j, mj in enumerate(q.modes):
            f[modes.index(mi), :, modes.index(mj), :] = np.outer(p.values[i], q.values[j])
    return f


def _as_photon(g, at) -> OnePhotonState:
    if isinstance(g, OnePhotonState):
        if at is not None:
            raise ConfigError("a OnePhotonState already carries its modes")
        return g
    if at is None:
        raise ConfigError("a SpectralAmplitude needs a mode")
    return OnePhotonState.single(g, at)


def separable_from_photons(p: OnePhotonState, q: OnePhotonState, stats=BOSON) -> BiphotonState:
    """Separable state ``f = g_P (x) g_Q`` from two one-photon states."""
    p.grid.require_same(q.grid)
    return BiphotonState(_union_modes(p, q), p.grid, None, stats, factors=(p, q))


def separable_state(p: SpectralAmplitude, mode_p, q: SpectralAmplitude, mode_q, stats=BOSON) -> BiphotonState:
    """Photon ``p`` in ``mode_p`` and photon ``q`` in ``mode_q``, unentangled."""
    p.grid.require_same(q.grid)
    return separable_from_photons(OnePhotonState.single(p, mode_p), OnePhotonState.single(q, mode_q), stats)


def entangled_gaussian_state(p, mode_p, q, mode_q, sigma: float, peak_sum_freq: float,
                             stats=BOSON) -> BiphotonState:
    """Frequency-entangled pair ``g_P(k) g_Q(k') exp(-(k + k' - peak_sum_freq)^2 / sigma^2)``.

    ``peak_sum_freq`` is twice the peak single-photon frequency. Kernels much
    narrower than the grid spacing collapse onto the grid's anti-diagonal,
    which behaves as perfect frequency anticorrelation on the periodic time
    domain of length ``2 pi / grid.spacing``.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ConfigError(f"entanglement width must be positive and finite, got {sigma}")
    P, Q = _as_photon(p, mode_p), _as_photon(q, mode_q)
    P.grid.require_same(Q.grid)
    kernel = EntanglementKernel(float(sigma), float(peak_sum_freq))
    return BiphotonState(_union_modes(P, Q), P.grid, None, stats, factors=(P, Q), kernel=kernel)


def _k_index(grid: FrequencyGrid, k: float) -> int:
    i = int(round((k - grid.k_min) / grid.spacing)) if grid.n_points > 1 else 0
    if not (0 <= i < grid.n_points) or abs(grid.nodes[i] - k) > 1e-9 * max(1.0, abs(k)):
        raise ConfigError(f"wavenumber {k} is not a node of {grid}")
    return i


def symmetrized_amplitude(state: BiphotonState, lam, lam_p) -> complex:
    """``f(l, l') + sign * f(l', l)`` for labels ``l = (mode, k)``."""
    (m1, k1), (m2, k2) = lam, lam_p
    i, j = state.index(m1), state.index(m2)
    a, b = _k_index(state.grid, k1), _k_index(state.grid, k2)
    return complex(state.block(m1, m2)[a, b] + int(state.stats) * state.block(m2, m1)[b, a])


@dataclass(frozen=True, eq=False)
class DisplacedPair:
    """One term of the displaced-pair expansion of an entangled state.

    ``weight`` is the continuous weight at node ``t``; ``dt`` the quadrature
    weight of that node. ``p`` and ``q`` are the factor photons delayed by ``t``.
    """

    t: float
    weight: complex
    dt: float
    p: OnePhotonState
    q: OnePhotonState


def default_pair_nodes(state: BiphotonState) -> np.ndarray:
    """Uniform nodes wide and dense enough to resum the kernel to ~1e-8.

    Span +/- 8/sigma; spacing small enough that the trapezoid rule does not
    alias the kernel back onto the grid's range of frequency sums.
    """
    kern = state.kernel
    if kern is None:
        raise ConfigError("state was not built by entangled_gaussian_state")
    k = state.grid.nodes
    b_max = max(abs(2 * k[0] - kern.peak_sum_freq), abs(2 * k[-1] - kern.peak_sum_freq))
    half = 8.0 / kern.sigma
    h_max = 2.0 * math.pi / (2.0 * b_max + 12.0 * kern.sigma)
    n = max(257, 2 * math.ceil(half / h_max) + 1)
    if n > MAX_PAIR_NODES:
        raise ConfigError(
            f"default displaced-pair node set would need {n} nodes (sigma={kern.sigma:g} is narrow "
            "relative to the grid's frequency range); pass explicit t_nodes"
        )
    return np.linspace(-half, half, n)


def displaced_pair_decomposition(state: BiphotonState, t_nodes: Sequence[float] | None = None) -> list[DisplacedPair]:
    """Expand an entangled Gaussian state as a superposition of delayed separable pairs."""
    if state.kernel is None or state.factors is None:
        raise ConfigError("displaced-pair decomposition needs a state from entangled_gaussian_state")
    t = default_pair_nodes(state) if t_nodes is None else np.asarray(t_nodes, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ConfigError("need at least two time nodes")
    dt = np.empty_like(t)
    dt[1:-1] = 0.5 * (t[2:] - t[:-2])
    dt[0], dt[-1] = 0.5 * (t[1] - t[0]), 0.5 * (t[-1] - t[-2])
    sigma, s0 = state.kernel.sigma, state.kernel.peak_sum_freq
    w = state.norm_factor * sigma / (2 * math.sqrt(math.pi)) * np.exp(-(sigma * t) ** 2 / 4) * np.exp(-1j * s0 * t)
    p, q = state.factors
    return [DisplacedPair(float(ti), complex(wi), float(di), p.delayed(ti), q.delayed(ti))
            for ti, wi, di in zip(t, w, dt)]


def resum_pairs(pairs: Sequence[DisplacedPair], modes, grid: FrequencyGrid) -> np.ndarray:
    """``sum_t dt w(t) p_t (x) q_t`` on ``modes``; approximates ``N * f``."""
    modes = tuple(mode(m) for m in modes)
    n = grid.n_points
    out = np.zeros((len(modes), n, len(modes), n), dtype=complex)
    for pair in pairs:
        out += pair.dt * pair.weight * _pair_array(modes, grid, pair.p, pair.q)
    return out


__all__ = [
    "BiphotonState", "DisplacedPair", "EntanglementKernel", "default_pair_nodes",
    "displaced_pair_decomposition", "entangled_gaussian_state",
    "normalization_factor", "normalization_sums", "resum_pairs", "separable_from_photons",
    "separable_norm_factor", "separable_state", "symmetrized_amplitude",
]
