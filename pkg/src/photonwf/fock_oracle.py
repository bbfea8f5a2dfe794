"""Brute-force two-photon Fock-space engine for small discrete mode sets.

Everything here is done with explicit creation and annihilation matrices on
occupation-number kets, so it shares no code path with the amplitude pipeline
in :mod:`photonwf.biphoton` / :mod:`photonwf.correlation` and can be used to
cross-check it.

Basis conventions (fixed so fixture coefficients are bit-stable):

* single-particle modes are ``(ModeLabel, k)`` pairs in the order given by the
  :class:`DiscreteModeBasis`;
* two-photon kets are index pairs ``(i, j)`` in lexicographic order with
  ``i <= j`` for bosons and ``i < j`` for fermions;
* ``|i, j> = a+_i a+_j |0>`` for ``i != j`` and ``|i, i> = a+_i a+_i |0> / sqrt2``,
  so a boson amplitude ``f(l, l)`` enters the coefficient with weight ``sqrt2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .biphoton import BiphotonState
from .correlation import DetectionPoint, second_order_rate
from .errors import ConfigError, ZeroNormError
from .modes import BOSON, ExchangeStatistics, ModeLabel, mode
from .optics import _as_network, apply_to_state
from .spectral import FrequencyGrid, plane_waves

MAX_MODES = 16
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12
EQUIVALENCE_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteModeBasis:
    """Ordered list of discrete single-particle modes ``(label, k)``."""

    modes: tuple[tuple[ModeLabel, float], ...]

    def __post_init__(self):
        ms = tuple((mode(m), float(k)) for m, k in self.modes)
        if not ms:
            raise ConfigError("empty mode basis")
        if len(ms) > MAX_MODES:
            raise ConfigError(f"oracle basis has {len(ms)} modes; the cap is {MAX_MODES}")
        if len(set(ms)) != len(ms):
            raise ConfigError("mode labels in the basis must be unique")
        object.__setattr__(self, "modes", ms)

    @classmethod
    def from_grid(cls, labels, grid: FrequencyGrid) -> "DiscreteModeBasis":
        if grid.rule != "discrete":
            raise ConfigError("the oracle works on discrete grids (unit weights) only")
        return cls(tuple((mode(m), float(k)) for m in labels for k in grid.nodes))

    @property
    def dim(self) -> int:
        return len(self.modes)

    def index(self, m, k) -> int:
        return self.modes.index((mode(m), float(k)))


# -- occupation-number algebra -------------------------------------------------

@lru_cache(maxsize=None)
def _kets(d: int, n: int, sign: int) -> tuple[tuple[int, ...], ...]:
    """Sorted occupation tuples with ``n`` particles in ``d`` modes."""
    if n == 0:
        return ((),)
    out = []
    for ket in _kets(d, n - 1, sign):
        lo = ket[-1] if ket else 0
        for i in range(lo, d):
            if sign < 0 and i in ket:
                continue
            out.append(ket + (i,))
    return tuple(out)


def _create(ket: tuple[int, ...], i: int, sign: int) -> tuple[float, tuple[int, ...]]:
    """``a+_i |ket>`` as ``(coefficient, new ket)``."""
    if sign > 0:
        return math.sqrt(ket.count(i) + 1), tuple(sorted(ket + (i,)))
    if i in ket:
        return 0.0, ket
    below = sum(1 for j in ket if j < i)
    return (-1.0) ** below, tuple(sorted(ket + (i,)))


@lru_cache(maxsize=None)
def _creation_matrices(d: int, n: int, sign: int) -> np.ndarray:
    """``C[i]`` maps the ``n``-particle sector into the ``n + 1`` sector, shape ``(d, D_{n+1}, D_n)``."""
    src = _kets(d, n, sign)
    dst = {ket: r for r, ket in enumerate(_kets(d, n + 1, sign))}
    c = np.zeros((d, len(dst), len(src)))
    for col, ket in enumerate(src):
        for i in range(d):
            amp, new = _create(ket, i, sign)
            if amp != 0.0:
                c[i, dst[new], col] = amp
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class TwoPhotonVector:
    """Normalized vector in the two-photon sector over ``basis``."""

    basis: DiscreteModeBasis
    stats: ExchangeStatistics
    coefficients: np.ndarray = field(repr=False)
    norm_factor: float = math.nan

    def __post_init__(self):
        stats = ExchangeStatistics.parse(self.stats)
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != (len(_kets(self.basis.dim, 2, int(stats))),):
            raise ConfigError(f"coefficient vector has shape {c.shape}")
        if abs(np.linalg.norm(c) - 1.0) > NORM_TOL:
            raise ConfigError(f"two-photon vector has norm {np.linalg.norm(c)}")
        c.setflags(write=False)
        object.__setattr__(self, "stats", stats)
        object.__setattr__(self, "coefficients", c)

    @property
    def pairs(self) -> tuple[tuple[int, ...], ...]:
        return _kets(self.basis.dim, 2, int(self.stats))

    def amplitude(self, i: int, j: int) -> complex:
        """Coefficient of the ket ``|i, j>`` (order-insensitive up to the fermion sign)."""
        s = 1 if i <= j else int(self.stats)
        key = (min(i, j), max(i, j))
        if key not in self.pairs:
            return 0j
        return s * complex(self.coefficients[self.pairs.index(key)])


def build_state(f, basis: DiscreteModeBasis, stats=BOSON) -> TwoPhotonVector:
    """Apply ``sum f_ij a+_i a+_j`` to the vacuum and normalize.

    The stored ``norm_factor`` is the explicit ``1 / || sum f a+ a+ |0> ||``.
    """
    stats = ExchangeStatistics.parse(stats)
    f = np.asarray(f, dtype=complex)
    d = basis.dim
    if f.shape != (d, d):
        raise ConfigError(f"amplitude table has shape {f.shape}, basis has {d} modes")
    c2 = _creation_matrices(d, 1, int(stats))  # a+_i acting on |j> = a+_j |0>
    raw = np.einsum("iab,ib->a", c2, f)
    nrm = float(np.linalg.norm(raw))
    scale = float(np.linalg.norm(f))
    if nrm <= 1e-7 * max(scale, 1e-300):
        raise ZeroNormError("the amplitude vanishes under (anti)symmetrization")
    return TwoPhotonVector(basis, stats, raw / nrm, 1.0 / nrm)


def _check_unitary(u: np.ndarray, tol: float) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ConfigError(f"mode transformation must be square, got shape {u.shape}")
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) if u.size else 0.0
    if err > tol:
        raise ConfigError(f"mode transformation is not unitary (deviation {err:.3g})")


def apply_mode_unitary(v: TwoPhotonVector, u, out_basis: DiscreteModeBasis | None = None,
                       tol: float = UNITARY_TOL) -> TwoPhotonVector:
    """Substitute ``a+_i -> sum_o U[o, i] a+_o`` in every ket.

    ``out_basis`` relabels the modes after the transformation (default: same).
    """
    u = np.asarray(u, dtype=complex)
    _check_unitary(u, tol)
    d = v.basis.dim
    if u.shape[0] != d:
        raise ConfigError(f"transformation acts on {u.shape[0]} modes, state has {d}")
    out_basis = v.basis if out_basis is None else out_basis
    if out_basis.dim != d:
        raise ConfigError("output basis dimension differs from input")
    s = int(v.stats)
    c2 = _creation_matrices(d, 1, s)
    # image of each basis ket under the transformed creation operators
    gamma = np.zeros((len(v.pairs), len(v.pairs)), dtype=complex)
    for col, (i, j) in enumerate(v.pairs):
        ket = np.einsum("o,oab,b->a", u[:, i], c2, u[:, j])
        gamma[:, col] = ket / (math.sqrt(2.0) if i == j else 1.0)
    out = gamma @ v.coefficients
    return TwoPhotonVector(out_basis, v.stats, out, v.norm_factor)


def sector_w2(coefficients, basis: DiscreteModeBasis, n_particles: int, e1, e2, stats=BOSON) -> float:
    """``|| E+(2) E+(1) |psi> ||^2`` for a ket with ``n_particles`` photons."""
    d = basis.dim
    s = int(ExchangeStatistics.parse(stats))
    psi = np.asarray(coefficients, dtype=complex)
    if psi.shape != (len(_kets(d, n_particles, s)),):
        raise ConfigError(f"coefficient vector has shape {psi.shape}")
    e1 = np.asarray(e1, dtype=complex)
    e2 = np.asarray(e2, dtype=complex)
    if e1.shape != (d,) or e2.shape != (d,):
        raise ConfigError("field coefficient vectors must match the basis dimension")
    for n, e in ((n_particles, e1), (n_particles - 1, e2)):
        if n <= 0:
            return 0.0  # annihilating the vacuum
        # annihilation matrices are adjoints of the creation matrices one sector down
        psi = np.einsum("i,iab->ba", e, _creation_matrices(d, n - 1, s).conj()) @ psi
    return float(np.sum(np.abs(psi) ** 2))


def glauber_w2(v: TwoPhotonVector, e1, e2) -> float:
    """``<T| E-(1) E-(2) E+(2) E+(1) |T>`` with ``E+(p) = sum_i e_p[i] a_i``.

    Only the vacuum survives two annihilations of a two-photon ket, so the
    expectation is the squared norm of ``E+(2) E+(1) |T>``.
    """
    return sector_w2(v.coefficients, v.basis, 2, e1, e2, v.stats)


# -- bridge to the amplitude pipeline -------------------------------------------

def amplitude_table(state: BiphotonState, basis: DiscreteModeBasis) -> np.ndarray:
    """``N * f`` of a pipeline state laid out on ``basis`` (zeros elsewhere)."""
    if state.grid.rule != "discrete":
        raise ConfigError("basis mismatch: pipeline state is not on a discrete grid")
    d = basis.dim
    nodes = list(state.grid.nodes)
    table = np.zeros((d, d), dtype=complex)
    index = {}
    for m, k in basis.modes:
        if m in state.modes and any(abs(k - x) <= 1e-12 * max(1.0, abs(k)) for x in nodes):
            index[(m, k)] = (state.modes.index(m), int(np.argmin(np.abs(np.asarray(nodes) - k))))
    covered = {(m, float(k)) for m in state.modes for k in nodes}
    if not covered <= set(basis.modes):
        raise ConfigError("basis mismatch: state modes are not all in the oracle basis")
    for a, la in enumerate(basis.modes):
        for b, lb in enumerate(basis.modes):
            if la in index and lb in index:
                (_, ka), (_, kb) = index[la], index[lb]
                table[a, b] = state.block(la[0], lb[0])[ka, kb]
    return table


def network_unitary(network, in_modes, grid: FrequencyGrid) -> tuple[np.ndarray, DiscreteModeBasis, DiscreteModeBasis]:
    """Dense ``(mode, k)`` matrix of a network (block-diagonal in ``k``) with its bases."""
    net = _as_network(network)
    in_modes = tuple(mode(m) for m in in_modes)
    missing = [m for m in in_modes if m not in net.inputs]
    if missing:
        raise ConfigError(f"basis mismatch: {tuple(map(str, missing))} are not network inputs")
    # every network input must be covered so the map is square
    ins = net.inputs
    outs = net.outputs
    nodes = grid.nodes
    n = len(nodes)
    c = net.matrix(nodes)
    u = np.zeros((len(outs) * n, len(ins) * n), dtype=complex)
    for a in range(len(outs)):
        for b in range(len(ins)):
            u[a * n + np.arange(n), b * n + np.arange(n)] = c[:, a, b]
    return u, DiscreteModeBasis.from_grid(ins, grid), DiscreteModeBasis.from_grid(outs, grid)


def field_coefficients(p: DetectionPoint, m: ModeLabel, basis: DiscreteModeBasis, grid: FrequencyGrid) -> np.ndarray:
    """Coefficients of ``E+`` for detection in mode ``m`` at ``(x, t)``: ``w_k exp(i k (x - t))``."""
    e = np.zeros(basis.dim, dtype=complex)
    waves = plane_waves(grid, p.x, p.t)
    for k_i, k in enumerate(grid.nodes):
        if (m, float(k)) in basis.modes:
            e[basis.index(m, k)] = waves[k_i]
    return e


def oracle_rate(v: TwoPhotonVector, grid: FrequencyGrid, p1: DetectionPoint, p2: DetectionPoint) -> float:
    """Coincidence rate summed over the polarization components each detector accepts."""
    return sum(glauber_w2(v, field_coefficients(p1, m1, v.basis, grid), field_coefficients(p2, m2, v.basis, grid))
               for m1 in p1.modes for m2 in p2.modes)


@dataclass(frozen=True)
class EquivalenceReport:
    max_abs_error: float
    n_events: int
    tolerance: float
    passed: bool


def equivalence_check(state: BiphotonState, network, events: Sequence[tuple[DetectionPoint, DetectionPoint]],
                      tol: float = EQUIVALENCE_TOL,
                      rate_fn: Callable[[BiphotonState, DetectionPoint, DetectionPoint], float] = second_order_rate,
                      ) -> EquivalenceReport:
    """Compare pipeline and oracle coincidence rates after ``network``.

    ``network=None`` compares the input state directly. ``rate_fn`` is the
    pipeline's rate function; swapping in a broken one is how the negative
    control is exercised.
    """
    grid = state.grid
    if grid.rule != "discrete":
        raise ConfigError("basis mismatch: equivalence checks need a discrete grid")
    if network is None:
        basis = DiscreteModeBasis.from_grid(state.modes, grid)
        v = build_state(amplitude_table(state, basis), basis, state.stats)
        out_state = state
    else:
        net = _as_network(network)
        u, in_basis, out_basis = network_unitary(net, state.modes, grid)
        v = build_state(amplitude_table(state, in_basis), in_basis, state.stats)
        v = apply_mode_unitary(v, u, out_basis)
        out_state = apply_to_state(net, state)
    err = 0.0
    for p1, p2 in events:
        err = max(err, abs(rate_fn(out_state, p1, p2) - oracle_rate(v, grid, p1, p2)))
    return EquivalenceReport(err, len(events), tol, bool(err <= tol))


def random_events(rng: np.random.Generator, modes, n: int, t_scale: float = 3.0):
    """``n`` random detection-event pairs over ``modes``."""
    modes = [mode(m) for m in modes]
    out = []
    for _ in range(n):
        m1, m2 = (modes[i] for i in rng.integers(len(modes), size=2))
        t1, t2, x1, x2 = rng.uniform(-t_scale, t_scale, size=4)
        out.append((DetectionPoint(m1, x1, t1), DetectionPoint(m2, x2, t2)))
    return out
