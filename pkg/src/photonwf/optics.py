"""Linear optical elements as frequency-dependent maps on creation operators.

A :class:`ModeMap` sends ``a+_in(k) -> sum_out C[out, in](k) a+_out(k)``.
Coefficients are produced on demand for any array of wavenumbers as an array
of shape ``(len(k), n_out, n_in)``. Reflection at a 50/50 splitter carries a
``-i`` phase; propagation delays multiply by ``exp(i k tau)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .biphoton import BiphotonState
from .errors import ConfigError, UnknownModeError
from .modes import ModeLabel, mode
from .spectral import FrequencyGrid, OnePhotonState

ISOMETRY_TOL = 1e-10

CoefficientFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ModeMap:
    inputs: tuple[ModeLabel, ...]
    outputs: tuple[ModeLabel, ...]
    coefficients: CoefficientFn = field(repr=False)
    name: str = "map"

    def __post_init__(self):
        ins = tuple(mode(m) for m in self.inputs)
        outs = tuple(mode(m) for m in self.outputs)
        for label, ms in (("input", ins), ("output", outs)):
            if len(set(ms)) != len(ms):
                raise ConfigError(f"duplicate {label} modes in {self.name}: {tuple(map(str, ms))}")
        object.__setattr__(self, "inputs", ins)
        object.__setattr__(self, "outputs", outs)

    def matrix(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        c = np.asarray(self.coefficients(k), dtype=complex)
        if c.shape != (k.size, len(self.outputs), len(self.inputs)):
            raise ConfigError(f"{self.name}: coefficient array has shape {c.shape}")
        return c

    def coefficient(self, out, inp, k) -> complex:
        return complex(self.matrix([k])[0, self.outputs.index(mode(out)), self.inputs.index(mode(inp))])

    @classmethod
    def constant(cls, inputs, outputs, matrix, delays=None, name="map") -> "ModeMap":
        """Map with entries ``matrix[o, i] * exp(i k delays[o, i])``."""
        m = np.asarray(matrix, dtype=complex)
        d = np.zeros(m.shape) if delays is None else np.broadcast_to(np.asarray(delays, dtype=float), m.shape)

        def coeffs(k):
            return m[None, :, :] * np.exp(1j * k[:, None, None] * d[None, :, :])

        return cls(tuple(inputs), tuple(outputs), coeffs, name)

    @classmethod
    def tabulated(cls, inputs, outputs, grid: FrequencyGrid, table, name="tabulated") -> "ModeMap":
        """Arbitrary per-node matrices, usable only on ``grid``'s nodes."""
        tab = np.array(table, dtype=complex)
        tab.setflags(write=False)
        nodes = grid.nodes

        def coeffs(k):
            if k.shape != nodes.shape or not np.allclose(k, nodes, rtol=1e-12, atol=0):
                raise ConfigError(f"{name} is tabulated on {grid} only")
            return tab

        return cls(tuple(inputs), tuple(outputs), coeffs, name)

    def is_isometry(self, k, tol: float = ISOMETRY_TOL) -> bool:
        return isometry_error(self, k) <= tol


def isometry_error(m, k) -> float:
    """Max deviation of ``C(k)^dagger C(k)`` from the identity over ``k``."""
    c = m.matrix(k)
    gram = np.einsum("koi,koj->kij", np.conj(c), c)
    return float(np.max(np.abs(gram - np.eye(c.shape[2])[None])))


def identity_map(modes) -> ModeMap:
    ms = tuple(mode(m) for m in modes)
    return ModeMap.constant(ms, ms, np.eye(len(ms)), name="identity")


def beamsplitter_5050(in1, in2, out1, out2, propagation_delay: float = 0.0) -> ModeMap:
    """Lossless 50/50 splitter.

    ``in1 -> e^{ik D}(out2 - i out1)/sqrt2`` and ``in2 -> e^{ik D}(out1 - i out2)/sqrt2``:
    ``in1`` transmits to ``out2`` and reflects (with ``-i``) into ``out1``.
    """
    labels = [mode(m) for m in (in1, in2, out1, out2)]
    if len(set(labels)) != 4:
        raise ConfigError(f"beamsplitter needs four distinct mode labels, got {tuple(map(str, labels))}")
    r = 1.0 / math.sqrt(2.0)
    m = np.array([[-1j * r, r], [r, -1j * r]])  # rows out1, out2; cols in1, in2
    return ModeMap.constant(labels[:2], labels[2:], m, propagation_delay, name="beamsplitter_5050")


def polarized_beamsplitter(in1: str, in2: str, out1: str, out2: str, pols=("H", "V"),
                           propagation_delay: float = 0.0) -> ModeMap:
    """Non-polarizing 50/50 splitter acting identically on each polarization of the named ports."""
    return parallel(*(beamsplitter_5050(ModeLabel(in1, p), ModeLabel(in2, p), ModeLabel(out1, p),
                                        ModeLabel(out2, p), propagation_delay) for p in pols))


def delay_line(at, tau: float) -> ModeMap:
    """Multiply one mode by ``exp(i k tau)``: the packet arrives ``tau`` later."""
    m = mode(at)
    return ModeMap.constant((m,), (m,), [[1.0]], [[tau]], name="delay_line")


def _pol_pair(inp) -> tuple[ModeLabel, ModeLabel]:
    h, v = (mode(m) for m in inp)
    if h.pol != "H" or v.pol != "V":
        raise ConfigError(f"polarizing splitter input must be an (H, V) pair, got ({h}, {v})")
    return h, v


def pbs_hv(inp, out_h, out_v) -> ModeMap:
    """Rectilinear polarizing splitter: H goes to ``out_h``, V to ``out_v``."""
    h, v = _pol_pair(inp)
    oh, ov = mode(out_h), mode(out_v)
    if oh.pol != "H" or ov.pol != "V":
        raise ConfigError(f"pbs_hv outputs must be H and V polarized, got ({oh}, {ov})")
    if oh == ov:
        raise ConfigError("pbs_hv outputs must differ")
    return ModeMap.constant((h, v), (oh, ov), np.eye(2), name="pbs_hv")


def pbs_diagonal(inp, out_plus, out_minus, propagation_delay: float = 0.0) -> ModeMap:
    """45-degree polarizing splitter.

    ``V -> e^{ik D}(plus + minus)/sqrt2`` and ``H -> e^{ik D}(plus - minus)/sqrt2``.
    """
    h, v = _pol_pair(inp)
    op, om = mode(out_plus), mode(out_minus)
    if op.pol not in ("+45", "scalar") or om.pol not in ("-45", "scalar") or op == om:
        raise ConfigError(f"pbs_diagonal outputs must be (+45, -45) modes, got ({op}, {om})")
    r = 1.0 / math.sqrt(2.0)
    m = np.array([[r, r], [-r, r]])  # rows plus, minus; cols H, V
    return ModeMap.constant((h, v), (op, om), m, propagation_delay, name="pbs_diagonal")


def parallel(*maps: ModeMap) -> ModeMap:
    """Block-diagonal union of maps acting on disjoint modes."""
    ins = [m for mm in maps for m in mm.inputs]
    outs = [m for mm in maps for m in mm.outputs]
    if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
        raise ConfigError("parallel maps must act on disjoint modes")

    def coeffs(k):
        c = np.zeros((k.size, len(outs), len(ins)), dtype=complex)
        r = q = 0
        for mm in maps:
            c[:, r:r + len(mm.outputs), q:q + len(mm.inputs)] = mm.matrix(k)
            r += len(mm.outputs)
            q += len(mm.inputs)
        return c

    return ModeMap(tuple(ins), tuple(outs), coeffs, name="parallel")


@dataclass(frozen=True, eq=False)
class OpticalNetwork:
    """Ordered stages; modes a stage does not touch pass through unchanged."""

    stages: tuple[ModeMap, ...]
    inputs: tuple[ModeLabel, ...]
    outputs: tuple[ModeLabel, ...]
    _steps: tuple = field(repr=False, default=())
    _out_order: tuple = field(repr=False, default=())

    def matrix(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        total = np.broadcast_to(np.eye(len(self.inputs), dtype=complex), (k.size, len(self.inputs), len(self.inputs)))
        for stage, rows_in, pass_rows, n_out in self._steps:
            c = stage.matrix(k)
            nxt = np.zeros((k.size, n_out, total.shape[2]), dtype=complex)
            # stage outputs first, then untouched modes in their previous order
            nxt[:, : len(stage.outputs)] = c @ total[:, rows_in, :]
            nxt[:, len(stage.outputs):] = total[:, pass_rows, :]
            total = nxt
        return total[:, list(self._out_order), :]

    def as_map(self) -> ModeMap:
        return ModeMap(self.inputs, self.outputs, self.matrix, name="network")


def compose(stages: Sequence[ModeMap], inputs: Iterable | None = None) -> OpticalNetwork:
    """Chain stages in order into one effective map.

    ``inputs`` lists the network's input modes (default: the first stage's
    inputs). Each stage must act on modes present at that point.
    """
    stages = tuple(stages)
    if not stages:
        raise ConfigError("compose needs at least one stage")
    cur = list(stages[0].inputs) if inputs is None else [mode(m) for m in inputs]
    if len(set(cur)) != len(cur):
        raise ConfigError("duplicate network input modes")
    ins = tuple(cur)
    steps = []
    for s in stages:
        missing = [m for m in s.inputs if m not in cur]
        if missing:
            raise ConfigError(f"stage {s.name} expects modes {tuple(map(str, missing))} "
                              f"not available (have {tuple(map(str, cur))})")
        rows_in = [cur.index(m) for m in s.inputs]
        passing = [m for m in cur if m not in s.inputs]
        clash = set(passing) & set(s.outputs)
        if clash:
            raise ConfigError(f"stage {s.name} outputs {tuple(map(str, clash))} collide with untouched modes")
        steps.append((s, rows_in, [cur.index(m) for m in passing], len(s.outputs) + len(passing)))
        cur = list(s.outputs) + passing
    outs = tuple(sorted(cur))
    return OpticalNetwork(stages, ins, outs, tuple(steps), tuple(cur.index(m) for m in outs))


def _as_network(net) -> OpticalNetwork:
    if isinstance(net, OpticalNetwork):
        return net
    if isinstance(net, ModeMap):
        return compose([net])
    raise TypeError(f"expected OpticalNetwork or ModeMap, got {type(net).__name__}")


def _columns(net: OpticalNetwork, modes, grid: FrequencyGrid) -> np.ndarray:
    missing = [m for m in modes if m not in net.inputs]
    if missing:
        raise UnknownModeError(f"modes {tuple(map(str, missing))} are not network inputs "
                               f"{tuple(map(str, net.inputs))}")
    u = net.matrix(grid.nodes)
    return u[:, :, [net.inputs.index(m) for m in modes]]


def propagate(net, photon: OnePhotonState) -> OnePhotonState:
    """Send a one-photon state through the network."""
    net = _as_network(net)
    u = _columns(net, photon.modes, photon.grid)
    values = np.einsum("koi,ik->ok", u, photon.values)
    return OnePhotonState(net.outputs, photon.grid, values)


def apply_to_state(net, s: BiphotonState) -> BiphotonState:
    """Substitute the transformed creation operators into a two-photon state."""
    net = _as_network(net)
    if not s.is_dense:
        # the kernel only depends on (k, k'), which the network leaves alone
        p, q = (propagate(net, ph) for ph in s.factors)
        return BiphotonState(net.outputs, s.grid, None, s.stats, norm_factor=s.norm_factor,
                             factors=(p, q), kernel=s.kernel)
    u = _columns(net, s.modes, s.grid)
    tmp = np.einsum("kai,ikjl->akjl", u, s.f)
    f = np.einsum("lbj,akjl->akbl", u, tmp)
    factors = None if s.factors is None else tuple(propagate(net, p) for p in s.factors)
    return BiphotonState(net.outputs, s.grid, f, s.stats, norm_factor=s.norm_factor,
                         factors=factors, kernel=s.kernel)
