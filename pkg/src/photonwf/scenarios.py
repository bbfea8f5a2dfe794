"""Prebuilt interferometer scans and their configuration.

Each scenario turns a :class:`ScenarioConfig` into a :class:`ScanResult`: the
windowed coincidence rate of the relevant detector pair, split into direct and
exchange parts, as one delay is swept. Configurations are read from INI files
(one scenario per file); every field has a desk-scale default.
"""
from __future__ import annotations

import configparser
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable

import numpy as np

from .biphoton import BiphotonState, entangled_gaussian_state, separable_state
from .correlation import CoincidenceWindow, _photon_field, visibility, windowed_decomposition
from .errors import ConfigError, NumericalGuardError
from .modes import BOSON, ExchangeStatistics, mode
from .optics import (OpticalNetwork, apply_to_state, beamsplitter_5050, compose, delay_line, pbs_diagonal,
                     pbs_hv, polarized_beamsplitter, propagate)
from .spectral import FrequencyGrid, OnePhotonState, SpectralAmplitude, make_gaussian_amplitude

RATE_FLOOR = -1e-12
SPLIT_TOL = 1e-9
# both polarizations of both input ports, occupied or not
POLARIZED_INPUTS = ("aH", "aV", "bH", "bV")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    stats: ExchangeStatistics = BOSON
    center: float = 10.0
    bandwidth: float = 1.0
    # second photon's packet; defaults to the first one's
    center_q: float | None = None
    bandwidth_q: float | None = None
    k_min: float = 4.0
    k_max: float = 16.0
    n_points: int = 512
    delta_t: float = 0.0
    tau1: float = 0.0
    tau2: float | None = None
    tau3: float = 0.0
    sigma: float | None = None
    peak_sum_freq: float | None = None
    t_start: float = -30.0
    t_end: float = 30.0
    n_samples: int = 512
    axis: str = "delta_t"
    scan_min: float = -5.0
    scan_max: float = 5.0
    steps: int = 101
    with_diagonal_pbs: bool = True
    entangled: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "stats", ExchangeStatistics.parse(self.stats))

    @property
    def is_entangled(self) -> bool:
        return SCENARIOS[self.name].entangled(self) if self.name in SCENARIOS else False

    def validate(self) -> "ScenarioConfig":
        """Check the invariants; returns ``self`` so calls can be chained."""
        if self.name not in SCENARIOS:
            raise ConfigError(f"[scenario] name: unknown scenario {self.name!r}; "
                              f"expected one of {', '.join(SCENARIOS)}")
        spec = SCENARIOS[self.name]
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{f.name}: must be finite, got {v}")
        if self.steps < 2:
            raise ConfigError(f"[scan] steps: need at least 2, got {self.steps}")
        if not self.scan_max > self.scan_min:
            raise ConfigError("[scan] max: must exceed min")
        if self.axis not in spec.axes:
            raise ConfigError(f"[scan] axis: {self.axis!r} is not scannable in {self.name} "
                              f"(choose from {', '.join(spec.axes)})")
        if self.entangled is not None and self.name != "postponed_compensation":
            raise ConfigError(f"[scenario] entangled: only meaningful for postponed_compensation")
        if self.is_entangled and self.sigma is None:
            raise ConfigError(f"[entanglement] sigma: required for the entangled {self.name} scenario")
        if not self.is_entangled and self.sigma is not None:
            raise ConfigError(f"[entanglement] sigma: given but {self.name} is not entangled")
        if self.sigma is not None and not self.sigma > 0:
            raise ConfigError(f"[entanglement] sigma: must be positive, got {self.sigma}")
        if self.peak_sum_freq is not None and self.sigma is None:
            raise ConfigError("[entanglement] peak_sum_freq: given without sigma")
        for name in ("bandwidth", "bandwidth_q"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"[packet] {name}: must be positive, got {v}")
        return self

    def with_param(self, value: float) -> "ScenarioConfig":
        return replace(self, **{self.axis: float(value)})

    @property
    def params(self) -> np.ndarray:
        return np.linspace(self.scan_min, self.scan_max, self.steps)


@dataclass(frozen=True, eq=False)
class ScanResult:
    params: np.ndarray
    rate: np.ndarray
    direct: np.ndarray
    exchange: np.ndarray
    extra: dict = field(default_factory=dict)
    config: ScenarioConfig | None = None

    def rows(self):
        order = np.argsort(self.params, kind="stable")
        for i in order:
            yield self.params[i], self.rate[i], self.direct[i], self.exchange[i]

    def visibility(self) -> float:
        return visibility(self)

    def check_invariants(self) -> list[str]:
        """Violations of ``rate >= 0`` and ``rate = direct + exchange``; empty when fine."""
        problems = []
        cols = dict(rate=self.rate, direct=self.direct, exchange=self.exchange, param=self.params)
        for name, col in cols.items():
            if not np.all(np.isfinite(col)):
                problems.append(f"non-finite {name} values")
        if np.any(self.rate < RATE_FLOOR):
            problems.append(f"negative rate {float(self.rate.min()):.3g}")
        scale = max(1.0, float(np.max(np.abs(self.rate))))
        gap = float(np.max(np.abs(self.rate - self.direct - self.exchange)))
        if gap > SPLIT_TOL * scale:
            problems.append(f"rate != direct + exchange (max gap {gap:.3g})")
        return problems


# -- networks -------------------------------------------------------------------

def hom_network(delta_t: float) -> OpticalNetwork:
    """Photon in ``b`` delayed by ``delta_t``, then a 50/50 splitter to ``c``, ``d``."""
    return compose([delay_line("b", delta_t), beamsplitter_5050("a", "b", "c", "d")], inputs=("a", "b"))


def eraser_network(delta_t: float, with_diagonal_pbs: bool = True) -> OpticalNetwork:
    """Orthogonally polarized inputs ``aH``, ``bV`` on a splitter, optionally 45-degree PBSs behind."""
    stages = [delay_line("bV", delta_t), polarized_beamsplitter("a", "b", "c", "d")]
    if with_diagonal_pbs:
        stages += [pbs_diagonal(("cH", "cV"), "e+", "g-"), pbs_diagonal(("dH", "dV"), "f+", "h-")]
    return compose(stages, inputs=POLARIZED_INPUTS)


def postponed_compensation_network(tau1: float, tau2: float) -> OpticalNetwork:
    """``bV`` delayed by ``tau1``; splitter; in arm ``d`` a PBS separates H (delayed ``tau2``) from V
    before a 45-degree PBS recombines them. Arm ``c`` goes straight to its 45-degree PBS.
    """
    return compose([
        delay_line("bV", tau1),
        polarized_beamsplitter("a", "b", "c", "d"),
        pbs_hv(("dH", "dV"), "dhH", "dvV"),
        delay_line("dhH", tau2),
        pbs_diagonal(("dhH", "dvV"), "d+", "f-"),
        pbs_diagonal(("cH", "cV"), "c+", "e-"),
    ], inputs=POLARIZED_INPUTS)


def no_meeting_network(tau1: float, tau2: float, tau3: float) -> OpticalNetwork:
    """``aH`` delayed by ``tau1`` at the source; V-only delays ``tau2`` in ``c`` and ``tau3`` in ``d``.

    The photons reach the splitter ``tau1`` apart; the V delays recombine them
    behind it, and the 45-degree PBSs erase the polarization label.
    """
    return compose([
        delay_line("aH", tau1),
        polarized_beamsplitter("a", "b", "c", "d"),
        delay_line("cV", tau2),
        delay_line("dV", tau3),
        pbs_diagonal(("cH", "cV"), "c+", "e-"),
        pbs_diagonal(("dH", "dV"), "d+", "f-"),
    ], inputs=POLARIZED_INPUTS)


# -- scenario plumbing --------------------------------------------------------------

def _grid(cfg: ScenarioConfig) -> FrequencyGrid:
    return FrequencyGrid(cfg.k_min, cfg.k_max, cfg.n_points)


def packets(cfg: ScenarioConfig) -> tuple[SpectralAmplitude, SpectralAmplitude]:
    grid = _grid(cfg)
    p = make_gaussian_amplitude(cfg.center, cfg.bandwidth, grid)
    cq = cfg.center if cfg.center_q is None else cfg.center_q
    bq = cfg.bandwidth if cfg.bandwidth_q is None else cfg.bandwidth_q
    q = p if (cq, bq) == (cfg.center, cfg.bandwidth) else make_gaussian_amplitude(cq, bq, grid)
    return p, q


def input_state(cfg: ScenarioConfig, mode_p, mode_q) -> BiphotonState:
    p, q = packets(cfg)
    if cfg.is_entangled:
        peak = 2 * cfg.center if cfg.peak_sum_freq is None else cfg.peak_sum_freq
        return entangled_gaussian_state(p, mode_p, q, mode_q, cfg.sigma, peak, cfg.stats)
    return separable_state(p, mode_p, q, mode_q, cfg.stats)


def window(cfg: ScenarioConfig, d1, d2) -> CoincidenceWindow:
    return CoincidenceWindow(cfg.t_start, cfg.t_end, cfg.n_samples, (d1, d2))


def _tau2(cfg: ScenarioConfig) -> float:
    return 2 * cfg.tau1 if cfg.tau2 is None else cfg.tau2


def _point_hom(cfg: ScenarioConfig, state: BiphotonState) -> dict:
    out = apply_to_state(hom_network(cfg.delta_t), state)
    rate, direct, exchange = windowed_decomposition(out, window(cfg, "c", "d"))
    s_rate, s_direct, s_exchange = windowed_decomposition(out, window(cfg, "c", "c"))
    return dict(rate=rate, direct=direct, exchange=exchange, same_port_rate=s_rate,
                same_port_direct=s_direct, same_port_exchange=s_exchange)


def _point_eraser(cfg: ScenarioConfig, state: BiphotonState) -> dict:
    out = apply_to_state(eraser_network(cfg.delta_t, cfg.with_diagonal_pbs), state)
    if cfg.with_diagonal_pbs:
        win = window(cfg, "e+", "f+")
    else:
        win = window(cfg, ("cH", "cV"), ("dH", "dV"))
    rate, direct, exchange = windowed_decomposition(out, win)
    return dict(rate=rate, direct=direct, exchange=exchange)


def _point_pc(cfg: ScenarioConfig, state: BiphotonState) -> dict:
    out = apply_to_state(postponed_compensation_network(cfg.tau1, _tau2(cfg)), state)
    rate, direct, exchange = windowed_decomposition(out, window(cfg, "c+", "d+"))
    return dict(rate=rate, direct=direct, exchange=exchange)


def _point_no_meeting(cfg: ScenarioConfig, state: BiphotonState) -> dict:
    out = apply_to_state(no_meeting_network(cfg.tau1, _tau2(cfg), cfg.tau3), state)
    rate, direct, exchange = windowed_decomposition(out, window(cfg, "c+", "d+"))
    return dict(rate=rate, direct=direct, exchange=exchange, central_overlap=central_overlap(cfg))


def central_overlap(cfg: ScenarioConfig, n_samples: int | None = None) -> float:
    """Largest ``|V_P(0, t) V_Q(0, t)|`` at the central splitter plane over the window."""
    p, q = packets(cfg)
    t = np.linspace(cfg.t_start, cfg.t_end, n_samples or 4 * cfg.n_samples)
    vp = _photon_field(OnePhotonState.single(p, "aH").delayed(cfg.tau1), mode("aH"), 0.0, t)
    vq = _photon_field(OnePhotonState.single(q, "bV"), mode("bV"), 0.0, t)
    return float(np.max(np.abs(vp * vq)))


@dataclass(frozen=True)
class ScenarioSpec:
    point: Callable[[ScenarioConfig, BiphotonState], dict]
    modes: tuple[str, str]
    axes: tuple[str, ...]
    entangled: Callable[[ScenarioConfig], bool]
    summary: str
    defaults: dict = field(default_factory=dict)


SCENARIOS: dict[str, ScenarioSpec] = {
    "hom": ScenarioSpec(
        _point_hom, ("a", "b"), ("delta_t",), lambda c: False,
        "Hong-Ou-Mandel dip: like photons on a 50/50 splitter vs delay delta_t"),
    "hom_entangled": ScenarioSpec(
        _point_hom, ("a", "b"), ("delta_t", "sigma"), lambda c: True,
        "Hong-Ou-Mandel dip with a frequency-entangled pair (width sigma)",
        dict(sigma=1.0)),
    "eraser": ScenarioSpec(
        _point_eraser, ("aH", "bV"), ("delta_t",), lambda c: False,
        "quantum eraser: H and V photons, 45-degree PBSs before the detectors"),
    "postponed_compensation": ScenarioSpec(
        _point_pc, ("aH", "bV"), ("tau2", "tau1"), lambda c: c.entangled if c.entangled is not None else c.sigma is not None,
        "postponed compensation: bV delayed tau1, H in d delayed tau2",
        dict(tau1=5.0, axis="tau2", scan_min=7.0, scan_max=18.0, steps=221)),
    "no_meeting": ScenarioSpec(
        _point_no_meeting, ("aH", "bV"), ("tau3", "tau2", "tau1"), lambda c: False,
        "photons that never meet at the central splitter yet interfere (tau1 = tau2 = tau3)",
        dict(tau1=10.0, tau2=10.0, axis="tau3", scan_min=0.0, scan_max=20.0, steps=101,
             center=20.0, k_min=8.0, k_max=32.0, n_points=1024, t_start=-15.0, t_end=45.0)),
}


def default_config(name: str, **overrides) -> ScenarioConfig:
    if name not in SCENARIOS:
        raise ConfigError(f"[scenario] name: unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
    return ScenarioConfig(name, **{**SCENARIOS[name].defaults, **overrides})


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> ScanResult:
    """Evaluate every scan point (concurrently when ``threads > 1``)."""
    cfg.validate()
    spec = SCENARIOS[cfg.name]
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    params = cfg.params
    # the input state only depends on the scan value when sigma is scanned
    shared = None if cfg.axis == "sigma" else input_state(cfg, *spec.modes)

    def point(value):
        c = cfg.with_param(value)
        return spec.point(c, shared if shared is not None else input_state(c, *spec.modes))

    if threads == 1:
        rows = [point(v) for v in params]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, params))
    cols = {k: np.array([r[k] for r in rows], dtype=float) for k in rows[0]}
    rate, direct, exchange = cols.pop("rate"), cols.pop("direct"), cols.pop("exchange")
    return ScanResult(params, rate, direct, exchange, cols, cfg)


def scenario_hom(cfg: ScenarioConfig, threads: int = 1) -> ScanResult:
    """Cross-port coincidence vs ``delta_t``; ``extra["same_port_rate"]`` holds the c-c channel."""
    return run_scenario(_named(cfg, "hom"), threads)


def scenario_hom_entangled(cfg: ScenarioConfig, threads: int = 1) -> ScanResult:
    return run_scenario(_named(cfg, "hom_entangled"), threads)


def scenario_eraser(cfg: ScenarioConfig, with_diagonal_pbs: bool = True, threads: int = 1) -> ScanResult:
    """Coincidence in ``(e+, f+)`` with the 45-degree PBSs, or in ``(c, d)`` without them."""
    return run_scenario(replace(_named(cfg, "eraser"), with_diagonal_pbs=with_diagonal_pbs), threads)


def scenario_postponed_compensation(cfg: ScenarioConfig, entangled: bool = False, threads: int = 1) -> ScanResult:
    return run_scenario(replace(_named(cfg, "postponed_compensation"), entangled=entangled), threads)


def scenario_no_meeting(cfg: ScenarioConfig, threads: int = 1) -> ScanResult:
    return run_scenario(_named(cfg, "no_meeting"), threads)


def _named(cfg: ScenarioConfig, name: str) -> ScenarioConfig:
    if cfg.name != name:
        raise ConfigError(f"[scenario] name: expected {name!r}, got {cfg.name!r}")
    return cfg


def pc_exchange_overlap(cfg: ScenarioConfig, t_nodes, T_nodes=None) -> np.ndarray:
    """Relative size of the exchange product between displaced pairs ``t`` and ``T``.

    Entry ``[i, j]`` is ``max |A12(t_i) A21(T_j)|`` over the detection window,
    divided by ``max |A12(t_i)| * max |A21(T_j)|``, for the separable pair
    delayed by ``t`` (or ``T``) sent through the postponed-compensation network
    and detected in ``c+`` and ``d+``.
    """
    p, q = packets(cfg)
    net = postponed_compensation_network(cfg.tau1, _tau2(cfg))
    t_nodes = np.asarray(t_nodes, dtype=float)
    T_nodes = t_nodes if T_nodes is None else np.asarray(T_nodes, dtype=float)
    times = np.linspace(cfg.t_start, cfg.t_end, 4 * cfg.n_samples)
    cp, dp = mode("c+"), mode("d+")

    def fields_at(delay):
        pp = propagate(net, OnePhotonState.single(p, "aH").delayed(delay))
        qq = propagate(net, OnePhotonState.single(q, "bV").delayed(delay))
        return (np.abs(_photon_field(pp, cp, 0.0, times)), np.abs(_photon_field(qq, dp, 0.0, times)),
                np.abs(_photon_field(qq, cp, 0.0, times)), np.abs(_photon_field(pp, dp, 0.0, times)))

    at_t = [fields_at(v) for v in t_nodes]
    at_T = [fields_at(v) for v in T_nodes]
    out = np.zeros((t_nodes.size, T_nodes.size))
    for i, (p_c, q_d, _, _) in enumerate(at_t):
        for j, (_, _, q_c, p_d) in enumerate(at_T):
            # A12 = P(c+, t1) Q(d+, t2) and A21 = Q(c+, t1) P(d+, t2) factor over (t1, t2)
            num = np.max(p_c * q_c) * np.max(q_d * p_d)
            den = p_c.max() * q_d.max() * q_c.max() * p_d.max()
            out[i, j] = num / den
    return out


# -- configuration files --------------------------------------------------------------

_KEYS = {
    "scenario": {"name": str, "stats": str, "with_diagonal_pbs": bool, "entangled": bool},
    "packet": {"center": float, "bandwidth": float, "center_q": float, "bandwidth_q": float},
    "grid": {"k_min": float, "k_max": float, "n_points": int},
    "delays": {"delta_t": float, "tau1": float, "tau2": float, "tau3": float},
    "entanglement": {"sigma": float, "peak_sum_freq": float},
    "window": {"t_start": float, "t_end": float, "n_samples": int},
    "scan": {"axis": str, "min": float, "max": float, "steps": int},
}
_RENAME = {("scan", "min"): "scan_min", ("scan", "max"): "scan_max"}


def parse_config_text(text: str, source: str = "<config>") -> ScenarioConfig:
    """Build a validated config from INI text.

    Raises :class:`configparser.Error` for malformed files and
    :class:`ConfigError` for unknown keys or invalid values.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.read_string(text, source=source)
    values: dict = {}
    for section in cp.sections():
        if section not in _KEYS:
            raise ConfigError(f"[{section}]: unknown section (expected {', '.join(_KEYS)})")
        for key, raw in cp.items(section):
            kind = _KEYS[section].get(key)
            if kind is None:
                raise ConfigError(f"[{section}] {key}: unknown key")
            try:
                if kind is bool:
                    value = cp.getboolean(section, key)
                elif kind is int:
                    value = int(raw)
                else:
                    value = kind(raw)
            except ValueError:
                raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {kind.__name__}") from None
            values[_RENAME.get((section, key), key)] = value
    if "name" not in values:
        raise ConfigError("[scenario] name: missing")
    name = values.pop("name")
    if name not in SCENARIOS:
        raise ConfigError(f"[scenario] name: unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
    if "stats" in values:
        values["stats"] = ExchangeStatistics.parse(values["stats"])
    return default_config(name, **values).validate()


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))


def format_config(cfg: ScenarioConfig) -> str:
    """INI text that :func:`parse_config_text` reads back to ``cfg``."""
    d = asdict(cfg)
    lines = []
    for section, keys in _KEYS.items():
        body = []
        for key in keys:
            attr = _RENAME.get((section, key), key)
            v = d[attr]
            if v is None or (section == "scenario" and key == "with_diagonal_pbs" and cfg.name != "eraser"):
                continue
            if attr == "stats":
                v = "boson" if v == BOSON else "fermion"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            body.append(f"{key} = {v!r}" if isinstance(v, float) else f"{key} = {v}")
        if body:
            lines += [f"[{section}]", *body, ""]
    return "\n".join(lines)


# -- CSV ----------------------------------------------------------------------------

CSV_HEADER = "param,rate,direct,exchange"


def format_number(x: float) -> str:
    """Decimal (never exponent) notation with 12 significant digits."""
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="k")


def csv_text(result: ScanResult) -> str:
    problems = [p for p in result.check_invariants() if "rate != direct" in p]
    if problems:
        raise NumericalGuardError(f"refusing to write CSV: {problems[0]}")
    lines = [CSV_HEADER] + [",".join(format_number(v) for v in row) for row in result.rows()]
    return "\n".join(lines) + "\n"


def emit_csv(result: ScanResult, path) -> None:
    """Write ``param,rate,direct,exchange`` rows sorted by parameter (UTF-8, LF)."""
    text = csv_text(result)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
