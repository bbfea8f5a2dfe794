"""Mode labels and exchange statistics."""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .errors import ConfigError

POLARIZATIONS = ("H", "V", "+45", "-45", "scalar")
_ALIASES = {"+": "+45", "-": "-45", "h": "H", "v": "V", "": "scalar"}


@dataclass(frozen=True, order=True)
class ModeLabel:
    """One optical mode: a port identifier plus a polarization.

    Labels order lexicographically by (port, polarization), which fixes the
    canonical storage order of modes inside states and networks.
    """

    port: str
    pol: str = "scalar"

    def __post_init__(self):
        pol = _ALIASES.get(self.pol, self.pol)
        if pol not in POLARIZATIONS:
            raise ConfigError(f"unknown polarization {self.pol!r}; expected one of {POLARIZATIONS}")
        object.__setattr__(self, "pol", pol)
        if not self.port:
            raise ConfigError("mode port must be a non-empty string")

    def __str__(self):
        return self.port if self.pol == "scalar" else f"{self.port}{self.pol}"


def mode(spec: str | ModeLabel) -> ModeLabel:
    """Parse ``"a"``, ``"aH"``, ``"e+"``, ``"g-45"`` into a :class:`ModeLabel`."""
    if isinstance(spec, ModeLabel):
        return spec
    for suffix in ("+45", "-45", "H", "V", "+", "-"):
        if spec.endswith(suffix) and len(spec) > len(suffix):
            return ModeLabel(spec[: -len(suffix)], suffix)
    return ModeLabel(spec)


class ExchangeStatistics(IntEnum):
    BOSON = 1
    FERMION = -1

    @classmethod
    def parse(cls, value) -> "ExchangeStatistics":
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("boson", "bosons", "+1", "1"):
                return cls.BOSON
            if key in ("fermion", "fermions", "-1"):
                return cls.FERMION
            raise ConfigError(f"unknown exchange statistics {value!r}")
        try:
            return cls(int(value))
        except ValueError:
            raise ConfigError(f"exchange sign must be +1 or -1, got {value!r}") from None


BOSON = ExchangeStatistics.BOSON
FERMION = ExchangeStatistics.FERMION
