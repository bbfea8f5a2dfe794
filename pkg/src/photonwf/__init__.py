"""Photon wave functions and two-photon interference in linear optical networks."""
from .biphoton import (BiphotonState, DisplacedPair, EntanglementKernel, displaced_pair_decomposition,
                       entangled_gaussian_state, normalization_factor, separable_from_photons,
                       separable_state, symmetrized_amplitude)
from .correlation import (CoincidenceWindow, DetectionPoint, Detector, exchange_decomposition,
                          first_order_rate, photon_width, second_order_rate, single_photon_wavefunction,
                          two_photon_amplitude, visibility, windowed_coincidence, windowed_decomposition)
from .errors import (ConfigError, GridMismatchError, NumericalGuardError, PhotonWFError, TruncationError,
                     UndersampledWindowError, UnknownModeError, ZeroNormError)
from .modes import BOSON, FERMION, ExchangeStatistics, ModeLabel, mode
from .optics import (ModeMap, OpticalNetwork, apply_to_state, beamsplitter_5050, compose, delay_line,
                     pbs_diagonal, pbs_hv, polarized_beamsplitter, propagate)
from .scenarios import ScanResult, ScenarioConfig, default_config, emit_csv, load_config, run_scenario
from .spectral import (FrequencyGrid, OnePhotonState, SpectralAmplitude, inner_product,
                       make_gaussian_amplitude, wavepacket_amplitude)

__version__ = "0.1.0"
