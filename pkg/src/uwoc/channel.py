"""Underwater optical channel: large-scale budget and small-scale fading.

The large-scale side is a set of closed forms: exponential extinction,
line-of-sight received signal strength, a four-term noise-current budget
(solar background, shot, dark, thermal) and their ratio, the link SNR.
All values follow the usual empirical conventions for blue-green underwater
links; the signal strength is used exactly as published (an intensity-scale
quantity ratioed against current-squared noise powers) rather than
re-derived dimensionally, so the budget reproduces the reference numbers.

The small-scale side is a two-tap time-varying model: real nonnegative tap
gains at 0 ns and 10 ns (one sample at 100 MHz), folded-Gaussian marginals
with unit mean power per detector, evolving between OFDM symbols as a
first-order Gauss-Markov process whose correlation follows from the Doppler
coherence time.  Detectors fade independently (element spacing is much
larger than the optical wavelength).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError

# rounded constants, as used by the published noise budget
ELECTRON_CHARGE = 1.6e-19    # C
BOLTZMANN = 1.38e-23         # J/K

#: Second tap lag in samples at the 100 MHz converter rate (10 ns).
TAP_DELAY_SAMPLES = (0, 1)


@dataclass(frozen=True)
class OpticalLinkParams:
    """Physical parameters of the optical link.

    Defaults reproduce the clear-ocean simulation setup: 50 W blue laser at
    475 THz, 68 degree divergence, 0.01 m^2 aperture, 100-element
    photodetector array, 100 MHz electronic bandwidth.
    """

    tx_power_w: float = 50.0            # P_T, radiated optical power
    efficiency: float = 0.81            # eta_0, combined TX/RX optics
    rx_inclination_rad: float = 0.0     # beta_0, receiver tilt w.r.t. beam
    beam_divergence_rad: float = math.radians(68.0)   # theta
    aperture_area_m2: float = 0.01      # A_r
    responsivity_a_per_w: float = 0.5   # gamma_0
    extinction_per_m: float = 0.1514    # c_a at lambda_0, clear ocean
    solar_irradiance_w_m2: float = 0.8109   # Phi_s
    photocurrent_param: float = 100.0   # I_L
    dark_current_param: float = 1.226e-9    # I_D
    temperature_k: float = 290.0
    load_resistance_ohm: float = 100.0
    bandwidth_hz: float = 1.0e8         # B, electronic bandwidth
    carrier_freq_hz: float = 4.75e14    # f_c, optical carrier
    water_speed_m_s: float = 2.26e8     # propagation speed in water
    wavelength_m: float = 4.757e-7
    n_detectors: int = 100              # N_RX
    n_sources: int = 1                  # N_TX
    electron_charge: float = ELECTRON_CHARGE
    boltzmann: float = BOLTZMANN

    def __post_init__(self):
        positives = (
            "tx_power_w", "aperture_area_m2", "responsivity_a_per_w",
            "solar_irradiance_w_m2", "photocurrent_param",
            "dark_current_param", "temperature_k", "load_resistance_ohm",
            "bandwidth_hz", "carrier_freq_hz", "water_speed_m_s",
            "wavelength_m", "electron_charge", "boltzmann",
        )
        for name in positives:
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError("efficiency must lie in (0, 1]")
        if self.rx_inclination_rad < 0.0:
            raise DomainError("rx_inclination_rad must be >= 0")
        if not 0.0 < self.beam_divergence_rad < math.pi:
            raise DomainError("beam_divergence_rad must lie in (0, pi)")
        if self.extinction_per_m < 0.0:
            raise DomainError("extinction_per_m must be >= 0")
        if self.n_detectors < 1:
            raise DomainError("n_detectors must be >= 1")
        if self.n_sources != 1:
            raise DomainError("only a single optical source is supported")


@dataclass(frozen=True)
class NoiseBudget:
    """Noise current powers in A^2; ``total`` is the exact component sum."""

    solar: float      # i_S^2
    shot: float       # i_L^2
    dark: float       # i_D^2
    thermal: float    # i_T^2
    total: float

    def __post_init__(self):
        for name in ("solar", "shot", "dark", "thermal"):
            if getattr(self, name) < 0:
                raise DomainError(f"noise component {name} must be >= 0")
        if self.total != self.solar + self.shot + self.dark + self.thermal:
            raise DomainError("total must equal the exact component sum")


@dataclass
class ChannelRealization:
    """One small-scale state of the link across the detector array.

    ``tap_gains`` has shape (n_detectors, 2) with real nonnegative entries;
    ensemble tap powers sum to one per detector, so the large-scale loss is
    carried solely by ``path_gain_sq``.  ``rho`` is the per-symbol temporal
    correlation, in [0, 1).
    """

    path_gain_sq: float
    tap_gains: np.ndarray
    tap_power: np.ndarray = field(repr=False)
    tap_delay_samples: tuple = TAP_DELAY_SAMPLES
    doppler_hz: float = 0.0
    rho: float = 0.0


def attenuation(extinction_per_m: float, distance_m: float) -> float:
    """Extinction loss exp(-c_a * d); dimensionless, in (0, 1]."""
    if distance_m < 0:
        raise DomainError("distance must be >= 0")
    if extinction_per_m < 0:
        raise DomainError("extinction coefficient must be >= 0")
    return math.exp(-extinction_per_m * distance_m)


def los_signal_power(params: OpticalLinkParams, distance_m: float) -> float:
    """Received signal strength of the direct line-of-sight path.

    Evaluates P_T * eta_0 * L_a * A_r * cos(beta_0) / (2 pi d^2 (1 - cos theta)).
    """
    if distance_m <= 0:
        raise DomainError("distance must be positive (LOS form diverges at 0)")
    cos_theta = math.cos(params.beam_divergence_rad)
    if 1.0 - cos_theta == 0.0:
        raise DomainError("beam divergence of zero makes the LOS form singular")
    la = attenuation(params.extinction_per_m, distance_m)
    numer = (params.tx_power_w * params.efficiency * la
             * params.aperture_area_m2 * math.cos(params.rx_inclination_rad))
    denom = 2.0 * math.pi * distance_m ** 2 * (1.0 - cos_theta)
    return numer / denom


def noise_budget(params: OpticalLinkParams) -> NoiseBudget:
    """Four-component noise-current budget of one photodetector branch."""
    solar = (params.solar_irradiance_w_m2 * params.aperture_area_m2
             * params.responsivity_a_per_w) ** 2
    shot = 2.0 * params.electron_charge * params.photocurrent_param * params.bandwidth_hz
    dark = 2.0 * params.electron_charge * params.dark_current_param * params.bandwidth_hz
    thermal = (4.0 * params.boltzmann * params.temperature_k
               * params.bandwidth_hz / params.load_resistance_ohm)
    return NoiseBudget(solar, shot, dark, thermal,
                       solar + shot + dark + thermal)


def link_snr(params: OpticalLinkParams, distance_m: float) -> float:
    """Linear SNR of the link at distance d: signal over summed noise terms."""
    return los_signal_power(params, distance_m) / noise_budget(params).total


def doppler_shift(speed_m_s: float, params: OpticalLinkParams) -> float:
    """Doppler shift (Hz) of the optical carrier for a transmitter at speed v."""
    if speed_m_s < 0:
        raise DomainError("speed must be >= 0")
    return speed_m_s / params.water_speed_m_s * params.carrier_freq_hz


def coherence_time(speed_m_s: float, params: OpticalLinkParams) -> float:
    """Channel coherence time 1/f_d in seconds; infinite at v = 0 (error)."""
    if speed_m_s <= 0:
        raise DomainError("coherence time is unbounded at zero speed; "
                          "treat the channel as static instead")
    return 1.0 / doppler_shift(speed_m_s, params)


def symbol_correlation(speed_m_s: float, params: OpticalLinkParams,
                       symbol_period_s: float) -> float:
    """Per-symbol Gauss-Markov correlation exp(-T_sym / T_c), in [0, 1)."""
    if speed_m_s == 0.0:
        return float(np.nextafter(1.0, 0.0))
    return math.exp(-symbol_period_s / coherence_time(speed_m_s, params))


def draw_channel(params: OpticalLinkParams, distance_m: float,
                 speed_m_s: float, rng: np.random.Generator,
                 power_ratio: float = 0.9,
                 symbol_period_s: float = 340e-9) -> ChannelRealization:
    """Draw an independent small-scale realization for every detector.

    ``power_ratio`` is the fraction of small-scale power in the first tap.
    Tap gains are folded Gaussians with variances (power_ratio,
    1 - power_ratio), so the ensemble mean of g1^2 + g2^2 is exactly one.
    """
    if not 0.0 < power_ratio <= 1.0:
        raise DomainError("power_ratio must lie in (0, 1]")
    if speed_m_s < 0:
        raise DomainError("speed must be >= 0")
    tap_power = np.array([power_ratio, 1.0 - power_ratio])
    raw = rng.standard_normal((params.n_detectors, 2))
    gains = np.abs(raw * np.sqrt(tap_power))
    return ChannelRealization(
        path_gain_sq=los_signal_power(params, distance_m),
        tap_gains=gains,
        tap_power=tap_power,
        doppler_hz=doppler_shift(speed_m_s, params),
        rho=symbol_correlation(speed_m_s, params, symbol_period_s),
    )


def evolve_channel(state: ChannelRealization,
                   rng: np.random.Generator) -> ChannelRealization:
    """Advance the realization by one symbol period.

    Each tap follows g' = |rho g + sqrt(1 - rho^2) w| with w a fresh
    zero-mean draw at the tap's stationary power, which preserves the
    stationary second moment exactly.
    """
    rho = state.rho
    w = rng.standard_normal(state.tap_gains.shape) * np.sqrt(state.tap_power)
    gains = np.abs(rho * state.tap_gains + math.sqrt(1.0 - rho * rho) * w)
    return ChannelRealization(
        path_gain_sq=state.path_gain_sq,
        tap_gains=gains,
        tap_power=state.tap_power,
        tap_delay_samples=state.tap_delay_samples,
        doppler_hz=state.doppler_hz,
        rho=rho,
    )


def evolve_gains(gains: np.ndarray, tap_power: np.ndarray, rho: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Array form of :func:`evolve_channel` for batched simulation loops."""
    w = rng.standard_normal(gains.shape) * np.sqrt(tap_power)
    return np.abs(rho * gains + math.sqrt(1.0 - rho * rho) * w)
