"""JSON run configuration: schema, defaults, and object builders.

Defaults reproduce the reference simulation setup exactly, so a sweep with
no overrides runs the published scenario.  Validation is strict: unknown
keys are rejected with a JSON-pointer path, and values that violate the
physical or contract invariants surface as schema errors naming the
offending section.
"""

import copy
import json
import math

from . import channel as ch
from . import dataset as ds
from . import linksim, phy, switchopt
from .errors import SchemaError, UwocError

DEFAULT_CONFIG = {
    "seed": 12345,
    "physical": {
        "tx_power_w": 50.0,
        "efficiency": 0.81,
        "rx_inclination_deg": 0.0,
        "beam_divergence_deg": 68.0,
        "aperture_area_m2": 0.01,
        "responsivity_a_per_w": 0.5,
        "extinction_per_m": 0.1514,
        "solar_irradiance_w_m2": 0.8109,
        "photocurrent_param": 100.0,
        "dark_current_param": 1.226e-9,
        "temperature_k": 290.0,
        "load_resistance_ohm": 100.0,
        "bandwidth_hz": 1.0e8,
        "carrier_freq_thz": 475.0,
        "water_speed_m_s": 2.26e8,
        "wavelength_nm": 475.7,
        "n_detectors": 100,
        "n_sources": 1,
    },
    "ofdm": {
        "fft_size": 32,
        "cp_samples": 2,
        "sample_rate_hz": 1.0e8,
        "frame_symbols": 160,
        "pilot_seed": phy.DEFAULT_PILOT_SEED,
    },
    "simulation": {
        "frames_per_point": 200,
        "batch_frames": 50,
        "early_stop_errors": 50,
        "power_ratio": 0.9,
        "turbo_iterations": 8,
        "turbo_seed": 404,
        "desk_scale": False,
    },
    "sweep": {
        "speeds_mps": [0.1, 0.3, 0.4, 0.5],
        "distance_start_m": 1.0,
        "distance_stop_m": 60.0,
        "distance_step_m": 1.0,
        "repeats": 4,
        "configs": [1, 2, 3, 4, 5, 6],
    },
    "switchopt": {
        "candidates": ["lstm", "bilstm", "gru"],
        "grid_hidden": [32, 64, 128],
        "grid_epochs": [3, 6, 9, 12, 15],
        "initial_epochs": 6,
        "epsilon": 0.005,
        "max_alternations": 5,
        "task": "six_class",
        "k_folds": 5,
    },
    "training": {
        "learning_rate": 1e-3,
        "batch_size": 32,
    },
}


def _validate(doc, defaults, pointer=""):
    if not isinstance(doc, dict):
        raise SchemaError("expected an object", pointer or "/")
    for key, value in doc.items():
        here = f"{pointer}/{key}"
        if key not in defaults:
            raise SchemaError("unknown key", here)
        ref = defaults[key]
        if isinstance(ref, dict):
            _validate(value, ref, here)
        elif isinstance(ref, bool):
            if not isinstance(value, bool):
                raise SchemaError("expected a boolean", here)
        elif isinstance(ref, (int, float)):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError("expected a number", here)
        elif isinstance(ref, str):
            if not isinstance(value, str):
                raise SchemaError("expected a string", here)
        elif isinstance(ref, list):
            if not isinstance(value, list):
                raise SchemaError("expected an array", here)


def _merge(base, doc):
    for key, value in doc.items():
        if isinstance(value, dict):
            _merge(base[key], value)
        else:
            base[key] = value


def load_config(path=None) -> dict:
    """Defaults merged with the JSON document at ``path`` (validated)."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}", "/") from None
        _validate(doc, DEFAULT_CONFIG)
        _merge(cfg, doc)
    return cfg


def _build(section, factory, **kwargs):
    try:
        return factory(**kwargs)
    except UwocError as exc:
        raise SchemaError(str(exc), f"/{section}") from None


def link_params(cfg) -> ch.OpticalLinkParams:
    p = cfg["physical"]
    return _build("physical", ch.OpticalLinkParams,
                  tx_power_w=p["tx_power_w"],
                  efficiency=p["efficiency"],
                  rx_inclination_rad=math.radians(p["rx_inclination_deg"]),
                  beam_divergence_rad=math.radians(p["beam_divergence_deg"]),
                  aperture_area_m2=p["aperture_area_m2"],
                  responsivity_a_per_w=p["responsivity_a_per_w"],
                  extinction_per_m=p["extinction_per_m"],
                  solar_irradiance_w_m2=p["solar_irradiance_w_m2"],
                  photocurrent_param=p["photocurrent_param"],
                  dark_current_param=p["dark_current_param"],
                  temperature_k=p["temperature_k"],
                  load_resistance_ohm=p["load_resistance_ohm"],
                  bandwidth_hz=p["bandwidth_hz"],
                  carrier_freq_hz=p["carrier_freq_thz"] * 1e12,
                  water_speed_m_s=p["water_speed_m_s"],
                  wavelength_m=p["wavelength_nm"] * 1e-9,
                  n_detectors=int(p["n_detectors"]),
                  n_sources=int(p["n_sources"]))


def ofdm_params(cfg) -> phy.OfdmParams:
    o = cfg["ofdm"]
    return _build("ofdm", phy.OfdmParams,
                  fft_size=int(o["fft_size"]),
                  cp_samples=int(o["cp_samples"]),
                  sample_rate_hz=o["sample_rate_hz"],
                  frame_symbols=int(o["frame_symbols"]),
                  pilot_seed=int(o["pilot_seed"]))


def sim_options(cfg) -> linksim.SimOptions:
    s = cfg["simulation"]
    opts = _build("simulation", linksim.SimOptions,
                  frames_per_point=int(s["frames_per_point"]),
                  batch_frames=int(s["batch_frames"]),
                  early_stop_errors=int(s["early_stop_errors"]),
                  power_ratio=s["power_ratio"],
                  turbo_iterations=int(s["turbo_iterations"]),
                  turbo_seed=int(s["turbo_seed"]))
    if s["desk_scale"]:
        opts = opts.desk_scale()
    return opts


def _distances(sweep_cfg):
    start = sweep_cfg["distance_start_m"]
    stop = sweep_cfg["distance_stop_m"]
    step = sweep_cfg["distance_step_m"]
    if step <= 0 or stop < start:
        raise SchemaError("bad distance grid", "/sweep")
    n = int(round((stop - start) / step)) + 1
    return tuple(start + i * step for i in range(n))


def sweep_plan(cfg) -> linksim.SweepPlan:
    s = cfg["sweep"]
    return _build("sweep", linksim.SweepPlan,
                  speeds_m_s=tuple(s["speeds_mps"]),
                  distances_m=_distances(s),
                  repeats=int(s["repeats"]),
                  config_indices=tuple(int(c) for c in s["configs"]))


def dataset_plan(cfg) -> ds.DatasetPlan:
    s = cfg["sweep"]
    return _build("sweep", ds.DatasetPlan,
                  speeds_m_s=tuple(s["speeds_mps"]),
                  distances_m=_distances(s),
                  repeats=int(s["repeats"]))


def switchopt_params(cfg, seed) -> switchopt.SwitchOptParams:
    s = cfg["switchopt"]
    return _build("switchopt", switchopt.SwitchOptParams,
                  candidates=tuple(s["candidates"]),
                  grid_hidden=tuple(int(v) for v in s["grid_hidden"]),
                  grid_epochs=tuple(int(v) for v in s["grid_epochs"]),
                  initial_epochs=int(s["initial_epochs"]),
                  epsilon=s["epsilon"],
                  max_alternations=int(s["max_alternations"]),
                  task=s["task"],
                  k_folds=int(s["k_folds"]),
                  seed=seed)
