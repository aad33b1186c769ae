"""End-to-end Monte Carlo link simulation and throughput sweeps.

A *point* is one (configuration, distance, speed, repeat) cell: frames are
transmitted through fresh channel and noise draws, decoded, and counted into
a frame error rate; physical-layer throughput follows from the closed form.
Every point owns a generator seeded from (base seed, point coordinates), so
sweeps are reproducible for any execution order and batch size.

Signal model of the fast per-frame path, algebraically identical to running
the sampled waveform chain:

* With a cyclic prefix at least as long as the two-tap delay spread and taps
  held constant over one OFDM symbol, time-domain convolution equals per-bin
  multiplication by H(k) = g1 + g2 exp(-2 pi j k / N); the chain therefore
  applies the channel in the frequency domain.
* Received data bins are consumed only through the conjugate-pair combiner,
  so the combined statistic is synthesized directly: c = H x + n with
  Var(n) = 1 / link_snr(d).  This pins the noise bridge: complex AWGN per
  detector sized so the conjugate-combined per-pair SNR at unit small-scale
  gain equals the large-scale link SNR (the pre-combining per-bin SNR is
  half that, the combining gain being exactly the 3 dB the Hermitian
  redundancy provides).
* Pilot least-squares estimates equal H plus noise of the same variance
  (unit-magnitude pilots), drawn directly.
* The first data symbol of the first frame is materialized as physical
  post-DFT bins (signal sqrt(link_snr / 2) H x against unit-variance noise,
  all 32 bins including the nulled ones) and stored as a time-domain capture
  for feature extraction.

Channel taps evolve between consecutive OFDM symbols (pilot to data and
data to next pilot) by the Gauss-Markov recursion, so channel aging between
the most recent pilot and its data symbol is the Doppler impairment.
"""

from dataclasses import dataclass, field, replace
import io

import numpy as np

from . import channel as ch
from . import phy
from . import turbo
from .errors import ContractError, DomainError, ParseError
from .seeding import derive_seed, make_rng

MOD_BITS = 2     # QPSK


# ---------------------------------------------------------------------------
# Transmitter configurations


@dataclass(frozen=True)
class LinkConfig:
    """One of the six transmitter configurations (spreading + code rate)."""

    index: int
    n_freq: int
    n_time: int
    rate: str

    @property
    def rate_value(self) -> float:
        return 0.5 if self.rate == turbo.RATE_12 else 1.0 / 3.0

    @property
    def name(self) -> str:
        if self.n_freq == 1 and self.n_time == 1:
            spread = "no spreading"
        else:
            spread = f"NF={self.n_freq}, NT={self.n_time}"
        return f"{spread}, {self.rate} turbo"

    def spreading(self) -> phy.SpreadingSpec:
        return phy.SpreadingSpec(n_freq=self.n_freq, n_time=self.n_time)


#: The six-class configuration list, in label order.
CONFIGS = (
    LinkConfig(1, 1, 1, turbo.RATE_12),
    LinkConfig(2, 1, 1, turbo.RATE_13),
    LinkConfig(3, 16, 1, turbo.RATE_12),
    LinkConfig(4, 16, 1, turbo.RATE_13),
    LinkConfig(5, 16, 8, turbo.RATE_12),
    LinkConfig(6, 16, 8, turbo.RATE_13),
)


def config_by_index(index: int) -> LinkConfig:
    if not 1 <= index <= len(CONFIGS):
        raise ContractError(f"configuration index must be 1..{len(CONFIGS)}")
    return CONFIGS[index - 1]


def frame_bit_budget(cfg: LinkConfig, ofdm: phy.OfdmParams) -> int:
    """Largest info block K whose coded bits (incl. tail) fit one frame.

    The frame offers 2 * spread_capacity coded bits; remaining chip slots
    are zero-padded.  K is kept even under rate 1/3 so the coded stream maps
    onto whole QPSK symbols.
    """
    cap_bits = MOD_BITS * phy.spread_capacity(cfg.spreading(), ofdm)
    tail = turbo.N_TAIL_CODED
    if cfg.rate == turbo.RATE_12:
        k = (cap_bits - tail) // 2
    else:
        k = (cap_bits - tail) // 3
        k -= k % 2
    if k < 1:
        raise ContractError(f"frame too small for configuration {cfg.index}")
    return k


def throughput(cfg: LinkConfig, ofdm: phy.OfdmParams, fer: float,
               n_tx: int = 1) -> float:
    """Physical-layer throughput in bit/s at the given frame error rate.

    M * N_TX * N_SUBC * R_C * (1 - FER) / (2 * N_T * N_F * T_OFDM); the
    factor two is the conjugate-symmetric (intensity modulation) halving.
    """
    if not 0.0 <= fer <= 1.0:
        raise ContractError("fer must lie in [0, 1]")
    num = MOD_BITS * n_tx * ofdm.n_subcarriers * cfg.rate_value * (1.0 - fer)
    den = 2.0 * cfg.n_time * cfg.n_freq * ofdm.symbol_period_s
    return num / den


# ---------------------------------------------------------------------------
# Point simulation


@dataclass(frozen=True)
class SimOptions:
    """Simulation knobs independent of the physical setup."""

    frames_per_point: int = 200
    batch_frames: int = 50
    early_stop_errors: int = 50
    power_ratio: float = 0.9
    turbo_iterations: int = 8
    turbo_seed: int = turbo.DEFAULT_INTERLEAVER_SEED
    capture_detectors: int = 4

    def desk_scale(self) -> "SimOptions":
        """Preset for desk-scale runs: 50 frames per point."""
        return replace(self, frames_per_point=50)


@dataclass
class PointResult:
    n_frames: int
    n_frame_errors: int
    capture: phy.FrameWaveform | None

    @property
    def fer(self) -> float:
        return self.n_frame_errors / self.n_frames


class _ConfigContext:
    """Per-configuration precomputation shared across batches."""

    def __init__(self, cfg, ofdm, options):
        self.cfg = cfg
        self.ofdm = ofdm
        self.spread = cfg.spreading()
        self.k_info = frame_bit_budget(cfg, ofdm)
        self.turbo_spec = turbo.make_spec(
            self.k_info, cfg.rate, seed=options.turbo_seed,
            n_iterations=options.turbo_iterations)
        self.n_syms = self.turbo_spec.n_coded // MOD_BITS
        self.n_chip_cols = self.n_syms * self.spread.n_freq


def _complex_noise(rng, shape, var):
    # single-precision draws: quantization sits ~140 dB under the noise power
    scale = np.sqrt(var / 2.0)
    draws = rng.standard_normal((2,) + shape, dtype=np.float32)
    return (draws[0] + 1j * draws[1]) * scale


def _frame_batch(ctx: _ConfigContext, link: ch.OpticalLinkParams,
                 distance_m, speed_m_s, n_frames, options, rng,
                 want_capture):
    """Simulate one batch of frames; returns (llrs, bits, capture)."""
    ofdm = ctx.ofdm
    n_rx = link.n_detectors
    snr = ch.link_snr(link, distance_m)
    sigma_c2 = 1.0 / snr                       # combined per-pair noise var
    rho = ch.symbol_correlation(speed_m_s, link, ofdm.symbol_period_s)
    pairs = ofdm.data_pairs
    n_data = ofdm.data_symbols_per_frame

    bits = rng.integers(0, 2, (n_frames, ctx.k_info), dtype=np.int8)
    coded = turbo.turbo_encode_batch(bits, ctx.turbo_spec)
    syms = phy.qpsk_map(coded)
    chips = phy.tf_spread(syms, ctx.spread)
    grid = phy.place_chips(chips, ctx.spread, ofdm)    # (F, n_data, pairs)

    # tap gains per OFDM symbol, Gauss-Markov across the frame
    tap_power = np.array([options.power_ratio, 1.0 - options.power_ratio])
    gains = np.empty((ofdm.frame_symbols, n_frames, n_rx, 2))
    g = np.abs(rng.standard_normal((n_frames, n_rx, 2)) * np.sqrt(tap_power))
    for s in range(ofdm.frame_symbols):
        gains[s] = g
        g = ch.evolve_gains(g, tap_power, rho, rng)

    k_idx = np.arange(1, pairs + 1)
    phase = np.exp(-2j * np.pi * k_idx * ch.TAP_DELAY_SAMPLES[1] / ofdm.fft_size)

    eq = np.empty((n_frames, n_data, pairs), dtype=complex)
    eq_var = np.empty((n_frames, n_data, pairs))
    capture = None
    for m in range(n_data):
        gp = gains[2 * m]
        gd = gains[2 * m + 1]
        h_pilot = gp[..., 0, None] + gp[..., 1, None] * phase
        h_data = gd[..., 0, None] + gd[..., 1, None] * phase
        h_est = h_pilot + _complex_noise(rng, h_pilot.shape, sigma_c2)
        x = grid[:, m, :]
        if m == 0:
            # physical-domain bins of the first data symbol, all 32 bins
            bins_noise = _complex_noise(rng, (n_frames, n_rx, ofdm.fft_size), 1.0)
            sig = np.sqrt(snr / 2.0) * phy.hermitian_load(
                h_data * x[:, None, :], ofdm)
            if want_capture:
                nd = options.capture_detectors
                cap_bins = sig[0, :nd] + bins_noise[0, :nd]
                capture = phy.FrameWaveform(
                    samples=phy.symbol_from_bins(cap_bins, ofdm),
                    first_data_symbol=0)
            half = ofdm.fft_size // 2
            mirrored = np.conj(bins_noise[..., half + 1:][..., ::-1])
            combined_noise = np.sqrt(2.0 / snr) * (
                bins_noise[..., 1:half] + mirrored) / 2.0
            y = h_data * x[:, None, :] + combined_noise
        else:
            y = h_data * x[:, None, :] + _complex_noise(
                rng, h_data.shape, sigma_c2)
        z = np.einsum("frp,frp->fp", np.conj(h_est), y)
        gain = np.einsum("frp,frp->fp", np.abs(h_est), np.abs(h_est))
        # MMSE then bias removal; identical to ZF for a scalar statistic
        safe = np.where(gain > 0, gain, 1.0)
        eq[:, m, :] = np.where(gain > 0, z / safe, 0.0)
        eq_var[:, m, :] = np.where(gain > 0, sigma_c2 / safe, np.inf)

    chip_eq = phy.gather_chips(eq, ctx.spread, ofdm)[..., :ctx.n_chip_cols]
    chip_var = phy.gather_chips(eq_var, ctx.spread, ofdm)[..., :ctx.n_chip_cols]
    sym_eq = phy.tf_despread(chip_eq, ctx.spread)
    factor = ctx.spread.factor
    var_sym = chip_var.sum(axis=-2).reshape(
        n_frames, ctx.n_syms, ctx.spread.n_freq).sum(axis=-1) / factor ** 2
    with np.errstate(invalid="ignore"):
        llrs = phy.qpsk_llr(sym_eq, np.where(var_sym > 0, var_sym, np.inf))
    llrs = np.nan_to_num(llrs, nan=0.0, posinf=0.0, neginf=0.0)
    return llrs, bits, capture


def simulate_point(cfg: LinkConfig, distance_m: float, speed_m_s: float,
                   n_frames: int, seed: int,
                   link: ch.OpticalLinkParams = None,
                   ofdm: phy.OfdmParams = None,
                   options: SimOptions = None) -> PointResult:
    """Monte Carlo frame error rate at one (config, distance, speed) point.

    Frames run in fixed-size batches; the loop stops early once the error
    count reaches ``options.early_stop_errors``, recording the frames
    actually run.  The first frame's first data symbol is captured for
    feature extraction.  Identical seeds give identical results.
    """
    if n_frames < 1:
        raise ContractError("n_frames must be >= 1")
    link = link or ch.OpticalLinkParams()
    ofdm = ofdm or phy.OfdmParams()
    options = options or SimOptions()
    ctx = _ConfigContext(cfg, ofdm, options)
    rng = make_rng(seed)

    done = 0
    errors = 0
    capture = None
    while done < n_frames:
        batch = min(options.batch_frames, n_frames - done)
        llrs, bits, cap = _frame_batch(
            ctx, link, distance_m, speed_m_s, batch, options, rng,
            want_capture=done == 0)
        decoded = turbo.turbo_decode_batch(llrs, ctx.turbo_spec)
        errors += int(np.any(decoded != bits, axis=1).sum())
        done += batch
        if cap is not None:
            capture = cap
        if errors >= options.early_stop_errors:
            break
    return PointResult(n_frames=done, n_frame_errors=errors, capture=capture)


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class SweepPlan:
    """Grid of speeds x distances x repeats x configurations."""

    speeds_m_s: tuple = (0.1, 0.3, 0.4, 0.5)
    distances_m: tuple = tuple(float(d) for d in range(1, 61))
    repeats: int = 4
    config_indices: tuple = (1, 2, 3, 4, 5, 6)

    def __post_init__(self):
        if not (self.speeds_m_s and self.distances_m and self.config_indices):
            raise ContractError("sweep grid must be nonempty")
        if self.repeats < 1:
            raise ContractError("repeats must be >= 1")

    @property
    def n_points(self) -> int:
        return (len(self.speeds_m_s) * len(self.distances_m) * self.repeats
                * len(self.config_indices))


@dataclass
class SweepRow:
    config: int
    n_freq: int
    n_time: int
    rate: float
    speed_m_s: float
    distance_m: float
    repeat: int
    n_frames: int
    n_frame_errors: int
    fer: float
    throughput_bps: float
    capture: phy.FrameWaveform | None = field(default=None, repr=False,
                                              compare=False)


def point_seed(seed_base: int, speed_index: int, distance_index: int,
               repeat: int, config_index: int) -> int:
    """Deterministic per-point seed; independent of execution order."""
    return derive_seed(seed_base, speed_index, distance_index, repeat,
                       config_index)


def _point_row(cfg, plan, vi, di, rep, seed_base, link, ofdm, options,
               keep_captures):
    seed = point_seed(seed_base, vi, di, rep, cfg.index)
    res = simulate_point(cfg, plan.distances_m[di], plan.speeds_m_s[vi],
                         options.frames_per_point, seed, link, ofdm, options)
    return SweepRow(
        config=cfg.index, n_freq=cfg.n_freq, n_time=cfg.n_time,
        rate=cfg.rate_value, speed_m_s=plan.speeds_m_s[vi],
        distance_m=plan.distances_m[di], repeat=rep,
        n_frames=res.n_frames, n_frame_errors=res.n_frame_errors,
        fer=res.fer,
        throughput_bps=throughput(cfg, ofdm, res.fer),
        capture=res.capture if keep_captures else None,
    )


def _fused_rows(cfg, plan, vi, di, seed_base, link, ofdm, options,
                keep_captures):
    """All repeats of one (speed, distance, config) cell, decoded in one
    batch; bit-identical to running :func:`simulate_point` per repeat."""
    ctx = _ConfigContext(cfg, ofdm, options)
    pieces = []
    for rep in range(plan.repeats):
        rng = make_rng(point_seed(seed_base, vi, di, rep, cfg.index))
        pieces.append(_frame_batch(
            ctx, link, plan.distances_m[di], plan.speeds_m_s[vi],
            options.frames_per_point, options, rng, want_capture=True))
    llrs = np.concatenate([p[0] for p in pieces], axis=0)
    decoded = turbo.turbo_decode_batch(llrs, ctx.turbo_spec)
    rows = []
    n = options.frames_per_point
    for rep, (_, bits, cap) in enumerate(pieces):
        err = int(np.any(decoded[rep * n:(rep + 1) * n] != bits, axis=1).sum())
        rows.append(SweepRow(
            config=cfg.index, n_freq=cfg.n_freq, n_time=cfg.n_time,
            rate=cfg.rate_value, speed_m_s=plan.speeds_m_s[vi],
            distance_m=plan.distances_m[di], repeat=rep,
            n_frames=n, n_frame_errors=err, fer=err / n,
            throughput_bps=throughput(cfg, ofdm, err / n),
            capture=cap if keep_captures else None,
        ))
    return rows


def _run_cell(args):
    """All rows of one (speed, distance) cell, sorted by (repeat, config)."""
    plan, vi, di, seed_base, link, ofdm, options, keep_captures = args
    fuse = options.frames_per_point <= options.batch_frames
    cell = []
    for cfg_index in plan.config_indices:
        cfg = config_by_index(cfg_index)
        if fuse:
            cell.extend(_fused_rows(cfg, plan, vi, di, seed_base, link,
                                    ofdm, options, keep_captures))
        else:
            for rep in range(plan.repeats):
                cell.append(_point_row(cfg, plan, vi, di, rep, seed_base,
                                       link, ofdm, options, keep_captures))
    cell.sort(key=lambda r: (r.repeat, r.config))
    return cell


def sweep(plan: SweepPlan, seed_base: int,
          link: ch.OpticalLinkParams = None,
          ofdm: phy.OfdmParams = None,
          options: SimOptions = None,
          keep_captures: bool = False,
          parallelism: int = 1,
          progress=None) -> list:
    """Run the full grid; rows come back in canonical (v, d, repeat, c) order.

    Cells are independent tasks with their own derived seeds, so the result
    is bit-identical for every ``parallelism`` value and schedule.
    """
    link = link or ch.OpticalLinkParams()
    ofdm = ofdm or phy.OfdmParams()
    options = options or SimOptions()
    tasks = [(plan, vi, di, seed_base, link, ofdm, options, keep_captures)
             for vi in range(len(plan.speeds_m_s))
             for di in range(len(plan.distances_m))]
    rows = []
    if parallelism > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for i, cell in enumerate(pool.map(_run_cell, tasks)):
                rows.extend(cell)
                if progress is not None:
                    progress(i, len(tasks))
    else:
        for i, task in enumerate(tasks):
            rows.extend(_run_cell(task))
            if progress is not None:
                progress(i, len(tasks))
    return rows


def optimal_config(rows) -> int:
    """Winning configuration index among the six rows of one grid cell.

    Ties break toward the smallest index, so a fully dead cell labels as
    configuration 1.
    """
    rows = sorted(rows, key=lambda r: r.config)
    if [r.config for r in rows] != [c.index for c in CONFIGS]:
        raise ContractError("need exactly one row per configuration")
    values = [r.throughput_bps for r in rows]
    return int(np.argmax(values)) + 1


def coverage_distance(distance_fer_pairs, threshold: float = 0.1):
    """Largest distance with FER below threshold; None if never below."""
    covered = [d for d, fer in distance_fer_pairs if fer < threshold]
    return max(covered) if covered else None


# ---------------------------------------------------------------------------
# CSV interface

SWEEP_COLUMNS = ("config,nf,nt,rc,speed_mps,distance_m,repeat,"
                 "n_frames,n_frame_errors,fer,throughput_bps")


def sweep_rows_to_csv(rows) -> str:
    out = io.StringIO()
    out.write(SWEEP_COLUMNS + "\n")
    for r in rows:
        out.write(f"{r.config},{r.n_freq},{r.n_time},{r.rate!r},"
                  f"{r.speed_m_s!r},{r.distance_m!r},{r.repeat},"
                  f"{r.n_frames},{r.n_frame_errors},{r.fer!r},"
                  f"{r.throughput_bps!r}\n")
    return out.getvalue()


def write_sweep_csv(rows, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(sweep_rows_to_csv(rows))


def read_sweep_csv(path) -> list:
    rows = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != SWEEP_COLUMNS:
            raise ParseError(f"unexpected sweep header {header!r}", line=1)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != 11:
                raise ParseError("wrong column count", line=lineno)
            try:
                rows.append(SweepRow(
                    config=int(parts[0]), n_freq=int(parts[1]),
                    n_time=int(parts[2]), rate=float(parts[3]),
                    speed_m_s=float(parts[4]), distance_m=float(parts[5]),
                    repeat=int(parts[6]), n_frames=int(parts[7]),
                    n_frame_errors=int(parts[8]), fer=float(parts[9]),
                    throughput_bps=float(parts[10])))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    return rows
