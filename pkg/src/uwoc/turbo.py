"""Parallel-concatenated Turbo code with exact Log-MAP iterative decoding.

The mother code is rate 1/3: two identical recursive systematic
convolutional (RSC) constituents with octal polynomials (13, 15), memory 3,
joined by a seeded pseudo-random interleaver.  Both constituents are trellis
terminated with three tail steps each, so a K-bit block encodes to
3K + 12 bits; rate 1/2 keeps all systematic bits and alternates parity bits
between the constituents (tails are never punctured), giving 2K + 12.

Coded-bit layout: systematic block, first parity block, second parity
block (skipped positions simply absent under rate 1/2), then the
(systematic, parity) tail pairs of encoder one followed by encoder two.

Decoding runs the exact max* = max + log1p(exp(-|delta|)) BCJR per
constituent with extrinsic exchange; the LLR sign convention is positive
means bit 0.  All routines are vectorized over a leading frame axis so
Monte Carlo batches decode in one pass.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .seeding import derive_seed

FEEDBACK_POLY = 0o13
PARITY_POLY = 0o15
MEMORY = 3
N_STATES = 1 << MEMORY
N_TAIL_CODED = 4 * MEMORY     # both constituents emit (sys, par) per tail step

RATE_13 = "1/3"
RATE_12 = "1/2"

DEFAULT_INTERLEAVER_SEED = 404


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _build_tables():
    """Trellis tables indexed [input_bit, state]."""
    nxt = np.zeros((2, N_STATES), dtype=np.int64)
    par = np.zeros((2, N_STATES), dtype=np.int64)
    term = np.zeros(N_STATES, dtype=np.int64)
    for s in range(N_STATES):
        for b in (0, 1):
            msb = _parity(FEEDBACK_POLY & ((b << MEMORY) | s))
            par[b, s] = _parity(PARITY_POLY & ((msb << MEMORY) | s))
            nxt[b, s] = (msb << (MEMORY - 1)) | (s >> 1)
        # input that drives the recursion bit (and eventually the state) to zero
        term[s] = _parity(FEEDBACK_POLY & s)
    inv = np.zeros((2, N_STATES), dtype=np.int64)
    for b in (0, 1):
        inv[b, nxt[b]] = np.arange(N_STATES)
    return nxt, par, term, inv


_NEXT, _PAR, _TERM, _INV = _build_tables()
# branch parity signs, +1 for coded 0
_PAR_SIGN = 1.0 - 2.0 * _PAR
_NEG_INF = -1e30


def build_interleaver(length: int, seed: int) -> np.ndarray:
    """Seeded pseudo-random bijection on [0, length); fixed per (length, seed)."""
    if length < 1:
        raise ContractError("interleaver length must be >= 1")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, length)))
    return rng.permutation(length)


@dataclass(frozen=True)
class TurboCodeSpec:
    """Code parameters; ``interleaver`` fixes the info block length K."""

    interleaver: np.ndarray = field(repr=False)
    rate: str = RATE_13
    n_iterations: int = 8
    feedback_poly: int = FEEDBACK_POLY
    parity_poly: int = PARITY_POLY
    memory: int = MEMORY

    def __post_init__(self):
        perm = np.asarray(self.interleaver)
        if sorted(perm.tolist()) != list(range(perm.size)):
            raise ContractError("interleaver must be a bijection on [0, K)")
        if self.rate not in (RATE_12, RATE_13):
            raise ContractError(f"unsupported code rate {self.rate!r}")
        if self.n_iterations < 1:
            raise ContractError("n_iterations must be >= 1")

    @property
    def k_info(self) -> int:
        return int(np.asarray(self.interleaver).size)

    @property
    def rate_value(self) -> float:
        return 0.5 if self.rate == RATE_12 else 1.0 / 3.0

    @property
    def puncture_pattern(self) -> np.ndarray:
        """Kept-bit mask over the two mother parity streams, shape (2, K).

        Rate 1/3 keeps everything; rate 1/2 alternates parity bits between
        the constituents.  Systematic and tail bits are never punctured.
        """
        k = self.k_info
        keep = np.ones((2, k), dtype=bool)
        if self.rate == RATE_12:
            keep[0, 1::2] = False
            keep[1, 0::2] = False
        return keep

    @property
    def n_coded(self) -> int:
        return self.k_info + int(self.puncture_pattern.sum()) + N_TAIL_CODED


def make_spec(k_info: int, rate: str, seed: int = DEFAULT_INTERLEAVER_SEED,
              n_iterations: int = 8) -> TurboCodeSpec:
    return TurboCodeSpec(interleaver=build_interleaver(k_info, seed),
                         rate=rate, n_iterations=n_iterations)


# ---------------------------------------------------------------------------
# Encoding


def _rsc_encode(bits):
    """Encode (F, K) bits with one RSC; returns parity, tail_sys, tail_par."""
    n_frames, k = bits.shape
    parity = np.empty((n_frames, k), dtype=np.int8)
    state = np.zeros(n_frames, dtype=np.int64)
    for i in range(k):
        b = bits[:, i]
        parity[:, i] = _PAR[b, state]
        state = _NEXT[b, state]
    tail_sys = np.empty((n_frames, MEMORY), dtype=np.int8)
    tail_par = np.empty((n_frames, MEMORY), dtype=np.int8)
    for j in range(MEMORY):
        b = _TERM[state]
        tail_sys[:, j] = b
        tail_par[:, j] = _PAR[b, state]
        state = _NEXT[b, state]
    if np.any(state != 0):
        raise AssertionError("trellis termination failed")
    return parity, tail_sys, tail_par


def turbo_encode_batch(bits: np.ndarray, spec: TurboCodeSpec) -> np.ndarray:
    """Encode (F, K) info bits to (F, n_coded) coded bits."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.ndim != 2 or bits.shape[1] != spec.k_info:
        raise ContractError(
            f"expected info blocks of length {spec.k_info}, got {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ContractError("info bits must be 0 or 1")
    perm = np.asarray(spec.interleaver)
    par1, tail1_sys, tail1_par = _rsc_encode(bits)
    par2, tail2_sys, tail2_par = _rsc_encode(bits[:, perm])
    k = spec.k_info
    if spec.rate == RATE_12:
        parity_blocks = [par1[:, 0::2], par2[:, 1::2]]
    else:
        parity_blocks = [par1, par2]
    tails = np.stack([tail1_sys, tail1_par], axis=-1).reshape(-1, 2 * MEMORY)
    tails2 = np.stack([tail2_sys, tail2_par], axis=-1).reshape(-1, 2 * MEMORY)
    return np.concatenate([bits] + parity_blocks + [tails, tails2], axis=1)


def turbo_encode(info_bits: np.ndarray, spec: TurboCodeSpec) -> np.ndarray:
    """Encode one info block of length K to the coded bit sequence."""
    info_bits = np.asarray(info_bits)
    if info_bits.ndim != 1:
        raise ContractError("turbo_encode takes a 1-D bit sequence")
    return turbo_encode_batch(info_bits[None, :], spec)[0]


# ---------------------------------------------------------------------------
# Log-MAP decoding


def _maxstar(a, b):
    """Exact max* = max(a, b) + log1p(exp(-|a - b|))."""
    m = np.maximum(a, b)
    return m + np.log1p(np.exp(-np.abs(a - b)))


def _bcjr(l_sys, l_par, l_apri, tail):
    """Exact Log-MAP pass for one terminated RSC constituent.

    Arguments are (F, K) channel LLRs for systematic and parity bits, the a
    priori info LLRs, and (F, MEMORY, 2) tail LLRs.  Returns (F, K) a
    posteriori info LLRs.

    Internals run in float32 with a state-major (K, S, F) layout: the
    forward and backward recursions are sequential in k, while the branch
    metrics and the final bit metrics vectorize over the whole block.
    """
    n_frames, k = l_sys.shape
    half_in = np.asarray(0.5 * (l_sys + l_apri).T, dtype=np.float32)  # (K, F)
    half_par = np.asarray(0.5 * l_par.T, dtype=np.float32)
    # gamma[k, s, f] for input bit 0 / 1
    sign0 = _PAR_SIGN[0].astype(np.float32)[:, None]
    sign1 = _PAR_SIGN[1].astype(np.float32)[:, None]
    g0 = half_in[:, None, :] + half_par[:, None, :] * sign0
    g1 = -half_in[:, None, :] + half_par[:, None, :] * sign1

    inv0, inv1 = _INV[0], _INV[1]
    nxt0, nxt1 = _NEXT[0], _NEXT[1]
    # pre-gathered gammas so each recursion step is gather + add + max*
    g0f = g0[:, inv0, :]
    g1f = g1[:, inv1, :]

    alphas = np.empty((k, N_STATES, n_frames), dtype=np.float32)
    alpha = np.full((N_STATES, n_frames), _NEG_INF, dtype=np.float32)
    alpha[0] = 0.0
    for i in range(k):
        alphas[i] = alpha
        alpha = _maxstar(alpha[inv0] + g0f[i], alpha[inv1] + g1f[i])

    # run beta back through the terminated tail
    beta = np.full((N_STATES, n_frames), _NEG_INF, dtype=np.float32)
    beta[0] = 0.0
    tail32 = np.asarray(tail, dtype=np.float32)
    for j in range(MEMORY - 1, -1, -1):
        th_in = 0.5 * tail32[:, j, 0]
        th_par = 0.5 * tail32[:, j, 1]
        tg0 = th_in + th_par * sign0 + beta[nxt0]
        tg1 = -th_in + th_par * sign1 + beta[nxt1]
        beta = _maxstar(tg0, tg1)

    betas = np.empty((k, N_STATES, n_frames), dtype=np.float32)
    for i in range(k - 1, -1, -1):
        betas[i] = beta       # beta at time i + 1
        beta = _maxstar(g0[i] + beta[nxt0], g1[i] + beta[nxt1])

    # bit metrics in bulk: met_b[k, f] = max*_s alpha + gamma_b + beta(next)
    def _metric(g, nxt):
        s = alphas + g + betas[:, nxt, :]
        m = s.max(axis=1)
        np.exp(s - m[:, None, :], out=s)
        return m + np.log(s.sum(axis=1))

    post = _metric(g0, nxt0) - _metric(g1, nxt1)
    return post.T.astype(np.float64)


def _split_llrs(llrs, spec):
    k = spec.k_info
    l_sys = llrs[:, :k]
    l_par1 = np.zeros_like(l_sys)
    l_par2 = np.zeros_like(l_sys)
    if spec.rate == RATE_12:
        n1 = (k + 1) // 2
        l_par1[:, 0::2] = llrs[:, k:k + n1]
        l_par2[:, 1::2] = llrs[:, k + n1:2 * k]
        pos = 2 * k
    else:
        l_par1 = llrs[:, k:2 * k]
        l_par2 = llrs[:, 2 * k:3 * k]
        pos = 3 * k
    tail1 = llrs[:, pos:pos + 2 * MEMORY].reshape(-1, MEMORY, 2)
    tail2 = llrs[:, pos + 2 * MEMORY:].reshape(-1, MEMORY, 2)
    return l_sys, l_par1, l_par2, tail1, tail2


def turbo_decode_batch(llrs: np.ndarray, spec: TurboCodeSpec) -> np.ndarray:
    """Decode (F, n_coded) channel LLRs to (F, K) hard bit decisions."""
    llrs = np.asarray(llrs, dtype=float)
    if llrs.ndim != 2 or llrs.shape[1] != spec.n_coded:
        raise ContractError(
            f"expected LLR blocks of length {spec.n_coded}, got {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ContractError("channel LLRs must be finite")
    perm = np.asarray(spec.interleaver)
    l_sys, l_par1, l_par2, tail1, tail2 = _split_llrs(llrs, spec)
    l_sys2 = l_sys[:, perm]

    apri1 = np.zeros_like(l_sys)
    post2 = np.zeros_like(l_sys)
    for _ in range(spec.n_iterations):
        post1 = _bcjr(l_sys, l_par1, apri1, tail1)
        ext1 = post1 - apri1 - l_sys
        apri2 = ext1[:, perm]
        post2 = _bcjr(l_sys2, l_par2, apri2, tail2)
        ext2 = post2 - apri2 - l_sys2
        apri1 = np.empty_like(ext2)
        apri1[:, perm] = ext2
    final = np.empty_like(post2)
    final[:, perm] = post2
    return (final < 0).astype(np.int8)


def turbo_decode(llrs: np.ndarray, spec: TurboCodeSpec) -> np.ndarray:
    """Decode one coded block's LLRs to K hard decisions (positive -> 0)."""
    llrs = np.asarray(llrs)
    if llrs.ndim != 1:
        raise ContractError("turbo_decode takes a 1-D LLR sequence")
    return turbo_decode_batch(llrs[None, :], spec)[0]
