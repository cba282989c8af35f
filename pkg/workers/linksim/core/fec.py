"""
FEC — recursive systematic convolutional code, interleaver, and a SISO
BCJR decoder in the log domain.

Codewords are the systematic and parity streams multiplexed bit by bit,
``[u0, p0, u1, p1, ...]``, including ``memory`` tail steps that drive the
encoder back to the zero state.  ``N_c = 2 · (N_b + memory)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from linksim.core.numerics import DEFAULT_FC_TABLE, LLR_MAX, FcTable, clip_llr
from linksim.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

# Finite stand-in for log(0): keeps LUT differences well-defined.
_NEG = -1.0e30


@dataclass(frozen=True)
class CodeConfig:
    """Rate-1/2 RSC code given by octal feedforward / feedback polynomials."""

    feedforward: int = 0o5
    feedback: int = 0o7
    memory: int = 2

    def __post_init__(self) -> None:
        top = 1 << self.memory
        for name, poly in (("feedforward", self.feedforward), ("feedback", self.feedback)):
            if not top <= poly < 2 * top:
                raise InvalidArgumentError(
                    f"{name} polynomial {poly:o} does not have degree {self.memory}"
                )

    @property
    def rate(self) -> float:
        return 0.5

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, n_info: int) -> int:
        return 2 * (n_info + self.memory)

    def info_length(self, n_coded: int) -> int:
        if n_coded % 2 or n_coded // 2 <= self.memory:
            raise InvalidArgumentError(
                f"coded length {n_coded} cannot hold a terminated codeword"
            )
        return n_coded // 2 - self.memory


@dataclass(frozen=True, eq=False)
class Trellis:
    """State-transition tables of a ``CodeConfig``.

    State ``s`` packs the register ``(a[k-1], ..., a[k-m])`` MSB first.
    """

    next_state: np.ndarray   # (S, 2)
    parity: np.ndarray       # (S, 2)
    tail_input: np.ndarray   # (S,)
    prev_state: np.ndarray   # (S, 2) predecessors of each state
    prev_input: np.ndarray   # (S, 2) inputs on those branches


def _taps(poly: int, memory: int) -> np.ndarray:
    """Coefficients g_0..g_m of an octal polynomial (MSB is D^0)."""
    return np.array([(poly >> (memory - i)) & 1 for i in range(memory + 1)])


@lru_cache(maxsize=None)
def build_trellis(code: CodeConfig) -> Trellis:
    m = code.memory
    n_states = code.n_states
    fb = _taps(code.feedback, m)
    ff = _taps(code.feedforward, m)

    next_state = np.zeros((n_states, 2), dtype=np.int64)
    parity = np.zeros((n_states, 2), dtype=np.int64)
    tail_input = np.zeros(n_states, dtype=np.int64)

    for s in range(n_states):
        reg = [(s >> (m - 1 - i)) & 1 for i in range(m)]   # a[k-1] .. a[k-m]
        feedback = int(np.dot(fb[1:], reg)) & 1
        tail_input[s] = feedback
        for u in (0, 1):
            a = u ^ feedback
            parity[s, u] = (ff[0] * a + int(np.dot(ff[1:], reg))) & 1
            next_state[s, u] = (a << (m - 1)) | (s >> 1)

    prev_state = np.zeros((n_states, 2), dtype=np.int64)
    prev_input = np.zeros((n_states, 2), dtype=np.int64)
    fill = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            t = next_state[s, u]
            prev_state[t, fill[t]] = s
            prev_input[t, fill[t]] = u
            fill[t] += 1

    return Trellis(next_state, parity, tail_input, prev_state, prev_input)


# ── Encoder ──────────────────────────────────────────────────────────────────

def rsc_encode(
    info_bits: np.ndarray,
    code: CodeConfig = CodeConfig(),
    n_coded: Optional[int] = None,
) -> np.ndarray:
    """Encode and terminate; returns the multiplexed codeword."""
    info = np.asarray(info_bits, dtype=np.int64)
    if info.ndim != 1 or np.any((info != 0) & (info != 1)):
        raise InvalidArgumentError("info bits must be a 1-D 0/1 sequence")
    if n_coded is not None and code.coded_length(info.size) != n_coded:
        raise InvalidArgumentError(
            f"{info.size} info bits do not fill a {n_coded}-bit codeword "
            f"(expected {code.info_length(n_coded)})"
        )

    trellis = build_trellis(code)
    k_total = info.size + code.memory
    out = np.empty(2 * k_total, dtype=np.uint8)
    state = 0
    for k in range(k_total):
        u = int(info[k]) if k < info.size else int(trellis.tail_input[state])
        out[2 * k] = u
        out[2 * k + 1] = trellis.parity[state, u]
        state = int(trellis.next_state[state, u])
    return out


def is_codeword(hard_coded: np.ndarray, code: CodeConfig = CodeConfig()) -> bool:
    """True if *hard_coded* is a valid terminated codeword."""
    bits = np.asarray(hard_coded, dtype=np.uint8)
    info = bits[0:2 * code.info_length(bits.size):2]
    return bool(np.array_equal(rsc_encode(info, code), bits))


# ── SISO decoder ─────────────────────────────────────────────────────────────

def _pair_op(max_star: str, fc: FcTable):
    if max_star == "lut":
        return fc.max_star
    if max_star == "exact":
        return np.logaddexp
    raise InvalidArgumentError(f"unknown max-star mode {max_star!r}")


def _reduce(op, x: np.ndarray) -> np.ndarray:
    """Sequential max-star fold over the last axis."""
    acc = x[..., 0]
    for i in range(1, x.shape[-1]):
        acc = op(acc, x[..., i])
    return acc


def bcjr_decode(
    channel_llrs: np.ndarray,
    apriori_llrs: Optional[np.ndarray] = None,
    code: CodeConfig = CodeConfig(),
    fc: FcTable = DEFAULT_FC_TABLE,
    max_star: str = "lut",
    llr_clip: float = LLR_MAX,
) -> Tuple[np.ndarray, np.ndarray]:
    """Log-MAP forward/backward recursion over the terminated trellis.

    Parameters
    ----------
    channel_llrs : ndarray
        LLRs on all ``N_c`` coded bits in codeword order.
    apriori_llrs : ndarray, optional
        Additional a-priori LLRs on the coded bits, same layout.
    max_star : {"lut", "exact"}
        ``lut`` uses the shared ``f_c`` table; ``exact`` uses ``logaddexp``.

    Returns
    -------
    (app_coded, app_info)
        APP LLRs on every coded bit (clipped) and on the ``N_b`` info bits.
    """
    llrs = np.asarray(channel_llrs, dtype=float)
    if llrs.ndim != 1:
        raise InvalidArgumentError("channel LLRs must be 1-D")
    if apriori_llrs is not None:
        apriori = np.asarray(apriori_llrs, dtype=float)
        if apriori.shape != llrs.shape:
            raise InvalidArgumentError(
                f"a-priori length {apriori.shape} != channel length {llrs.shape}"
            )
        llrs = llrs + apriori
    n_info = code.info_length(llrs.size)
    llrs = clip_llr(llrs, llr_clip)

    op = _pair_op(max_star, fc)
    trellis = build_trellis(code)
    n_states = code.n_states
    k_total = llrs.size // 2
    l_sys = llrs[0::2]
    l_par = llrs[1::2]

    # gamma[k, s, u] = log p(u_k) + log p(p_k) up to a constant
    u_bits = np.array([0, 1])
    gamma = (
        -u_bits[None, None, :] * l_sys[:, None, None]
        - trellis.parity[None, :, :] * l_par[:, None, None]
    )
    tail_mask = u_bits[None, :] != trellis.tail_input[:, None]
    gamma[n_info:, tail_mask] = _NEG

    alpha = np.full((k_total + 1, n_states), _NEG)
    alpha[0, 0] = 0.0
    for k in range(k_total):
        branch = alpha[k, trellis.prev_state] + gamma[k, trellis.prev_state, trellis.prev_input]
        a = _reduce(op, branch)
        alpha[k + 1] = a - a.max()

    beta = np.full((k_total + 1, n_states), _NEG)
    beta[k_total, 0] = 0.0
    for k in range(k_total - 1, -1, -1):
        branch = gamma[k] + beta[k + 1, trellis.next_state]
        b = _reduce(op, branch)
        beta[k] = b - b.max()

    # metric[k, s, u] over every branch of every step
    metric = alpha[:-1, :, None] + gamma + beta[1:][:, trellis.next_state]

    sys0 = _reduce(op, metric[:, :, 0])
    sys1 = _reduce(op, metric[:, :, 1])

    flat = metric.reshape(k_total, -1)
    par_flat = trellis.parity.reshape(-1)
    par0 = _reduce(op, flat[:, par_flat == 0])
    par1 = _reduce(op, flat[:, par_flat == 1])

    app = np.empty(2 * k_total)
    app[0::2] = sys0 - sys1
    app[1::2] = par0 - par1
    app = clip_llr(app, llr_clip)
    return app, app[0:2 * n_info:2].copy()


# ── Interleaver ──────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class Interleaver:
    """Bit permutation ``π``: ``interleave(v)[i] = v[π[i]]``."""

    permutation: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        perm = np.asarray(self.permutation)
        if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise InvalidArgumentError("interleaver permutation is not a bijection")

    @property
    def length(self) -> int:
        return int(self.permutation.size)

    @classmethod
    def identity(cls, n: int) -> Interleaver:
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> Interleaver:
        return cls(rng.permutation(n))

    @classmethod
    def from_seed(cls, n: int, seed: int) -> Interleaver:
        return cls(np.random.default_rng(seed).permutation(n), seed=seed)

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (self.length,):
            raise InvalidArgumentError(
                f"expected a block of length {self.length}, got shape {v.shape}"
            )
        return v

    def interleave(self, v: np.ndarray) -> np.ndarray:
        return self._check(v)[self.permutation]

    def deinterleave(self, v: np.ndarray) -> np.ndarray:
        v = self._check(v)
        out = np.empty_like(v)
        out[self.permutation] = v
        return out
