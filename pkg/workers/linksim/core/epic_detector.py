"""
SILE-EPIC — self-iterated one-tap frequency-domain LMMSE equalization with
expectation-propagation feedback, for every precoder kind.

The detector works in the grouped ``(P, Q)`` layout throughout: variances
are one value per group (``P = 1`` for the DFT precoder), so the DFT and
sparse paths run the same code.

Per self-iteration:

1. ``fd_lmmse``         a-priori (d_a, v_a) → extrinsic (d_e, v_e); from s = 1 on
                        v_a is floored by the residual energy
2. ``posterior_pmf``    Gaussian likelihood × bit prior → D_n, μ_n, γ_n
3. ``average_variance`` γ_n → γ̄ per group
4. ``ep_divide``        (μ, γ̄) ÷ (d_e, v_e) → (d★, v★), with fallback
5. ``damp``             (d★, v★) smoothed against the previous (d_a, v_a)

The VAMP variant smooths μ and v_e instead and feeds (d★, v★) back as is.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import softmax

from linksim.core.numerics import LLR_MAX, Constellation, clip_llr
from linksim.core.opcount import OpTally
from linksim.core.precode import PrecoderSpec, gather, scatter, transform_groups
from linksim.errors import InvalidArgumentError
from linksim.policy.kinds import EpicVariant
from linksim.policy.profile import Schedule

logger = logging.getLogger(__name__)

V_MIN = 1e-10
_TINY = np.finfo(float).tiny


@dataclass
class EpState:
    """Message set of one turbo call, grouped layout ``(P, Q)`` / ``(P,)``."""

    d_a: np.ndarray
    v_a: np.ndarray
    d_e: Optional[np.ndarray] = None
    v_e: Optional[np.ndarray] = None
    mu_a: Optional[np.ndarray] = None
    gamma_bar: Optional[np.ndarray] = None
    d_star: Optional[np.ndarray] = None
    v_star: Optional[np.ndarray] = None
    fallbacks: int = 0

    @classmethod
    def initial(cls, spec: PrecoderSpec) -> EpState:
        return cls(
            d_a=np.zeros((spec.p, spec.q), dtype=complex),
            v_a=np.ones(spec.p),
        )


# ── Demapper side ────────────────────────────────────────────────────────────

def prior_pmf(
    apriori_llrs: np.ndarray,
    constellation: Constellation,
    llr_clip: float = LLR_MAX,
) -> np.ndarray:
    """``P_n(d) ∝ exp(−Σ_b φ_b(d)·L_{n,b})`` over the J points, normalised.

    *apriori_llrs* has shape ``(..., log2 J)``.
    """
    llrs = clip_llr(np.asarray(apriori_llrs, dtype=float), llr_clip)
    if llrs.shape[-1] != constellation.bits_per_symbol:
        raise InvalidArgumentError(
            f"expected {constellation.bits_per_symbol} LLRs per symbol, got {llrs.shape[-1]}"
        )
    logits = -llrs @ constellation.point_bits.T.astype(float)
    return softmax(logits, axis=-1)


def posterior_pmf(
    d_e: np.ndarray,
    v_e: np.ndarray,
    prior: np.ndarray,
    constellation: Constellation,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``D_n(d) ∝ exp(−|d − d_e|²/v_e)·P_n(d)`` and its first two moments.

    Returns ``(D, mu, gamma)`` with ``D`` of shape ``(..., J)``.
    """
    d_e = np.asarray(d_e)
    v_e = np.asarray(v_e, dtype=float)
    points = constellation.points
    dist = np.abs(points - d_e[..., None]) ** 2
    with np.errstate(divide="ignore"):
        log_prior = np.log(np.maximum(prior, _TINY))
    post = softmax(-dist / v_e[..., None] + log_prior, axis=-1)
    mu = post @ points
    gamma = np.maximum(post @ (np.abs(points) ** 2) - np.abs(mu) ** 2, 0.0)
    return post, mu, gamma


def average_variance(gamma: np.ndarray, spec: PrecoderSpec) -> np.ndarray:
    """Per-group mean of ``γ_n``; one group spanning all N for DFT.

    Accepts natural order ``(N,)`` or grouped ``(P, Q)``; returns ``(P,)``.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape == (spec.n,):
        gamma = gather(spec, gamma)
    if gamma.shape != (spec.p, spec.q):
        raise InvalidArgumentError(f"expected {spec.n} variances, got shape {gamma.shape}")
    return gamma.mean(axis=-1)


def variance_mse(gamma: np.ndarray, spec: PrecoderSpec) -> Tuple[float, float]:
    """Spread of ``γ_n`` around the single mean and around the group means.

    Returns ``(mse_full, mse_sparse)``; by convexity ``mse_sparse ≤ mse_full``.
    """
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    if gamma.size != spec.n:
        raise InvalidArgumentError(f"expected {spec.n} variances, got {gamma.size}")
    second = float(np.mean(gamma ** 2))
    full = second - float(np.mean(gamma)) ** 2
    sparse = second - float(np.mean(average_variance(gamma, spec) ** 2))
    return full, sparse


@dataclass(frozen=True, eq=False)
class EpDivision:
    d_star: np.ndarray
    v_star: np.ndarray
    fallback: np.ndarray


def ep_divide(
    mu_a: np.ndarray,
    gamma_bar: np.ndarray,
    d_e: np.ndarray,
    v_e: np.ndarray,
    prev_d: Optional[np.ndarray] = None,
    prev_v: Optional[np.ndarray] = None,
    v_min: float = V_MIN,
) -> EpDivision:
    """Divide the projected posterior by the extrinsic Gaussian.

    ``d★ = (μ v_e − d_e γ̄)/(v_e − γ̄)``, ``v★ = v_e γ̄/(v_e − γ̄)`` where
    ``γ̄ < v_e``.  Elsewhere the fallback flag is set and the previous
    ``(d_a, v_a)`` is kept (``(d_e, v_e)`` when none is given).

    ``gamma_bar`` and ``v_e`` are per group and broadcast against the last
    axis of the symbol arrays.
    """
    mu_a = np.asarray(mu_a)
    d_e = np.asarray(d_e)
    gamma_bar = np.asarray(gamma_bar, dtype=float)
    v_e = np.asarray(v_e, dtype=float)

    fallback = ~(gamma_bar < v_e)
    denom = np.where(fallback, 1.0, v_e - gamma_bar)
    g = gamma_bar[..., None] if gamma_bar.ndim else gamma_bar
    ve = v_e[..., None] if v_e.ndim else v_e
    den = denom[..., None] if denom.ndim else denom

    d_star = (mu_a * ve - d_e * g) / den
    v_star = np.maximum(v_e * gamma_bar / denom, v_min)

    keep_d = d_e if prev_d is None else np.asarray(prev_d)
    keep_v = v_e if prev_v is None else np.asarray(prev_v, dtype=float)
    fb = fallback[..., None] if fallback.ndim else fallback
    d_star = np.where(fb, keep_d, d_star)
    v_star = np.where(fallback, keep_v, v_star)
    return EpDivision(d_star=d_star, v_star=v_star, fallback=fallback)


def damp(
    d_star: np.ndarray,
    v_star: np.ndarray,
    prev_d: np.ndarray,
    prev_v: np.ndarray,
    beta: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Convex smoothing ``(1 − β)·new + β·prev`` of means and variances."""
    if not 0.0 <= beta <= 1.0:
        raise InvalidArgumentError(f"damping factor must lie in [0, 1], got {beta}")
    return (
        (1.0 - beta) * np.asarray(d_star) + beta * np.asarray(prev_d),
        (1.0 - beta) * np.asarray(v_star) + beta * np.asarray(prev_v),
    )


def dem_extrinsic_llrs(
    posteriors: np.ndarray,
    apriori: np.ndarray,
    constellation: Constellation,
    llr_clip: float = LLR_MAX,
) -> np.ndarray:
    """``L^e_{n,b} = ln(Σ_{b=0} D_n / Σ_{b=1} D_n) − L^a_{n,b}``, clipped."""
    post = np.asarray(posteriors, dtype=float)
    bits = constellation.point_bits.astype(float)
    p1 = post @ bits
    p0 = post @ (1.0 - bits)
    with np.errstate(divide="ignore"):
        ratio = np.log(p0) - np.log(p1)
    return clip_llr(ratio - clip_llr(np.asarray(apriori, dtype=float), llr_clip), llr_clip)


# ── Equalizer side ───────────────────────────────────────────────────────────

def residual_variance(
    residual: np.ndarray,
    power: np.ndarray,
    noise_var: float,
) -> np.ndarray:
    """Per-group symbol error variance implied by the FD residual energy.

    ``E|y_k − Λ_k (A d_a)_k|² = |Λ_k|² v + σ²`` for an a-priori error of
    variance ``v`` spread by the unitary precoder, so
    ``v ≈ (mean_k |r_k|² − σ²) / mean_k |Λ_k|²``, floored at 0.
    """
    energy = np.mean(np.abs(residual) ** 2, axis=-1)
    gain = np.maximum(np.mean(power, axis=-1), _TINY)
    return np.maximum((energy - noise_var) / gain, 0.0)


def _fd_lmmse_grouped(
    yg: np.ndarray,
    lg: np.ndarray,
    noise_var: float,
    dg: np.ndarray,
    v_a: np.ndarray,
    spec: PrecoderSpec,
    counter: Optional[OpTally] = None,
    residual_floor: bool = False,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grouped LMMSE; returns ``(d_e, v_e, v_a)`` with the variance actually used.

    With *residual_floor* the a-priori variance is raised to what the
    residual energy shows, so a confident but wrong ``d_a`` cannot pull
    ``v_e`` below the true error.
    """
    v_a = np.broadcast_to(np.asarray(v_a, dtype=float), (spec.p,))
    power = np.abs(lg) ** 2
    residual = yg - lg * transform_groups(spec, dg, counter=counter)
    if residual_floor:
        v_a = np.maximum(v_a, residual_variance(residual, power, noise_var))
    denom = power * v_a[:, None] + noise_var
    lam = np.mean(power / denom, axis=-1)
    matched = np.conj(lg) * residual / denom
    d_e = dg + transform_groups(spec, matched, adjoint=True, counter=counter) / lam[:, None]
    v_e = 1.0 / lam - v_a
    return d_e, v_e, v_a


def fd_lmmse(
    y: np.ndarray,
    lam: np.ndarray,
    noise_var: float,
    d_a: np.ndarray,
    v_a: np.ndarray | float,
    spec: PrecoderSpec,
    counter: Optional[OpTally] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Unbiased one-tap FD LMMSE, one normalization per group.

    ``λ = mean_k |Λ_k|²/(|Λ_k|² v_a + σ²)``;
    ``d_e = d_a + (1/λ)·A^H Λ^H D⁻¹ (y − Λ A d_a)``;  ``v_e = 1/λ − v_a``.

    Returns ``d_e`` in natural symbol order and ``v_e`` of shape ``(P,)``.
    """
    if np.any(np.asarray(v_a) <= 0):
        raise InvalidArgumentError("a-priori variance must be positive")
    d_e, v_e, _ = _fd_lmmse_grouped(
        gather(spec, y), gather(spec, lam), noise_var, gather(spec, d_a), v_a, spec,
        counter=counter,
    )
    return scatter(spec, d_e), v_e


# ── Frame-level detection ────────────────────────────────────────────────────

def _symbol_llrs(apriori: np.ndarray, n: int, constellation: Constellation) -> np.ndarray:
    """``[c^I ; c^Q]`` layout → ``(N, log2 J)`` per-symbol LLRs."""
    b = constellation.bits_per_rail
    half = n * b
    return np.concatenate(
        (apriori[:half].reshape(n, b), apriori[half:].reshape(n, b)), axis=1,
    )


def _tally_demapper(counter: OpTally, n_symbols: int, order: int) -> None:
    """Per-symbol cost of posterior, moments, averaging, division and damping."""
    log2j = order.bit_length() - 1
    counter.add(
        additions=n_symbols * (log2j + 3 * order       # D_n
                               + 2 * order             # μ
                               + 2 * order + 1         # γ
                               + 1 + 2 + 2),           # γ̄, d★/v★, damping
        multiplications=n_symbols * (4 * order         # D_n
                                     + 2 * order       # μ
                                     + 2 * order + 1   # γ
                                     + 6 + 4),         # d★/v★, damping
    )


def detect_frame_epic(
    y: np.ndarray,
    lam: np.ndarray,
    noise_var: float,
    apriori: np.ndarray,
    spec: PrecoderSpec,
    schedule: Schedule,
    variant: EpicVariant,
    constellation: Constellation,
    turbo_index: int = 0,
    counter: Optional[OpTally] = None,
    llr_clip: float = LLR_MAX,
) -> np.ndarray:
    """Run ``N_s + 1`` self-iterations and return extrinsic bit LLRs.

    The message state restarts from ``d_a = 0, v_a = 1`` on every call.
    """
    variant = EpicVariant(variant)
    n = spec.n
    b_rail = constellation.bits_per_rail
    apriori = np.asarray(apriori, dtype=float)
    if apriori.shape != (2 * n * b_rail,):
        raise InvalidArgumentError(
            f"expected {2 * n * b_rail} a-priori LLRs, got {apriori.shape}"
        )

    la_sym = _symbol_llrs(apriori, n, constellation)
    prior = gather(spec, prior_pmf(la_sym, constellation, llr_clip))   # (P, Q, J)
    yg = gather(spec, y)
    lg = gather(spec, lam)

    state = EpState.initial(spec)
    post = prior
    for s in range(schedule.n_self + 1):
        beta = schedule.beta(turbo_index, s)
        d_e, v_e, v_used = _fd_lmmse_grouped(
            yg, lg, noise_var, state.d_a, state.v_a, spec, counter,
            residual_floor=state.d_e is not None,
        )
        if variant is EpicVariant.VAMP and state.v_e is not None:
            v_e = (1.0 - beta) * v_e + beta * state.v_e
        v_e = np.maximum(v_e, V_MIN)

        post, mu, gamma = posterior_pmf(d_e, v_e[:, None], prior, constellation)
        if variant is EpicVariant.VAMP and state.mu_a is not None:
            mu = (1.0 - beta) * mu + beta * state.mu_a
        gamma_bar = average_variance(gamma, spec)
        if spec.kind.is_sparse and spec.p > 1:
            full, sparse = variance_mse(scatter(spec, gamma), spec)
            if sparse > full + 1e-12:
                logger.warning("group variance MSE %.3e exceeds full MSE %.3e", sparse, full)

        div = ep_divide(mu, gamma_bar, d_e, v_e, prev_d=state.d_a, prev_v=v_used)
        n_fallback = int(np.count_nonzero(div.fallback))
        if n_fallback:
            logger.debug("EP division fallback in %d group(s) at s=%d", n_fallback, s)

        if variant is EpicVariant.VAMP:
            d_next, v_next = div.d_star, div.v_star
        else:
            d_next, v_next = damp(div.d_star, div.v_star, state.d_a, v_used, beta)

        if counter is not None:
            _tally_demapper(counter, n, constellation.order)

        state = EpState(
            d_a=d_next,
            v_a=np.maximum(v_next, V_MIN),
            d_e=d_e,
            v_e=v_e,
            mu_a=mu,
            gamma_bar=gamma_bar,
            d_star=div.d_star,
            v_star=div.v_star,
            fallbacks=state.fallbacks + n_fallback,
        )

    le = dem_extrinsic_llrs(scatter(spec, post), la_sym, constellation, llr_clip)
    return np.concatenate((le[:, :b_rail].reshape(-1), le[:, b_rail:].reshape(-1)))
