"""
SWH MAP detection — per-group, per-rail enumeration over PAM vectors.

After phase correction the in-phase and quadrature rails of a group are
independent real models ``y_rail = |Λ_p| · W_Q · z + w``.  Every candidate
``z`` projects onto a finite amplitude set ``s_i``, so the squared errors
are tabulated once per group (the C-table) and each hypothesis metric is a
sum of Q table reads indexed by the amplitude database ``S(z, q)``.

Three extrinsic LLR flavours share that front end:

* ``exact_map_extrinsic``    — log-sum-exp per PAM level, then per bit
* ``log_map_extrinsic``      — max-star folds through the ``f_c`` table
* ``max_log_map_extrinsic``  — per-set maxima only
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.linalg import hadamard
from scipy.special import logsumexp

from linksim.core.numerics import (
    DEFAULT_FC_TABLE,
    LLR_MAX,
    Constellation,
    FcTable,
    clip_llr,
    is_power_of_two,
)
from linksim.core.opcount import OpTally
from linksim.core.precode import GroupView, PrecoderSpec, gather, scatter
from linksim.errors import CapabilityError, DegenerateChannelError, InvalidArgumentError
from linksim.policy.kinds import DbStorage, MapVariant, PrecoderKind

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_BUDGET = 2 ** 20
GAIN_EPS = 1e-12


# ── Amplitude index database ─────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class AmplitudeIndexDb:
    """Enumeration of ``z ∈ R^Q`` with the amplitude index ``S(z, q)``.

    Rows follow lexicographic order of the ascending level indices, so the
    negation of row ``k`` is row ``Z - 1 - k``.  With ``DbStorage.HALF`` only
    the first half is stored and the rest is rebuilt from
    ``S(-z, q) = Q(√J - 1) - S(z, q)``.
    """

    q: int
    constellation: Constellation
    stored_levels: np.ndarray    # (rows, Q) ascending level indices
    stored_s_index: np.ndarray   # (rows, Q)
    storage: DbStorage = DbStorage.FULL

    @property
    def size(self) -> int:
        return self.constellation.side ** self.q

    @property
    def max_index(self) -> int:
        return self.q * (self.constellation.side - 1)

    @property
    def width(self) -> int:
        return self.max_index + 1

    def _unfold(self, stored: np.ndarray, mirror: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        if self.storage is DbStorage.FULL:
            return stored
        return np.concatenate((stored, mirror(stored)[::-1]), axis=0)

    @cached_property
    def level_index(self) -> np.ndarray:
        side = self.constellation.side
        return self._unfold(self.stored_levels, lambda v: side - 1 - v)

    @cached_property
    def s_index(self) -> np.ndarray:
        """``(Z, Q)`` table of ``S(z, q)``."""
        top = self.max_index
        return self._unfold(self.stored_s_index, lambda v: top - v)

    @cached_property
    def pam_vectors(self) -> np.ndarray:
        """``(Z, Q)`` unnormalized odd-integer PAM vectors."""
        return self.constellation.integer_levels[self.level_index]

    @cached_property
    def bit_table(self) -> np.ndarray:
        """``(Z, Q, B)`` label bits of every coordinate."""
        return self.constellation.pam_labels[self.level_index]

    @cached_property
    def bit_sets(self) -> np.ndarray:
        """``(Q, B, 2, Z/2)`` row indices with bit ``b`` of ``z_q`` equal to 0 / 1."""
        z, q, b = self.bit_table.shape
        flat = self.bit_table.reshape(z, q * b)
        order = np.argsort(flat, axis=0, kind="stable").T
        return order.reshape(q, b, 2, z // 2)

    @cached_property
    def level_sets(self) -> np.ndarray:
        """``(Q, M, Z/M)`` row indices with ``z_q`` at each ascending level."""
        side = self.constellation.side
        order = np.argsort(self.level_index, axis=0, kind="stable").T
        return order.reshape(self.q, side, self.size // side)


def build_amplitude_db(
    q: int,
    order: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    storage: DbStorage = DbStorage.FULL,
) -> AmplitudeIndexDb:
    """Enumerate ``R^Q`` and index every ``(W̃_Q z)_q`` into the amplitude set.

    Raises
    ------
    CapabilityError
        If ``J^(Q/2)`` exceeds *budget*.
    """
    if not is_power_of_two(q):
        raise InvalidArgumentError(f"Q must be a power of two, got {q}")
    const = Constellation(order)
    side = const.side
    size = side ** q
    if size > budget:
        raise CapabilityError(
            f"MAP detection for {order}-QAM with Q={q} enumerates {size} PAM vectors, "
            f"over the enumeration budget of {budget}",
            limit=budget,
            requested=size,
        )

    levels = np.indices((side,) * q).reshape(q, -1).T
    z = const.integer_levels[levels]
    u = z @ hadamard(q).T
    shifted = u + q * (side - 1)
    if np.any(shifted % 2):
        raise AssertionError("Walsh-Hadamard image left the amplitude lattice")
    s_index = shifted // 2

    storage = DbStorage(storage)
    if storage is DbStorage.HALF:
        keep = max(size // 2, 1)
        levels, s_index = levels[:keep], s_index[:keep]
    logger.debug("amplitude db: Q=%d J=%d rows=%d storage=%s", q, order, size, storage.value)
    return AmplitudeIndexDb(
        q=q,
        constellation=const,
        stored_levels=levels,
        stored_s_index=s_index,
        storage=storage,
    )


# ── Phase correction and C-table ─────────────────────────────────────────────

def _phase_correct(y: np.ndarray, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    gains = np.abs(lam)
    if np.any(gains < GAIN_EPS):
        raise DegenerateChannelError(
            f"channel gain below {GAIN_EPS:g} on {int(np.sum(gains < GAIN_EPS))} subcarrier(s)"
        )
    rotated = np.conj(lam) / gains * y
    return rotated.real.copy(), rotated.imag.copy(), gains


def phase_correct(group: GroupView) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Undo the channel phase of a group: returns ``(y_I, y_Q, |Λ_p|)``."""
    return _phase_correct(group.y_p, group.lambda_p)


def amplitude_set(q: int, constellation: Constellation) -> np.ndarray:
    """Normalized amplitudes ``s_i = κ(−Q(√J−1) + 2i)/√Q``."""
    top = q * (constellation.side - 1)
    return constellation.kappa * (-top + 2 * np.arange(top + 1)) / np.sqrt(q)


@dataclass(frozen=True, eq=False)
class CTable:
    """``C[..., q, i]`` squared-error table of one rail for a batch of groups.

    With ``noise_scaled=False`` the ``1/σ²`` factor is deferred to
    ``metric``.
    """

    values: np.ndarray
    noise_var: float
    noise_scaled: bool = True

    @property
    def q(self) -> int:
        return self.values.shape[-2]

    @property
    def width(self) -> int:
        return self.values.shape[-1]

    def metric(self, db: AmplitudeIndexDb, counter: Optional[OpTally] = None) -> np.ndarray:
        """``Σ_q C[q][S(z, q)]`` for every row of *db*: shape ``(..., Z)``."""
        s = db.s_index
        total = np.zeros(self.values.shape[:-2] + (db.size,))
        for q in range(self.q):
            total += self.values[..., q, :][..., s[:, q]]
        if counter is not None:
            counter.add(additions=total.size * self.q)
        if not self.noise_scaled:
            total /= self.noise_var
            if counter is not None:
                counter.add(divisions=total.size)
        return total


def build_c_table(
    y_rail: np.ndarray,
    gains: np.ndarray,
    noise_var: float,
    constellation: Constellation,
    scale_noise: bool = True,
    counter: Optional[OpTally] = None,
) -> CTable:
    """``C[q][i] = −(y_rail[q] − gains[q]·s_i)² / σ²`` over the amplitude set."""
    if not noise_var > 0:
        raise InvalidArgumentError(f"noise variance must be positive, got {noise_var}")
    y_rail = np.asarray(y_rail, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if y_rail.shape != gains.shape:
        raise InvalidArgumentError(f"rail {y_rail.shape} and gains {gains.shape} differ")
    s = amplitude_set(y_rail.shape[-1], constellation)
    residual = y_rail[..., None] - gains[..., None] * s
    values = -residual ** 2
    if scale_noise:
        values = values / noise_var
    if counter is not None:
        counter.add(
            additions=values.size,
            multiplications=values.size * (3 if scale_noise else 2),
        )
    return CTable(values=values, noise_var=float(noise_var), noise_scaled=scale_noise)


# ── Extrinsic LLRs ───────────────────────────────────────────────────────────

def _check_apriori(ctable: CTable, db: AmplitudeIndexDb, apriori_rail: np.ndarray) -> np.ndarray:
    apriori = np.asarray(apriori_rail, dtype=float)
    b = db.constellation.bits_per_rail
    if ctable.q != db.q or ctable.width != db.width:
        raise InvalidArgumentError(
            f"C-table ({ctable.q}×{ctable.width}) does not match db (Q={db.q}, W={db.width})"
        )
    if apriori.shape != ctable.values.shape[:-2] + (db.q * b,):
        raise InvalidArgumentError(
            f"a-priori rail shape {apriori.shape} does not match {db.q}·{b} bits per group"
        )
    return apriori


def _hypothesis_metric(
    ctable: CTable,
    db: AmplitudeIndexDb,
    apriori: np.ndarray,
    counter: Optional[OpTally],
) -> np.ndarray:
    """``t(z) = Σ_q C[q][S(z,q)] − Σ_{q,b} φ_b(z_q)·L^a_{q,b}``."""
    t = ctable.metric(db, counter=counter)
    bits = db.bit_table.reshape(db.size, -1).astype(float)
    t -= apriori @ bits.T
    if counter is not None:
        counter.add(additions=t.size * bits.shape[1])
    return t


def exact_map_extrinsic(
    ctable: CTable,
    db: AmplitudeIndexDb,
    apriori_rail: np.ndarray,
    counter: Optional[OpTally] = None,
) -> np.ndarray:
    """Exact marginalisation: log-probability of each level per coordinate,
    then per-bit log-ratios minus the a-priori LLRs."""
    apriori = _check_apriori(ctable, db, apriori_rail)
    t = _hypothesis_metric(ctable, db, apriori, counter)
    labels = db.constellation.pam_labels
    b_rail = db.constellation.bits_per_rail

    out = np.empty_like(apriori)
    for q in range(db.q):
        log_p = logsumexp(t[..., db.level_sets[q]], axis=-1)   # (..., M)
        for b in range(b_rail):
            zero = labels[:, b] == 0
            num = logsumexp(log_p[..., zero], axis=-1)
            den = logsumexp(log_p[..., ~zero], axis=-1)
            k = q * b_rail + b
            out[..., k] = num - den - apriori[..., k]
    return out


def log_map_extrinsic(
    ctable: CTable,
    db: AmplitudeIndexDb,
    fc: FcTable,
    apriori_rail: np.ndarray,
    counter: Optional[OpTally] = None,
) -> np.ndarray:
    """Max-star folds of ``t(z)`` over the bit-0 and bit-1 candidate sets."""
    apriori = _check_apriori(ctable, db, apriori_rail)
    t = _hypothesis_metric(ctable, db, apriori, counter)
    b_rail = db.constellation.bits_per_rail

    out = np.empty_like(apriori)
    for q in range(db.q):
        for b in range(b_rail):
            zero, one = db.bit_sets[q, b]
            k = q * b_rail + b
            delta0 = fc.reduce(t[..., zero], initial=-np.inf, counter=counter)
            delta1 = fc.reduce(t[..., one], initial=-np.inf, counter=counter)
            out[..., k] = delta0 - delta1 - apriori[..., k]
    return out


def max_log_map_extrinsic(
    ctable: CTable,
    db: AmplitudeIndexDb,
    apriori_rail: np.ndarray,
    counter: Optional[OpTally] = None,
) -> np.ndarray:
    """Difference of per-set maxima of ``t(z)``."""
    apriori = _check_apriori(ctable, db, apriori_rail)
    t = _hypothesis_metric(ctable, db, apriori, counter)
    b_rail = db.constellation.bits_per_rail

    out = np.empty_like(apriori)
    for q in range(db.q):
        for b in range(b_rail):
            zero, one = db.bit_sets[q, b]
            k = q * b_rail + b
            out[..., k] = t[..., zero].max(axis=-1) - t[..., one].max(axis=-1) - apriori[..., k]
    return out


# ── Frame-level detection ────────────────────────────────────────────────────

def detect_frame_map(
    y: np.ndarray,
    lam: np.ndarray,
    noise_var: float,
    apriori: np.ndarray,
    spec: PrecoderSpec,
    variant: MapVariant,
    constellation: Constellation,
    db: Optional[AmplitudeIndexDb] = None,
    fc: FcTable = DEFAULT_FC_TABLE,
    counter: Optional[OpTally] = None,
    llr_clip: float = LLR_MAX,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> np.ndarray:
    """Extrinsic LLRs for a whole SWH frame in the ``[c^I ; c^Q]`` layout."""
    if spec.kind is not PrecoderKind.SWH:
        raise InvalidArgumentError(
            f"MAP detection needs the rail-separable SWH precoder, got {spec.kind.value}"
        )
    variant = MapVariant(variant)
    b_rail = constellation.bits_per_rail
    half = spec.n * b_rail
    apriori = np.asarray(apriori, dtype=float)
    if apriori.shape != (2 * half,):
        raise InvalidArgumentError(f"expected {2 * half} a-priori LLRs, got {apriori.shape}")
    if db is None:
        db = build_amplitude_db(spec.q, constellation.order, budget=budget)

    y_i, y_q, gains = _phase_correct(gather(spec, y), gather(spec, lam))

    rails = []
    for y_rail, la_rail in ((y_i, apriori[:half]), (y_q, apriori[half:])):
        la = gather(spec, la_rail.reshape(spec.n, b_rail)).reshape(spec.p, -1)
        ctable = build_c_table(
            y_rail, gains, noise_var, constellation,
            scale_noise=variant is not MapVariant.MAXLOG,
            counter=counter,
        )
        if variant is MapVariant.EXACT:
            le = exact_map_extrinsic(ctable, db, la, counter=counter)
        elif variant is MapVariant.LOG:
            le = log_map_extrinsic(ctable, db, fc, la, counter=counter)
        else:
            le = max_log_map_extrinsic(ctable, db, la, counter=counter)
        rails.append(scatter(spec, le.reshape(spec.p, spec.q, b_rail)).reshape(-1))
    return clip_llr(np.concatenate(rails), llr_clip)
