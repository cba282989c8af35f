"""
Precoders — DFT, sparse DFT (F_Q ⊗ I_P) and sparse Walsh-Hadamard
(W_Q ⊗ I_P) frequency-domain spreading.

Group ``p`` owns the symbol / subcarrier indices ``I_p = {p + qP}``.  Every
kind is applied the same way: gather the ``(P, Q)`` grouped layout, run a
Q-point transform per row, scatter back.  DFT is the ``P = 1`` case.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from linksim.core.numerics import fft, fwht, is_power_of_two
from linksim.core.opcount import OpTally
from linksim.errors import InvalidArgumentError
from linksim.policy.kinds import PrecoderKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrecoderSpec:
    """Precoder kind and block geometry; ``N = Q · P``."""

    kind: PrecoderKind
    n: int
    q: int

    def __post_init__(self) -> None:
        if not is_power_of_two(self.n) or not is_power_of_two(self.q):
            raise InvalidArgumentError(
                f"N and Q must be powers of two, got N={self.n}, Q={self.q}"
            )
        if self.q > self.n:
            raise InvalidArgumentError(f"Q={self.q} exceeds N={self.n}")
        if self.kind is PrecoderKind.DFT and self.q != self.n:
            raise InvalidArgumentError("the DFT precoder spreads over all N subcarriers (Q = N)")

    @classmethod
    def create(
        cls,
        kind: PrecoderKind,
        n: int,
        q: Optional[int] = None,
        channel_length: Optional[int] = None,
    ) -> PrecoderSpec:
        """Build a spec, forcing ``Q = N`` for DFT and warning when ``Q < L``."""
        kind = PrecoderKind(kind)
        if kind is PrecoderKind.DFT or q is None:
            q = n
        spec = cls(kind=kind, n=n, q=q)
        if channel_length is not None and spec.violates_equal_gain(channel_length):
            logger.warning(
                "%s with Q=%d < L=%d: symbols of a group no longer see equal channel gain",
                kind.value, q, channel_length,
            )
        return spec

    @property
    def p(self) -> int:
        return self.n // self.q

    def violates_equal_gain(self, channel_length: int) -> bool:
        return self.kind.is_sparse and self.q < channel_length


@dataclass(frozen=True, eq=False)
class GroupView:
    """Snapshot of one group's sub-vectors."""

    p: int
    indices: np.ndarray
    y_p: np.ndarray
    lambda_p: np.ndarray
    d_p: Optional[np.ndarray] = None


# ── Group structure ──────────────────────────────────────────────────────────

def group_indices(spec: PrecoderSpec, p: int) -> np.ndarray:
    if not 0 <= p < spec.p:
        raise InvalidArgumentError(f"group index {p} outside 0..{spec.p - 1}")
    return p + spec.p * np.arange(spec.q)


def gather(spec: PrecoderSpec, v: np.ndarray) -> np.ndarray:
    """``(N, ...)`` natural order → ``(P, Q, ...)`` grouped layout (a copy)."""
    v = np.asarray(v)
    if v.shape[0] != spec.n:
        raise InvalidArgumentError(f"expected leading length {spec.n}, got {v.shape[0]}")
    grouped = v.reshape(spec.q, spec.p, *v.shape[1:])
    return np.ascontiguousarray(np.swapaxes(grouped, 0, 1))


def scatter(spec: PrecoderSpec, g: np.ndarray) -> np.ndarray:
    """Inverse of ``gather``."""
    g = np.asarray(g)
    if g.shape[:2] != (spec.p, spec.q):
        raise InvalidArgumentError(
            f"expected grouped shape ({spec.p}, {spec.q}, ...), got {g.shape}"
        )
    return np.swapaxes(g, 0, 1).reshape(spec.n, *g.shape[2:])


def split_groups(
    spec: PrecoderSpec,
    y: np.ndarray,
    lam: np.ndarray,
    d: Optional[np.ndarray] = None,
) -> List[GroupView]:
    yg = gather(spec, y)
    lg = gather(spec, lam)
    dg = gather(spec, d) if d is not None else None
    return [
        GroupView(
            p=p,
            indices=group_indices(spec, p),
            y_p=yg[p],
            lambda_p=lg[p],
            d_p=None if dg is None else dg[p],
        )
        for p in range(spec.p)
    ]


# ── Transforms ───────────────────────────────────────────────────────────────

def transform_groups(
    spec: PrecoderSpec,
    g: np.ndarray,
    adjoint: bool = False,
    counter: Optional[OpTally] = None,
) -> np.ndarray:
    """Apply the per-group Q-point transform (or its adjoint) to ``(P, Q)`` rows."""
    g = np.asarray(g, dtype=complex)
    if spec.kind is PrecoderKind.SWH:
        return fwht(g, counter=counter)
    return fft(g, inverse=adjoint, counter=counter)


def precode(spec: PrecoderSpec, d: np.ndarray, counter: Optional[OpTally] = None) -> np.ndarray:
    """``x = A · d``."""
    d = np.asarray(d)
    if d.shape != (spec.n,):
        raise InvalidArgumentError(f"expected {spec.n} symbols, got shape {d.shape}")
    return scatter(spec, transform_groups(spec, gather(spec, d), counter=counter))


def deprecode(spec: PrecoderSpec, x: np.ndarray, counter: Optional[OpTally] = None) -> np.ndarray:
    """``d = A^H · x``."""
    x = np.asarray(x)
    if x.shape != (spec.n,):
        raise InvalidArgumentError(f"expected {spec.n} samples, got shape {x.shape}")
    return scatter(spec, transform_groups(spec, gather(spec, x), adjoint=True, counter=counter))


def precoder_matrix(spec: PrecoderSpec) -> np.ndarray:
    """Dense ``A`` (N × N); for oracles and diagnostics only."""
    return np.stack([precode(spec, e) for e in np.eye(spec.n, dtype=complex)], axis=1)
