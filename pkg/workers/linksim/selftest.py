"""
Self-test — compact in-process property checks run by ``linksim selftest``.

Each check returns a ``CheckResult``; the CLI prints one line per check and
exits non-zero if any fails.  The checks use dense oracles and small sizes
so the whole suite finishes in seconds.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy.linalg import hadamard

from linksim.core.epic_detector import fd_lmmse, variance_mse
from linksim.core.fec import CodeConfig, bcjr_decode, rsc_encode
from linksim.core.map_detector import build_amplitude_db, build_c_table
from linksim.core.numerics import Constellation, fft, fwht
from linksim.core.precode import PrecoderSpec, group_indices, precoder_matrix
from linksim.core.channel import proakis_c, to_fd
from linksim.core.simulate import complexity_table
from linksim.policy.kinds import PrecoderKind
from linksim.policy.profile import ComplexityPreset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


# ── Checks ───────────────────────────────────────────────────────────────────

def check_transforms(rng: np.random.Generator) -> Tuple[bool, str]:
    v = rng.standard_normal((3, 16)) + 1j * rng.standard_normal((3, 16))
    involution = np.max(np.abs(fwht(fwht(v)) - v))
    energy = abs(np.linalg.norm(fwht(v)) - np.linalg.norm(v))
    inverse = np.max(np.abs(fft(fft(v), inverse=True) - v))
    worst = max(involution, energy, inverse)
    return worst < 1e-12, f"max deviation {worst:.2e}"


def check_amplitude_identity(rng: np.random.Generator) -> Tuple[bool, str]:
    q, noise_var = 4, 0.7
    const = Constellation(4)
    db = build_amplitude_db(q, 4)
    y = rng.standard_normal(q)
    gains = np.abs(rng.standard_normal(q)) + 0.1
    table = build_c_table(y[None, :], gains[None, :], noise_var, const)
    metric = table.metric(db)[0]
    u = const.kappa * db.pam_vectors @ hadamard(q).T / np.sqrt(q)
    oracle = -np.sum((y - gains * u) ** 2, axis=1) / noise_var
    err = float(np.max(np.abs(metric - oracle)))
    return err < 1e-10, f"max error {err:.2e}"


def check_bcjr_oracle(rng: np.random.Generator) -> Tuple[bool, str]:
    code = CodeConfig()
    n_info = 6
    codebook = np.array([
        rsc_encode(np.array(u), code) for u in itertools.product((0, 1), repeat=n_info)
    ])
    llrs = 2.0 * rng.standard_normal(codebook.shape[1])
    app, _ = bcjr_decode(llrs, code=code, max_star="exact")
    log_weight = -(codebook @ llrs)
    oracle = np.array([
        np.logaddexp.reduce(log_weight[codebook[:, k] == 0])
        - np.logaddexp.reduce(log_weight[codebook[:, k] == 1])
        for k in range(codebook.shape[1])
    ])
    err = float(np.max(np.abs(app - oracle)))
    return err < 1e-9, f"max error {err:.2e}"


def check_lmmse_oracle(rng: np.random.Generator) -> Tuple[bool, str]:
    n, q, noise_var, v_a = 16, 4, 0.3, 0.6
    lam = to_fd(proakis_c(), n)
    worst = 0.0
    for kind in PrecoderKind:
        spec = PrecoderSpec.create(kind, n, q)
        h = np.diag(lam) @ precoder_matrix(spec)
        d_a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        d_e, v_e = fd_lmmse(y, lam, noise_var, d_a, v_a, spec)

        cov = v_a * h @ h.conj().T + noise_var * np.eye(n)
        gain = v_a * h.conj().T @ np.linalg.inv(cov)
        xi = np.real(np.diag(gain @ h))
        oracle_d = d_a + (gain @ (y - h @ d_a)) / xi
        oracle_v = np.array([
            np.mean(v_a / xi[group_indices(spec, p)] - v_a) for p in range(spec.p)
        ])
        worst = max(worst, float(np.max(np.abs(d_e - oracle_d))),
                    float(np.max(np.abs(v_e - oracle_v))))
    return worst < 1e-9, f"max error {worst:.2e} over {len(PrecoderKind)} precoders"


def check_variance_mse(rng: np.random.Generator) -> Tuple[bool, str]:
    spec = PrecoderSpec.create(PrecoderKind.SWH, 256, 8)
    worst = -np.inf
    for _ in range(1_000):
        full, sparse = variance_mse(rng.random(256), spec)
        worst = max(worst, sparse - full)
    return worst <= 1e-12, f"max(MSE_s - MSE) {worst:.2e}"


def check_complexity(rng: np.random.Generator) -> Tuple[bool, str]:
    rows = complexity_table(ComplexityPreset.table4())
    bad = [r for r in rows if not r.matches_expected]
    return not bad, f"{len(rows) - len(bad)}/{len(rows)} rows exact"


CHECKS: List[Tuple[str, Callable[[np.random.Generator], Tuple[bool, str]]]] = [
    ("transforms", check_transforms),
    ("amplitude-identity", check_amplitude_identity),
    ("bcjr-oracle", check_bcjr_oracle),
    ("lmmse-oracle", check_lmmse_oracle),
    ("variance-mse", check_variance_mse),
    ("complexity-table4", check_complexity),
]


def run_selftest(seed: int = 0) -> List[CheckResult]:
    results = []
    for name, check in CHECKS:
        rng = np.random.default_rng([seed, len(results)])
        try:
            passed, detail = check(rng)
        except Exception as e:   # a crashing check is a failed check
            logger.exception("check %s raised", name)
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))
    return results
