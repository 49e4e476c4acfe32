"""Finite-SNR Monte Carlo outage estimation and diversity-slope regression.

Each protocol's exact frame mutual information is evaluated per channel draw;
an outage is counted when it falls below m*R with R = r*log2(rho) bits per
use.  Trials are keyed by global index, so counts are reproducible for any
chunking or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .protocols import ChannelRealization, ProtocolSpec, sample_fading_block

CHUNK_TRIALS = 1 << 16

# Per-symbol transmit power is rho with unit noise variance, so rho appears
# directly in every mutual-information expression.


@dataclass(frozen=True)
class OutagePoint:
    """Outage estimate at one SNR point."""

    snr_db: float
    trials: int
    outage_count: int

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if not 0 <= self.outage_count <= self.trials:
            raise ValueError("outage_count must lie in [0, trials]")

    @property
    def rho(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def p_hat(self) -> float:
        return self.outage_count / self.trials

    @property
    def stderr(self) -> float:
        """Binomial standard error of p_hat."""
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass
class OutageSeries:
    """Outage estimates over an SNR sweep plus the fitted diversity slope."""

    protocol: ProtocolSpec
    r: float
    points: list
    fitted_exponent: float | None = None
    fit_stderr: float | None = None
    label: str = field(default="outage", repr=False)

    def __post_init__(self):
        snrs = [p.snr_db for p in self.points]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("SNR points must be strictly increasing")

    def to_csv(self) -> str:
        lines = ["snr_db,rho,trials,outage_count,p_hat,stderr"]
        for p in self.points:
            lines.append(
                f"{p.snr_db:g},{p.rho:.6g},{p.trials},{p.outage_count},"
                f"{p.p_hat:.6e},{p.stderr:.6e}"
            )
        if self.fitted_exponent is not None:
            lines.append(f"# slope={self.fitted_exponent:.6f} stderr={self.fit_stderr:.6f}")
        return "\n".join(lines) + "\n"


def rate_bits_per_use(r: float, snr_db: float) -> float:
    """Target rate R = r*log2(rho) in bits per channel use."""
    return r * (snr_db / 10.0) * math.log2(10.0)


def mutual_info_oaf(realization: ChannelRealization, rho: float, n: int | None = None) -> float:
    """Frame mutual information (bits over 2n-1 uses) of the orthogonal-AF
    protocol with single-entry relay matrices and the energy-tight relay gain
    alpha_j^2 = rho / (n*rho*|g_j|^2 + 1).

    Assembled as log2 det of the full frame matrix (numerically, via a
    Hermitian positive-definite similarity), not from a factored shortcut.
    """
    if rho <= 0 or not math.isfinite(rho):
        raise ValueError("rho must be positive and finite")
    if n is not None and n != realization.n:
        raise ValueError("n does not match the channel realization")
    g = realization.g[None, :]
    h = realization.h[None, :]
    return float(_mi_bits_oaf_block(g, h, rho)[0])


def _mi_bits_oaf_block(g: np.ndarray, h: np.ndarray, rho: float) -> np.ndarray:
    B, n = g.shape
    p, m = n, 2 * n - 1
    gamma_sr = np.abs(g[:, 1:]) ** 2
    alpha2 = rho / (p * rho * gamma_sr + 1.0)
    relay_gain = g[:, 1:] * h * np.sqrt(alpha2)  # (B, n-1)
    sigma = np.ones((B, m))
    sigma[:, n:] = 1.0 + np.abs(h) ** 2 * alpha2
    H = np.zeros((B, m, n), dtype=complex)
    H[:, np.arange(n), np.arange(n)] = g[:, :1]
    H[:, n + np.arange(n - 1), 1 + np.arange(n - 1)] = relay_gain
    G = H / np.sqrt(sigma)[:, :, None]
    J = np.eye(m) + rho * (G @ G.conj().swapaxes(1, 2))
    _, logdet = np.linalg.slogdet(J)
    return logdet / math.log(2.0)


def naf_relay_gain_sq(rho: float) -> float:
    """Relay amplification b^2 = rho/(rho + 1): zero SNR exponent, and exact
    average-power equality E[b^2(rho|g|^2 + 1)] = rho over the fading.

    A per-realization equality rule b^2 = rho/(rho|g|^2+1) would amplify pure
    noise at full power whenever the source-relay link fades, jamming the
    superimposed direct symbols and degrading the protocol's tradeoff.
    """
    return rho / (rho + 1.0)


def _mi_bits_naf_block(g: np.ndarray, h: np.ndarray, rho: float) -> np.ndarray:
    # sum of two-use subframe informations; relay noise is forwarded with
    # gain b_i*h_i, so the even sample has variance 1 + b_i^2|h_i|^2
    g1sq = np.abs(g[:, :1]) ** 2
    gisq = np.abs(g[:, 1:]) ** 2
    b2 = naf_relay_gain_sq(rho)
    c2 = b2 * np.abs(h) ** 2 * gisq  # |b_i h_i g_i|^2
    s2 = 1.0 / (1.0 + b2 * np.abs(h) ** 2)
    det = (1.0 + rho * g1sq) * (1.0 + rho * s2 * (c2 + g1sq)) - (rho ** 2) * s2 * g1sq * c2
    return np.sum(np.log2(det), axis=1)


def _outage_mask_nsdf(g, h, rho, p, q, R, orthogonal: bool) -> np.ndarray:
    m = p + q
    g1sq = np.abs(g[:, 0]) ** 2
    # a relay decodes iff its first-phase mutual information covers the frame rate
    participates = p * np.log2(1.0 + rho * np.abs(g[:, 1:]) ** 2) >= m * R
    relay_power = np.sum(np.abs(h) ** 2 * participates, axis=1)
    phase1 = p * np.log2(1.0 + rho * g1sq)
    if orthogonal:
        phase2 = q * np.log2(1.0 + rho * relay_power)
    else:
        phase2 = q * np.log2(1.0 + rho * g1sq + rho * relay_power)
    return (phase1 + phase2) < m * R


def _count_outages_chunk(spec: ProtocolSpec, r: float, snr_db: float,
                         start: int, stop: int, master_seed: int) -> int:
    g, h = sample_fading_block(spec.n, start, stop - start, master_seed)
    rho = 10.0 ** (snr_db / 10.0)
    R = rate_bits_per_use(r, snr_db)
    kind = spec.kind
    if kind == "oaf":
        if (spec.p, spec.q) != (spec.n, spec.n - 1):
            raise ValueError("OAF outage simulation requires p = n, q = n - 1")
        mask = _mi_bits_oaf_block(g, h, rho) < spec.frame_uses * R
    elif kind == "nsdf-fixed":
        mask = _outage_mask_nsdf(g, h, rho, spec.p, spec.q, R, orthogonal=False)
    elif kind == "osdf-fixed":
        mask = _outage_mask_nsdf(g, h, rho, spec.p, spec.q, R, orthogonal=True)
    elif kind == "naf":
        mask = _mi_bits_naf_block(g, h, rho) < spec.frame_uses * R
    elif kind == "miso":
        mask = np.log2(1.0 + rho * np.sum(np.abs(g) ** 2, axis=1)) < R
    else:
        raise ValueError(f"no outage model for protocol kind {kind!r}")
    return int(np.count_nonzero(mask))


def _chunks(trials: int):
    return [(s, min(s + CHUNK_TRIALS, trials)) for s in range(0, trials, CHUNK_TRIALS)]


def _run_chunk(args):
    return _count_outages_chunk(*args)


def outage_prob(spec: ProtocolSpec, r: float, snr_db: float, trials: int,
                master_seed: int) -> OutagePoint:
    """Estimate the outage probability at one SNR point."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    count = sum(_count_outages_chunk(spec, r, snr_db, s, e, master_seed)
                for s, e in _chunks(trials))
    return OutagePoint(snr_db=float(snr_db), trials=trials, outage_count=count)


def estimate_exponent(series_or_points) -> tuple:
    """Least-squares diversity slope of log10 p_hat against log10 rho, negated.

    Zero-count points are excluded; at least three usable points are required.
    """
    points = series_or_points.points if isinstance(series_or_points, OutageSeries) else series_or_points
    usable = [p for p in points if p.outage_count > 0]
    if len(usable) < 3:
        raise ValueError("need at least 3 SNR points with nonzero outage counts")
    x = np.array([p.snr_db / 10.0 for p in usable])  # log10(rho)
    y = np.log10([p.p_hat for p in usable])
    fit = stats.linregress(x, y)
    return -fit.slope, fit.stderr


def sweep(spec: ProtocolSpec, r: float, snr_list, trials_per_point: int,
          master_seed: int, workers: int = 1) -> OutageSeries:
    """Run outage_prob per SNR and attach the fitted exponent.

    Trials are keyed by global index, so the counts are bit-identical for any
    worker count.
    """
    snr_list = [float(s) for s in snr_list]
    tasks = [(spec, r, snr, s, e, master_seed)
             for snr in snr_list for s, e in _chunks(trials_per_point)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            counts = list(ex.map(_run_chunk, tasks, chunksize=1))
    else:
        counts = [_run_chunk(t) for t in tasks]
    per_point = len(_chunks(trials_per_point))
    points = []
    for i, snr in enumerate(snr_list):
        total = sum(counts[i * per_point:(i + 1) * per_point])
        points.append(OutagePoint(snr_db=snr, trials=trials_per_point, outage_count=total))
    series = OutageSeries(protocol=spec, r=float(r), points=points)
    try:
        series.fitted_exponent, series.fit_stderr = estimate_exponent(points)
    except ValueError:
        series.fitted_exponent = None
        series.fit_stderr = None
    return series


def miso_outage_closed_form(n: int, r: float, snr_db: float) -> float:
    """Exact single-antenna outage 1 - exp(-(2^R - 1)/rho); n = 1 only."""
    if n != 1:
        raise ValueError("closed form available for the single-antenna case only")
    rho = 10.0 ** (snr_db / 10.0)
    R = rate_bits_per_use(r, snr_db)
    return 1.0 - math.exp(-(2.0 ** R - 1.0) / rho)
