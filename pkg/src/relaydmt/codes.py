"""Explicit small-instance space-time codes, ML decoding and word-error sweeps.

The diagonal relay code spreads the conjugates of one algebraic-lattice symbol
across source and relay slots; the two-antenna-equivalent code for the
non-orthogonal AF schedule is the degree-2 cyclic construction over the golden
embedding with non-norm twist i.  Both constructions ship for desk-scale
alphabets and are exercised with exhaustive ML decoding.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .outage import (
    OutagePoint,
    OutageSeries,
    estimate_exponent,
    naf_relay_gain_sq,
    rate_bits_per_use,
)
from .protocols import ProtocolSpec, sample_fading_block


@dataclass(frozen=True)
class Constellation:
    """Square QAM alphabet, unit average energy, Gray-indexed.

    points[i] is the normalized symbol whose per-axis Gray labels form the
    index i; lattice[i] is the same symbol on the odd-integer grid.
    """

    M: int
    points: np.ndarray
    lattice: np.ndarray

    @property
    def size(self) -> int:
        return self.M * self.M


def _gray(k: int) -> int:
    return k ^ (k >> 1)


def qam_constellation(M: int) -> Constellation:
    M = int(M)
    if M < 2 or M & (M - 1):
        raise ValueError("M must be a power of two >= 2")
    levels = 2 * np.arange(M) - (M - 1)  # odd integers, ascending
    lattice = np.empty(M * M, dtype=complex)
    for k_re in range(M):
        for k_im in range(M):
            idx = _gray(k_re) * M + _gray(k_im)
            lattice[idx] = levels[k_re] + 1j * levels[k_im]
    scale = math.sqrt(float(np.mean(np.abs(lattice) ** 2)))
    return Constellation(M=M, points=lattice / scale, lattice=lattice)


@dataclass(frozen=True)
class NumberFieldEmbedding:
    """Degree-n real algebraic basis with its n conjugate embeddings.

    conjugate_matrix[i, j] = (i-th embedding applied to basis element j);
    applying it to an integer coefficient vector yields the conjugate vector.
    For nonzero Gaussian-integer coefficients the product of the conjugates is
    a nonzero Gaussian integer, so its squared magnitude is at least 1.
    """

    degree: int
    basis: tuple
    conjugate_matrix: np.ndarray

    def conjugates(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex)
        return self.conjugate_matrix @ coeffs

    def norm_product_sq(self, coeffs) -> float:
        return float(np.abs(np.prod(self.conjugates(coeffs))) ** 2)


def build_embedding(n: int) -> NumberFieldEmbedding:
    """Shipped instances: n = 2 golden-ratio quadratic field, n = 3 the real
    cyclic cubic field of conductor 7 (basis from powers of 2cos(2pi/7))."""
    if n == 2:
        s = math.sqrt(5.0)
        th, th_bar = (1.0 + s) / 2.0, (1.0 - s) / 2.0
        mat = np.array([[1.0, th], [1.0, th_bar]], dtype=complex)
        return NumberFieldEmbedding(degree=2, basis=(1.0, th), conjugate_matrix=mat)
    if n == 3:
        # the three embeddings permute 2cos(2pi/7) -> 2cos(4pi/7) -> 2cos(8pi/7)
        roots = [2.0 * math.cos(2.0 * math.pi * (2 ** k) / 7.0) for k in range(3)]
        mat = np.array([[1.0, t, t * t] for t in roots], dtype=complex)
        return NumberFieldEmbedding(degree=3, basis=(1.0, roots[0], roots[0] ** 2),
                                    conjugate_matrix=mat)
    raise ValueError(f"no embedding shipped for degree {n}")


def oaf_relay_matrices(n: int, alpha: float = 1.0) -> list:
    """The (n-1) x n single-entry relay matrices: A_j carries alpha at row
    j-2, column j-1 (0-indexed), so their row spaces are pairwise orthogonal."""
    if n < 2:
        raise ValueError("need n >= 2")
    mats = []
    for j in range(2, n + 1):
        A = np.zeros((n - 1, n), dtype=complex)
        A[j - 2, j - 1] = alpha
        mats.append(A)
    return mats


@dataclass(frozen=True)
class Codebook:
    """A finite code with its transmission schedule and energy scaling.

    matrices has shape (size, T, T); theta is the largest scalar keeping
    every scaled codeword inside the frame energy cap
    ||theta*X||_F^2 <= frame_uses * rho at build_rho.
    """

    kind: str
    matrices: np.ndarray
    rate_bits_per_use: float
    schedule: dict
    frame_uses: int
    build_rho: float
    max_frob2: float
    theta: float

    @property
    def size(self) -> int:
        return self.matrices.shape[0]

    @property
    def T(self) -> int:
        return self.matrices.shape[1]

    def theta_for(self, rho: float) -> float:
        return math.sqrt(self.frame_uses * rho / self.max_frob2)

    def diagonals(self) -> np.ndarray:
        return np.einsum("kii->ki", self.matrices)


def _check_codebook_inputs(M: int, rho: float):
    if M * M > 256:
        raise ValueError("desk-scale alphabets only: M^2 <= 256")
    if rho <= 0:
        raise ValueError("rho must be positive")


def oaf_diagonal_codebook(n: int, M: int, rho: float) -> Codebook:
    """Diagonal code diag(l, s(l), ..., s^{n-1}(l)) with l ranging over QAM
    coefficients in the algebraic basis; (M^2)^n codewords over 2n-1 uses.

    The recorded schedule is the full source-plus-relay-echo form; simulation
    uses the column-deleted parallel form.
    """
    _check_codebook_inputs(M, rho)
    emb = build_embedding(n)
    const = qam_constellation(M)
    coeffs = np.array(list(itertools.product(const.lattice, repeat=n)), dtype=complex)
    conj = coeffs @ emb.conjugate_matrix.T  # (size, n), row k = conjugate vector
    size = conj.shape[0]
    matrices = np.zeros((size, n, n), dtype=complex)
    matrices[:, np.arange(n), np.arange(n)] = conj
    frame_uses = 2 * n - 1
    max_frob2 = float(np.max(np.sum(np.abs(conj) ** 2, axis=1)))
    schedule = {
        "form": "source row sends all n conjugates, relay j echoes conjugate j-1",
        "frame_uses": frame_uses,
        "source_slots": list(range(1, n + 1)),
        "relay_slots": {j: n + j - 1 for j in range(2, n + 1)},
        "relay_conjugate": {j: j - 1 for j in range(2, n + 1)},
    }
    return Codebook(
        kind="oaf-diag",
        matrices=matrices,
        rate_bits_per_use=n * math.log2(M * M) / frame_uses,
        schedule=schedule,
        frame_uses=frame_uses,
        build_rho=float(rho),
        max_frob2=max_frob2,
        theta=math.sqrt(frame_uses * rho / max_frob2),
    )


NAF_TWIST = 1j  # non-norm element of the degree-2 cyclic construction


def naf_codebook(n: int, M: int, rho: float) -> Codebook:
    """2x2 code for the non-orthogonal AF schedule (single relay).

    Codewords [[l0, i*s(l1)], [l1, s(l0)]] over the golden embedding; the
    source sends the row-by-row vectorization and the relay forwards at slots
    3, 4 what it heard at slots 1, 2.
    """
    if n != 2:
        raise ValueError("the 2x2 instance ships for n = 2 only")
    _check_codebook_inputs(M, rho)
    emb = build_embedding(2)
    const = qam_constellation(M)
    pairs = np.array(list(itertools.product(const.lattice, repeat=2)), dtype=complex)
    v = pairs @ emb.conjugate_matrix.T  # rows (l, s(l))
    size = v.shape[0] ** 2
    i0, i1 = np.divmod(np.arange(size), v.shape[0])
    matrices = np.empty((size, 2, 2), dtype=complex)
    matrices[:, 0, 0] = v[i0, 0]
    matrices[:, 0, 1] = NAF_TWIST * v[i1, 1]
    matrices[:, 1, 0] = v[i1, 0]
    matrices[:, 1, 1] = v[i0, 1]
    frame_uses = 4 * (n - 1)
    max_frob2 = float(np.max(np.sum(np.abs(matrices) ** 2, axis=(1, 2))))
    span = 2 * (n - 1)
    schedule = {
        "form": "source sends the row-by-row vectorization; each relay echoes its block",
        "frame_uses": frame_uses,
        "listen_slots": {i: [4 * (n - 1) * (i - 2) + k for k in range(1, span + 1)]
                         for i in range(2, n + 1)},
        "forward_slots": {i: [4 * (n - 1) * (i - 2) + span + k for k in range(1, span + 1)]
                          for i in range(2, n + 1)},
    }
    return Codebook(
        kind="naf",
        matrices=matrices,
        rate_bits_per_use=math.log2(size) / frame_uses,
        schedule=schedule,
        frame_uses=frame_uses,
        build_rho=float(rho),
        max_frob2=max_frob2,
        theta=math.sqrt(frame_uses * rho / max_frob2),
    )


def naf_effective_channel(g1: complex, g2: complex, h2: complex, b: float = 1.0) -> np.ndarray:
    """Lower-triangular two-use equivalent channel [[g1, 0], [b*h2*g2, g1]]."""
    return np.array([[g1, 0.0], [b * h2 * g2, g1]], dtype=complex)


@dataclass(frozen=True)
class RowSchedule:
    """Row ownership of the (p + nq) x (p + nq) selection-DF code matrix.

    Rows are 1-indexed; the source owns rows 1..p in phase one and
    p+1..p+q in phase two, relay j owns rows p+(j-1)q+1 .. p+jq.
    """

    n: int
    p: int
    q: int
    T: int
    delay: int
    source_phase1: tuple
    source_phase2: tuple
    relay_rows: dict


def nsdf_schedule(n: int, p: int, q: int) -> RowSchedule:
    if q < 1 or p < q:
        raise ValueError("need p >= q >= 1")
    if n < 2:
        raise ValueError("need n >= 2")
    T = p + n * q
    relay_rows = {j: tuple(range(p + (j - 1) * q + 1, p + j * q + 1)) for j in range(2, n + 1)}
    return RowSchedule(
        n=n, p=p, q=q, T=T,
        delay=(p + q) * (p + n * q),
        source_phase1=tuple(range(1, p + 1)),
        source_phase2=tuple(range(p + 1, p + q + 1)),
        relay_rows=relay_rows,
    )


def ml_decode(codebook: Codebook, effective_channel, received, noise_whitener=None) -> int:
    """Exhaustive ML decoding: argmin over codewords of the whitened Euclidean
    distance; ties break toward the lowest index.

    effective_channel is either a length-T diagonal or a T x T matrix;
    received is a length-T vector or a T x C matrix; noise_whitener is an
    optional per-row weight vector.
    """
    if codebook.size > 1 << 16:
        raise ValueError("exhaustive decoding is limited to 2^16 codewords")
    T = codebook.T
    ch = np.asarray(effective_channel, dtype=complex)
    H = np.diag(ch) if ch.ndim == 1 else ch
    if H.shape != (T, T):
        raise ValueError(f"effective channel must be {T}x{T} (or length-{T} diagonal)")
    y = np.asarray(received, dtype=complex)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != T:
        raise ValueError(f"received signal must have {T} rows")
    cand = np.einsum("ij,kjl->kil", H, codebook.theta * codebook.matrices)
    cols = min(y.shape[1], cand.shape[2])
    diff = y[None, :, :cols] - cand[:, :, :cols]
    if noise_whitener is not None:
        w = np.asarray(noise_whitener, dtype=float)
        if w.shape != (T,):
            raise ValueError(f"noise whitener must have length {T}")
        diff = diff * w[None, :, None]
    dist = np.sum(np.abs(diff) ** 2, axis=(1, 2))
    return int(np.argmin(dist))


def _pick_indices(u: np.ndarray, size: int) -> np.ndarray:
    idx = np.floor(u * size).astype(np.int64)
    return np.minimum(idx, size - 1)


def _wer_chunk_oaf(codebook, g, h, extra, rho):
    n = g.shape[1]
    theta = codebook.theta_for(rho)
    diag = codebook.diagonals()  # (size, n)
    sent = _pick_indices(extra[:, 0], codebook.size)
    nvar = np.concatenate([np.ones((g.shape[0], 1)), 1.0 + np.abs(h) ** 2], axis=1)
    u = extra[:, 1:]
    noise = np.sqrt(-np.log(u[:, 0::2])) * np.exp(2j * np.pi * u[:, 1::2]) * np.sqrt(nvar)
    ch = np.concatenate([g[:, :1], g[:, 1:] * h], axis=1)  # (g1, g_j h_j)
    t = theta * ch  # (B, n)
    y = t * diag[sent] + noise
    w2 = 1.0 / nvar  # whitening weights squared
    # ||w(y - t x_k)||^2 expanded across the codebook with two small GEMMs
    term2 = ((w2 * np.conj(y) * t) @ diag.T).real
    term3 = (w2 * np.abs(t) ** 2) @ (np.abs(diag.T) ** 2)
    dist = term3 - 2.0 * term2  # constant ||w y||^2 dropped from the argmin
    decoded = np.argmin(dist, axis=1)
    return int(np.count_nonzero(decoded != sent))


def _wer_chunk_naf(codebook, g, h, extra, rho):
    B = g.shape[0]
    theta = codebook.theta_for(rho)
    sent = _pick_indices(extra[:, 0], codebook.size)
    b2sq = naf_relay_gain_sq(rho)
    b = math.sqrt(b2sq)
    rowvar = np.stack([np.ones(B), 1.0 + b2sq * np.abs(h[:, 0]) ** 2], axis=1)
    u = extra[:, 1:]
    z = np.sqrt(-np.log(u[:, 0::2])) * np.exp(2j * np.pi * u[:, 1::2])
    noise = z.reshape(B, 2, 2) * np.sqrt(rowvar)[:, :, None]
    Heff = np.zeros((B, 2, 2), dtype=complex)
    Heff[:, 0, 0] = g[:, 0]
    Heff[:, 1, 1] = g[:, 0]
    Heff[:, 1, 0] = b * h[:, 0] * g[:, 1]
    X = codebook.matrices
    y = theta * np.einsum("bij,bjl->bil", Heff, X[sent]) + noise
    w = 1.0 / np.sqrt(rowvar)  # per-row whitening
    A = theta * Heff * w[:, :, None]
    Yw = y * w[:, :, None]
    G = np.einsum("bji,bjl->bil", np.conj(A), Yw).reshape(B, 4)
    Mg = np.einsum("bji,bjl->bil", np.conj(A), A).reshape(B, 4)
    vecX = X.reshape(-1, 4)
    vecP = np.einsum("kij,klj->kli", X, np.conj(X)).reshape(-1, 4)  # (X X^H)^T flattened
    term2 = (np.conj(G) @ vecX.T).real
    term3 = (Mg @ vecP.T).real
    dist = term3 - 2.0 * term2
    decoded = np.argmin(dist, axis=1)
    return int(np.count_nonzero(decoded != sent))


def _wer_chunk(args) -> int:
    spec, codebook, snr_db, start, stop, master_seed = args
    rho = 10.0 ** (snr_db / 10.0)
    n = spec.n
    n_rx = 4 if codebook.kind == "naf" else n
    g, h, extra = sample_fading_block(n, start, stop - start, master_seed,
                                      extra_slots=1 + 2 * n_rx)
    if codebook.kind == "oaf-diag":
        return _wer_chunk_oaf(codebook, g, h, extra, rho)
    return _wer_chunk_naf(codebook, g, h, extra, rho)


_CODE_PROTOCOLS = {"oaf-diag": "oaf", "naf": "naf"}


def simulate_wer(spec: ProtocolSpec, codebook: Codebook, snr_list, trials: int,
                 master_seed: int, workers: int = 1) -> OutageSeries:
    """Word-error sweep: random codeword, exact channel and colored noise per
    trial, whitened exhaustive ML decoding, fitted slope attached."""
    if _CODE_PROTOCOLS.get(codebook.kind) != spec.kind:
        raise ValueError(f"codebook {codebook.kind!r} does not match protocol {spec.kind!r}")
    if codebook.kind == "naf" and spec.n != 2:
        raise ValueError("the shipped code covers n = 2 only")
    from .outage import CHUNK_TRIALS
    chunks = [(s, min(s + CHUNK_TRIALS, trials)) for s in range(0, trials, CHUNK_TRIALS)]
    snr_list = [float(s) for s in snr_list]
    tasks = [(spec, codebook, snr, s, e, master_seed) for snr in snr_list for s, e in chunks]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            counts = list(ex.map(_wer_chunk, tasks, chunksize=1))
    else:
        counts = [_wer_chunk(t) for t in tasks]
    per_point = len(chunks)
    points = []
    for i, snr in enumerate(snr_list):
        total = sum(counts[i * per_point:(i + 1) * per_point])
        points.append(OutagePoint(snr_db=snr, trials=trials, outage_count=total))
    series = OutageSeries(protocol=spec, r=0.0, points=points, label="wer")
    try:
        series.fitted_exponent, series.fit_stderr = estimate_exponent(points)
    except ValueError:
        series.fitted_exponent = None
        series.fit_stderr = None
    return series


def codebook_to_csv(codebook: Codebook) -> str:
    """Flattened complex entries for external verification."""
    lines = ["index,row,col,re,im"]
    for k in range(codebook.size):
        for r in range(codebook.T):
            for c in range(codebook.T):
                z = codebook.matrices[k, r, c]
                lines.append(f"{k},{r},{c},{z.real:.17g},{z.imag:.17g}")
    return "\n".join(lines) + "\n"
