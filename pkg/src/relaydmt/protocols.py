"""Protocol descriptions and reproducible quasi-static Rayleigh fading draws.

Sampling is counter based: every random number is a pure function of
(master_seed, trial_index, slot), so Monte Carlo results are independent of
chunking, execution order and worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PROTOCOL_KINDS = (
    "oaf",
    "nsdf-fixed",
    "nsdf-variable",
    "osdf-fixed",
    "osdf-variable",
    "naf",
    "miso",
)

_FIXED_KINDS = ("nsdf-fixed", "osdf-fixed")


@dataclass(frozen=True)
class ProtocolSpec:
    """Which protocol plus its parameters.

    n counts cooperating nodes minus the destination: one source and n-1
    relays.  p and q are the phase lengths of the fixed two-phase protocols;
    only p >= q is analyzed.  The amplify-and-forward protocol is pinned to
    its best phase split p = n, q = n - 1.  MISO is the n-antenna reference
    (no relays; n = 1 allowed there).
    """

    kind: str
    n: int
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).lower())
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        n = int(self.n)
        object.__setattr__(self, "n", n)
        min_n = 1 if self.kind == "miso" else 2
        if n < min_n:
            raise ValueError(f"{self.kind} requires n >= {min_n}, got {n}")
        if self.kind == "oaf":
            p = self.p if self.p is not None else n
            q = self.q if self.q is not None else n - 1
            object.__setattr__(self, "p", int(p))
            object.__setattr__(self, "q", int(q))
        elif self.kind in _FIXED_KINDS:
            if self.p is None or self.q is None:
                raise ValueError(f"{self.kind} requires phase lengths p and q")
            p, q = int(self.p), int(self.q)
            if q < 1 or p < q:
                raise ValueError(f"{self.kind} requires p >= q >= 1, got p={p}, q={q}")
            object.__setattr__(self, "p", p)
            object.__setattr__(self, "q", q)
        else:
            if self.p is not None or self.q is not None:
                raise ValueError(f"{self.kind} does not take phase lengths p, q")

    @property
    def m(self) -> int:
        """Total channel uses per frame of the two-phase protocols."""
        if self.p is None or self.q is None:
            raise ValueError(f"{self.kind} has no phase split m = p + q")
        return self.p + self.q

    @property
    def frame_uses(self) -> int:
        """Channel uses normalizing the rate r*log2(rho) for this protocol."""
        if self.kind == "miso":
            return 1
        if self.kind == "naf":
            return 2 * (self.n - 1)
        return self.m


@dataclass(frozen=True)
class ChannelRealization:
    """One quasi-static draw: g[0] source->destination, g[1:] source->relay,
    h relay->destination.  All i.i.d. circularly symmetric CN(0, 1)."""

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        h = np.asarray(self.h, dtype=complex)
        if g.ndim != 1 or h.ndim != 1 or h.size != g.size - 1:
            raise ValueError("expected n source-side gains and n-1 relay-destination gains")
        if not (np.all(np.isfinite(g.view(float))) and np.all(np.isfinite(h.view(float)))):
            raise ValueError("fading coefficients must be finite")
        g.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.g.size


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix64(z):
    """SplitMix64 finalizer on uint64 scalars/arrays (wraps mod 2**64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def counter_uniforms(master_seed: int, counters) -> np.ndarray:
    """Uniform(0, 1] samples addressed by a 64-bit counter (random access)."""
    base = _mix64(np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF))
    ctr = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = base + (ctr + np.uint64(1)) * _GOLDEN
    w = _mix64(z)
    return ((w >> np.uint64(11)).astype(np.float64) + 1.0) * (2.0 ** -53)


def trial_uniforms(master_seed: int, start: int, count: int, slots: int) -> np.ndarray:
    """(count, slots) uniforms for global trial indices start..start+count-1."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    ctr = idx[:, None] * np.uint64(slots) + np.arange(slots, dtype=np.uint64)[None, :]
    return counter_uniforms(master_seed, ctr)


def complex_gaussians(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """CN(0, 1) samples from uniform pairs: |z|^2 ~ Exp(1), phase uniform."""
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def fading_slots(n: int) -> int:
    """Uniform draws consumed per trial: two per fading coefficient."""
    return 2 * (2 * n - 1)


def sample_fading_block(n: int, start: int, count: int, master_seed: int,
                        extra_slots: int = 0):
    """Vectorized channel draws for trials start..start+count-1.

    Returns (g, h[, extra]) with g of shape (count, n), h of shape
    (count, n-1), and optionally the (count, extra_slots) raw uniforms that
    follow the fading slots in the per-trial layout.
    """
    base = fading_slots(n)
    u = trial_uniforms(master_seed, start, count, base + extra_slots)
    c = complex_gaussians(u[:, 0:base:2], u[:, 1:base:2])
    g, h = c[:, :n], c[:, n:]
    if extra_slots:
        return g, h, u[:, base:]
    return g, h


def sample_channel(spec: ProtocolSpec, trial_index: int, master_seed: int) -> ChannelRealization:
    """One channel realization; a pure function of (spec.n, trial_index, master_seed)."""
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    g, h = sample_fading_block(spec.n, trial_index, 1, master_seed)
    return ChannelRealization(g=g[0], h=h[0])
