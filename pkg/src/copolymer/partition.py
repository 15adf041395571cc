"""Exact log-domain partition functions for the copolymer model.

The polymer of length N is described by the renewal set tau (interface
contacts) and one solvent sign per excursion.  Averaging the two signs of
an excursion over (s, t] gives the weight

    w(s, t) = (1 + exp(-2 lam * (C[t] - C[s]))) / 2,

where C is the prefix sum of the biased charges omega_n + h.  The
constrained partition function Z^c_t (contact forced at t) satisfies

    Z^c_t = sum_{s < t} Z^c_s K(t - s) w(s, t),        Z^c_0 = 1,

and the free one closes with the survival function of the step law:

    Z_N = sum_{s <= N} Z^c_s P(tau1 > N - s) wbar(s, N),

with wbar(s, N) = w(s, N) for s < N and 1 for s = N (empty final
excursion).  Everything is accumulated in log domain; Z spans thousands of
orders of magnitude already at N ~ 10^4.

``brute_force_log_partition`` enumerates every renewal configuration
explicitly and is the test anchor for the O(N^2) recursion.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import CopolymerParams, InterArrivalLaw, QuenchedSample

__all__ = [
    "LogPartitionTable",
    "AnnealedTable",
    "build_partition_table",
    "backward_log_table",
    "brute_force_log_partition",
    "window_log_partition",
    "free_log_z_at",
    "build_annealed_table",
    "dump_table",
    "load_table",
]

LOG2 = math.log(2.0)

_LAW_IDS = {"zeta_tail": 0, "srw_return": 1}
_LAW_NAMES = {v: k for k, v in _LAW_IDS.items()}


@dataclass(frozen=True, eq=False)
class LogPartitionTable:
    """log Z^c_0..n_max and log Z_{n_max} for one disorder realization.

    ``charge_prefix[n]`` is sum_{m<=n} (omega_m + h), accumulated in
    extended precision; excursion weights read it by difference.
    """

    n_max: int
    log_zc: np.ndarray
    log_z_free: float
    charge_prefix: np.ndarray
    lam: float
    h: float
    law_kind: str
    alpha: float
    period: int

    def matches(self, omega: np.ndarray, params: CopolymerParams, law: InterArrivalLaw) -> bool:
        """True if this table was built from exactly these inputs."""
        if self.n_max != len(omega) or self.lam != params.lam or self.h != params.h:
            return False
        if (self.law_kind, self.alpha, self.period) != (law.kind, law.alpha, law.period):
            return False
        prefix = _charge_prefix(np.asarray(omega, dtype=float), params.h)
        return bool(np.array_equal(prefix, self.charge_prefix))


@dataclass(frozen=True, eq=False)
class AnnealedTable:
    """Same layout for the disorder-averaged model E[Z].

    The averaged excursion weight is (1 + exp(q * len)) / 2 with the tilt
    q = log M(-2 lam) - 2 lam h; at q = 0 the free annealed partition
    function is exactly 1.
    """

    n_max: int
    log_azc: np.ndarray
    log_az_free: float
    q: float


@lru_cache(maxsize=64)
def _law_arrays(law: InterArrivalLaw, n: int) -> tuple[np.ndarray, np.ndarray]:
    log_k = law.log_pmf_array(n)
    log_tail = law.log_tail_array(n)
    log_k.setflags(write=False)
    log_tail.setflags(write=False)
    return log_k, log_tail


def _charge_prefix(omega: np.ndarray, h: float) -> np.ndarray:
    # accumulate in extended precision: w(s,t) reads differences over long stretches
    acc = np.cumsum(omega.astype(np.longdouble) + np.longdouble(h))
    prefix = np.empty(len(omega) + 1)
    prefix[0] = 0.0
    prefix[1:] = acc.astype(float)
    return prefix


def _logsumexp_1d(a: np.ndarray) -> float:
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)  # all -inf (or a stray +inf propagates)
    return float(m + np.log(np.sum(np.exp(a - m))))


def _forward_log_zc(prefix: np.ndarray, lam: float, log_k: np.ndarray) -> np.ndarray:
    # split the sign-averaged weight: Z^c_t = (A_t + e^{-2 lam C[t]} B_t)/2 with
    #   A_t = sum_s exp(lz[s] + log K(t-s)),
    #   B_t = sum_s exp(lz[s] + 2 lam C[s] + log K(t-s)),
    # each reduced with its own max shift (two exp passes, no per-element log)
    n = len(prefix) - 1
    lz = np.empty(n + 1)
    lzp = np.empty(n + 1)
    lz[0] = 0.0
    two_lam = 2.0 * lam
    lzp[0] = two_lam * prefix[0]
    for t in range(1, n + 1):
        lk = log_k[t:0:-1]
        v = lz[:t] + lk
        vp = lzp[:t] + lk
        m1 = np.max(v)
        m2 = np.max(vp)
        t1 = m1 + np.log(np.sum(np.exp(v - m1))) if m1 != -np.inf else -np.inf
        t2 = m2 + np.log(np.sum(np.exp(vp - m2))) if m2 != -np.inf else -np.inf
        lz[t] = np.logaddexp(t1, t2 - two_lam * prefix[t]) - LOG2
        lzp[t] = lz[t] + two_lam * prefix[t]
    return lz


def _free_close(prefix: np.ndarray, lam: float, lz: np.ndarray, log_tail: np.ndarray) -> float:
    n = len(prefix) - 1
    b = np.empty(n + 1)
    x = -2.0 * lam * (prefix[n] - prefix[:n])
    b[:n] = lz[:n] + np.logaddexp(0.0, x) - LOG2 + log_tail[n:0:-1]
    b[n] = lz[n]  # tail(0) = 1, empty final excursion has weight 1
    return _logsumexp_1d(b)


def build_partition_table(
    omega: QuenchedSample | np.ndarray,
    params: CopolymerParams,
    law: InterArrivalLaw,
) -> LogPartitionTable:
    """O(N^2) exact dynamic program for log Z^c_0..N and log Z_N.

    Raises ValueError for odd N under the period-2 srw_return law: the
    constrained endpoint would be unreachable.
    """
    w = omega.omega if isinstance(omega, QuenchedSample) else np.asarray(omega, dtype=float)
    n = len(w)
    if n < 1:
        raise ValueError("need at least one monomer")
    if n % law.period != 0:
        raise ValueError(
            f"N = {n} is incompatible with the period-{law.period} law {law.kind}"
        )
    prefix = _charge_prefix(w, params.h)
    log_k, log_tail = _law_arrays(law, n)
    lz = _forward_log_zc(prefix, params.lam, log_k)
    log_z_free = _free_close(prefix, params.lam, lz, log_tail)
    lz.setflags(write=False)
    prefix.setflags(write=False)
    return LogPartitionTable(
        n_max=n, log_zc=lz, log_z_free=log_z_free, charge_prefix=prefix,
        lam=params.lam, h=params.h,
        law_kind=law.kind, alpha=law.alpha, period=law.period,
    )


def backward_log_table(
    omega: QuenchedSample | np.ndarray,
    params: CopolymerParams,
    law: InterArrivalLaw,
) -> np.ndarray:
    """log of the free partition function on (t, N] given a contact at t.

    B[N] = 1 and B[0] = Z_N; the mirror recursion of the forward pass.
    """
    w = omega.omega if isinstance(omega, QuenchedSample) else np.asarray(omega, dtype=float)
    n = len(w)
    prefix = _charge_prefix(w, params.h)
    log_k, log_tail = _law_arrays(law, n)
    two_lam = 2.0 * params.lam
    lb = np.empty(n + 1)
    lbw = np.empty(n + 1)  # lb - 2 lam C, the water-sign companion
    lb[n] = 0.0
    lbw[n] = -two_lam * prefix[n]
    for t in range(n - 1, -1, -1):
        lk = log_k[1:n - t + 1]
        v = lb[t + 1:] + lk
        vw = lbw[t + 1:] + lk
        m1 = np.max(v)
        m2 = np.max(vw)
        t1 = m1 + np.log(np.sum(np.exp(v - m1))) if m1 != -np.inf else -np.inf
        t2 = (m2 + np.log(np.sum(np.exp(vw - m2))) if m2 != -np.inf else -np.inf) + two_lam * prefix[t]
        # open final excursion: next contact beyond N, averaged sign
        t3 = log_tail[n - t]
        t4 = t3 - two_lam * (prefix[n] - prefix[t])
        lb[t] = _logsumexp_1d(np.array([t1, t2, t3, t4])) - LOG2
        lbw[t] = lb[t] - two_lam * prefix[t]
    return lb


def brute_force_log_partition(
    omega: QuenchedSample | np.ndarray,
    params: CopolymerParams,
    law: InterArrivalLaw,
    constrained: bool,
) -> float:
    """Exhaustive enumeration over all renewal configurations (N <= 22).

    Depth-first over the next contact point, carrying the partial
    log-weight; leaf log-weights are reduced by a single log-sum-exp.
    Deliberately shares no recursion structure with the forward table.
    """
    w = omega.omega if isinstance(omega, QuenchedSample) else np.asarray(omega, dtype=float)
    n = len(w)
    if n > 22:
        raise ValueError(f"brute force refused for N = {n} > 22 (2^(N-1) configurations)")
    prefix = _charge_prefix(w, params.h)
    two_lam = 2.0 * params.lam
    log_k, log_tail = _law_arrays(law, n)

    def log_w(s: int, t: int) -> float:
        return np.logaddexp(0.0, -two_lam * (prefix[t] - prefix[s])) - LOG2

    leaves: list[float] = []

    def visit(s: int, acc: float) -> None:
        if constrained:
            if s == n:
                leaves.append(acc)
        else:
            if s == n:
                leaves.append(acc)
            else:
                leaves.append(acc + log_tail[n - s] + log_w(s, n))
        for t in range(s + 1, n + 1):
            lk = log_k[t - s]
            if lk == -np.inf:
                continue
            visit(t, acc + lk + log_w(s, t))

    visit(0, 0.0)
    if not leaves:
        return -np.inf
    return _logsumexp_1d(np.array(leaves))


def window_log_partition(
    omega: QuenchedSample | np.ndarray,
    params: CopolymerParams,
    law: InterArrivalLaw,
    a: int,
    b: int,
    right_free: bool,
) -> float:
    """Log partition function of monomers a+1..b with a contact forced at a.

    ``right_free`` selects the free boundary at b, otherwise b is a forced
    contact.  An empty window (a == b) is the empty product, log 1 = 0.
    """
    w = omega.omega if isinstance(omega, QuenchedSample) else np.asarray(omega, dtype=float)
    n = len(w)
    if not (0 <= a <= b <= n):
        raise ValueError(f"invalid window ({a}, {b}] for N = {n}")
    if a == b:
        return 0.0
    table = build_partition_table(w[a:b], params, law)
    return table.log_z_free if right_free else float(table.log_zc[b - a])


def free_log_z_at(table: LogPartitionTable, law: InterArrivalLaw, n: int) -> float:
    """log Z_n for any n <= n_max, closing the stored forward table at n.

    The disorder for length n is the prefix of the table's realization, so
    values at different n from one table share their charge stream.
    """
    if not (1 <= n <= table.n_max):
        raise ValueError(f"n = {n} outside table range 1..{table.n_max}")
    if (table.law_kind, table.alpha, table.period) != (law.kind, law.alpha, law.period):
        raise ValueError("table was built for a different inter-arrival law")
    _, log_tail = _law_arrays(law, table.n_max)
    return _free_close_at(table.charge_prefix, table.lam, table.log_zc, log_tail, n)


def _free_close_at(prefix, lam, lz, log_tail, n: int) -> float:
    b = np.empty(n + 1)
    x = -2.0 * lam * (prefix[n] - prefix[:n])
    b[:n] = lz[:n] + np.logaddexp(0.0, x) - LOG2 + log_tail[n:0:-1]
    b[n] = lz[n]
    return _logsumexp_1d(b)


def build_annealed_table(
    dlaw,
    params: CopolymerParams,
    law: InterArrivalLaw,
    n_max: int,
) -> AnnealedTable:
    """Disorder-averaged tables via the same recursion, deterministic weights.

    E factorizes over excursions, so E[Z^c] follows the forward recursion
    with (1 + exp(q * len)) / 2 in place of the quenched weight.  This is
    the quenched DP run on the synthetic prefix C[n] = -q n / (2 lam).
    """
    if n_max % law.period != 0:
        raise ValueError(
            f"N = {n_max} is incompatible with the period-{law.period} law {law.kind}"
        )
    q = float(dlaw.log_mgf(-2.0 * params.lam)) - 2.0 * params.lam * params.h
    if params.lam > 0:
        prefix = -q * np.arange(n_max + 1, dtype=float) / (2.0 * params.lam)
    else:
        prefix = np.zeros(n_max + 1)  # lam = 0: all weights are exactly 1
    log_k, log_tail = _law_arrays(law, n_max)
    lz = _forward_log_zc(prefix, params.lam, log_k)
    log_az_free = _free_close(prefix, params.lam, lz, log_tail)
    lz.setflags(write=False)
    return AnnealedTable(n_max=n_max, log_azc=lz, log_az_free=log_az_free, q=q)


# -- binary dump ------------------------------------------------------------
#
# Little-endian layout:
#   magic   4s   b"CPLT"
#   version u16  (currently 1)
#   law_id  u16  (0 = zeta_tail, 1 = srw_return)
#   n_max   u64
#   lam     f64
#   h       f64
#   alpha   f64
#   period  u16
#   log_z_free f64
#   log_zc        (n_max + 1) f64
#   charge_prefix (n_max + 1) f64

_HEADER = struct.Struct("<4sHHQdddHd")


def dump_table(table: LogPartitionTable, path) -> None:
    """Write a LogPartitionTable in the documented little-endian layout."""
    with open(path, "wb") as f:
        f.write(
            _HEADER.pack(
                b"CPLT", 1, _LAW_IDS[table.law_kind], table.n_max,
                table.lam, table.h, table.alpha, table.period, table.log_z_free,
            )
        )
        f.write(np.ascontiguousarray(table.log_zc, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(table.charge_prefix, dtype="<f8").tobytes())


def load_table(path) -> LogPartitionTable:
    """Read back a table written by :func:`dump_table`."""
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        magic, version, law_id, n_max, lam, h, alpha, period, log_z_free = _HEADER.unpack(raw)
        if magic != b"CPLT" or version != 1:
            raise ValueError("not a version-1 partition table dump")
        count = n_max + 1
        log_zc = np.frombuffer(f.read(8 * count), dtype="<f8").astype(float)
        prefix = np.frombuffer(f.read(8 * count), dtype="<f8").astype(float)
    log_zc.setflags(write=False)
    prefix.setflags(write=False)
    return LogPartitionTable(
        n_max=n_max, log_zc=log_zc, log_z_free=log_z_free, charge_prefix=prefix,
        lam=lam, h=h, law_kind=_LAW_NAMES[law_id], alpha=alpha, period=period,
    )
