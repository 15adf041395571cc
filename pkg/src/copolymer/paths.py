"""Exact trajectory sampling under the polymer measure and path observables.

A trajectory is the pair (renewal set, excursion signs).  Sampling walks
backward through the forward table: the last contact s <= N is drawn with
probability proportional to Z^c_s * P(tau1 > N-s) * wbar(s, N), then each
previous contact r < s with probability proportional to
Z^c_r * K(s-r) * w(r, s).  Signs are conditionally independent given the
contacts: the excursion (r, s] is in water with odds
exp(-2 lam (C[s]-C[r])) : 1.  The resulting law is exactly the conditional
polymer measure for the given disorder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CopolymerParams, InterArrivalLaw
from .partition import (
    LOG2,
    LogPartitionTable,
    _law_arrays,
    _logsumexp_1d,
    backward_log_table,
    build_partition_table,
    window_log_partition,
)

__all__ = [
    "PathTrajectory",
    "PathObservables",
    "ExcursionStatistics",
    "sample_path",
    "sample_paths",
    "path_observables",
    "correlation_probe",
    "excursion_tail_statistics",
    "no_water_probability",
]


@dataclass(frozen=True, eq=False)
class PathTrajectory:
    """Contacts in (0, N] and one sign per excursion (1 = water, 0 = oil).

    ``excursion_signs`` lists signs chronologically, one per closed
    excursion plus one for the open final excursion when last_closed < N.
    """

    renewal_points: np.ndarray
    last_closed: int
    excursion_signs: np.ndarray


@dataclass(frozen=True)
class PathObservables:
    """Water occupation, longest closed excursion, number of contacts."""

    nn: int
    longest_excursion: int
    contacts: int


@dataclass(frozen=True, eq=False)
class ExcursionStatistics:
    """Pooled closed-gap histogram and the per-trajectory longest excursion.

    ``gap_counts[g]`` counts closed excursions of length g over all
    trajectories; ``m_over_log_n`` holds M_N / log N per trajectory.
    """

    gap_counts: np.ndarray
    m_n: np.ndarray
    m_over_log_n_mean: float
    m_over_log_n_quantiles: tuple[tuple[float, float], ...]


class _RowSampler:
    """Categorical draws over the backward-step weights of one table.

    Rows are materialized in linear domain after a max shift and cached,
    so repeated paths from the same table cost one searchsorted per step.
    """

    def __init__(self, table: LogPartitionTable, law: InterArrivalLaw, cache_rows: bool):
        self.lz = table.log_zc
        self.prefix = table.charge_prefix
        self.two_lam = 2.0 * table.lam
        self.n = table.n_max
        self.log_k, self.log_tail = _law_arrays(law, self.n)
        self.cache_rows = cache_rows
        self._rows: dict[int, np.ndarray] = {}
        # weights over the last contact s = 0..N
        lw = np.empty(self.n + 1)
        x = -self.two_lam * (self.prefix[self.n] - self.prefix[: self.n])
        lw[: self.n] = (
            self.lz[: self.n]
            + self.log_tail[self.n:0:-1]
            + np.logaddexp(0.0, x) - LOG2
        )
        lw[self.n] = self.lz[self.n]
        self._last_row = self._materialize(lw)

    @staticmethod
    def _materialize(log_w: np.ndarray) -> np.ndarray:
        m = np.max(log_w)
        return np.cumsum(np.exp(log_w - m))

    def _row(self, t: int) -> np.ndarray:
        row = self._rows.get(t)
        if row is None:
            x = -self.two_lam * (self.prefix[t] - self.prefix[:t])
            lw = self.lz[:t] + self.log_k[t:0:-1] + np.logaddexp(0.0, x) - LOG2
            row = self._materialize(lw)
            if self.cache_rows:
                self._rows[t] = row
        return row

    def draw_last(self, rng) -> int:
        cum = self._last_row
        return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))

    def draw_prev(self, t: int, rng) -> int:
        cum = self._row(t)
        return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))

    def water_prob(self, r: int, t: int) -> float:
        x = -self.two_lam * (self.prefix[t] - self.prefix[r])
        if x >= 0:
            return 1.0 / (1.0 + math.exp(-x))
        e = math.exp(x)
        return e / (1.0 + e)


def _draw_one(sampler: _RowSampler, rng) -> PathTrajectory:
    n = sampler.n
    s = sampler.draw_last(rng)
    points: list[int] = []
    signs: list[int] = []
    if s < n:  # open final excursion carries a sign
        signs.append(int(rng.random() < sampler.water_prob(s, n)))
    last_closed = s
    t = s
    while t > 0:
        r = sampler.draw_prev(t, rng)
        points.append(t)
        signs.append(int(rng.random() < sampler.water_prob(r, t)))
        t = r
    points.reverse()
    signs.reverse()
    return PathTrajectory(
        renewal_points=np.array(points, dtype=int),
        last_closed=last_closed,
        excursion_signs=np.array(signs, dtype=int),
    )


def sample_path(
    omega,
    params: CopolymerParams,
    law: InterArrivalLaw,
    table: LogPartitionTable,
    seed: int,
) -> PathTrajectory:
    """Draw one trajectory exactly from the polymer measure for this omega."""
    w = omega.omega if hasattr(omega, "omega") else np.asarray(omega, dtype=float)
    if not table.matches(w, params, law):
        raise ValueError("table is inconsistent with (omega, params, law)")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return _draw_one(_RowSampler(table, law, cache_rows=False), rng)


def sample_paths(
    omega,
    params: CopolymerParams,
    law: InterArrivalLaw,
    table: LogPartitionTable,
    seed: int,
    n_paths: int,
    cache_limit: int = 2048,
):
    """Yield ``n_paths`` trajectories from a single seeded stream.

    Row cumulants are cached when n_max <= cache_limit, which makes bulk
    sampling at small N one binary search per backward step.
    """
    w = omega.omega if hasattr(omega, "omega") else np.asarray(omega, dtype=float)
    if not table.matches(w, params, law):
        raise ValueError("table is inconsistent with (omega, params, law)")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sampler = _RowSampler(table, law, cache_rows=table.n_max <= cache_limit)
    for _ in range(n_paths):
        yield _draw_one(sampler, rng)


def path_observables(traj: PathTrajectory, n_len: int) -> PathObservables:
    """Water occupation N_N, longest closed gap, contact count."""
    pts = traj.renewal_points
    contacts = len(pts)
    prev = np.concatenate([[0], pts[:-1]]) if contacts else np.array([], dtype=int)
    gaps = pts - prev
    longest = int(np.max(gaps)) if contacts else 0
    nn = 0
    signs = traj.excursion_signs
    for i in range(contacts):
        if signs[i]:
            nn += int(gaps[i])
    if traj.last_closed < n_len:
        if len(signs) != contacts + 1:
            raise ValueError("sign count does not match excursion count")
        if signs[-1]:
            nn += n_len - traj.last_closed
    elif len(signs) != contacts:
        raise ValueError("sign count does not match excursion count")
    return PathObservables(nn=nn, longest_excursion=longest, contacts=contacts)


def correlation_probe(
    omega,
    params: CopolymerParams,
    law: InterArrivalLaw,
    i: int,
    j: int,
) -> float:
    """Exact |P(i in tau, j in tau) - P(i in tau) P(j in tau)|.

    Joint and single contact probabilities come from forward, windowed and
    backward partition functions; no sampling noise.
    """
    w = omega.omega if hasattr(omega, "omega") else np.asarray(omega, dtype=float)
    n = len(w)
    if not (0 < i < j <= n):
        raise ValueError(f"need 0 < i < j <= N, got i={i} j={j} N={n}")
    table = build_partition_table(w, params, law)
    lb = backward_log_table(w, params, law)
    log_z = table.log_z_free
    p_i = math.exp(table.log_zc[i] + lb[i] - log_z) if np.isfinite(table.log_zc[i]) else 0.0
    p_j = math.exp(table.log_zc[j] + lb[j] - log_z) if np.isfinite(table.log_zc[j]) else 0.0
    if p_i == 0.0 or p_j == 0.0:
        return abs(0.0 - p_i * p_j)
    mid = window_log_partition(w, params, law, i, j, right_free=False)
    p_ij = math.exp(table.log_zc[i] + mid + lb[j] - log_z)
    return abs(p_ij - p_i * p_j)


def excursion_tail_statistics(
    samples,
    n_len: int,
    quantiles: tuple[float, ...] = (0.1, 0.5, 0.9),
) -> ExcursionStatistics:
    """Empirical closed-gap distribution and M_N / log N across trajectories."""
    trajs = list(samples)
    if len(trajs) < 100:
        raise ValueError("need at least 100 trajectories for tail statistics")
    all_gaps: list[np.ndarray] = []
    m_n = np.empty(len(trajs))
    for idx, tr in enumerate(trajs):
        pts = tr.renewal_points
        if len(pts):
            prev = np.concatenate([[0], pts[:-1]])
            gaps = pts - prev
            all_gaps.append(gaps)
            m_n[idx] = gaps.max()
        else:
            m_n[idx] = 0.0
    pooled = np.concatenate(all_gaps) if all_gaps else np.array([], dtype=int)
    gap_counts = np.bincount(pooled, minlength=n_len + 1) if len(pooled) else np.zeros(n_len + 1, dtype=int)
    scaled = m_n / math.log(n_len)
    qs = tuple((q, float(np.quantile(scaled, q))) for q in quantiles)
    return ExcursionStatistics(
        gap_counts=gap_counts,
        m_n=m_n,
        m_over_log_n_mean=float(np.mean(scaled)),
        m_over_log_n_quantiles=qs,
    )


def no_water_probability(
    omega,
    params: CopolymerParams,
    law: InterArrivalLaw,
    start: int,
) -> float:
    """Exact P(no monomer in [start, N] lies in water) under the polymer measure.

    Restricts the partition sum to trajectories whose excursions touching
    [start, N] all carry the oil sign; the open final excursion always
    touches that range.
    """
    w = omega.omega if hasattr(omega, "omega") else np.asarray(omega, dtype=float)
    n = len(w)
    if not (1 <= start <= n):
        raise ValueError(f"start must lie in 1..N, got {start}")
    table = build_partition_table(w, params, law)
    prefix = table.charge_prefix
    log_k, log_tail = _law_arrays(law, n)
    two_lam = 2.0 * params.lam
    lzr = np.empty(n + 1)
    lzr[0] = 0.0
    for t in range(1, n + 1):
        lk = log_k[t:0:-1]
        a = lzr[:t] + lk
        if t < start:  # both signs allowed
            a = a + np.logaddexp(0.0, -two_lam * (prefix[t] - prefix[:t])) - LOG2
        else:  # excursion reaches [start, N]: oil forced
            a = a - LOG2
        lzr[t] = _logsumexp_1d(a)
    b = np.empty(n + 1)
    b[:n] = lzr[:n] + log_tail[n:0:-1] - LOG2  # open excursion: oil forced
    b[n] = lzr[n]
    log_zr = _logsumexp_1d(b)
    return math.exp(log_zr - table.log_z_free)
