"""Named desk-scale experiments: configuration, seeding, CSV emission.

Every experiment is a pure function of (config, master_seed): rerunning
with the same config writes byte-identical CSV files.  Output files start
with a schema line ``# schema=copolymer.<name>.v1`` followed by a header
row; floats are serialized with shortest round-trip repr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .bounds import (
    annealed_critical_curve,
    hbar,
    hc_bracket,
    rare_stretch_lower_bound,
)
from .estimators import (
    EstimateWithCI,
    _map_samples,
    _mean_stderr,
    contact_profile,
    estimate_free_energy,
    estimate_mu,
    localization_certificate,
)
from .model import CopolymerParams, DisorderLaw, InterArrivalLaw
from .partition import build_annealed_table, build_partition_table
from .paths import path_observables, sample_paths

__all__ = [
    "ConfigError",
    "BudgetError",
    "ExperimentConfig",
    "CriticalPointEstimate",
    "run_free_energy_grid",
    "estimate_hc",
    "weak_coupling_scan",
    "delocalized_scaling",
    "smoothing_probe",
    "run_bounds_table",
    "run_hbar_table",
    "run_mu",
    "run_paths",
    "run_experiment",
]

N_CAP = 32768  # hard budget for the O(N^2) dynamic program


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class BudgetError(RuntimeError):
    """A requested system size exceeds the desk-scale budget."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Plain key = value configuration shared by all experiments.

    ``lam``/``h`` hold single points, ``lambda_grid``/``h_grid`` hold
    scans; experiments read whichever they need.  The text form uses the
    key ``lambda`` for ``lam`` and round-trips losslessly.
    """

    experiment: str = "free-energy"
    alpha: float = 0.5
    k_family: str = "zeta"
    disorder: str = "gaussian"
    lam: float = 1.0
    h: float = 0.0
    lambda_grid: tuple[float, ...] = ()
    h_grid: tuple[float, ...] = ()
    n_list: tuple[int, ...] = (1000,)
    n_samples: int = 100
    master_seed: int = 0
    tol_h: float = 1e-4
    tol_sigma: float = 1e-8
    hc_resolution: float = 0.02
    a_list: tuple[float, ...] = (1.0, 0.7, 0.5)
    base_n: int = 1000
    delta_list: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3)
    paths_per_sample: int = 200
    output_path: str = "out.csv"
    emit_plot_data: bool = False

    _FLOAT_KEYS = ("alpha", "lam", "h", "tol_h", "tol_sigma", "hc_resolution")
    _LIST_FLOAT_KEYS = ("lambda_grid", "h_grid", "a_list", "delta_list")
    _LIST_INT_KEYS = ("n_list",)
    _INT_KEYS = ("n_samples", "master_seed", "paths_per_sample", "base_n")
    _STR_KEYS = ("experiment", "k_family", "disorder", "output_path")
    _BOOL_KEYS = ("emit_plot_data",)

    def law(self) -> InterArrivalLaw:
        try:
            return InterArrivalLaw.from_name(self.k_family, self.alpha)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def dlaw(self) -> DisorderLaw:
        try:
            return DisorderLaw.from_name(self.disorder)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def lambdas(self) -> tuple[float, ...]:
        return self.lambda_grid if self.lambda_grid else (self.lam,)

    def hs(self) -> tuple[float, ...]:
        return self.h_grid if self.h_grid else (self.h,)

    def validate(self) -> None:
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if not self.n_list:
            raise ConfigError("n_list must be nonempty")
        period = self.law().period
        for n in self.n_list:
            if n < 1 or n % period != 0:
                raise ConfigError(f"n = {n} incompatible with period-{period} law")
            if n > N_CAP:
                raise BudgetError(f"n = {n} exceeds the budget cap {N_CAP}")
        if any(l < 0 for l in self.lambdas()) or any(x < 0 for x in self.hs()):
            raise ConfigError("lambda and h must be nonnegative")

    # -- text form ------------------------------------------------------

    def to_text(self) -> str:
        lines = ["# copolymer experiment configuration"]
        for f in fields(self):
            if f.name.startswith("_"):
                continue
            key = "lambda" if f.name == "lam" else f.name
            val = getattr(self, f.name)
            if isinstance(val, tuple):
                text = ",".join(repr(v) for v in val)
            elif isinstance(val, bool):
                text = "true" if val else "false"
            else:
                text = repr(val) if isinstance(val, float) else str(val)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "ExperimentConfig":
        cfg = ExperimentConfig()
        seen = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            name = "lam" if key == "lambda" else key
            try:
                if name in ExperimentConfig._FLOAT_KEYS:
                    seen[name] = float(val)
                elif name in ExperimentConfig._INT_KEYS:
                    seen[name] = int(val)
                elif name in ExperimentConfig._LIST_FLOAT_KEYS:
                    seen[name] = tuple(float(v) for v in val.split(",") if v.strip())
                elif name in ExperimentConfig._LIST_INT_KEYS:
                    seen[name] = tuple(int(v) for v in val.split(",") if v.strip())
                elif name in ExperimentConfig._BOOL_KEYS:
                    if val not in ("true", "false"):
                        raise ValueError(val)
                    seen[name] = val == "true"
                elif name in ExperimentConfig._STR_KEYS:
                    seen[name] = val
                else:
                    raise ConfigError(f"line {lineno}: unknown key {key!r}")
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r}") from None
        return replace(cfg, **seen)

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as f:
            return ExperimentConfig.from_text(f.read())


@dataclass(frozen=True)
class CriticalPointEstimate:
    """h_c estimate from certificate-crossing bisection.

    ``ci`` is [largest statistically certified localized h, rigorous
    fractional-moment cap]; ``inconclusive`` marks runs where no h
    certified at the sample budget, in which case the bracket midpoint is
    reported with the full rigorous bracket as ci.
    """

    lam: float
    hc_hat: float
    ci: tuple[float, float]
    method: str
    n_used: int
    samples_used: int
    inconclusive: bool


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, schema: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# schema=copolymer.{schema}.v1\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_plot_data(path, triples: list[tuple[float, float, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("# schema=copolymer.plotdata.v1\n")
        f.write("x,y,yerr\n")
        for x, y, yerr in triples:
            f.write(f"{_fmt(x)},{_fmt(y)},{_fmt(yerr)}\n")


def _plot_path(output_path) -> str:
    return str(output_path) + ".plot.csv"


ESTIMATE_HEADER = ["n", "lambda", "h", "alpha", "estimator", "mean", "stderr", "n_samples", "master_seed"]


def _estimate_row(cfg, n, lam, h, name, est: EstimateWithCI) -> tuple:
    return (n, lam, h, cfg.alpha, name, est.mean, est.stderr, est.n_samples, cfg.master_seed)


def _free_energy_pair(law, dlaw, params, n_len, n_samples, master_seed):
    """Free and constrained (1/N) log Z from one table per sample."""

    def one(k: int):
        omega = dlaw.sample(n_len, master_seed, k)
        table = build_partition_table(omega, params, law)
        return table.log_z_free / n_len, float(table.log_zc[n_len]) / n_len

    both = np.array(_map_samples(one, n_samples))
    mean_f, err_f = _mean_stderr(both[:, 0])
    mean_c, err_c = _mean_stderr(both[:, 1])
    return (
        EstimateWithCI(mean_f, err_f, n_samples, n_len),
        EstimateWithCI(mean_c, err_c, n_samples, n_len),
    )


def run_free_energy_grid(cfg: ExperimentConfig):
    """Free and constrained free-energy estimates over the (lambda, h) grid."""
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    rows = []
    triples = []
    for lam in cfg.lambdas():
        for h in cfg.hs():
            params = CopolymerParams(lam, h)
            for n in cfg.n_list:
                free, constr = _free_energy_pair(law, dlaw, params, n, cfg.n_samples, cfg.master_seed)
                rows.append(_estimate_row(cfg, n, lam, h, "free_energy", free))
                rows.append(_estimate_row(cfg, n, lam, h, "free_energy_constrained", constr))
                triples.append((h if len(cfg.hs()) > 1 else lam, free.mean, free.stderr))
    write_csv(cfg.output_path, "free_energy", ESTIMATE_HEADER, rows)
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(cfg.output_path), triples)
    return rows


def estimate_hc(cfg: ExperimentConfig) -> CriticalPointEstimate:
    """Certificate-crossing bisection for h_c at fixed lambda.

    Localized side: the constrained lower-bound certificate fires at some
    configured length.  Delocalized side: no certificate at any length,
    with the fractional-moment bound as rigorous cap.  The returned
    estimate always lies inside the rigorous bracket.
    """
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    lam = cfg.lam
    if lam <= 0:
        raise ConfigError("estimate_hc needs lambda > 0")
    lower = rare_stretch_lower_bound(dlaw, cfg.alpha, lam)
    cap = hbar(law, dlaw, lam, tol_h=cfg.tol_h, tol_sigma=cfg.tol_sigma).hbar
    n_top = max(cfg.n_list)

    def certified(h: float) -> bool:
        params = CopolymerParams(lam, h)
        # largest length first: it has the smallest finite-size deficit
        for n in sorted(cfg.n_list, reverse=True):
            cert = localization_certificate(law, dlaw, params, n, cfg.n_samples, cfg.master_seed)
            if cert.certified:
                return True
        return False

    lo, hi = lower, cap
    lo_certified = False
    while hi - lo > cfg.hc_resolution:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            lo, lo_certified = mid, True
        else:
            hi = mid
    if lo_certified:
        est = CriticalPointEstimate(
            lam=lam, hc_hat=0.5 * (lo + hi), ci=(lo, cap),
            method="certificate-crossing", n_used=n_top,
            samples_used=cfg.n_samples, inconclusive=False,
        )
    else:
        # no certificate fired anywhere: fall back to the rigorous bracket
        est = CriticalPointEstimate(
            lam=lam, hc_hat=0.5 * (lower + cap), ci=(lower, cap),
            method="certificate-crossing", n_used=n_top,
            samples_used=cfg.n_samples, inconclusive=True,
        )
    if not (lower - 1e-12 <= est.ci[0] and est.ci[1] <= annealed_critical_curve(dlaw, lam) + 1e-12):
        raise AssertionError("h_c estimate escaped the rigorous bracket")
    header = ["lambda", "hc_hat", "ci_lo", "ci_hi", "method", "n_used", "samples_used", "inconclusive", "master_seed"]
    row = (lam, est.hc_hat, est.ci[0], est.ci[1], est.method, est.n_used,
           est.samples_used, int(est.inconclusive), cfg.master_seed)
    write_csv(cfg.output_path, "hc_estimate", header, [row])
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(cfg.output_path), [(lam, est.hc_hat, 0.5 * (est.ci[1] - est.ci[0]))])
    return est


def _round_to_period(n: int, period: int) -> int:
    return ((n + period - 1) // period) * period


def weak_coupling_scan(cfg: ExperimentConfig):
    """Rescaled free energies F(a lam, a h) / a^2 along a decreasing a-list.

    The length grows like base_n / a^2 so every row sees the same
    effective horizon; a stabilization diagnostic row compares the largest
    pairwise difference against the combined 3-sigma width.
    """
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    rows = []
    points = []
    for a in cfg.a_list:
        if a <= 0:
            raise ConfigError("a_list entries must be positive")
        n_a = _round_to_period(int(math.ceil(cfg.base_n / (a * a))), law.period)
        if n_a > N_CAP:
            raise BudgetError(f"a = {a} needs N = {n_a} > cap {N_CAP}")
        params = CopolymerParams(a * cfg.lam, a * cfg.h)
        est = estimate_free_energy(law, dlaw, params, n_a, cfg.n_samples, cfg.master_seed)
        mean_r = est.mean / (a * a)
        err_r = est.stderr / (a * a)
        rows.append(("point", a, n_a, params.lam, params.h, mean_r, err_r, cfg.n_samples, cfg.master_seed))
        points.append((mean_r, err_r, a))
    max_diff = 0.0
    max_tol = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = abs(points[i][0] - points[j][0])
            tol = 3.0 * math.hypot(points[i][1], points[j][1])
            if d > max_diff:
                max_diff = d
            if tol > max_tol:
                max_tol = tol
    rows.append(("diagnostic", 0.0, 0, cfg.lam, cfg.h, max_diff, max_tol, cfg.n_samples, cfg.master_seed))
    header = ["record", "a", "n", "lambda", "h", "rescaled_mean", "rescaled_stderr", "n_samples", "master_seed"]
    write_csv(cfg.output_path, "weak_coupling", header, rows)
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(cfg.output_path), [(a, m, e) for (m, e, a) in points])
    return rows


def _loglog_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    coef = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(coef[0])


def delocalized_scaling(cfg: ExperimentConfig):
    """Growth of the exact expected water occupation E 𝒩_N with N.

    Uses contact_profile per disorder sample (no path noise) and fits the
    log-log slope across n_list.
    """
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    params = CopolymerParams(cfg.lam, cfg.h)
    rows = []
    means = []
    for n in sorted(cfg.n_list):

        def one(k: int) -> float:
            omega = dlaw.sample(n, cfg.master_seed, k)
            table = build_partition_table(omega, params, law)
            return contact_profile(omega, params, law, table).expected_nn

        vals = np.array(_map_samples(one, cfg.n_samples))
        mean, err = _mean_stderr(vals)
        rows.append(("point", n, cfg.lam, cfg.h, mean, err, cfg.n_samples, cfg.master_seed))
        means.append((n, mean, err))
    slope = _loglog_slope(
        np.array([m[0] for m in means], dtype=float),
        np.array([max(m[1], 1e-300) for m in means]),
    )
    rows.append(("slope", 0, cfg.lam, cfg.h, slope, 0.0, cfg.n_samples, cfg.master_seed))
    header = ["record", "n", "lambda", "h", "mean_e_nn", "stderr", "n_samples", "master_seed"]
    write_csv(cfg.output_path, "delocalized_scaling", header, rows)
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(cfg.output_path), [(float(n), m, e) for n, m, e in means])
    return rows


def smoothing_probe(cfg: ExperimentConfig):
    """F(lam, hc_hat - delta) along a delta grid, with a fitted local exponent.

    The annealed comparison column evaluates the annealed table at
    h_c^ann - delta, where the growth is first order (linear in delta).
    The fitted quenched exponent theta is reported with its regression
    error and no assertion is made about it.
    """
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    hc = estimate_hc(replace(cfg, output_path=cfg.output_path + ".hc.csv"))
    n_top = max(cfg.n_list)
    h_ann = annealed_critical_curve(dlaw, cfg.lam)
    rows = []
    pts = []
    for delta in sorted(cfg.delta_list):
        h = max(hc.hc_hat - delta, 0.0)
        params = CopolymerParams(cfg.lam, h)
        est = estimate_free_energy(law, dlaw, params, n_top, cfg.n_samples, cfg.master_seed)
        ann_params = CopolymerParams(cfg.lam, max(h_ann - delta, 0.0))
        ann_fe = build_annealed_table(dlaw, ann_params, law, n_top).log_az_free / n_top
        rows.append(("point", delta, h, est.mean, est.stderr, ann_fe, cfg.n_samples, cfg.master_seed))
        if est.mean > 0:
            pts.append((delta, est.mean, est.stderr))
    if len(pts) >= 2:
        xs = np.log(np.array([p[0] for p in pts]))
        ys = np.log(np.array([p[1] for p in pts]))
        coef, cov = np.polyfit(xs, ys, 1, cov=True)
        theta, theta_err = float(coef[0]), float(math.sqrt(max(cov[0][0], 0.0)))
    else:
        theta, theta_err = math.nan, math.nan
    rows.append(("theta", 0.0, 0.0, theta, theta_err, 0.0, cfg.n_samples, cfg.master_seed))
    header = ["record", "delta", "h", "mean", "stderr", "annealed_fe", "n_samples", "master_seed"]
    write_csv(cfg.output_path, "smoothing", header, rows)
    if cfg.emit_plot_data:
        write_plot_data(_plot_path(cfg.output_path), pts)
    return rows


def run_bounds_table(cfg: ExperimentConfig):
    """hc_bracket over the lambda grid, one CSV row per lambda."""
    law, dlaw = cfg.law(), cfg.dlaw()
    rows = []
    for lam in cfg.lambdas():
        if lam <= 0:
            raise ConfigError("bounds need lambda > 0")
        br = hc_bracket(law, dlaw, lam, tol_h=cfg.tol_h, tol_sigma=cfg.tol_sigma)
        rows.append((cfg.alpha, cfg.disorder, lam, br.lower_rare_stretch,
                     br.upper_hbar, br.gamma_star, br.upper_annealed))
    header = ["alpha", "disorder", "lambda", "lower_rare_stretch", "hbar", "gamma_star", "annealed"]
    write_csv(cfg.output_path, "bounds", header, rows)
    if cfg.emit_plot_data:
        write_plot_data(
            _plot_path(cfg.output_path),
            [(r[2], r[4], 0.0) for r in rows],
        )
    return rows


def run_hbar_table(cfg: ExperimentConfig):
    """Fractional-moment threshold over the lambda grid."""
    law, dlaw = cfg.law(), cfg.dlaw()
    rows = []
    for lam in cfg.lambdas():
        if lam <= 0:
            raise ConfigError("hbar needs lambda > 0")
        hb = hbar(law, dlaw, lam, tol_h=cfg.tol_h, tol_sigma=cfg.tol_sigma)
        rows.append((cfg.alpha, cfg.disorder, lam, hb.hbar, hb.gamma_star,
                     hb.sigma.upper, int(hb.certified), cfg.tol_h))
    header = ["alpha", "disorder", "lambda", "hbar", "gamma_star", "sigma_upper", "certified", "tol_h"]
    write_csv(cfg.output_path, "hbar", header, rows)
    return rows


def run_mu(cfg: ExperimentConfig):
    """Excursion decay-rate estimates over n_list."""
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    params = CopolymerParams(cfg.lam, cfg.h)
    results = estimate_mu(law, dlaw, params, list(cfg.n_list), cfg.n_samples, cfg.master_seed)
    rows = []
    for res in results:
        e = res.estimate
        rows.append((e.n_len, cfg.lam, cfg.h, cfg.alpha, "mu", e.mean, e.stderr,
                     res.median_of_means, int(res.flagged), e.n_samples, cfg.master_seed))
    header = ["n", "lambda", "h", "alpha", "estimator", "mean", "stderr",
              "median_of_means", "flagged", "n_samples", "master_seed"]
    write_csv(cfg.output_path, "mu", header, rows)
    if cfg.emit_plot_data:
        write_plot_data(
            _plot_path(cfg.output_path),
            [(float(r[0]), r[5], r[6]) for r in rows],
        )
    return rows


def run_paths(cfg: ExperimentConfig):
    """Sample trajectories for each disorder sample; write observables + excursions.

    Observables go to output_path; per-excursion rows (start, end, sign)
    go to output_path + ".traj.csv".
    """
    cfg.validate()
    law, dlaw = cfg.law(), cfg.dlaw()
    params = CopolymerParams(cfg.lam, cfg.h)
    n = max(cfg.n_list)
    obs_rows = []
    traj_rows = []
    for k in range(cfg.n_samples):
        omega = dlaw.sample(n, cfg.master_seed, k)
        table = build_partition_table(omega, params, law)
        for p_idx, traj in enumerate(
            sample_paths(omega, params, law, table, seed=cfg.master_seed * 1_000_003 + k, n_paths=cfg.paths_per_sample)
        ):
            obs = path_observables(traj, n)
            obs_rows.append((k, p_idx, obs.nn, obs.longest_excursion, obs.contacts))
            if p_idx == 0:  # excursion detail for the first path of each sample
                prev = 0
                signs = traj.excursion_signs
                for e_idx, pt in enumerate(traj.renewal_points):
                    traj_rows.append((k, prev, int(pt), int(signs[e_idx])))
                    prev = int(pt)
                if traj.last_closed < n:
                    traj_rows.append((k, prev, n, int(signs[-1])))
    write_csv(cfg.output_path, "path_observables",
              ["sample_index", "path_index", "nn", "longest_excursion", "contacts"], obs_rows)
    write_csv(str(cfg.output_path) + ".traj.csv", "trajectory",
              ["sample_index", "start", "end", "sign"], traj_rows)
    return obs_rows


_RUNNERS = {
    "free-energy": run_free_energy_grid,
    "hc": estimate_hc,
    "bounds": run_bounds_table,
    "hbar": run_hbar_table,
    "scaling": weak_coupling_scan,
    "deloc": delocalized_scaling,
    "smoothing": smoothing_probe,
    "mu": run_mu,
    "paths": run_paths,
}


def run_experiment(cfg: ExperimentConfig):
    """Dispatch a config to its named experiment."""
    runner = _RUNNERS.get(cfg.experiment)
    if runner is None:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    return runner(cfg)
