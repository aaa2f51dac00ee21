"""Monte Carlo experiments, goodness-of-fit statistics and report emission.

Runners draw per-sample statistics through counter-based streams (sample i
is always the same matrix no matter the worker count), aggregate in index
order, and emit CSV or JSON records. The combinatorics battery re-runs every
exact identity check of the path machinery and reports machine-readable
counterexamples.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import correspondence, dyck_stats, path_model
from .ensembles import (
    EnsembleConfig,
    MatrixSample,
    RegimeError,
    regime_of,
    sample_deformed,
    sample_wigner,
)
from .moment_oracle import (
    MomentModel,
    exact_trace_expectation,
    oracle_record,
    trace_universality_probe,
)
from .spectral import (
    Spectrum,
    eigenvalues,
    interlacing_check,
    outlier_census,
    rescaled_fluctuation,
)

__all__ = [
    "ExperimentConfig",
    "KSResult",
    "gaussian_cdf",
    "semicircle_cdf",
    "ks_statistic",
    "trace_exp_residual",
    "run_fluctuations",
    "run_trace_growth",
    "run_spectrum_census",
    "run_combinatorics_verify",
    "run_oracle_compare",
    "mc_trace_moments",
    "DEFAULT_VERIFY_LIMITS",
    "load_config_file",
    "render_csv",
    "render_json",
    "write_report",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run: an ensemble, a sample budget and output wiring."""

    base: EnsembleConfig
    n_samples: int
    t_scale: float = 1.0
    top_k: int = 1
    baseline: EnsembleConfig | None = None
    output_path: str | None = None
    output_format: str = "csv"
    workers: int = 1
    ks_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.top_k > self.base.n:
            raise ValueError("top_k must be <= n")
        if not self.t_scale > 0:
            raise ValueError("t_scale must be positive")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be csv or json")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class KSResult:
    statistic: float
    n_effective: int
    mode: str


def gaussian_cdf(x: float, mean: float = 0.0, variance: float = 1.0) -> float:
    """Normal CDF via erf (absolute error well below 1e-10)."""
    if not variance > 0:
        raise ValueError("variance must be positive")
    return 0.5 * (1.0 + math.erf((x - mean) / math.sqrt(2.0 * variance)))


def semicircle_cdf(x: float, sigma: float) -> float:
    """CDF of the semicircle law on [-2 sigma, 2 sigma] (closed arcsine form)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if x <= -2.0 * sigma:
        return 0.0
    if x >= 2.0 * sigma:
        return 1.0
    u = x / (2.0 * sigma)
    return 0.5 + (x * math.sqrt(4.0 * sigma**2 - x**2)) / (4.0 * math.pi * sigma**2) \
        + math.asin(u) / math.pi


def ks_statistic(sample, reference, mode: str | None = None) -> KSResult:
    """Exact sup-distance between empirical CDFs.

    ``reference`` is either a CDF callable (one-sample) or a second sample
    (two-sample).
    """
    xs = np.sort(np.asarray(sample, dtype=np.float64))
    n1 = xs.size
    if n1 == 0:
        raise ValueError("empty sample")
    if callable(reference):
        stat = 0.0
        for i in range(n1):
            f = reference(float(xs[i]))
            stat = max(stat, (i + 1) / n1 - f, f - i / n1)
        return KSResult(statistic=stat, n_effective=n1, mode=mode or "one-sample")
    ys = np.sort(np.asarray(reference, dtype=np.float64))
    n2 = ys.size
    if n2 == 0:
        raise ValueError("empty reference sample")
    grid = np.concatenate([xs, ys])
    c1 = np.searchsorted(xs, grid, side="right") / n1
    c2 = np.searchsorted(ys, grid, side="right") / n2
    stat = float(np.max(np.abs(c1 - c2)))
    n_eff = int(round(n1 * n2 / (n1 + n2)))
    return KSResult(statistic=stat, n_effective=n_eff, mode=mode or "two-sample")


def _map_indices(fn, indices, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))


# --------------------------------------------------------------------------
# fluctuations


def run_fluctuations(cfg: ExperimentConfig) -> dict:
    """Largest-eigenvalue fluctuation statistics for the configured regime.

    Supercritical: one-sample KS of sqrt(n)(lambda_1 - rho_theta) against the
    centered Gaussian of variance sigma_theta**2 (complex) or
    2 sigma_theta**2 (real; flagged as a conjecture). At or below the
    transition: two-sample KS of n^{2/3}(lambda_j - 2 sigma) for j <= top_k
    against the Gaussian-law baseline ensemble, plus a pure Wigner (theta=0)
    baseline below the transition; the critical run is labeled descriptive.
    """
    base = cfg.base
    regime = regime_of(base.theta, base.sigma)
    records: list[dict] = []
    summary: dict = {"regime": regime.label}
    exit_code = 0

    if regime.label == "supercritical":
        rho = regime.rho_theta
        var = regime.sigma_theta**2
        label = "theorem"
        if not base.symmetry.is_complex:
            var = 2.0 * regime.sigma_theta**2
            label = "conjecture"

        def one(i: int) -> float:
            spec = eigenvalues(sample_deformed(base, i))
            return math.sqrt(base.n) * (float(spec.values[0]) - rho)

        devs = _map_indices(one, range(cfg.n_samples), cfg.workers)
        for i, d in enumerate(devs):
            records.append({"sample": i, "statistic": "sqrt_n_dev_1", "value": d})
        ks = ks_statistic(devs, lambda x: gaussian_cdf(x, 0.0, var), mode="one-sample-gaussian")
        summary.update(
            ks_statistic=ks.statistic,
            ks_mode=ks.mode,
            n_effective=ks.n_effective,
            limit_variance=var,
            label=label,
            mean_lambda_1=math.fsum(devs) / len(devs) / math.sqrt(base.n) + rho,
        )
        if cfg.ks_threshold is not None:
            summary["ks_threshold"] = cfg.ks_threshold
            summary["passed"] = ks.statistic <= cfg.ks_threshold
            exit_code = 0 if summary["passed"] else 1
    else:
        baseline = cfg.baseline or base.with_params(law="gaussian")

        def edge_stats(config: EnsembleConfig):
            def one(i: int):
                spec = eigenvalues(sample_deformed(config, i))
                fluct = rescaled_fluctuation(spec, regime_of(config.theta, config.sigma),
                                             config.n, cfg.top_k)
                return fluct.edge_u

            return _map_indices(one, range(cfg.n_samples), cfg.workers)

        primary = edge_stats(base)
        second = edge_stats(baseline)
        for i, us in enumerate(primary):
            for j, u in enumerate(us, start=1):
                records.append({"sample": i, "statistic": f"edge_u_{j}", "value": u})
        for i, us in enumerate(second):
            for j, u in enumerate(us, start=1):
                records.append({"sample": i, "statistic": f"baseline_edge_u_{j}", "value": u})
        worst = 0.0
        for j in range(cfg.top_k):
            ks = ks_statistic([u[j] for u in primary], [u[j] for u in second])
            summary[f"ks_two_sample_{j + 1}"] = ks.statistic
            worst = max(worst, ks.statistic)
        if regime.label == "subcritical":
            wigner = base.with_params(theta=0.0)
            third = edge_stats(wigner)
            for j in range(cfg.top_k):
                ks = ks_statistic([u[j] for u in primary], [u[j] for u in third])
                summary[f"ks_vs_wigner_{j + 1}"] = ks.statistic
        summary["label"] = "descriptive" if regime.label == "critical" else "theorem"
        if cfg.ks_threshold is not None:
            summary["ks_threshold"] = cfg.ks_threshold
            summary["passed"] = worst <= cfg.ks_threshold
            exit_code = 0 if summary["passed"] else 1

    records.extend(_summary_records(summary))
    return {
        "command": "fluctuations",
        "fieldnames": ("sample", "statistic", "value"),
        "records": records,
        "summary": summary,
        "exit_code": exit_code,
    }


# --------------------------------------------------------------------------
# trace growth


def trace_exp_residual(
    spectrum: Spectrum, rho: float, n: int, t: float
) -> tuple[float, float, float]:
    """(eps, exponential sum, even trace) for one spectrum at scale t.

    eps = 1/2 [Tr (M/rho)^{2s} + Tr (M/rho)^{2s+1}] - sum_{|xi_j| <= n^{1/6}}
    exp(t xi_j) with s = floor(t sqrt(n)) and xi_j = 2 sqrt(n)(lambda_j/rho - 1)
    over the positive eigenvalues.
    """
    s = math.floor(t * math.sqrt(n))
    ratios = spectrum.values / rho
    even = float(np.sum(ratios ** (2 * s)))
    odd = float(np.sum(ratios ** (2 * s + 1)))
    cutoff = float(n) ** (1.0 / 6.0)
    sqrt_n = math.sqrt(n)
    exp_sum = math.fsum(
        math.exp(t * 2.0 * sqrt_n * (float(v) / rho - 1.0))
        for v in spectrum.values
        if v > 0 and abs(2.0 * sqrt_n * (float(v) / rho - 1.0)) <= cutoff
    )
    eps = 0.5 * (even + odd) - exp_sum
    return eps, exp_sum, even


def run_trace_growth(cfg: ExperimentConfig, t_grid: tuple[float, ...] = (0.5, 1.0, 2.0)) -> dict:
    """Trace-versus-exponential-sum residuals in the supercritical regime."""
    base = cfg.base
    regime = regime_of(base.theta, base.sigma)
    if regime.label != "supercritical":
        raise RegimeError("trace growth requires the supercritical regime")
    rho = regime.rho_theta
    t_main = cfg.t_scale

    def one(i: int):
        spec = eigenvalues(sample_deformed(base, i))
        eps, exp_sum, _ = trace_exp_residual(spec, rho, base.n, t_main)
        grid_traces = tuple(
            trace_exp_residual(spec, rho, base.n, t)[2] for t in t_grid
        )
        return eps, exp_sum, grid_traces

    rows = _map_indices(one, range(cfg.n_samples), cfg.workers)
    records = []
    for i, (eps, exp_sum, _) in enumerate(rows):
        records.append({"sample": i, "statistic": "eps", "value": eps})
        records.append({"sample": i, "statistic": "exp_sum", "value": exp_sum})
    mean_abs_eps = math.fsum(abs(r[0]) for r in rows) / len(rows)
    mean_exp_sum = math.fsum(r[1] for r in rows) / len(rows)
    summary = {
        "t": t_main,
        "s_n": math.floor(t_main * math.sqrt(base.n)),
        "mean_abs_eps": mean_abs_eps,
        "mean_exp_sum": mean_exp_sum,
        "residual_ratio": mean_abs_eps / mean_exp_sum,
    }
    for k, t in enumerate(t_grid):
        summary[f"mean_trace_t_{t}"] = math.fsum(r[2][k] for r in rows) / len(rows)
    records.extend(_summary_records(summary))
    return {
        "command": "trace-growth",
        "fieldnames": ("sample", "statistic", "value"),
        "records": records,
        "summary": summary,
        "exit_code": 0,
    }


# --------------------------------------------------------------------------
# spectrum census


def run_spectrum_census(cfg: ExperimentConfig) -> dict:
    """Per-sample ESD fit, paired interlacing check and outlier tallies."""
    base = cfg.base
    supercritical = base.theta > base.sigma
    sqrt_n = math.sqrt(base.n)
    shift = base.theta / base.n

    def one(i: int):
        w = sample_wigner(base, i)
        base_entries = w.entries / sqrt_n
        base_spec = eigenvalues(MatrixSample(dim=w.dim, entries=base_entries,
                                             provenance=w.provenance))
        spec = eigenvalues(MatrixSample(dim=w.dim, entries=base_entries + shift,
                                        provenance=w.provenance))
        ks = ks_statistic(
            np.asarray(spec.values, dtype=np.float64),
            lambda x: semicircle_cdf(x, base.sigma),
            mode="one-sample-semicircle",
        )
        inter = interlacing_check(spec, base_spec)
        census = outlier_census(spec, base.theta, base.sigma, base.n) if supercritical else (0, 0)
        return ks.statistic, inter, census, float(spec.values[0])

    rows = _map_indices(one, range(cfg.n_samples), cfg.workers)
    records = []
    for i, (esd, inter, census, lam1) in enumerate(rows):
        records.append({"sample": i, "statistic": "esd_ks", "value": esd})
        records.append({"sample": i, "statistic": "interlacing_violations", "value": inter.violations})
        records.append({"sample": i, "statistic": "lambda_1", "value": lam1})
        if supercritical:
            records.append({"sample": i, "statistic": "count_mid", "value": census[0]})
            records.append({"sample": i, "statistic": "count_far", "value": census[1]})
    summary = {
        "max_esd_ks": max(r[0] for r in rows),
        "total_interlacing_violations": sum(r[1].violations for r in rows),
        "mean_lambda_1": math.fsum(r[3] for r in rows) / len(rows),
    }
    if supercritical:
        summary["max_count_mid"] = max(r[2][0] for r in rows)
        summary["max_count_far"] = max(r[2][1] for r in rows)
        summary["samples_with_count_mid"] = sum(1 for r in rows if r[2][0] > 0)
    records.extend(_summary_records(summary))
    return {
        "command": "census",
        "fieldnames": ("sample", "statistic", "value"),
        "records": records,
        "summary": summary,
        "exit_code": 0,
    }


# --------------------------------------------------------------------------
# oracle comparison


def mc_trace_moments(
    config: EnsembleConfig,
    n_samples: int,
    powers: tuple[int, ...],
    workers: int = 1,
    batch: int = 2048,
) -> dict[int, tuple[float, float]]:
    """Monte Carlo mean and standard error of Tr M**L for each power.

    Samples are stacked per batch and decomposed with one batched eigenvalue
    call; per-sample values stay tied to their sample index, so the result is
    independent of batching and worker count.
    """
    starts = list(range(0, n_samples, batch))

    def run_batch(start: int) -> np.ndarray:
        stop = min(start + batch, n_samples)
        mats = np.stack([sample_deformed(config, i).entries for i in range(start, stop)])
        lam = np.linalg.eigvalsh(mats)
        return np.stack([np.sum(lam**p, axis=1) for p in powers], axis=0)

    chunks = _map_indices(run_batch, starts, workers)
    values = np.concatenate(chunks, axis=1)
    out: dict[int, tuple[float, float]] = {}
    for idx, p in enumerate(powers):
        vals = values[idx]
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
        out[p] = (mean, se)
    return out


def run_oracle_compare(cfg: ExperimentConfig, power: int) -> dict:
    """Monte Carlo trace moments against the exact path-sum oracle."""
    base = cfg.base
    model = MomentModel.from_config(base)
    oracle = exact_trace_expectation(base.n, power, model, base.theta)
    mc = mc_trace_moments(base, cfg.n_samples, (power,), workers=cfg.workers)
    mean, se = mc[power]
    z = abs(mean - oracle) / se if se > 0 else math.inf

    def make_model(law: str) -> MomentModel:
        return MomentModel.from_config(base.with_params(law=law))

    probe = trace_universality_probe(
        [3, 4, 5, 6], power, base.theta, (make_model("gaussian"), make_model("rademacher"))
    )
    records = [
        {"sample": "oracle", "statistic": "exact_trace_expectation", "value": oracle},
        {"sample": "mc", "statistic": "mean", "value": mean},
        {"sample": "mc", "statistic": "standard_error", "value": se},
        {"sample": "mc", "statistic": "z_score", "value": z},
    ]
    for row in probe["rows"]:
        records.append({"sample": "probe", "statistic": f"delta_n_{row['n']}", "value": row["delta"]})
    summary = {
        "oracle": oracle,
        "mc_mean": mean,
        "mc_se": se,
        "z_score": z,
        "within_4_se": z <= 4.0,
        "probe_decreasing": probe["decreasing"],
        "record": oracle_record(
            base.n, power, base.theta, base.sigma, base.law.kind,
            base.symmetry.value, oracle,
        ),
    }
    records.extend(_summary_records({k: v for k, v in summary.items() if k != "record"}))
    return {
        "command": "oracle-compare",
        "fieldnames": ("sample", "statistic", "value"),
        "records": records,
        "summary": summary,
        "exit_code": 0 if summary["within_4_se"] else 1,
    }


# --------------------------------------------------------------------------
# combinatorics verification battery

DEFAULT_VERIFY_LIMITS: dict = {
    "trajectory_steps": 12,
    "sum_identity_steps": 20,
    "correspondence_length": 8,
    "correspondence_vertices": 4,
    "surgery_steps": 8,
    "glue_length": 3,
    "glue_vertices": 3,
    "lemma73_s": 100,
    "lemma77_grid": (25, 100),
    "dyck_roundtrip_steps": 12,
    "ballot_steps": 16,
    "max_pmf_m": 6,
}


def _classes_up_to(max_steps: int):
    for total in range(1, max_steps + 1):
        for m in range(0, total // 2 + 1):
            l = total - 2 * m
            yield m, l


def _check_trajectory_counts(max_steps: int) -> dict:
    params = {"max_steps": max_steps}
    for m, l in _classes_up_to(max_steps):
        listed = len(path_model.enumerate_trajectories(m, l))
        closed = path_model.count_trajectories(m, l)
        factorial = path_model.count_trajectories_factorial(m, l)
        if not listed == closed == factorial:
            return {
                "check": "trajectory_counts", "params": params, "pass": False,
                "counterexample": {"m": m, "l": l, "enumerated": listed,
                                   "binomial_form": closed, "factorial_form": factorial},
            }
        up, down = path_model.last_step_split(m, l)
        tally_up = sum(1 for x in path_model.enumerate_trajectories(m, l) if x.steps[-1] == 1)
        if up != tally_up or up + down != closed:
            return {
                "check": "trajectory_counts", "params": params, "pass": False,
                "counterexample": {"m": m, "l": l, "split": (up, down), "tally_up": tally_up},
            }
    return {"check": "trajectory_counts", "params": params, "pass": True, "counterexample": None}


def _check_sum_identity(max_steps: int) -> dict:
    params = {"max_steps": max_steps}
    for m, l in _classes_up_to(max_steps):
        if m < 1 or l % 2 == 1:
            continue
        if not correspondence.verify_count_identity(m, l):
            return {
                "check": "sum_identity", "params": params, "pass": False,
                "counterexample": {"m": m, "l": l},
            }
    return {"check": "sum_identity", "params": params, "pass": True, "counterexample": None}


def _check_correspondence(max_length: int, max_vertices: int) -> dict:
    params = {"max_length": max_length, "max_vertices": max_vertices}
    checked = 0
    seen: dict[tuple, tuple] = {}
    for length in range(1, max_length + 1):
        for path in path_model.canonical_closed_paths(length, max_vertices):
            traj = path_model.trajectory_of(path)
            if traj.end_level == 0 or traj.steps[-1] == 1:
                continue
            checked += 1
            fail = _correspondence_case_fails(path, seen)
            if fail is not None:
                fail_rec = {"path": path_model.path_to_string(path), "reason": fail}
                return {
                    "check": "correspondence_roundtrip", "params": params, "pass": False,
                    "counterexample": fail_rec,
                }
    params["cases"] = checked
    return {"check": "correspondence_roundtrip", "params": params, "pass": True,
            "counterexample": None}


def _correspondence_case_fails(path, seen) -> str | None:
    result = correspondence.to_marked_origin(path)
    image = result.image
    image_traj = path_model.trajectory_of(image)
    source_traj = path_model.trajectory_of(path)
    if image_traj.steps[-1] != 1:
        return "image does not end with an up step"
    if not path_model.has_marked_origin(image):
        return "image origin is not marked"
    if (image_traj.end_level, image_traj.down_steps) != (
        source_traj.end_level, source_traj.down_steps
    ):
        return "class not preserved"
    if correspondence.edge_multiset(image) != correspondence.edge_multiset(path):
        return "edge multiset not preserved"
    if correspondence.from_marked_origin(result).vertices != path.vertices:
        return "round trip failed"
    key = (image.vertices, result.shift_k)
    if key in seen and seen[key] != path.vertices:
        return "injectivity failure"
    seen[key] = path.vertices
    return None


def _check_surgery(max_steps: int) -> dict:
    params = {"max_steps": max_steps}
    for m, l in _classes_up_to(max_steps):
        if l < 1 or m < 1:
            continue
        ups = [x for x in path_model.enumerate_trajectories(m, l) if x.steps[-1] == 1]
        for p in range(1, m + 1):
            images = set()
            count = 0
            for x in ups:
                heights = x.levels()
                for cut in range(0, x.length):
                    if heights[cut] != l + p - 1:
                        continue
                    if any(h < l - 1 for h in heights[cut:]):
                        continue
                    out = correspondence.trajectory_surgery(x, p, cut)
                    count += 1
                    images.add(out.steps)
            target = path_model.count_trajectories(m - p, l + 2 * p)
            if count != target or len(images) != target:
                return {
                    "check": "surgery_bijection", "params": params, "pass": False,
                    "counterexample": {"m": m, "l": l, "p": p, "pairs": count,
                                       "distinct": len(images), "target": target},
                }
    return {"check": "surgery_bijection", "params": params, "pass": True, "counterexample": None}


def _check_gluing(length: int, vertices: int) -> dict:
    params = {"max_length": length, "vertices": vertices}
    for cur in range(2, length + 1):
        report = correspondence.preimage_bound_check(cur, vertices)
        if not report["pass"]:
            return {"check": "gluing_preimage_bound", "params": params, "pass": False,
                    "counterexample": report["violations"][0]}
    return {"check": "gluing_preimage_bound", "params": params, "pass": True,
            "counterexample": None}


def _check_lemma73(s_max: int) -> dict:
    params = {"s_max": s_max, "c0": 1.0 / 8.0}
    worst_c0 = math.inf
    for s in range(1, s_max + 1):
        report = dyck_stats.class_count_bound_check(s)
        if not report["pass"]:
            return {"check": "lemma73_class_bound", "params": params, "pass": False,
                    "counterexample": {"s": s, "failures": report["failures"][:3]}}
        if not report["monotone_normalized"]:
            return {"check": "lemma73_class_bound", "params": params, "pass": False,
                    "counterexample": {"s": s, "reason": "normalized ratio not decreasing"}}
        if math.isfinite(report["largest_supported_c0"]):
            worst_c0 = min(worst_c0, report["largest_supported_c0"])
    params["largest_supported_c0"] = worst_c0
    ok = worst_c0 > 0
    return {"check": "lemma73_class_bound", "params": params, "pass": ok,
            "counterexample": None if ok else {"largest_supported_c0": worst_c0}}


def _check_lemma77(m_grid: tuple[int, ...]) -> dict:
    report = dyck_stats.tail_bound_check(list(m_grid))
    params = {"m_grid": list(m_grid), "c0": report["c0"]}
    for family, data in report["families"].items():
        spread = data["spread"][1.0]
        params[f"spread_{family}"] = spread
        params[f"q_sup_{family}"] = max(row["q"] for row in data["rows"])
        if spread >= 2.0:
            return {"check": "lemma77_exp_moment", "params": params, "pass": False,
                    "counterexample": {"family": family, "spread": spread}}
    return {"check": "lemma77_exp_moment", "params": params, "pass": True, "counterexample": None}


def _check_dyck_roundtrip(max_steps: int) -> dict:
    params = {"max_steps": max_steps}
    for m, l in _classes_up_to(max_steps):
        for x in path_model.enumerate_trajectories(m, l):
            decomp = dyck_stats.dyck_decompose(x)
            if decomp.reconstruct().steps != x.steps:
                return {"check": "dyck_roundtrip", "params": params, "pass": False,
                        "counterexample": {"trajectory": path_model.trajectory_to_string(x)}}
            if decomp.end_level != l or sum(decomp.block_lengths) != 2 * m:
                return {"check": "dyck_roundtrip", "params": params, "pass": False,
                        "counterexample": {"trajectory": path_model.trajectory_to_string(x),
                                           "reason": "rise/block bookkeeping"}}
    return {"check": "dyck_roundtrip", "params": params, "pass": True, "counterexample": None}


def _check_ballot(max_steps: int) -> dict:
    params = {"max_steps": max_steps}
    for steps in range(1, max_steps + 1):
        total = 0
        for end in range(steps % 2, steps + 1, 2):
            ballot = dyck_stats.ballot_count(steps, end)
            confined = dyck_stats.bounded_path_count(steps, steps, end)
            if ballot != confined:
                return {"check": "ballot_counts", "params": params, "pass": False,
                        "counterexample": {"steps": steps, "end": end,
                                           "ballot": ballot, "transfer": confined}}
            total += ballot
        if total != math.comb(steps, steps // 2):
            return {"check": "ballot_counts", "params": params, "pass": False,
                    "counterexample": {"steps": steps, "sum": total,
                                       "expected": math.comb(steps, steps // 2)}}
    return {"check": "ballot_counts", "params": params, "pass": True, "counterexample": None}


def _check_max_pmf(max_m: int) -> dict:
    params = {"max_m": max_m}
    for m in range(1, max_m + 1):
        pmf = dyck_stats.max_level_distribution(m)
        if sum(pmf.values()) != 1:
            return {"check": "max_level_pmf", "params": params, "pass": False,
                    "counterexample": {"m": m, "reason": "pmf does not sum to 1"}}
        tally: dict[int, int] = {}
        for x in path_model.enumerate_trajectories(m, 0):
            top = max(x.levels())
            tally[top] = tally.get(top, 0) + 1
        total = sum(tally.values())
        for k, mass in pmf.items():
            if mass != Fraction(tally.get(k, 0), total):
                return {"check": "max_level_pmf", "params": params, "pass": False,
                        "counterexample": {"m": m, "k": k, "pmf": str(mass),
                                           "enumerated": f"{tally.get(k, 0)}/{total}"}}
        halves = (m - m // 2, m // 2) if m >= 2 else None
        if halves and halves[1] > 0:
            joint = dyck_stats.max_level_distribution(m, blocks=halves)
            if sum(joint.values()) != 1:
                return {"check": "max_level_pmf", "params": params, "pass": False,
                        "counterexample": {"m": m, "reason": "class pmf does not sum to 1"}}
    return {"check": "max_level_pmf", "params": params, "pass": True, "counterexample": None}


def run_combinatorics_verify(limits: dict | None = None) -> tuple[int, dict]:
    """Run every exact combinatorics check; nonzero exit on any failure.

    ``limits=None`` runs the defaults; an empty dict runs nothing and
    passes. Counterexamples are machine-readable.
    """
    limits = dict(DEFAULT_VERIFY_LIMITS) if limits is None else dict(limits)
    records: list[dict] = []

    def run(name, fn, *args):
        try:
            records.append(fn(*args))
        except Exception as exc:  # a crashed check is a failed check
            records.append({"check": name, "params": {"args": [repr(a) for a in args]},
                            "pass": False, "counterexample": {"error": repr(exc)}})

    if "trajectory_steps" in limits:
        run("trajectory_counts", _check_trajectory_counts, limits["trajectory_steps"])
    if "sum_identity_steps" in limits:
        run("sum_identity", _check_sum_identity, limits["sum_identity_steps"])
    if "correspondence_length" in limits:
        run("correspondence_roundtrip", _check_correspondence,
            limits["correspondence_length"], limits.get("correspondence_vertices", 4))
    if "surgery_steps" in limits:
        run("surgery_bijection", _check_surgery, limits["surgery_steps"])
    if "glue_length" in limits:
        run("gluing_preimage_bound", _check_gluing,
            limits["glue_length"], limits.get("glue_vertices", 3))
    if "lemma73_s" in limits:
        run("lemma73_class_bound", _check_lemma73, limits["lemma73_s"])
    if "lemma77_grid" in limits:
        run("lemma77_exp_moment", _check_lemma77, tuple(limits["lemma77_grid"]))
    if "dyck_roundtrip_steps" in limits:
        run("dyck_roundtrip", _check_dyck_roundtrip, limits["dyck_roundtrip_steps"])
    if "ballot_steps" in limits:
        run("ballot_counts", _check_ballot, limits["ballot_steps"])
    if "max_pmf_m" in limits:
        run("max_level_pmf", _check_max_pmf, limits["max_pmf_m"])

    ok = all(r["pass"] for r in records)
    report = {
        "command": "verify-combinatorics",
        "fieldnames": ("check", "params", "pass", "counterexample"),
        "records": records,
        "summary": {"checks": len(records), "failures": sum(not r["pass"] for r in records)},
        "exit_code": 0 if ok else 1,
    }
    return report["exit_code"], report


# --------------------------------------------------------------------------
# report emission


def _summary_records(summary: dict) -> list[dict]:
    return [
        {"sample": "summary", "statistic": key, "value": summary[key]}
        for key in sorted(summary)
    ]


def load_config_file(path: str) -> dict[str, str]:
    """Flat key=value file; blank lines and # comments are skipped."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def render_csv(report: dict) -> str:
    fieldnames = report["fieldnames"]
    lines = [",".join(fieldnames)]
    for rec in report["records"]:
        cells = []
        for name in fieldnames:
            cell = _fmt_cell(rec.get(name, ""))
            if any(ch in cell for ch in ",\"\n"):
                cell = '"' + cell.replace('"', '""') + '"'
            cells.append(cell)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_json(report: dict) -> str:
    payload = {"command": report["command"], "records": report["records"]}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(report: dict, path: str, fmt: str) -> None:
    text = render_csv(report) if fmt == "csv" else render_json(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
