"""Experiment matrices: controlled baseline / V2X-off / V2X-on comparisons.

A matrix file names experiments that share one scenario file and differ only
in the controlled variables, which keeps demand realization and random draws
identical across paired runs up to the first breakdown-induced divergence:

    [matrix]
    seed = 42

    [experiment:exp1]
    scenario = junction.scn
    variant = baseline        # no breakdown, V2X off
    [experiment:exp2]
    scenario = junction.scn
    variant = disabled        # breakdown, V2X off
    [experiment:exp3]
    scenario = junction.scn
    variant = enabled         # breakdown, V2X on

Runs execute independently (optionally in parallel processes) and the
comparison joins their outputs afterwards.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .engine import run_scenario
from .scenario import ConfigError, ScenarioConfig, _parse_sections, load_scenario

VARIANTS = ("baseline", "disabled", "enabled")


@dataclasses.dataclass(frozen=True)
class ExperimentSpec:
    id: str
    scenario_path: Path
    variant: str
    group: str  # scenario file stem; pairs experiments for comparison


@dataclasses.dataclass(frozen=True)
class ExperimentMatrix:
    seed: int
    experiments: tuple[ExperimentSpec, ...]


def load_matrix(path) -> ExperimentMatrix:
    path = Path(path)
    sections = _parse_sections(path.read_text(encoding="utf-8"), str(path))
    if "matrix" not in sections:
        raise ConfigError(f"{path}: missing [matrix] section")
    for key in sections["matrix"]:
        if key != "seed":
            raise ConfigError(f"{path}: unknown key matrix.{key}")
    seed = int(sections["matrix"].get("seed", "0"))

    experiments = []
    for name, body in sections.items():
        if name == "matrix":
            continue
        if not name.startswith("experiment:"):
            raise ConfigError(f"{path}: unknown section [{name}]")
        exp_id = name.split(":", 1)[1]
        for key in body:
            if key not in ("scenario", "variant"):
                raise ConfigError(f"{path}: unknown key {name}.{key}")
        if "scenario" not in body or "variant" not in body:
            raise ConfigError(f"{path}: [{name}] needs scenario and variant")
        variant = body["variant"]
        if variant not in VARIANTS:
            raise ConfigError(
                f"{path}: [{name}] variant must be one of {', '.join(VARIANTS)}"
            )
        scn = Path(body["scenario"])
        if not scn.is_absolute():
            scn = path.parent / scn
        experiments.append(ExperimentSpec(exp_id, scn, variant, scn.stem))
    if not experiments:
        raise ConfigError(f"{path}: no experiments defined")
    ids = [e.id for e in experiments]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"{path}: duplicate experiment ids")
    return ExperimentMatrix(seed=seed, experiments=tuple(experiments))


def apply_variant(config: ScenarioConfig, variant: str, seed: int) -> ScenarioConfig:
    """Derive the experiment configuration, touching only controlled variables."""
    rerouting = dataclasses.replace(config.rerouting,
                                    enabled=(variant == "enabled"))
    return dataclasses.replace(
        config,
        seed=seed,
        breakdown=None if variant == "baseline" else config.breakdown,
        rerouting=rerouting,
    )


def _run_experiment(args):
    exp_id, scenario_path, variant, seed, outdir = args
    config = apply_variant(load_scenario(scenario_path), variant, seed)
    summary = run_scenario(config, outdir=Path(outdir) / exp_id)
    return exp_id, summary


def run_matrix(matrix: ExperimentMatrix, outdir, jobs: int = 1) -> dict:
    """Run all experiments, then emit the cross-run comparison.

    Each run writes to <outdir>/<experiment id>/; the comparison lands in
    comparison.json and comparison.txt. Any failed run aborts the comparison.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = [
        (e.id, str(e.scenario_path), e.variant, matrix.seed, str(outdir))
        for e in matrix.experiments
    ]
    summaries: dict[str, dict] = {}
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = {e.id: pool.submit(_run_experiment, task)
                           for e, task in zip(matrix.experiments, tasks)}
                for exp_id, future in futures.items():
                    summaries[exp_id] = future.result()[1]
        else:
            for task in tasks:
                exp_id, summary = _run_experiment(task)
                summaries[exp_id] = summary
    except Exception as exc:
        failed = next((e for e in matrix.experiments if e.id not in summaries),
                      None)
        name = failed.id if failed is not None else "<unknown>"
        raise RuntimeError(
            f"experiment {name} failed, comparison aborted: {exc}") from exc

    comparison = build_comparison(matrix, summaries, outdir)
    with open(outdir / "comparison.json", "w") as fh:
        json.dump(comparison, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(outdir / "comparison.txt", "w") as fh:
        fh.write(format_comparison(comparison))
    return comparison


def percentage_change(base: float, value: float) -> float:
    """(value - base) / base * 100; the sign convention of the result tables."""
    return (value - base) / base * 100.0


def _journey_times(run_dir: Path) -> dict[int, float]:
    times = {}
    with open(run_dir / "vehicles.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            times[int(row["vehicle"])] = float(row["journey_time"])
    return times


def build_comparison(matrix: ExperimentMatrix, summaries: dict, outdir: Path) -> dict:
    """Per-group differential delays, ratios and deceleration table."""
    groups: dict[str, dict] = {}
    for exp in matrix.experiments:
        group = groups.setdefault(exp.group, {"experiments": {}})
        group["experiments"][exp.id] = {
            "variant": exp.variant,
            "mean_delay": summaries[exp.id]["delay"]["mean"],
            "mean_journey_time": summaries[exp.id]["journey_time"]["mean"],
            "arrived": summaries[exp.id]["counts"]["arrived"],
            "reroute_count": summaries[exp.id]["reroute_count"],
            "deceleration": summaries[exp.id]["deceleration"],
        }

    for group_name, group in groups.items():
        by_variant = {
            info["variant"]: exp_id
            for exp_id, info in group["experiments"].items()
        }
        baseline_id = by_variant.get("baseline")
        if baseline_id is None:
            continue
        base_times = _journey_times(outdir / baseline_id)
        base_decel = group["experiments"][baseline_id]["deceleration"]

        differential = {}
        decel_table = {}
        for exp_id, info in group["experiments"].items():
            decel = info["deceleration"]
            row = {"mean": decel["mean"], "variance": decel["variance"]}
            if exp_id != baseline_id and base_decel["mean"] > 0:
                row["mean_change_pct"] = percentage_change(
                    base_decel["mean"], decel["mean"])
                row["variance_change_pct"] = percentage_change(
                    base_decel["variance"], decel["variance"])
            decel_table[exp_id] = row
            if exp_id == baseline_id:
                continue
            times = _journey_times(outdir / exp_id)
            common = sorted(set(times) & set(base_times))
            diffs = [times[v] - base_times[v] for v in common]
            differential[exp_id] = {
                "mean_differential_delay": sum(diffs) / len(diffs) if diffs else 0.0,
                "compared_vehicles": len(common),
            }
        group["baseline"] = baseline_id
        group["differential_delay"] = differential
        group["deceleration_table"] = decel_table

        disabled_id = by_variant.get("disabled")
        enabled_id = by_variant.get("enabled")
        if disabled_id in differential and enabled_id in differential:
            d = differential[disabled_id]["mean_differential_delay"]
            e = differential[enabled_id]["mean_differential_delay"]
            group["delay_ratio_disabled_over_enabled"] = d / e if e > 0 else None
            group["journey_time_gain_s"] = (
                group["experiments"][disabled_id]["mean_journey_time"]
                - group["experiments"][enabled_id]["mean_journey_time"]
            )

    return {"seed": matrix.seed, "groups": groups}


def format_comparison(comparison: dict) -> str:
    lines = []
    for group_name in sorted(comparison["groups"]):
        group = comparison["groups"][group_name]
        lines.append(f"=== {group_name} (seed {comparison['seed']}) ===")
        header = (f"{'experiment':<12}{'variant':<10}{'delay':>10}"
                  f"{'journey':>10}{'reroutes':>10}{'decel':>10}{'var':>10}")
        lines.append(header)
        for exp_id in sorted(group["experiments"]):
            info = group["experiments"][exp_id]
            lines.append(
                f"{exp_id:<12}{info['variant']:<10}"
                f"{info['mean_delay']:>10.2f}{info['mean_journey_time']:>10.2f}"
                f"{info['reroute_count']:>10d}"
                f"{info['deceleration']['mean']:>10.3f}"
                f"{info['deceleration']['variance']:>10.3f}"
            )
        for exp_id, diff in group.get("differential_delay", {}).items():
            lines.append(
                f"  {exp_id}: mean differential delay vs baseline = "
                f"{diff['mean_differential_delay']:.2f} s "
                f"({diff['compared_vehicles']} vehicles)"
            )
        ratio = group.get("delay_ratio_disabled_over_enabled")
        if ratio is not None:
            lines.append(f"  delay ratio disabled/enabled = {ratio:.2f}")
        if "journey_time_gain_s" in group:
            lines.append(
                f"  journey time gain (disabled - enabled) = "
                f"{group['journey_time_gain_s']:.2f} s"
            )
        for exp_id in sorted(group.get("deceleration_table", {})):
            row = group["deceleration_table"][exp_id]
            extra = ""
            if "mean_change_pct" in row:
                extra = (f"  mean {row['mean_change_pct']:+.2f}%"
                         f"  variance {row['variance_change_pct']:+.2f}%")
            lines.append(
                f"  decel {exp_id}: mean {row['mean']:.3f} "
                f"variance {row['variance']:.3f}{extra}"
            )
        lines.append("")
    return "\n".join(lines)
