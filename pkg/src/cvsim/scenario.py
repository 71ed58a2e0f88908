"""Scenario configuration: file format, validation, demand materialization.

Scenario files are plain text with ``[section]`` headers and ``key = value``
lines; ``#`` starts a comment. Unknown sections or keys are rejected so that
typos cannot silently fall back to defaults. All defaults are materialized at
load time and echoed into the run summary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .comms import CommConfig
from .incident import BreakdownSchedule
from .metrics import DetectorSpec
from .network import BLOCKED, RoadNetwork, load_network
from .networks import BUILTIN_NETWORKS
from .rerouting import ReroutingConfig
from .traffic import VEHICLE_CLASSES, DemandEntry


class ConfigError(ValueError):
    """Scenario or matrix file violates the schema."""


@dataclass(frozen=True)
class DemandConfig:
    file: Optional[str] = None
    total: int = 0
    passenger_fraction: float = 0.8
    depart_start: float = 0.0
    depart_end: float = 0.0
    origin: str = ""
    destination: str = ""


@dataclass(frozen=True)
class OutputConfig:
    trace: bool = True
    messages: bool = True
    profile_vehicles: tuple[int, ...] = ()


@dataclass
class ScenarioConfig:
    network: str  # builtin name or file path
    end_time: float
    demand: DemandConfig
    dt: float = 1.0
    seed: int = 0
    stall_threshold: float = 300.0
    comm: CommConfig = field(default_factory=CommConfig)
    breakdown: Optional[BreakdownSchedule] = None
    rerouting: ReroutingConfig = field(default_factory=ReroutingConfig)
    detectors: tuple[DetectorSpec, ...] = ()
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: Optional[Path] = None  # directory of the scenario file

    def __post_init__(self):
        if self.end_time <= 0:
            raise ConfigError("end_time must be > 0")
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")


# --- section/key schema -------------------------------------------------------

_SCHEMA = {
    "scenario": {"network", "dt", "end_time", "seed", "stall_threshold"},
    "demand": {"file", "total", "passenger_fraction", "depart_window",
               "origin", "destination"},
    "comm": {"beacon_interval", "range", "tx_power_mw", "antenna_height_m",
             "packet_size_bytes", "max_hops"},
    "breakdown": {"target", "random", "count", "start_s", "duration_s",
                  "interval_s"},
    "rerouting": {"enabled", "override", "caution_factor"},
    "output": {"trace", "messages", "profile_vehicles"},
    "detectors": None,  # free-form: <detector id> = <edge> <position_m>
}


def _parse_sections(text: str, path: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value' or '[section]'")
        if current is None:
            raise ConfigError(f"{path}:{lineno}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in sections[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {current}.{key}")
        sections[current][key] = value
    return sections


def _check_schema(sections: dict, schema: dict, path: str) -> None:
    for section, keys in sections.items():
        if section not in schema:
            raise ConfigError(f"{path}: unknown section [{section}]")
        allowed = schema[section]
        if allowed is None:
            continue
        for key in keys:
            if key not in allowed:
                raise ConfigError(f"{path}: unknown key {section}.{key}")


def _get(sections, section, key, default=None):
    return sections.get(section, {}).get(key, default)


def _as_bool(value: str, where: str) -> bool:
    if value.lower() in ("true", "yes", "on", "1"):
        return True
    if value.lower() in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {value!r}")


def load_scenario(path) -> ScenarioConfig:
    """Parse and fully validate a scenario file; all defaults materialized."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_scenario(text, str(path), base_dir=path.parent)


def parse_scenario(text: str, path: str = "<scenario>",
                   base_dir: Optional[Path] = None) -> ScenarioConfig:
    sections = _parse_sections(text, path)
    _check_schema(sections, _SCHEMA, path)

    for required in ("scenario", "demand"):
        if required not in sections:
            raise ConfigError(f"{path}: missing required section [{required}]")
    network = _get(sections, "scenario", "network")
    if not network:
        raise ConfigError(f"{path}: scenario.network is required")
    end_time = _get(sections, "scenario", "end_time")
    if end_time is None:
        raise ConfigError(f"{path}: scenario.end_time is required")

    demand_sec = sections["demand"]
    window = demand_sec.get("depart_window", "0 0").split()
    if len(window) != 2:
        raise ConfigError(f"{path}: demand.depart_window must be '<start> <end>'")
    demand = DemandConfig(
        file=demand_sec.get("file"),
        total=int(demand_sec.get("total", "0")),
        passenger_fraction=float(demand_sec.get("passenger_fraction", "0.8")),
        depart_start=float(window[0]),
        depart_end=float(window[1]),
        origin=demand_sec.get("origin", ""),
        destination=demand_sec.get("destination", ""),
    )
    if demand.file is None:
        if demand.total <= 0:
            raise ConfigError(f"{path}: demand.total must be > 0 (or give demand.file)")
        if not demand.origin or not demand.destination:
            raise ConfigError(f"{path}: demand.origin and demand.destination required")
        if not 0 <= demand.passenger_fraction <= 1:
            raise ConfigError(f"{path}: demand.passenger_fraction must be in [0, 1]")
        if demand.depart_end < demand.depart_start or demand.depart_start < 0:
            raise ConfigError(f"{path}: invalid demand.depart_window")

    comm = CommConfig(
        beacon_interval=float(_get(sections, "comm", "beacon_interval", "1")),
        range_m=float(_get(sections, "comm", "range", "300")),
        tx_power_mw=float(_get(sections, "comm", "tx_power_mw", "20")),
        antenna_height_m=float(_get(sections, "comm", "antenna_height_m", "1.895")),
        packet_size_bytes=int(_get(sections, "comm", "packet_size_bytes", "1024")),
        max_hops=int(_get(sections, "comm", "max_hops", "0")),
    )
    if comm.beacon_interval <= 0 or comm.range_m <= 0:
        raise ConfigError(f"{path}: comm.beacon_interval and comm.range must be > 0")

    breakdown = None
    if "breakdown" in sections:
        sec = sections["breakdown"]
        random_target = _as_bool(sec.get("random", "false"), f"{path}: breakdown.random")
        target = sec.get("target")
        try:
            breakdown = BreakdownSchedule(
                target_vehicle=int(target) if target is not None else None,
                count=int(sec.get("count", "1")),
                start=float(sec.get("start_s", "0")),
                duration=float(sec.get("duration_s", "0")),
                interval=float(sec.get("interval_s", "0")),
                random_target=random_target,
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: [breakdown] {exc}") from None

    override_raw = _get(sections, "rerouting", "override", "blocked")
    if override_raw.lower() == "blocked":
        override = BLOCKED
    else:
        override = float(override_raw)
        if override < 0:
            raise ConfigError(f"{path}: rerouting.override must be >= 0 or 'blocked'")
    try:
        rerouting = ReroutingConfig(
            enabled=_as_bool(_get(sections, "rerouting", "enabled", "false"),
                             f"{path}: rerouting.enabled"),
            override=override,
            caution_factor=float(_get(sections, "rerouting", "caution_factor", "0.5")),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: [rerouting] {exc}") from None

    profile_raw = _get(sections, "output", "profile_vehicles", "")
    output = OutputConfig(
        trace=_as_bool(_get(sections, "output", "trace", "true"), f"{path}: output.trace"),
        messages=_as_bool(_get(sections, "output", "messages", "true"),
                          f"{path}: output.messages"),
        profile_vehicles=tuple(int(tok) for tok in profile_raw.split()),
    )

    detectors = []
    for det_id, value in sections.get("detectors", {}).items():
        fields = value.split()
        if len(fields) != 2:
            raise ConfigError(f"{path}: detectors.{det_id} must be '<edge> <position_m>'")
        detectors.append(DetectorSpec(det_id, fields[0], float(fields[1])))

    return ScenarioConfig(
        network=network,
        dt=float(_get(sections, "scenario", "dt", "1")),
        end_time=float(end_time),
        seed=int(_get(sections, "scenario", "seed", "0")),
        stall_threshold=float(_get(sections, "scenario", "stall_threshold", "300")),
        demand=demand,
        comm=comm,
        breakdown=breakdown,
        rerouting=rerouting,
        detectors=tuple(detectors),
        output=output,
        base_dir=base_dir,
    )


def resolve_network(config: ScenarioConfig) -> RoadNetwork:
    if config.network in BUILTIN_NETWORKS:
        return BUILTIN_NETWORKS[config.network]()
    path = Path(config.network)
    if not path.is_absolute() and config.base_dir is not None:
        path = config.base_dir / path
    if not path.exists():
        raise ConfigError(f"network file not found: {path}")
    return load_network(path)


# --- demand -------------------------------------------------------------------


def generate_demand(demand: DemandConfig, seed: int) -> list[DemandEntry]:
    """Seeded demand realization with exact class counts.

    Departures are total uniform draws over the window, sorted ascending and
    assigned to ids 0..n-1, so vehicle 0 always departs first. The class mix
    is exact (round(total * passenger_fraction) passenger vehicles), shuffled
    deterministically across the ids.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    n = demand.total
    departs = np.sort(rng.uniform(demand.depart_start, demand.depart_end, size=n))
    n_pass = int(round(n * demand.passenger_fraction))
    classes = ["PASSENGER"] * n_pass + ["HGV"] * (n - n_pass)
    perm = rng.permutation(n)
    entries = [
        DemandEntry(
            id=i,
            class_name=classes[perm[i]],
            depart=float(departs[i]),
            origin=demand.origin,
            destination=demand.destination,
        )
        for i in range(n)
    ]
    return entries


def load_demand_file(path) -> list[DemandEntry]:
    """Parse `VEH <id> <class> <depart_s> <origin> <dest>` records."""
    entries = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if fields[0].upper() != "VEH" or len(fields) != 6:
                raise ConfigError(
                    f"{path}:{lineno}: expected VEH <id> <class> <depart_s> <origin> <dest>"
                )
            vid = int(fields[1])
            if vid in seen_ids:
                raise ConfigError(f"{path}:{lineno}: duplicate vehicle id {vid}")
            seen_ids.add(vid)
            cls = fields[2].upper()
            if cls not in VEHICLE_CLASSES:
                raise ConfigError(f"{path}:{lineno}: unknown vehicle class {cls!r}")
            depart = float(fields[3])
            if depart < 0 or not math.isfinite(depart):
                raise ConfigError(f"{path}:{lineno}: invalid departure time")
            entries.append(DemandEntry(vid, cls, depart, fields[4], fields[5]))
    entries.sort(key=lambda e: (e.depart, e.id))
    return entries


def materialize_demand(config: ScenarioConfig) -> list[DemandEntry]:
    if config.demand.file is not None:
        path = Path(config.demand.file)
        if not path.is_absolute() and config.base_dir is not None:
            path = config.base_dir / path
        return load_demand_file(path)
    return generate_demand(config.demand, config.seed)
