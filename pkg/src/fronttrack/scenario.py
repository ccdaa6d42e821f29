"""Scenario files: solver configuration, datum, requested analyses and an
optional refinement schedule."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema

from .bv import Profile, glimm_functional, read_profile_csv
from .errors import ConfigInvalid, DomainViolation, ScheduleViolation
from .riemann import flux_from_spec
from .splitting import SolverConfig, source_from_spec

__all__ = [
    "Scenario",
    "SweepSchedule",
    "build_datum",
    "load_scenario",
    "scenario_from_dict",
    "standard_scenarios",
    "standard_scenario",
    "STANDARD_NAMES",
]

STANDARD_NAMES = ("burgers_shock", "burgers_rarefaction", "merging_shocks", "damped_ramp",
                  "gaussian_forced")


def _schema() -> dict:
    text = resources.files("fronttrack").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def build_datum(spec: dict, epsilon: float, base_dir: Path | None = None) -> Profile:
    """Profile described by a datum entry; ``ramp`` is cell-averaged on the eps grid."""
    kind = spec["kind"]
    if kind == "steps":
        return Profile(tuple(float(x) for x in spec["breakpoints"]),
                       tuple(float(v) for v in spec["values"]))
    if kind == "ramp":
        x0, x1 = float(spec["x0"]), float(spec["x1"])
        u0, u1 = float(spec["u0"]), float(spec["u1"])
        n = int(round((x1 - x0) / epsilon))
        if n < 1 or not math.isclose(n * epsilon, x1 - x0, rel_tol=1e-9):
            raise ConfigInvalid(f"ramp width {x1 - x0} is not a multiple of epsilon={epsilon}")
        h = (x1 - x0) / n
        xs = tuple(x0 + j * h for j in range(n + 1))
        mids = tuple(u0 + (u1 - u0) * (j + 0.5) / n for j in range(n))
        return Profile(xs, (u0,) + mids + (u1,))
    if kind == "csv":
        path = Path(spec["path"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return read_profile_csv(path)
    raise ConfigInvalid(f"unknown datum kind {kind!r}")


@dataclass(frozen=True)
class SweepSchedule:
    """Refinement levels ``(eps, tau, beta)``, coarse to fine."""

    levels: tuple[tuple[float, float, float], ...]

    def validate(self, growth_bound: float) -> None:
        from .analysis.oleinik import check_schedule

        check_schedule(self.levels, growth_bound)

    def __len__(self):
        return len(self.levels)


@dataclass
class Scenario:
    name: str
    config: SolverConfig
    datum_spec: dict
    analyses: dict = field(default_factory=dict)
    oracle: str | None = None
    sweep: SweepSchedule | None = None
    base_dir: Path | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def datum(self) -> Profile:
        return build_datum(self.datum_spec, self.config.epsilon, self.base_dir)

    def validate(self) -> None:
        """Config invariants, the datum's functional against delta_bar, and the schedule."""
        self.config.validate()
        up = glimm_functional(self.datum, self.config.kappa).upsilon
        if up > self.config.delta_bar:
            raise DomainViolation(f"datum functional {up} exceeds delta_bar={self.config.delta_bar}")
        if self.sweep is not None:
            for cfg in self.level_configs():
                try:
                    cfg.validate()
                except ConfigInvalid as exc:
                    raise ScheduleViolation(str(exc)) from None
            self.sweep.validate(max(c.growth_bound for c in self.level_configs()))

    def level_configs(self) -> list[SolverConfig]:
        if self.sweep is None:
            return [self.config]
        return [replace(self.config, epsilon=e, tau=t, beta=b) for e, t, b in self.sweep.levels]

    def level_datum(self, cfg: SolverConfig) -> Profile:
        return build_datum(self.datum_spec, cfg.epsilon, self.base_dir)

    def with_overrides(self, seed: int | None = None,
                       snapshot_times: tuple[float, ...] | None = None) -> "Scenario":
        cfg = self.config
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if snapshot_times is not None:
            cfg = replace(cfg, snapshot_times=tuple(snapshot_times))
        return replace(self, config=cfg)


def scenario_from_dict(d: dict, base_dir: Path | None = None) -> Scenario:
    try:
        jsonschema.validate(d, _schema())
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(f"scenario schema: {exc.message}") from None
    cfg = SolverConfig(
        epsilon=float(d["epsilon"]), tau=float(d["tau"]), beta=float(d["beta"]),
        kappa=float(d["kappa"]), delta_bar=float(d["delta_bar"]), T=float(d["T"]),
        flux=flux_from_spec(d["flux"]), source=source_from_spec(d.get("source")),
        G_const=None if d.get("G") is None else float(d["G"]),
        window=tuple(float(x) for x in d.get("window", (-5.0, 5.0))),
        seed=int(d.get("seed", 0)), perturb_speeds=bool(d.get("perturb_speeds", False)),
        snapshot_times=tuple(float(t) for t in d.get("snapshot_times", ())),
    )
    sweep = None
    if "sweep" in d:
        sweep = SweepSchedule(tuple(tuple(float(v) for v in lv) for lv in d["sweep"]["levels"]))
    sc = Scenario(d["name"], cfg, dict(d["datum"]), dict(d.get("analyses", {})), d.get("oracle"),
                  sweep, base_dir, d)
    sc.validate()
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        name = path.name if path.suffix == ".json" else f"{path.name}.json"
        packaged = resources.files("fronttrack").joinpath(f"data/scenarios/{name}")
        if packaged.is_file():
            return scenario_from_dict(json.loads(packaged.read_text()))
        raise ConfigInvalid(f"no scenario file {path}")
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{path}: {exc}") from None
    return scenario_from_dict(d, path.parent)


def standard_scenario(name: str) -> Scenario:
    if name not in STANDARD_NAMES:
        raise ConfigInvalid(f"unknown standard scenario {name!r}")
    text = resources.files("fronttrack").joinpath(f"data/scenarios/{name}.json").read_text()
    return scenario_from_dict(json.loads(text))


def standard_scenarios() -> list[Scenario]:
    return [standard_scenario(n) for n in STANDARD_NAMES]
