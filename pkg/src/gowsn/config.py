"""Run configuration: one JSON document, validated up front.

Unknown keys are rejected at every level so a typo cannot silently fall back
to a default. Defaults reproduce the 100 m x 100 m, 7 m range benchmark.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from gowsn import heuristics as hmod
from gowsn.analytics import StoppingRule
from gowsn.errors import InvalidConfig
from gowsn.field_model import FieldSpec, GridBoard, make_board
from gowsn.montecarlo import McConfig, ValidationSettings
from gowsn.placement import SEED_MAX, PlacementConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FieldConfig(_Strict):
    length_m: float = Field(100.0, gt=0)
    width_m: float = Field(100.0, gt=0)
    range_m: float = Field(7.0, gt=0)


class HeuristicEntry(_Strict):
    name: str
    weight: float = Field(1.0, ge=0)


class StoppingConfig(_Strict):
    rule: Literal["paper_literal", "error_complement"] = "error_complement"
    threshold: float = Field(0.1, gt=0, lt=1)


class McSection(_Strict):
    trials: int = Field(10_000, ge=1)
    samples_per_trial: int = Field(100, ge=1)
    metric: Literal["planar", "toroidal"] = "toroidal"
    master_seed: int = Field(0, ge=0, le=SEED_MAX)


class ValidateSection(_Strict):
    eq2_n: int = Field(500, ge=2)
    coverage_n: int = Field(1000, ge=2)
    two_node_trials: int = Field(100_000, ge=1)
    eq2_envelope: float = Field(0.05, ge=0)
    tv_envelope: float = Field(0.02, ge=0)
    shaping_n: list[Annotated[int, Field(ge=2)]] = Field(default_factory=lambda: [50, 100, 200, 300, 500, 700, 1000])
    shaping_trials: int = Field(500, ge=1)


class AnalyzeSection(_Strict):
    n_min: int = 1
    n_max: int = 1000
    coverage_n: Optional[int] = Field(None, ge=1)


class CompareSection(_Strict):
    trials: int = Field(200, ge=1)


def _default_heuristics() -> list[HeuristicEntry]:
    return [HeuristicEntry(name=h.name, weight=h.weight) for h in hmod.builtin_catalog().heuristics]


class RunConfig(_Strict):
    field: FieldConfig = Field(default_factory=FieldConfig)
    pitch_m: Optional[float] = Field(None, gt=0)
    heuristics: list[HeuristicEntry] = Field(default_factory=_default_heuristics)
    smoothing: float = Field(hmod.DEFAULT_SMOOTHING, ge=0)
    fig2_literal: bool = False
    no_seed_node: bool = False
    max_iterations: Optional[int] = Field(None, ge=1)
    stopping: StoppingConfig = Field(default_factory=StoppingConfig)
    seed: int = Field(0, ge=0, le=SEED_MAX)
    metric: Literal["planar", "toroidal"] = "planar"
    out: Optional[str] = None
    trace: Optional[str] = None
    mc: McSection = Field(default_factory=McSection)
    validate_: ValidateSection = Field(default_factory=ValidateSection, alias="validate")
    analyze: AnalyzeSection = Field(default_factory=AnalyzeSection)
    compare: CompareSection = Field(default_factory=CompareSection)

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    # -- conversions into core types; each raises InvalidParams on bad values

    def field_spec(self) -> FieldSpec:
        return FieldSpec(self.field.length_m, self.field.width_m, self.field.range_m)

    def resolved_pitch(self) -> float:
        return self.pitch_m if self.pitch_m is not None else self.field.range_m / 2

    def board(self) -> GridBoard:
        return make_board(self.field_spec(), self.resolved_pitch())

    def heuristic_set(self) -> hmod.HeuristicSet:
        return hmod.from_config(h.model_dump() for h in self.heuristics)

    def stopping_rule(self) -> StoppingRule:
        return StoppingRule(self.stopping.rule, self.stopping.threshold)

    def placement_config(self) -> PlacementConfig:
        return PlacementConfig(
            stopping=self.stopping_rule(),
            max_iterations=self.max_iterations,
            seed=self.seed,
            fig2_literal=self.fig2_literal,
            smoothing=self.smoothing,
            no_seed_node=self.no_seed_node,
            metric=self.metric,
        )

    def mc_config(self) -> McConfig:
        return McConfig(self.mc.trials, self.mc.samples_per_trial, self.mc.metric, self.mc.master_seed)

    def validation_settings(self) -> ValidationSettings:
        v = self.validate_
        return ValidationSettings(
            v.eq2_n, v.coverage_n, v.two_node_trials, v.eq2_envelope, v.tv_envelope,
            shaping_n=tuple(v.shaping_n), shaping_trials=v.shaping_trials,
        )

    def check(self) -> RunConfig:
        """Build every core object once so bad values fail before any work starts."""
        self.field_spec()
        self.board()
        self.heuristic_set()
        self.placement_config()
        self.mc_config()
        return self

    def dump(self) -> dict:
        data = self.model_dump(by_alias=True)
        data["pitch_m"] = self.resolved_pitch()
        return data


def describe_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise InvalidConfig(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config must be a JSON object")
    for dotted, value in (overrides or {}).items():
        node = data
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise InvalidConfig(describe_validation_error(exc)) from exc
    return cfg.check()
