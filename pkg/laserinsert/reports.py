#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Fri Oct 16 2026

trial records and experiment reports
"""
from __future__ import annotations
from csv import DictWriter
from dataclasses import asdict, dataclass, field, fields
from json import dump as jsondump, load as jsonload
from logging import getLogger
from typing import Any, Dict, List, Optional, TextIO, Tuple

from .errors import ConfigError

logger = getLogger(__file__)

CAUSES = ("unreachable", "registration_failed", "miss")


@dataclass
class TrialRecord:
    """Outcome of one trial.

    Args:
        strategy (str): strategy of the trial
        initial_index (int): index of the initial configuration
        trial (int): trial number within its condition
        seed (int): trial seed, replays the trial
        success (bool): success including rescans
        raw_success (bool): success without any rescan
        margin (Optional[float]): insertion margin of the final attempt,
            None if the arm never reached the approach
        miss_distance (Optional[float]): radial offset of the tip ray at
            the hole entry
        retries_used (int): rescans after the first corrected attempt
        cause (Optional[str]): failure cause, one of CAUSES
        target_fitness (Optional[float]): last plate registration fitness
        object_fitness (Optional[float]): last object registration fitness
        setting (int): index of the target setting
    """
    strategy: str
    initial_index: int
    trial: int
    seed: int
    success: bool
    raw_success: bool
    margin: Optional[float] = None
    miss_distance: Optional[float] = None
    retries_used: int = 0
    cause: Optional[str] = None
    target_fitness: Optional[float] = None
    object_fitness: Optional[float] = None
    setting: int = 0

    def __post_init__(self):
        assert self.cause is None or self.cause in CAUSES, \
            f"unknown failure cause {self.cause}"
        assert not self.raw_success or self.success, \
            "a raw success is a success"
        assert self.success == (self.cause is None), \
            "failures carry a cause, successes none"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ConditionSummary:
    strategy: str
    initial_index: int
    trials: int
    successes: int
    raw_successes: int
    setting: int = 0

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def raw_rate(self) -> float:
        return self.raw_successes / self.trials


@dataclass
class ExperimentReport:
    """Trial records of one experiment and the success rates they add up
    to. Rates are always recomputed from the records.

    Args:
        scenario (str): scenario name
        config_hash (str): sha256 of the scenario
        master_seed (int): seed the trial seeds derive from
        records (List[TrialRecord]): one record per trial
        setting_names (List[str]): names of the target settings by index
    """
    scenario: str
    config_hash: str
    master_seed: int
    records: List[TrialRecord] = field(default_factory=list)
    setting_names: List[str] = field(default_factory=list)

    @property
    def strategies(self) -> List[str]:
        return list(dict.fromkeys(record.strategy for record in self.records))

    @property
    def settings(self) -> List[int]:
        return sorted({record.setting for record in self.records})

    def setting_name(self, setting: int) -> str:
        if setting < len(self.setting_names):
            return self.setting_names[setting]
        return f"setting {setting + 1}"

    def conditions(self) -> List[ConditionSummary]:
        """Counts per strategy, target setting and initial configuration,
        in record order.
        """
        counts: Dict[Tuple[str, int, int], List[int]] = {}
        for record in self.records:
            count = counts.setdefault(
                (record.strategy, record.setting, record.initial_index),
                [0, 0, 0]
            )
            count[0] += 1
            count[1] += record.success
            count[2] += record.raw_success
        return [ConditionSummary(strategy, index, *count, setting=setting)
                for (strategy, setting, index), count in counts.items()]

    def success_rate(self, strategy: str, raw: bool = False,
                     setting: Optional[int] = None) -> float:
        """Success rate of a strategy, over all settings or over one.

        Raises:
            KeyError: no trial of the strategy (at the setting)
        """
        records = [record for record in self.records
                   if record.strategy == strategy
                   and (setting is None or record.setting == setting)]
        if not records:
            raise KeyError(f"No trials of strategy '{strategy}'.")
        return sum(record.raw_success if raw else record.success
                   for record in records) / len(records)

    def _rates(self, setting: Optional[int] = None
               ) -> Dict[str, Dict[str, float]]:
        rates = {}
        for strategy in self.strategies:
            try:
                rates[strategy] = {
                    "success_rate": self.success_rate(strategy, False,
                                                      setting),
                    "raw_success_rate": self.success_rate(strategy, True,
                                                          setting)
                }
            except KeyError:
                continue
        return rates

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "setting_names": list(self.setting_names),
            "strategies": self._rates(),
            "settings": [
                {"setting": setting, "name": self.setting_name(setting),
                 "strategies": self._rates(setting)}
                for setting in self.settings
            ],
            "conditions": [
                dict(asdict(condition), success_rate=condition.rate,
                     raw_success_rate=condition.raw_rate)
                for condition in self.conditions()
            ],
            "records": [record.to_dict() for record in self.records]
        }

    def _table(self, setting: Optional[int],
               indices: List[int]) -> List[str]:
        conditions: Dict[Tuple[str, int], List[int]] = {}
        for c in self.conditions():
            if setting is None or c.setting == setting:
                count = conditions.setdefault((c.strategy, c.initial_index),
                                              [0, 0])
                count[0] += c.successes
                count[1] += c.trials
        lines = []
        for strategy in self.strategies:
            if (setting is not None
                    and not any((strategy, index) in conditions
                                for index in indices)):
                continue
            cells = []
            for index in indices:
                count = conditions.get((strategy, index))
                cells.append("%7s" % ("-" if count is None
                                      else f"{count[0]}/{count[1]}"))
            lines.append("%-16s" % strategy + "".join(cells) + "%8.1f%%%8.1f%%"
                         % (100 * self.success_rate(strategy, False, setting),
                            100 * self.success_rate(strategy, True, setting)))
        return lines

    def get_summary(self) -> str:
        """Counts per strategy and initial configuration with the overall
        rates, followed by one table per target setting when there are
        several.
        """
        indices = sorted({record.initial_index for record in self.records})
        header = "%-16s" % "strategy" + "".join(
            "%7s" % f"#{index + 1}" for index in indices
        ) + "%9s%9s" % ("rate", "raw")
        lines = [f"{self.scenario} ({self.config_hash[:12]}, "
                 f"seed {self.master_seed}, {len(self.records)} trials)",
                 header] + self._table(None, indices)
        if len(self.settings) > 1:
            for setting in self.settings:
                lines += [f"[{self.setting_name(setting)}]"] \
                    + self._table(setting, indices)
        return "\n".join(lines)

    def dump_json(self, file_handler: TextIO) -> None:
        jsondump(self.to_dict(), file_handler, indent=2)

    def write_csv(self, file_handler: TextIO) -> None:
        writer = DictWriter(file_handler,
                            [f.name for f in fields(TrialRecord)])
        writer.writeheader()
        for record in self.records:
            writer.writerow(record.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> ExperimentReport:
        try:
            return cls(data["scenario"], data["config_hash"],
                       int(data["master_seed"]),
                       [TrialRecord(**record) for record in data["records"]],
                       list(data.get("setting_names", [])))
        except (KeyError, TypeError, AssertionError) as e:
            raise ConfigError(f"Invalid report: {e}") from e

    @classmethod
    def from_file(cls, file_handler: TextIO) -> ExperimentReport:
        return cls.from_dict(jsonload(file_handler))
