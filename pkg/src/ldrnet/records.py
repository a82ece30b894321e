"""Experiment records written beside every command's outputs.

A record snapshots the fully resolved configuration, the seed, the tool
version, wall-clock time and any evaluation summaries.  Re-running a command
with the embedded config reproduces its outputs byte-identically; the record
itself is excluded from that guarantee because it carries the timing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class ExperimentRecord:
    command: str
    config: dict
    seed: int
    tool_version: str
    wall_clock_seconds: float
    reports: dict | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "wall_clock_seconds": self.wall_clock_seconds,
            "reports": self.reports,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        return cls(
            command=d["command"],
            config=d["config"],
            seed=d["seed"],
            tool_version=d["tool_version"],
            wall_clock_seconds=d["wall_clock_seconds"],
            reports=d.get("reports"),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "ExperimentRecord":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))
