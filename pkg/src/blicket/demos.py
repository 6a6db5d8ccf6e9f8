"""Demonstration scripts shown before exploration.

A script is pure data: a machine skin, a declared causal structure, and an
ordered list of demonstrations (placement order plus expected outcome).  The
shipped defaults are reconstructions — one disjunctive-machine demo and one
conjunctive-machine demo for the hypothesis-given condition, and one
ambiguous demo (evidence consistent with both machine kinds) for not-given.
Every script is validated against its declared structure on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .core import CausalStructure, activates, object_index, object_label, parse_structure


class DemoValidationError(ValueError):
    pass


@dataclass(frozen=True)
class DemoStep:
    placement_order: tuple[int, ...]  # objects placed left to right, in order
    lights: bool

    @property
    def combination(self) -> frozenset[int]:
        return frozenset(self.placement_order)


@dataclass(frozen=True)
class DemoScript:
    script_id: str
    machine: str  # skin label, e.g. "polka-dot" / "striped"
    structure: CausalStructure
    steps: tuple[DemoStep, ...]

    def validate(self) -> None:
        """Every demonstrated outcome must match the declared structure."""
        for i, s in enumerate(self.steps):
            if len(set(s.placement_order)) != len(s.placement_order):
                raise DemoValidationError(
                    f"{self.script_id} step {i}: repeated object in placement order"
                )
            if activates(self.structure, s.combination) != s.lights:
                raise DemoValidationError(
                    f"{self.script_id} step {i}: outcome {s.lights} contradicts "
                    f"{self.structure.name}"
                )

    def serialize(self) -> dict:
        return {
            "script_id": self.script_id,
            "machine": self.machine,
            "structure": self.structure.name,
            "steps": [
                {
                    "order": [object_label(o) for o in s.placement_order],
                    "lights": s.lights,
                }
                for s in self.steps
            ],
        }


def script_from_dict(data: dict) -> DemoScript:
    steps = tuple(
        DemoStep(tuple(object_index(o) for o in s["order"]), bool(s["lights"]))
        for s in data["steps"]
    )
    script = DemoScript(
        script_id=data["script_id"],
        machine=data["machine"],
        structure=parse_structure(data["structure"]),
        steps=steps,
    )
    script.validate()
    return script


def load_default_scripts() -> dict[str, DemoScript]:
    raw = resources.files("blicket.data").joinpath("demo_scripts.json").read_text()
    scripts = [script_from_dict(d) for d in json.loads(raw)]
    return {s.script_id: s for s in scripts}


def scripts_for_condition(hypothesis_given: bool) -> list[DemoScript]:
    """Given: both machine demos (disjunctive then conjunctive).  Not given:
    the single ambiguous demo."""
    scripts = load_default_scripts()
    if hypothesis_given:
        return [scripts["disjunctive-machine"], scripts["conjunctive-machine"]]
    return [scripts["ambiguous"]]
