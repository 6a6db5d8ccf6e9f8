"""Interactive blicket-machine state machine.

Seven discrete actions for three objects: place/remove per object plus a
check, encoded ``place(i)=2i``, ``remove(i)=2i+1``, ``check=2n``.  States are
immutable; :func:`step` is a pure transition returning the next state and, for
a check, the observation.  Redundant placements and removals are no-ops so
that recorded human event streams replay cleanly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .core import (
    CausalStructure,
    Combination,
    activates,
    combination_bitmask,
    format_combination,
    object_label,
)


class Observation(enum.Enum):
    DETECTOR_ON = "on"
    DETECTOR_OFF = "off"

    @property
    def lit(self) -> bool:
        return self is Observation.DETECTOR_ON


class Light(enum.Enum):
    ON = "on"
    OFF = "off"
    UNKNOWN = "unknown"  # no check since the last placement change


@dataclass(frozen=True)
class EnvAction:
    PLACE = "place"
    REMOVE = "remove"
    CHECK = "check"

    kind: str
    obj: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (self.PLACE, self.REMOVE, self.CHECK):
            raise ValueError(f"unknown action kind: {self.kind!r}")
        if self.kind == self.CHECK:
            if self.obj is not None:
                raise ValueError("check takes no object")
        elif self.obj is None or self.obj < 0:
            raise ValueError("place/remove need an object index")

    def action_id(self, n_objects: int) -> int:
        if self.kind == self.CHECK:
            return 2 * n_objects
        return 2 * self.obj + (0 if self.kind == self.PLACE else 1)

    @staticmethod
    def from_id(action_id: int, n_objects: int) -> "EnvAction":
        if not 0 <= action_id <= 2 * n_objects:
            raise ValueError(f"action id out of range: {action_id}")
        if action_id == 2 * n_objects:
            return EnvAction(EnvAction.CHECK)
        kind = EnvAction.PLACE if action_id % 2 == 0 else EnvAction.REMOVE
        return EnvAction(kind, action_id // 2)


def place(obj: int) -> EnvAction:
    return EnvAction(EnvAction.PLACE, obj)


def remove(obj: int) -> EnvAction:
    return EnvAction(EnvAction.REMOVE, obj)


def check() -> EnvAction:
    return EnvAction(EnvAction.CHECK)


@dataclass(frozen=True)
class MacroAction:
    """One test event: put exactly this combination on the detector and check.

    Expands to removing everything not in the combination, placing the missing
    members bitmask-ascending, then a check.
    """

    combination: Combination

    def __post_init__(self) -> None:
        object.__setattr__(self, "combination", frozenset(self.combination))

    def expand(self, state: "EnvState") -> list[EnvAction]:
        actions = [remove(o) for o in state.on_detector if o not in self.combination]
        actions += [place(o) for o in sorted(self.combination) if o not in state.on_detector]
        actions.append(check())
        return actions

    @property
    def bitmask(self) -> int:
        return combination_bitmask(self.combination)

    def __repr__(self) -> str:  # pragma: no cover
        return f"MacroAction({format_combination(self.combination)})"


@dataclass(frozen=True)
class EnvState:
    """Current detector contents (in placement order), light, hidden truth."""

    hidden_truth: CausalStructure
    on_detector: tuple = ()
    light: Light = Light.UNKNOWN
    step_count: int = 0

    def combination(self) -> Combination:
        return frozenset(self.on_detector)

    def serialize(self) -> dict:
        """Actor-facing record; the hidden truth is never included."""
        return {
            "on_detector": [object_label(o) for o in self.on_detector],
            "light": self.light.value,
            "steps": self.step_count,
        }


def reset(truth: CausalStructure, seed: int = 0) -> EnvState:
    """Fresh episode: empty detector, light unknown.

    The seed is accepted for forward compatibility with stochastic variants;
    the deterministic machine ignores it.
    """
    del seed
    return EnvState(hidden_truth=truth)


def step(state: EnvState, action: EnvAction) -> tuple[EnvState, Observation | None]:
    """Apply one action.  Only a check yields an observation."""
    count = state.step_count + 1
    if action.kind == EnvAction.CHECK:
        obs = (
            Observation.DETECTOR_ON
            if activates(state.hidden_truth, state.combination())
            else Observation.DETECTOR_OFF
        )
        light = Light.ON if obs.lit else Light.OFF
        return replace(state, light=light, step_count=count), obs
    on = state.on_detector
    if action.kind == EnvAction.PLACE:
        if action.obj not in on:
            on = on + (action.obj,)
    else:
        on = tuple(o for o in on if o != action.obj)
    # Any placement change invalidates the displayed light until the next check.
    light = state.light if on == state.on_detector else Light.UNKNOWN
    return replace(state, on_detector=on, light=light, step_count=count), None


def run_macro(state: EnvState, macro: MacroAction) -> tuple[EnvState, Observation]:
    """Execute a macro test; equivalent to stepping through its expansion."""
    obs = None
    for action in macro.expand(state):
        state, obs = step(state, action)
    assert obs is not None
    return state, obs
