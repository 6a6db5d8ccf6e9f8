import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from blicket.core import enumerate_structures, experimental_prior, uniform_prior
from blicket.traces import Condition, SessionTrace, TraceEvent
from blicket.core import OverhypothesisKind, parse_structure
from blicket.env import Observation

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def space3():
    return enumerate_structures(3)


@pytest.fixture(scope="session")
def uniform11(space3):
    return uniform_prior(space3)


@pytest.fixture(scope="session")
def experimental6(space3):
    return experimental_prior(space3)


def make_trace(truth: str, checks, *, kind=None, given=True, session_id="t",
               blickets=None, start_ms=0, step_ms=1000) -> SessionTrace:
    """Build a well-formed trace that tests each (objects, outcome) pair in
    order, adjusting placements minimally between checks."""
    structure = parse_structure(truth)
    cond = Condition(kind or structure.kind, given)
    events = []
    t = start_ms
    on: list[int] = []
    for objs, lit in checks:
        target = set(objs)
        for o in [o for o in on if o not in target]:
            events.append(TraceEvent(t, TraceEvent.REMOVE, obj=o)); on.remove(o); t += step_ms
        for o in sorted(target - set(on)):
            events.append(TraceEvent(t, TraceEvent.PLACE, obj=o)); on.append(o); t += step_ms
        obs = Observation.DETECTOR_ON if lit else Observation.DETECTOR_OFF
        events.append(TraceEvent(t, TraceEvent.CHECK, outcome=obs)); t += step_ms
    judgments = None
    if blickets is not None:
        judgments = {i: (i in blickets) for i in range(3)}
    return SessionTrace(session_id=session_id, condition=cond, ground_truth=structure,
                        events=events, blicket_judgments=judgments)
