"""Hypothesis spaces, priors, and the deterministic blicket-machine semantics.

Objects are integers ``0 .. n_objects-1``; for the three-object setting they
are labeled A=0, B=1, C=2.  A combination is a plain ``frozenset`` of object
indices.  Causal structures come in two kinds: a disjunctive machine activates
when at least one blicket is placed, a conjunctive machine when at least two
are placed together.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Combination = frozenset  # frozenset[int]

_LABELS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"

NORMALIZATION_TOL = 1e-12


class OverhypothesisKind(enum.Enum):
    DISJUNCTIVE = "disjunctive"
    CONJUNCTIVE = "conjunctive"

    @property
    def threshold(self) -> int:
        """Number of placed blickets needed to activate the machine."""
        return 1 if self is OverhypothesisKind.DISJUNCTIVE else 2

    @property
    def short(self) -> str:
        return "dis" if self is OverhypothesisKind.DISJUNCTIVE else "con"


def object_label(index: int) -> str:
    return _LABELS[index]


def object_index(label: str) -> int:
    i = _LABELS.find(label.upper())
    if i < 0:
        raise ValueError(f"not an object label: {label!r}")
    return i


def combination(*indices: int) -> Combination:
    return frozenset(indices)


def combination_bitmask(c: Combination) -> int:
    return sum(1 << i for i in c)


def combination_from_bitmask(mask: int) -> Combination:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def format_combination(c: Combination) -> str:
    return "".join(_LABELS[i] for i in sorted(c)) if c else "(empty)"


def parse_combination(text: str) -> Combination:
    if text in ("", "(empty)", "{}"):
        return frozenset()
    return frozenset(object_index(ch) for ch in text)


@dataclass(frozen=True)
class CausalStructure:
    """A ground-truth hypothesis: overhypothesis kind plus blicket set.

    Single-blicket conjunctive structures are unconstructible: no observation
    could ever activate or distinguish them.
    """

    kind: OverhypothesisKind
    blickets: Combination

    def __post_init__(self) -> None:
        object.__setattr__(self, "blickets", frozenset(self.blickets))
        if not self.blickets:
            raise ValueError("blicket set must be nonempty")
        if any(i < 0 for i in self.blickets):
            raise ValueError("negative object index")
        if self.kind is OverhypothesisKind.CONJUNCTIVE and len(self.blickets) < 2:
            raise ValueError("conjunctive structures need at least two blickets")

    @property
    def name(self) -> str:
        """Textual name, e.g. ``AB-con`` or ``C-dis``."""
        return "".join(_LABELS[i] for i in sorted(self.blickets)) + "-" + self.kind.short

    def __repr__(self) -> str:  # pragma: no cover
        return f"CausalStructure({self.name})"


def parse_structure(name: str) -> CausalStructure:
    """Inverse of :attr:`CausalStructure.name`."""
    try:
        letters, kind_s = name.split("-")
    except ValueError:
        raise ValueError(f"malformed structure name: {name!r}") from None
    kinds = {"dis": OverhypothesisKind.DISJUNCTIVE, "con": OverhypothesisKind.CONJUNCTIVE}
    if kind_s not in kinds:
        raise ValueError(f"unknown kind in structure name: {name!r}")
    return CausalStructure(kinds[kind_s], frozenset(object_index(ch) for ch in letters))


def activates(h: CausalStructure, c: Combination) -> bool:
    """Whether the machine lights for combination ``c`` under structure ``h``.

    Pure function of the set; placement order is never consulted.
    """
    return len(h.blickets & c) >= h.kind.threshold


class HypothesisSpace:
    """Ordered, pairwise-distinguishable collection of causal structures."""

    def __init__(self, n_objects: int, hypotheses: Sequence[CausalStructure]):
        if n_objects < 1:
            raise ValueError("n_objects must be >= 1")
        hypotheses = tuple(hypotheses)
        if len(set(hypotheses)) != len(hypotheses):
            raise ValueError("hypotheses must be pairwise distinct")
        for h in hypotheses:
            if any(i >= n_objects for i in h.blickets):
                raise ValueError(f"{h.name} references objects outside range")
        self.n_objects = n_objects
        self.hypotheses = hypotheses
        self._index = {h: i for i, h in enumerate(hypotheses)}
        self._check_distinguishable()

    def _check_distinguishable(self) -> None:
        # Activation signature over all 2^n combinations must be unique.
        signatures: dict[tuple, CausalStructure] = {}
        for h in self.hypotheses:
            sig = tuple(
                activates(h, combination_from_bitmask(m)) for m in range(2**self.n_objects)
            )
            other = signatures.get(sig)
            if other is not None:
                raise ValueError(f"indistinguishable hypotheses: {other.name}, {h.name}")
            signatures[sig] = h

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __iter__(self):
        return iter(self.hypotheses)

    def __contains__(self, h: CausalStructure) -> bool:
        return h in self._index

    def index(self, h: CausalStructure) -> int:
        return self._index[h]

    def combinations(self) -> list[Combination]:
        """All combinations, bitmask ascending (empty set first)."""
        return [combination_from_bitmask(m) for m in range(2**self.n_objects)]

    def __repr__(self) -> str:  # pragma: no cover
        return f"HypothesisSpace(n={self.n_objects}, |H|={len(self)})"


def enumerate_structures(n_objects: int) -> HypothesisSpace:
    """All constructible structures over ``n_objects`` objects.

    Canonical order: the disjunctive block, then the conjunctive block, each
    ordered by blicket-set bitmask ascending.  For three objects this gives
    eleven structures, seven disjunctive and four conjunctive.
    """
    if n_objects < 1:
        raise ValueError("n_objects must be >= 1")
    hyps: list[CausalStructure] = []
    for mask in range(1, 2**n_objects):
        hyps.append(
            CausalStructure(OverhypothesisKind.DISJUNCTIVE, combination_from_bitmask(mask))
        )
    for mask in range(1, 2**n_objects):
        members = combination_from_bitmask(mask)
        if len(members) >= 2:
            hyps.append(CausalStructure(OverhypothesisKind.CONJUNCTIVE, members))
    return HypothesisSpace(n_objects, hyps)


class Prior:
    """Probability distribution over a hypothesis space, exact weights."""

    def __init__(self, space: HypothesisSpace, weights: Iterable[Fraction | int | float]):
        ws = [Fraction(w) for w in weights]
        if len(ws) != len(space):
            raise ValueError("one weight per hypothesis required")
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        total = sum(ws)
        if abs(float(total) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"weights must sum to 1 (got {float(total)})")
        if all(w == 0 for w in ws):
            raise ValueError("support must be nonempty")
        self.space = space
        self.weights = tuple(ws)

    def weight(self, h: CausalStructure) -> Fraction:
        return self.weights[self.space.index(h)]

    def support(self) -> list[CausalStructure]:
        return [h for h, w in zip(self.space.hypotheses, self.weights) if w > 0]

    def __repr__(self) -> str:  # pragma: no cover
        return f"Prior(|support|={len(self.support())})"


def uniform_prior(space: HypothesisSpace) -> Prior:
    """Equal weight on every structure in the space."""
    n = len(space)
    return Prior(space, [Fraction(1, n)] * n)


def experimental_prior(space: HypothesisSpace) -> Prior:
    """Half the mass on each overhypothesis class, spread over the six
    two-blicket structures; everything else gets exactly zero.

    Only defined for the three-object setting.
    """
    if space.n_objects != 3:
        raise ValueError("experimental prior is defined for 3 objects only")
    pairs = [frozenset(p) for p in ((0, 1), (0, 2), (1, 2))]
    supported = {
        CausalStructure(kind, p)
        for kind in OverhypothesisKind
        for p in pairs
    }
    missing = [h.name for h in supported if h not in space]
    if missing:
        raise ValueError(f"space lacks required structures: {sorted(missing)}")
    weights = [
        Fraction(1, 6) if h in supported else Fraction(0) for h in space.hypotheses
    ]
    return Prior(space, weights)
