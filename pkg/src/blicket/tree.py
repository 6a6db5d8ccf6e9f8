"""Observation-branching policy trees.

A tree is either a :class:`Leaf` identifying a single causal structure or an
:class:`ActionNode` holding a test combination and one subtree per possible
observation.  Trees are immutable once built.  Text export mirrors the
tabular action/branch layout used for reporting policies; DOT export renders
the same tree as a graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .core import (
    CausalStructure,
    Combination,
    combination_bitmask,
    format_combination,
)
from .env import MacroAction, Observation


@dataclass(frozen=True)
class Leaf:
    identified: CausalStructure


@dataclass(frozen=True)
class ActionNode:
    action: MacroAction
    branches: Mapping[Observation, "PolicyTree"]

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", dict(self.branches))
        if not self.branches:
            raise ValueError("action node needs at least one branch")


PolicyTree = Leaf | ActionNode


def iter_paths(
    tree: PolicyTree, _prefix: tuple = ()
) -> Iterator[tuple[tuple[tuple[Combination, Observation], ...], CausalStructure]]:
    """Yield (path, identified) for every leaf; path is (combination, obs) pairs."""
    if isinstance(tree, Leaf):
        yield _prefix, tree.identified
        return
    for obs, sub in tree.branches.items():
        yield from iter_paths(sub, _prefix + ((tree.action.combination, obs),))


def leaf_depths(tree: PolicyTree) -> dict[CausalStructure, int]:
    """Depth (number of test actions) of each identified hypothesis."""
    return {h: len(path) for path, h in iter_paths(tree)}


def node_count(tree: PolicyTree) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + sum(node_count(b) for b in tree.branches.values())


def max_depth(tree: PolicyTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(max_depth(b) for b in tree.branches.values())


def format_text(tree: PolicyTree | None, indent: int = 0) -> str:
    """Readable indented layout: action, then one block per observation."""
    if tree is None:
        return " " * indent + "(no actions needed)\n"
    pad = " " * indent
    if isinstance(tree, Leaf):
        return f"{pad}done: {tree.identified.name}\n"
    out = f"{pad}test {format_combination(tree.action.combination)}\n"
    for obs in (Observation.DETECTOR_ON, Observation.DETECTOR_OFF):
        if obs in tree.branches:
            out += f"{pad}  ({obs.value}):\n"
            out += format_text(tree.branches[obs], indent + 4)
    return out


def to_dot(tree: PolicyTree | None, name: str = "policy") -> str:
    """GraphViz DOT export; edges labeled by observation."""
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    counter = [0]

    def emit(node: PolicyTree) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        if isinstance(node, Leaf):
            lines.append(f'  {nid} [label="{node.identified.name}", shape=ellipse];')
            return nid
        lines.append(f'  {nid} [label="test {format_combination(node.action.combination)}"];')
        for obs in (Observation.DETECTOR_ON, Observation.DETECTOR_OFF):
            if obs in node.branches:
                cid = emit(node.branches[obs])
                lines.append(f'  {nid} -> {cid} [label="{obs.value}"];')
        return nid

    if tree is not None:
        emit(tree)
    lines.append("}")
    return "\n".join(lines)


def relabel(tree: PolicyTree, perm: tuple[int, ...]) -> PolicyTree:
    """Apply an object permutation (old index -> perm[old]) to every action
    combination and leaf structure."""
    if isinstance(tree, Leaf):
        h = tree.identified
        return Leaf(CausalStructure(h.kind, frozenset(perm[i] for i in h.blickets)))
    action = MacroAction(frozenset(perm[i] for i in tree.action.combination))
    return ActionNode(
        action, {obs: relabel(sub, perm) for obs, sub in tree.branches.items()}
    )


def structurally_equal(a: PolicyTree, b: PolicyTree, compare_leaves: bool = False) -> bool:
    """Exact node-by-node equality of actions and observation branching.

    Leaf identities are implied by the path, so they are ignored unless
    ``compare_leaves`` is set.
    """
    if isinstance(a, Leaf) or isinstance(b, Leaf):
        if not (isinstance(a, Leaf) and isinstance(b, Leaf)):
            return False
        return not compare_leaves or a.identified == b.identified
    if a.action.combination != b.action.combination:
        return False
    if set(a.branches) != set(b.branches):
        return False
    return all(
        structurally_equal(a.branches[o], b.branches[o], compare_leaves)
        for o in a.branches
    )


def isomorphic_under_relabeling(
    a: PolicyTree, b: PolicyTree, n_objects: int
) -> tuple[int, ...] | None:
    """Search all object permutations; return one making ``a`` equal ``b``."""
    from itertools import permutations

    for perm in permutations(range(n_objects)):
        if structurally_equal(relabel(a, perm), b):
            return perm
    return None


def _shape(tree: PolicyTree) -> tuple:
    """Order-free shape: children as a multiset, action labels dropped."""
    if isinstance(tree, Leaf):
        return ("leaf",)
    return ("node", tuple(sorted(_shape(b) for b in tree.branches.values())))


def same_shape(a: PolicyTree, b: PolicyTree) -> bool:
    """Unlabeled-tree isomorphism: identical branching structure, ignoring
    which combinations are tested and which observation leads where."""
    return _shape(a) == _shape(b)


def sort_key(c: Combination) -> tuple[int, int]:
    """Total order used to break ties between candidate test combinations:
    fewest objects first, then largest bitmask."""
    return (len(c), -combination_bitmask(c))
