"""Reconstructed filesystem trees with per-node repetition counters.

The same structure serves three roles: the site tree of one target
application (weights ignored), the weighted training tree merged over all
training sites, and the weighted wordlist tree obtained by pruning the
training tree down to the words of a wordlist.
"""

from __future__ import annotations

import json
from collections import Counter
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .url_model import PathSeq


class TreeNode:
    __slots__ = ("segment", "weight", "children")

    def __init__(self, segment: str = "", weight: int = 0):
        self.segment = segment
        self.weight = weight
        self.children: Dict[str, TreeNode] = {}

    def __repr__(self):
        return f"TreeNode({self.segment!r}, weight={self.weight}, children={len(self.children)})"


class WeightedTree:
    """Rooted directory tree. The root has the empty segment."""

    def __init__(self):
        self.root = TreeNode()

    @classmethod
    def from_paths(cls, paths: Iterable[PathSeq]) -> "WeightedTree":
        tree = cls()
        for p in paths:
            tree.insert(p)
        return tree

    def insert(self, path: PathSeq) -> "WeightedTree":
        node = self.root
        node.weight += 1
        for seg in path:
            child = node.children.get(seg)
            if child is None:
                child = node.children[seg] = TreeNode(seg)
            child.weight += 1
            node = child
        return self

    def find(self, path: PathSeq) -> Optional[TreeNode]:
        node = self.root
        for seg in path:
            node = node.children.get(seg)
            if node is None:
                return None
        return node

    def __contains__(self, path) -> bool:
        return self.find(path) is not None

    def iter_nodes(self) -> Iterator[Tuple[PathSeq, TreeNode]]:
        """Yield ``(path, node)`` pairs in depth-first pre-order, root first."""
        stack: List[Tuple[PathSeq, TreeNode]] = [((), self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for seg in sorted(node.children, reverse=True):
                stack.append((path + (seg,), node.children[seg]))

    def __len__(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def segment_weights(self) -> Counter:
        """Total weight of every segment name summed over all its positions."""
        totals: Counter = Counter()
        for path, node in self.iter_nodes():
            if path:
                totals[node.segment] += node.weight
        return totals

    # structural equality, used by the round-trip tests
    def __eq__(self, other):
        if not isinstance(other, WeightedTree):
            return NotImplemented
        return _node_eq(self.root, other.root)

    def to_dict(self) -> dict:
        return _node_to_dict(self.root)

    @classmethod
    def from_dict(cls, data: dict) -> "WeightedTree":
        tree = cls()
        tree.root = _node_from_dict(data)
        return tree

    def dump(self, fp) -> None:
        json.dump(self.to_dict(), fp, separators=(",", ":"))

    @classmethod
    def load(cls, fp) -> "WeightedTree":
        return cls.from_dict(json.load(fp))


SiteTree = WeightedTree


def _node_eq(a: TreeNode, b: TreeNode) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x.segment != y.segment or x.weight != y.weight or x.children.keys() != y.children.keys():
            return False
        stack.extend((x.children[k], y.children[k]) for k in x.children)
    return True


def _node_to_dict(node: TreeNode) -> dict:
    return {
        "segment": node.segment,
        "weight": node.weight,
        "children": [_node_to_dict(node.children[k]) for k in sorted(node.children)],
    }


def _node_from_dict(data: dict) -> TreeNode:
    node = TreeNode(data["segment"], int(data["weight"]))
    for child in data.get("children", []):
        c = _node_from_dict(child)
        node.children[c.segment] = c
    return node


def insert_path(tree: WeightedTree, path: PathSeq) -> WeightedTree:
    return tree.insert(path)


def build_weighted_training_tree(corpus: Iterable[PathSeq]) -> WeightedTree:
    """Merge the paths of all training sites into one counted tree."""
    return WeightedTree.from_paths(corpus)


def build_wordlist_tree(training: WeightedTree, wordlist: Iterable[str]) -> WeightedTree:
    """Prune ``training`` to nodes whose name is in ``wordlist``.

    A node survives only when its parent survives, so a word can keep its
    weight under one directory and disappear under another. Weights are
    copied unchanged.
    """
    words = set(wordlist)
    pruned = WeightedTree()
    pruned.root.weight = training.root.weight
    stack = [(training.root, pruned.root)]
    while stack:
        src, dst = stack.pop()
        for seg, child in src.children.items():
            if seg in words:
                copy = dst.children[seg] = TreeNode(seg, child.weight)
                stack.append((child, copy))
    return pruned


def children_with_weights(tree: WeightedTree, path: PathSeq) -> List[Tuple[str, int]]:
    """Children of ``path`` as ``(segment, weight)``, heaviest first.

    Ties are broken by segment name. Unknown paths have no children.
    """
    node = tree.find(path)
    if node is None:
        return []
    return sorted(((c.segment, c.weight) for c in node.children.values()), key=lambda sw: (-sw[1], sw[0]))


def contains(tree: WeightedTree, path: PathSeq) -> bool:
    return tree.find(path) is not None
