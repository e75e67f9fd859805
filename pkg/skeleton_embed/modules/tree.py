"""Balanced binary trees with preorder node ids."""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Optional

__all__ = [
    "BalancedBinaryTree",
    "build_balanced_tree",
    "tree_from_nested",
    "tree_to_nested",
]


@dataclass(frozen=True)
class BalancedBinaryTree:
    """
    Binary tree stored as child arrays indexed by node id. Node ids follow
    preorder, so the root is 0 whenever the tree is not empty.
    """

    left: tuple[Optional[int], ...]
    right: tuple[Optional[int], ...]

    @property
    def n(self) -> int:
        return len(self.left)

    @property
    def root(self) -> Optional[int]:
        return 0 if self.left else None

    @cached_property
    def parent(self) -> tuple[Optional[int], ...]:
        out: list[Optional[int]] = [None] * self.n
        for v in range(self.n):
            for child in (self.left[v], self.right[v]):
                if child is not None:
                    out[child] = v
        return tuple(out)

    @cached_property
    def subtree_sizes(self) -> tuple[int, ...]:
        sizes = [1] * self.n
        # preorder ids: every child id is larger than its parent's
        for v in reversed(range(self.n)):
            for child in (self.left[v], self.right[v]):
                if child is not None:
                    sizes[v] += sizes[child]
        return tuple(sizes)

    @cached_property
    def _depths(self) -> tuple[int, ...]:
        # height of the subtree at v; a leaf has height 0
        heights = [0] * self.n
        for v in reversed(range(self.n)):
            kids = [c for c in (self.left[v], self.right[v]) if c is not None]
            heights[v] = 1 + max(heights[c] for c in kids) if kids else 0
        return tuple(heights)

    def size(self, v: Optional[int]) -> int:
        return 0 if v is None else self.subtree_sizes[v]

    def height(self, v: Optional[int]) -> int:
        return -1 if v is None else self._depths[v]

    @property
    def depth(self) -> int:
        return self.height(self.root)

    def edges(self) -> list[tuple[int, int]]:
        return [
            (v, child)
            for v in range(self.n)
            for child in (self.left[v], self.right[v])
            if child is not None
        ]

    def is_balanced(self) -> bool:
        return all(
            abs(self.height(self.left[v]) - self.height(self.right[v])) <= 1
            for v in range(self.n)
        )


def build_balanced_tree(n: int) -> BalancedBinaryTree:
    """Left-biased balanced tree: the left subtree gets ceil((n - 1) / 2) nodes."""
    if n < 0:
        raise ValueError("Tree size must be non-negative")
    left: list[Optional[int]] = [None] * n
    right: list[Optional[int]] = [None] * n
    stack = [(0, n)]
    while stack:
        first, size = stack.pop()
        if size == 0:
            continue
        rest = size - 1
        lsize = (rest + 1) // 2
        if lsize:
            left[first] = first + 1
            stack.append((first + 1, lsize))
        if rest - lsize:
            right[first] = first + 1 + lsize
            stack.append((first + 1 + lsize, rest - lsize))
    return BalancedBinaryTree(tuple(left), tuple(right))


def tree_from_nested(spec: Optional[dict[str, Any]]) -> BalancedBinaryTree:
    """
    Build a tree from ``{"left": ..., "right": ...}`` nesting, where a missing
    or null child is empty. Ids are assigned in preorder.
    """
    left: list[Optional[int]] = []
    right: list[Optional[int]] = []

    def visit(node: Optional[dict[str, Any]]) -> Optional[int]:
        if node is None:
            return None
        if not isinstance(node, dict):
            raise TypeError("Tree nodes must be objects")
        vid = len(left)
        left.append(None)
        right.append(None)
        left[vid] = visit(node.get("left"))
        right[vid] = visit(node.get("right"))
        return vid

    visit(spec)
    return BalancedBinaryTree(tuple(left), tuple(right))


def tree_to_nested(tree: BalancedBinaryTree) -> Optional[dict[str, Any]]:
    def visit(v: Optional[int]) -> Optional[dict[str, Any]]:
        if v is None:
            return None
        return {"left": visit(tree.left[v]), "right": visit(tree.right[v])}

    return visit(tree.root)
