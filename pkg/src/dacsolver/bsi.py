"""2-color binary subtree isomorphism solved divide-and-conquer style.

Trees use pointer-list encoding: node i (1-based) stores (left child index,
right child index, color), 0 meaning null. The solver decomposes on the
pattern root's children, tackles depth<=1 pattern subtrees by color matching,
and merges child indicator vectors with an unordered two-child match.

Indicator vectors have length n'+1: slot 0 stands for the null base position,
so child lookups v[left(i)] stay defined when left(i) is the null pointer.
A null pattern embeds everywhere, including at the null slot.

The module also provides exact rectifier-network realizations of AND/OR/NOT
gates, evaluated as affine maps under ReLU.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import BadInput, LengthMismatch, MalformedTree, NullPattern, PreconditionViolation

IndicatorVector = list  # list[int] of length base_size + 1; index 0 = null slot


@dataclass(frozen=True)
class TreeNode:
    left: int
    right: int
    color: int


@dataclass(frozen=True)
class ColoredTree:
    """Pointer-list encoding plus the root index."""

    nodes: tuple[TreeNode, ...]
    root: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    def node(self, index: int) -> TreeNode:
        return self.nodes[index - 1]

    def validate(self) -> None:
        """Single root, every non-root node has exactly one parent, no cycles."""
        n = self.size
        if n == 0:
            raise MalformedTree("tree has no nodes")
        if not 1 <= self.root <= n:
            raise MalformedTree(f"root index {self.root} out of range 1..{n}")
        parents: dict[int, int] = {}
        for i, node in enumerate(self.nodes, 1):
            if node.color not in (0, 1):
                raise MalformedTree(f"node {i}: color must be 0 or 1")
            for child in (node.left, node.right):
                if not 0 <= child <= n:
                    raise MalformedTree(f"node {i}: child index {child} out of range")
                if child == 0:
                    continue
                if child in parents:
                    raise MalformedTree(f"node {child}: has two parents "
                                        f"({parents[child]} and {i})")
                parents[child] = i
        if self.root in parents:
            raise MalformedTree(f"root {self.root} has a parent ({parents[self.root]})")
        reached = set()
        stack = [self.root]
        while stack:
            i = stack.pop()
            if i in reached:
                raise MalformedTree(f"cycle through node {i}")
            reached.add(i)
            node = self.node(i)
            stack.extend(c for c in (node.left, node.right) if c)
        if len(reached) != n:
            unreachable = sorted(set(range(1, n + 1)) - reached)
            raise MalformedTree(f"nodes unreachable from root: {unreachable}")


@dataclass(frozen=True)
class RootVector:
    """Pointers to the current pattern subtree root and the base tree root."""

    p_root: int
    b_root: int
    pad: int = 0


def subtree_depth_exceeds_one(r: RootVector, pattern: ColoredTree) -> bool:
    """The recursion test: depth > 1 exactly when the root node has a child."""
    if r.p_root == 0:
        return False
    node = pattern.node(r.p_root)
    return node.left != 0 or node.right != 0


def bsi_decompose(r: RootVector, pattern: ColoredTree,
                  base: ColoredTree) -> tuple[RootVector, RootVector]:
    """Split on the pattern root's children, keeping the base pointer as is."""
    if r.p_root == 0:
        raise NullPattern("cannot decompose a null pattern")
    node = pattern.node(r.p_root)
    return (RootVector(node.left, r.b_root, r.pad),
            RootVector(node.right, r.b_root, r.pad))


def bsi_tackle(r: RootVector, pattern: ColoredTree, base: ColoredTree) -> IndicatorVector:
    """Base case for pattern depth <= 1.

    A null pattern matches everywhere (all-ones, null slot included). A
    single-node pattern matches every base node of its color, never the null
    slot.
    """
    if subtree_depth_exceeds_one(r, pattern):
        raise PreconditionViolation(
            f"pattern node {r.p_root} has children; tackle handles depth <= 1 only")
    if r.p_root == 0:
        return [1] * (base.size + 1)
    color = pattern.node(r.p_root).color
    v = [0] * (base.size + 1)
    for i in range(1, base.size + 1):
        if base.node(i).color == color:
            v[i] = 1
    return v


def bsi_merge(r: RootVector, pattern: ColoredTree, base: ColoredTree,
              v_l: IndicatorVector, v_r: IndicatorVector) -> IndicatorVector:
    """Combine child indicators: colors must match and the two pattern children
    must embed at the base node's two children, in either assignment."""
    expected = base.size + 1
    if len(v_l) != expected or len(v_r) != expected:
        raise LengthMismatch(
            f"indicator length {len(v_l)}/{len(v_r)}, expected {expected}")
    v = [0] * expected
    if r.p_root == 0:
        return v
    color = pattern.node(r.p_root).color
    for i in range(1, base.size + 1):
        node = base.node(i)
        if node.color != color:
            continue
        straight = v_l[node.left] and v_r[node.right]
        crossed = v_l[node.right] and v_r[node.left]
        if straight or crossed:
            v[i] = 1
    return v


def _solve(r: RootVector, pattern: ColoredTree, base: ColoredTree) -> IndicatorVector:
    if not subtree_depth_exceeds_one(r, pattern):
        return bsi_tackle(r, pattern, base)
    r_l, r_r = bsi_decompose(r, pattern, base)
    v_l = _solve(r_l, pattern, base)
    v_r = _solve(r_r, pattern, base)
    return bsi_merge(r, pattern, base, v_l, v_r)


def bsi_solve(r: RootVector, pattern: ColoredTree, base: ColoredTree) -> IndicatorVector:
    """Indicator over base nodes: v[i]=1 when the pattern subtree at r.p_root
    embeds (unordered children) in the base subtree rooted at node i."""
    pattern.validate()
    base.validate()
    return _solve(r, pattern, base)


def embeds_at(pattern: ColoredTree, base: ColoredTree) -> IndicatorVector:
    """bsi_solve starting from the two tree roots."""
    return bsi_solve(RootVector(pattern.root, base.root), pattern, base)


def brute_force_embeds(pattern: ColoredTree, base: ColoredTree) -> IndicatorVector:
    """Independent oracle by direct recursive definition of embedding."""
    pattern.validate()
    base.validate()
    memo: dict[tuple[int, int], bool] = {}

    def embeds(p: int, b: int) -> bool:
        if p == 0:
            return True
        if b == 0:
            return False
        key = (p, b)
        if key not in memo:
            pn, bn = pattern.node(p), base.node(b)
            if pn.color != bn.color:
                memo[key] = False
            else:
                memo[key] = ((embeds(pn.left, bn.left) and embeds(pn.right, bn.right))
                             or (embeds(pn.left, bn.right) and embeds(pn.right, bn.left)))
        return memo[key]

    return [int(embeds(pattern.root, i)) for i in range(base.size + 1)]


def random_tree(n: int, seed: int) -> ColoredTree:
    """Random binary tree shape with fair-coin colors; deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    children = [[0, 0] for _ in range(n)]
    # open slots as (node index, side); node ids are 1-based insertion order
    slots: list[tuple[int, int]] = [(1, 0), (1, 1)]
    for new in range(2, n + 1):
        pick = rng.randrange(len(slots))
        slots[pick], slots[-1] = slots[-1], slots[pick]
        node, side = slots.pop()
        children[node - 1][side] = new
        slots.extend([(new, 0), (new, 1)])
    colors = [rng.randint(0, 1) for _ in range(n)]
    nodes = tuple(TreeNode(children[i][0], children[i][1], colors[i]) for i in range(n))
    return ColoredTree(nodes, root=1)


def load_tree(path: str | Path) -> ColoredTree:
    """Read a tree file: one JSON object {"nodes": [[l, r, c], ...], "root": i}."""
    raw = Path(path).read_text(encoding="utf-8").strip()
    if not raw:
        raise MalformedTree(f"empty tree file: {path}")
    try:
        doc = json.loads(raw.splitlines()[0])
        nodes = tuple(TreeNode(int(l), int(r), int(c)) for l, r, c in doc["nodes"])
        tree = ColoredTree(nodes, int(doc["root"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedTree(f"cannot parse tree file {path}: {exc}") from exc
    tree.validate()
    return tree


def save_tree(tree: ColoredTree, path: str | Path) -> None:
    doc = {"nodes": [[n.left, n.right, n.color] for n in tree.nodes], "root": tree.root}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


# --- boolean gates as rectifier networks -------------------------------------

@dataclass(frozen=True)
class GateMLP:
    """Affine map under ReLU realizing one gate: out = shift + scale*relu(w.x + bias)."""

    gate_kind: str  # AND | OR | NOT
    fan_in: int
    weights: tuple[float, ...]
    bias: float
    post_scale: float = 1.0
    post_shift: float = 0.0


def and_gate(fan_in: int) -> GateMLP:
    """All-ones weights with bias 1-h: positive only when every input is 1."""
    return GateMLP("AND", fan_in, (1.0,) * fan_in, 1.0 - fan_in)


def or_gate(fan_in: int) -> GateMLP:
    """Complemented form 1 - relu(1 - sum(x)): 0 only when every input is 0."""
    return GateMLP("OR", fan_in, (-1.0,) * fan_in, 1.0, post_scale=-1.0, post_shift=1.0)


def not_gate(fan_in: int = 1, pin: int = 0) -> GateMLP:
    """Negate one designated input pin; other pins get zero weight."""
    if not 0 <= pin < fan_in:
        raise ValueError(f"pin {pin} out of range for fan-in {fan_in}")
    weights = tuple(-1.0 if i == pin else 0.0 for i in range(fan_in))
    return GateMLP("NOT", fan_in, weights, 1.0)


def gate_mlp_eval(gate: GateMLP, x: Sequence[int]) -> int:
    """Evaluate the gate on a 0/1 vector; the result is exactly 0 or 1."""
    if len(x) != gate.fan_in:
        raise BadInput(f"expected {gate.fan_in} inputs, got {len(x)}")
    if any(value not in (0, 1) for value in x):
        raise BadInput(f"inputs must be 0 or 1: {list(x)!r}")
    pre = sum(w * value for w, value in zip(gate.weights, x)) + gate.bias
    out = gate.post_shift + gate.post_scale * max(0.0, pre)
    if out not in (0.0, 1.0):
        raise BadInput(f"gate produced non-boolean output {out}")
    return int(out)
