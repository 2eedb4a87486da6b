"""Independent reference implementations used as test oracles.

These deliberately avoid the code paths they check: multiplication is done on
digit arrays (not Python bigints), edit distance with the full textbook
matrix, and tree shapes by direct enumeration.
"""

from itertools import product

from dacsolver.bsi import ColoredTree, TreeNode


def string_add(x: str, y: str) -> str:
    """Digit-array addition."""
    dx = [int(c) for c in reversed(x)]
    dy = [int(c) for c in reversed(y)]
    out = []
    carry = 0
    for i in range(max(len(dx), len(dy))):
        total = (dx[i] if i < len(dx) else 0) + (dy[i] if i < len(dy) else 0) + carry
        out.append(total % 10)
        carry = total // 10
    if carry:
        out.append(carry)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return "".join(str(d) for d in reversed(out))


def schoolbook_multiply(a: str, b: str) -> str:
    """Long multiplication on digit arrays, one partial row per digit."""
    da = [int(c) for c in reversed(a)]
    db = [int(c) for c in reversed(b)]
    out = [0] * (len(da) + len(db))
    for i, x in enumerate(da):
        carry = 0
        for j, y in enumerate(db):
            total = out[i + j] + x * y + carry
            out[i + j] = total % 10
            carry = total // 10
        k = i + len(db)
        while carry:
            total = out[k] + carry
            out[k] = total % 10
            carry = total // 10
            k += 1
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return "".join(str(d) for d in reversed(out))


def repeated_addition_multiply(a: str, b: str) -> str:
    """a added to itself b times; only viable for tiny b."""
    total = "0"
    for _ in range(int(b)):
        total = string_add(total, a)
    return total


def levenshtein_matrix(a: str, b: str) -> int:
    """Full-matrix textbook dynamic program."""
    rows, cols = len(a) + 1, len(b) + 1
    dist = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        dist[i][0] = i
    for j in range(cols):
        dist[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            dist[i][j] = min(dist[i - 1][j] + 1,
                             dist[i][j - 1] + 1,
                             dist[i - 1][j - 1] + cost)
    return dist[-1][-1]


def tree_shapes(n: int):
    """All binary tree shapes with n nodes, as nested (left, right) tuples."""
    if n == 0:
        return [None]
    out = []
    for left_size in range(n):
        for left in tree_shapes(left_size):
            for right in tree_shapes(n - 1 - left_size):
                out.append((left, right))
    return out


def shape_to_children(shape) -> list[list[int]]:
    """Assign preorder 1-based indices to a shape; returns per-node child pairs."""
    children: list[list[int]] = []

    def build(node) -> int:
        index = len(children) + 1
        children.append([0, 0])
        left, right = node
        if left is not None:
            children[index - 1][0] = build(left)
        if right is not None:
            children[index - 1][1] = build(right)
        return index

    build(shape)
    return children


def all_colored_trees(n: int) -> list[ColoredTree]:
    """Every tree with exactly n nodes: all shapes x all 2-colorings."""
    trees = []
    for shape in tree_shapes(n):
        children = shape_to_children(shape)
        for colors in product((0, 1), repeat=n):
            nodes = tuple(TreeNode(children[i][0], children[i][1], colors[i])
                          for i in range(n))
            trees.append(ColoredTree(nodes, root=1))
    return trees
