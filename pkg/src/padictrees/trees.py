"""Truncated rooted trees and the constructions used throughout the package.

A TruncTree stores a rooted tree truncated at a fixed depth cap, layer by
layer.  Nodes are addressed as (depth, index); node labels are opaque tags
(typically residue tuples) and are ignored by isomorphism tests unless
explicitly requested.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import (
    DepthMismatch,
    DomainError,
    EmptyAttach,
    LabelMissing,
    NodeBudgetExceeded,
    PrecisionExhausted,
)
from .padic import PadicVec


class TruncTree:
    """Rooted tree truncated at depth_cap, layers ordered but order-irrelevant.

    parents[d][i] is the index (in layer d-1) of the parent of node i at
    depth d, for 1 <= d <= depth_cap.  A tree is either empty or has exactly
    one root.
    """

    def __init__(self, depth_cap: int, parents: list[list[int]], labels=None, empty=False):
        if depth_cap < 0:
            raise DomainError("negative depth cap")
        if len(parents) != depth_cap:
            raise DomainError("parents must have one list per depth 1..depth_cap")
        self.depth_cap = depth_cap
        self.parents = [list(layer) for layer in parents]
        self.empty = empty
        if empty and any(parents):
            raise DomainError("empty tree with nodes")
        sizes = self.layer_sizes()
        for d in range(1, depth_cap + 1):
            for par in self.parents[d - 1]:
                if not 0 <= par < sizes[d - 1]:
                    raise DomainError(f"dangling parent link at depth {d}")
        self.labels = None
        if labels is not None:
            labels = [list(layer) for layer in labels]
            if [len(l) for l in labels] != sizes:
                raise DomainError("labels shape mismatch")
            self.labels = labels

    def layer_sizes(self) -> list[int]:
        if self.empty:
            return [0] * (self.depth_cap + 1)
        return [1] + [len(layer) for layer in self.parents]

    def num_nodes(self) -> int:
        return sum(self.layer_sizes())

    def children_index(self) -> list[list[list[int]]]:
        """For each depth d < cap, children[d][i] = child indices at depth d+1."""
        sizes = self.layer_sizes()
        out = []
        for d in range(self.depth_cap):
            buckets: list[list[int]] = [[] for _ in range(sizes[d])]
            for i, par in enumerate(self.parents[d] if d < len(self.parents) else []):
                buckets[par].append(i)
            out.append(buckets)
        return out

    def label(self, depth: int, index: int):
        if self.labels is None:
            raise LabelMissing("tree carries no labels")
        return self.labels[depth][index]

    def drop_labels(self) -> "TruncTree":
        return TruncTree(self.depth_cap, self.parents, empty=self.empty)

    def to_json(self) -> dict:
        out = {
            "format": 1,
            "depth_cap": self.depth_cap,
            "layers": [list(range(n)) for n in self.layer_sizes()],
            "parents": [list(layer) for layer in self.parents],
        }
        if self.labels is not None:
            out["labels"] = [[_label_json(l) for l in layer] for layer in self.labels]
        return out

    @staticmethod
    def from_json(data: dict) -> "TruncTree":
        cap = int(data["depth_cap"])
        parents = [[int(i) for i in layer] for layer in data["parents"]]
        labels = data.get("labels")
        if labels is not None:
            labels = [[_label_unjson(l) for l in layer] for layer in labels]
        empty = len(data["layers"][0]) == 0 if data.get("layers") else False
        return TruncTree(cap, parents, labels=labels, empty=empty)

    @staticmethod
    def load(path: str) -> "TruncTree":
        with open(path) as fh:
            return TruncTree.from_json(json.load(fh))

    def __repr__(self):
        return f"TruncTree(depth_cap={self.depth_cap}, layers={self.layer_sizes()})"


def _label_json(l):
    if isinstance(l, tuple):
        return list(l)
    return l


def _label_unjson(l):
    if isinstance(l, list):
        return tuple(l)
    return l


def empty_tree(depth_cap: int) -> TruncTree:
    return TruncTree(depth_cap, [[] for _ in range(depth_cap)], empty=True)


def path_tree(depth_cap: int) -> TruncTree:
    """The tree of a one-point set: a single path."""
    return TruncTree(depth_cap, [[0] for _ in range(depth_cap)])


def full_tree(n: int, p: int, depth_cap: int, node_budget: int = 10**7) -> TruncTree:
    """Truncated T(Z_p^n): every node has exactly p^n children."""
    q = p**n
    if (q ** (depth_cap + 1) - 1) // (q - 1) > node_budget:
        raise NodeBudgetExceeded(f"full_tree({n},{p},{depth_cap}) exceeds node budget")
    parents = []
    size = 1
    for _ in range(depth_cap):
        parents.append([i // q for i in range(size * q)])
        size *= q
    return TruncTree(depth_cap, parents)


def y_tree(kappa: int, depth_cap: int) -> TruncTree:
    """Path of length kappa, then a bifurcation into two infinite paths."""
    if kappa < 0:
        raise DomainError("kappa must be non-negative")
    parents = []
    for d in range(1, depth_cap + 1):
        if d <= kappa:
            parents.append([0])
        elif d == kappa + 1:
            parents.append([0, 0])
        else:
            parents.append([0, 1])
    return TruncTree(depth_cap, parents)


@dataclass(frozen=True)
class Ball:
    """The coset center + p^radius Z_p^n (same radius in every coordinate)."""

    center: tuple[int, ...]
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError("negative radius")
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))

    def reduced_center(self, p: int) -> tuple[int, ...]:
        m = p**self.radius
        return tuple(c % m for c in self.center)

    def contains_ball(self, other: "Ball", p: int) -> bool:
        if other.radius < self.radius:
            return False
        m = p**self.radius
        return all((a - b) % m == 0 for a, b in zip(other.center, self.center))

    def disjoint(self, other: "Ball", p: int) -> bool:
        r = min(self.radius, other.radius)
        m = p**r
        return any((a - b) % m != 0 for a, b in zip(self.center, other.center))


@dataclass(frozen=True)
class Cheese:
    """A ball minus finitely many pairwise disjoint subballs (the holes)."""

    outer: Ball
    holes: tuple[Ball, ...]
    p: int

    def __post_init__(self):
        for h in self.holes:
            if not self.outer.contains_ball(h, self.p):
                raise DomainError("hole not contained in outer ball")
        for i, a in enumerate(self.holes):
            for b in self.holes[i + 1 :]:
                if not a.disjoint(b, self.p):
                    raise DomainError("holes are not pairwise disjoint")


def from_points(points: list[PadicVec], ball: Ball, depth_cap: int) -> TruncTree:
    """Tree of a finite point set on a ball, truncated at relative depth cap.

    Nodes at relative depth d are the radius-(ball.radius + d) subballs
    meeting the point set; labels are the absolute residue tuples.
    """
    if not points:
        return empty_tree(depth_cap)
    p = points[0].p
    r = ball.radius
    if depth_cap > points[0].prec - r:
        raise PrecisionExhausted("points carry too few digits for this depth cap")
    cmod = p**r
    cref = ball.reduced_center(p)
    pts = []
    for x in points:
        res = x.residues()
        if any((a - c) % cmod != 0 for a, c in zip(res, cref)):
            raise DomainError("point outside the ball")
        pts.append(res)
    parents: list[list[int]] = []
    labels: list[list[Any]] = [[cref]]
    prev_index = {cref: 0}
    for d in range(1, depth_cap + 1):
        m = p ** (r + d)
        seen: dict[tuple, int] = {}
        layer_par, layer_lab = [], []
        for res in pts:
            key = tuple(a % m for a in res)
            if key not in seen:
                seen[key] = len(layer_par)
                layer_par.append(prev_index[tuple(a % (m // p) for a in res)])
                layer_lab.append(key)
        parents.append(layer_par)
        labels.append(layer_lab)
        prev_index = seen
    return TruncTree(depth_cap, parents, labels=labels)


def product(t1: TruncTree, t2: TruncTree) -> TruncTree:
    """Layerwise product: depth-d layer is the Cartesian product of layers."""
    if t1.depth_cap != t2.depth_cap:
        raise DepthMismatch("product needs equal depth caps")
    if t1.empty or t2.empty:
        return empty_tree(t1.depth_cap)
    sizes2 = t2.layer_sizes()
    parents = []
    for d in range(1, t1.depth_cap + 1):
        w_prev = sizes2[d - 1]
        layer = []
        for a in t1.parents[d - 1]:
            for b in t2.parents[d - 1]:
                layer.append(a * w_prev + b)
        parents.append(layer)
    return TruncTree(t1.depth_cap, parents)


def attach(t: TruncTree, node: tuple[int, int], s: TruncTree) -> TruncTree:
    """Attach s at node (identify s's root with it), truncating at t's cap."""
    if s.empty:
        raise EmptyAttach("cannot attach an empty tree")
    nd, ni = node
    sizes = t.layer_sizes()
    if not (0 <= nd <= t.depth_cap and 0 <= ni < sizes[nd]):
        raise DomainError("node reference out of range")
    parents = [list(layer) for layer in t.parents]
    labels = [list(layer) for layer in t.labels] if t.labels is not None else None
    # index maps for s's nodes placed at absolute depths nd + k
    prev_map = {0: ni}
    for k in range(1, s.depth_cap + 1):
        depth = nd + k
        if depth > t.depth_cap:
            break
        base = len(parents[depth - 1])
        cur_map = {}
        for j, par in enumerate(s.parents[k - 1]):
            cur_map[j] = base + len(cur_map)
            parents[depth - 1].append(prev_map[par])
            if labels is not None:
                lab = s.labels[k][j] if s.labels is not None else None
                labels[depth].append(lab)
        prev_map = cur_map
    return TruncTree(t.depth_cap, parents, labels=labels)


def subtree(t: TruncTree, node: tuple[int, int], depth_cap=None) -> TruncTree:
    """The subtree rooted at the given node, re-rooted at depth 0."""
    nd, ni = node
    sizes = t.layer_sizes()
    if not (0 <= nd <= t.depth_cap and 0 <= ni < sizes[nd]):
        raise DomainError("node reference out of range")
    if depth_cap is None:
        depth_cap = t.depth_cap - nd
    if depth_cap > t.depth_cap - nd:
        raise DepthMismatch("subtree cannot be deeper than the source tree")
    parents = []
    labels = None if t.labels is None else [[t.labels[nd][ni]]]
    keep_prev = {ni: 0}
    for k in range(1, depth_cap + 1):
        depth = nd + k
        keep_cur = {}
        layer = []
        lab_layer = []
        for j, par in enumerate(t.parents[depth - 1]):
            if par in keep_prev:
                keep_cur[j] = len(layer)
                layer.append(keep_prev[par])
                if labels is not None:
                    lab_layer.append(t.labels[depth][j])
        parents.append(layer)
        if labels is not None:
            labels.append(lab_layer)
        keep_prev = keep_cur
    return TruncTree(depth_cap, parents, labels=labels)


def poincare_coeffs(t: TruncTree) -> list[int]:
    """Layer counts N_0 .. N_cap of the truncated Poincare series."""
    return t.layer_sizes()


def cheese_restrict(t: TruncTree, cheese: Cheese) -> TruncTree:
    """Subtree of nodes not strictly inside any hole; hole nodes stay as leaves.

    Requires residue labels; a hole of radius r corresponds to the node at
    relative depth r - outer.radius whose label equals the hole's center.
    """
    if t.labels is None:
        raise LabelMissing("cheese_restrict needs residue labels")
    p, r0 = cheese.p, cheese.outer.radius
    hole_nodes = set()
    for h in cheese.holes:
        d = h.radius - r0
        if not 0 <= d <= t.depth_cap:
            raise DomainError("hole outside the truncated tree")
        want = h.reduced_center(p)
        idx = None
        for i, lab in enumerate(t.labels[d]):
            if tuple(lab) == want:
                idx = i
                break
        if idx is None:
            raise DomainError(f"hole {h} is not a node of the tree")
        hole_nodes.add((d, idx))
    # drop strict descendants of hole nodes
    parents: list[list[int]] = []
    labels: list[list[Any]] = [list(t.labels[0])]
    keep_prev = {0: 0} if not t.empty else {}
    blocked_prev = {i for (d, i) in hole_nodes if d == 0}
    for d in range(1, t.depth_cap + 1):
        layer_par, layer_lab = [], []
        keep_cur, blocked_cur = {}, set()
        for i, par in enumerate(t.parents[d - 1]):
            if par not in keep_prev or par in blocked_prev:
                continue  # parent removed, or parent is a hole: drop descendants
            keep_cur[i] = len(layer_par)
            layer_par.append(keep_prev[par])
            layer_lab.append(t.labels[d][i])
            if (d, i) in hole_nodes:
                blocked_cur.add(i)
        parents.append(layer_par)
        labels.append(layer_lab)
        keep_prev = keep_cur
        blocked_prev = blocked_cur
    return TruncTree(t.depth_cap, parents, labels=labels, empty=t.empty)


def find_node_by_label(t: TruncTree, depth: int, label) -> tuple[int, int]:
    if t.labels is None:
        raise LabelMissing("tree carries no labels")
    want = tuple(label) if isinstance(label, (list, tuple)) else label
    for i, lab in enumerate(t.labels[depth]):
        if (tuple(lab) if isinstance(lab, (list, tuple)) else lab) == want:
            return (depth, i)
    raise DomainError(f"no node with label {label} at depth {depth}")


def _ahu_ids(trees: list[TruncTree], with_labels: bool) -> list[int]:
    """Joint AHU refinement: returns the root id of each tree.

    Ids are interned per depth across all trees, so equal ids at equal
    depth mean exactly isomorphic subtrees (no hashing involved).
    """
    cap = trees[0].depth_cap
    per_tree_ids = []
    # process bottom-up with one shared intern table per depth
    layer_ids = []
    for t in trees:
        n = t.layer_sizes()[cap]
        layer_ids.append([0] * n)
    for d in range(cap, -1, -1):
        intern: dict[tuple, int] = {}
        new_ids = []
        for ti, t in enumerate(trees):
            sizes = t.layer_sizes()
            buckets: list[list[int]] = [[] for _ in range(sizes[d])]
            if d < cap:
                for i, par in enumerate(t.parents[d]):
                    buckets[par].append(layer_ids[ti][i])
            ids = []
            for i in range(sizes[d]):
                key = tuple(sorted(buckets[i]))
                if with_labels:
                    key = (_hashable(t.labels[d][i]) if t.labels else None, key)
                ids.append(intern.setdefault(key, len(intern)))
            new_ids.append(ids)
        layer_ids = new_ids
    for ti, t in enumerate(trees):
        per_tree_ids.append(layer_ids[ti][0] if not t.empty else -1)
    return per_tree_ids


def _hashable(l):
    return tuple(l) if isinstance(l, list) else l


def is_isomorphic(t1: TruncTree, t2: TruncTree, with_labels: bool = False) -> bool:
    """Exact isomorphism of truncated trees (labels ignored by default)."""
    if t1.depth_cap != t2.depth_cap:
        raise DepthMismatch(f"depth caps differ: {t1.depth_cap} vs {t2.depth_cap}")
    if t1.empty or t2.empty:
        return t1.empty == t2.empty
    if t1.layer_sizes() != t2.layer_sizes():
        return False
    r1, r2 = _ahu_ids([t1, t2], with_labels)
    return r1 == r2


@dataclass(frozen=True)
class CanonicalCode:
    """Identifies a truncated tree up to isomorphism (at equal depth cap)."""

    depth_cap: int
    digest: bytes
    exact: Optional[str] = None

    def __eq__(self, other):
        if not isinstance(other, CanonicalCode):
            return NotImplemented
        if self.depth_cap != other.depth_cap or self.digest != other.digest:
            return False
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return True

    def __hash__(self):
        return hash((self.depth_cap, self.digest))


def canonical_code(t: TruncTree, exact: bool = False) -> CanonicalCode:
    """Recursive sorted-multiset code; exact=True also keeps the full string."""
    if t.empty:
        return CanonicalCode(t.depth_cap, b"empty", "()" if exact else None)
    cap = t.depth_cap
    digests = [b""] * t.layer_sizes()[cap]
    strings = [""] * t.layer_sizes()[cap] if exact else None
    leaf = hashlib.blake2b(b"()", digest_size=16).digest()
    digests = [leaf] * len(digests)
    if exact:
        strings = ["()"] * len(strings)
    for d in range(cap - 1, -1, -1):
        sizes = t.layer_sizes()
        buckets: list[list[bytes]] = [[] for _ in range(sizes[d])]
        sbuckets = [[] for _ in range(sizes[d])] if exact else None
        for i, par in enumerate(t.parents[d]):
            buckets[par].append(digests[i])
            if exact:
                sbuckets[par].append(strings[i])
        digests = [
            hashlib.blake2b(b"(" + b"".join(sorted(ch)) + b")", digest_size=16).digest()
            for ch in buckets
        ]
        if exact:
            strings = ["(" + "".join(sorted(ch)) + ")" for ch in sbuckets]
    return CanonicalCode(cap, digests[0], strings[0] if exact else None)


def to_dot(
    t: TruncTree,
    thick_edge: Optional[Callable[[int, int, int], bool]] = None,
    show_labels: bool = False,
) -> str:
    """DOT export with depth-ranked layout.

    thick_edge(child_depth, parent_index, child_index) -> bool selects edges
    drawn with a heavy pen (the 'multiply by p' convention).
    """
    lines = ["digraph tree {", "  rankdir=TB;", "  node [shape=point];"]
    sizes = t.layer_sizes()
    for d in range(t.depth_cap + 1):
        names = []
        for i in range(sizes[d]):
            name = f"n{d}_{i}"
            names.append(name)
            if show_labels and t.labels is not None:
                lines.append(f'  {name} [shape=circle, label="{t.labels[d][i]}"];')
        if names:
            lines.append("  { rank=same; " + "; ".join(names) + "; }")
    for d in range(1, t.depth_cap + 1):
        for i, par in enumerate(t.parents[d - 1]):
            style = " [penwidth=2.5]" if thick_edge is not None and thick_edge(d, par, i) else ""
            lines.append(f"  n{d - 1}_{par} -> n{d}_{i}{style};")
    lines.append("}")
    return "\n".join(lines)
