"""Decomposition data: disjoint families, cover transforms, decomposition trees.

A DecompositionTree nests families of subsets: the root is the whole space,
each node at level i splits into at most n_i families of children that are
pairwise R_i-disjoint (families may overlap each other; the union of the
families is the node), and the leaf level is uniformly bounded.  Trees with
all arities <= 2 are the straight-decomposition special case.

Constructions here are greedy and deterministic: existence is what matters,
not optimality, and every output is re-checked by the verify module before
it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConstructionFailedError,
    InvalidInputError,
    NotACoverError,
    NotAGridError,
    NotTwoSDisjointError,
    ScaleTooSmallError,
)
from .metric import (
    FiniteMetricSpace,
    PointSubset,
    closed_set_ball,
    dist_to_set_all,
)
from .verify import (
    CoverFamily,
    lebesgue_check,
    multiplicity,
    r_disjoint_check,
    uniformly_bounded_check,
)


# ---------------------------------------------------------------------------
# decomposition trees
# ---------------------------------------------------------------------------

@dataclass
class TreeNode:
    id: int
    level: int
    members: PointSubset
    families: List[List[int]] = field(default_factory=list)  # child ids, grouped


@dataclass
class DecompositionTree:
    """Nested decomposition families with per-level arity and radius."""

    m: int
    arity: Tuple[int, ...]   # n_1 .. n_{m-1}
    radii: Tuple[float, ...]  # R_1 .. R_{m-1}
    nodes: List[TreeNode]

    def __post_init__(self):
        self.arity = tuple(int(a) for a in self.arity)
        self.radii = tuple(float(r) for r in self.radii)
        if len(self.arity) != self.m - 1 or len(self.radii) != self.m - 1:
            raise InvalidInputError(
                f"tree of depth {self.m} needs {self.m - 1} arities and radii"
            )

    def node(self, node_id: int) -> TreeNode:
        return self._index()[node_id]

    def _index(self) -> Dict[int, TreeNode]:
        if not hasattr(self, "_node_index"):
            self._node_index = {nd.id: nd for nd in self.nodes}
        return self._node_index

    @property
    def root(self) -> TreeNode:
        roots = [nd for nd in self.nodes if nd.level == 1]
        if len(roots) != 1:
            raise InvalidInputError(f"tree has {len(roots)} level-1 nodes, expected 1")
        return roots[0]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "arity": list(self.arity),
            "radii": list(self.radii),
            "nodes": [
                {
                    "id": nd.id,
                    "level": nd.level,
                    "members": list(nd.members.ids),
                    "families": [list(fam) for fam in nd.families],
                }
                for nd in self.nodes
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DecompositionTree":
        nodes = [
            TreeNode(
                id=int(nd["id"]),
                level=int(nd["level"]),
                members=PointSubset(tuple(nd["members"])),
                families=[[int(c) for c in fam] for fam in nd.get("families", [])],
            )
            for nd in obj["nodes"]
        ]
        return cls(m=int(obj["m"]), arity=tuple(obj.get("arity", [])),
                   radii=tuple(obj.get("radii", [])), nodes=nodes)


@dataclass
class TreeValidation:
    passed: bool
    failed_clause: Optional[str]  # "structure" | "1" | "2" | "3"
    witness: Optional[str]
    leaf_bound: Optional[float]  # K, the tight uniform bound of the leaf level
    sfdc: bool

    def to_json(self) -> dict:
        return {
            "check": "tree_validate",
            "pass": self.passed,
            "failed_clause": self.failed_clause,
            "witness": self.witness,
            "leaf_bound": self.leaf_bound,
            "sfdc": self.sfdc,
        }


def tree_validate(space: FiniteMetricSpace, tree: DecompositionTree) -> TreeValidation:
    """Re-establish the decomposition-tree clauses by direct computation.

    Checks, in order: structural consistency (ids, levels, parent/child
    wiring), clause 1 (the root is the whole space), clause 2 per interior
    node (at most n_i families, each R_i-disjoint, their union equal to the
    node), and clause 3 (the leaf level is uniformly bounded; its tight bound
    is reported).  Failures are reported, not raised.
    """
    sfdc = all(a <= 2 for a in tree.arity)

    def fail(clause, witness):
        return TreeValidation(False, clause, witness, None, sfdc)

    ids = [nd.id for nd in tree.nodes]
    if len(set(ids)) != len(ids):
        return fail("structure", "duplicate node ids")
    index = {nd.id: nd for nd in tree.nodes}
    seen_child = set()
    for nd in tree.nodes:
        if not (1 <= nd.level <= tree.m):
            return fail("structure", f"node {nd.id} at level {nd.level}")
        if nd.level == tree.m and nd.families:
            return fail("structure", f"leaf node {nd.id} has children")
        for fam in nd.families:
            for cid in fam:
                if cid not in index:
                    return fail("structure", f"unknown child id {cid}")
                child = index[cid]
                if child.level != nd.level + 1:
                    return fail("structure",
                                f"child {cid} at level {child.level} under level {nd.level}")
                if cid in seen_child:
                    return fail("structure", f"child {cid} referenced twice")
                seen_child.add(cid)
    roots = [nd for nd in tree.nodes if nd.level == 1]
    if len(roots) != 1:
        return fail("structure", f"{len(roots)} level-1 nodes")
    for nd in tree.nodes:
        if nd.level > 1 and nd.id not in seen_child:
            return fail("structure", f"node {nd.id} is unreachable")

    root = roots[0]
    if root.members.ids != tuple(range(space.n)):
        missing = sorted(set(range(space.n)) - set(root.members.ids))
        return fail("1", f"root misses point {missing[0]}" if missing else "root has extra points")

    for nd in sorted(tree.nodes, key=lambda x: x.id):
        if nd.level >= tree.m:
            continue
        i = nd.level
        n_i, r_i = tree.arity[i - 1], tree.radii[i - 1]
        if len(nd.families) > n_i:
            return fail("2", f"node {nd.id} has {len(nd.families)} families > n_{i}={n_i}")
        union = set()
        for k, fam in enumerate(nd.families):
            if not fam:
                return fail("2", f"node {nd.id} family {k} is empty")
            members = [index[cid].members for cid in fam]
            rep = r_disjoint_check(space, members, r_i)
            if not rep.passed:
                x, y, s, t = rep.witness
                return fail("2",
                            f"node {nd.id} family {k}: d({x},{y})={rep.min_cross:g} <= R_{i}={r_i:g}")
            for m_ in members:
                union.update(m_.ids)
        if union != set(nd.members.ids):
            diff = sorted(set(nd.members.ids) ^ union)
            return fail("2", f"node {nd.id}: families do not union to the node (point {diff[0]})")

    leaves = [nd for nd in tree.nodes if nd.level == tree.m]
    if not leaves:
        return fail("3", "no leaf level")
    bound_rep = uniformly_bounded_check(space, [nd.members for nd in leaves])
    return TreeValidation(True, None, None, bound_rep.bound, sfdc)


# ---------------------------------------------------------------------------
# greedy decomposition at one scale
# ---------------------------------------------------------------------------

def greedy_decomposition(space: FiniteMetricSpace, R: float,
                         target_diam: float) -> List[List[PointSubset]]:
    """R-disjoint uniformly bounded families covering the space, greedily.

    Pieces come from ball carving (the smallest uncovered id claims every
    uncovered point within target_diam/2, so piece diameters stay at most
    target_diam), then pieces are colored greedily in ascending id order on
    the conflict graph whose edges join pieces at cross-distance <= R.  One
    family per color.  Both output properties are re-checked before return.
    """
    if target_diam <= 0:
        raise InvalidInputError(f"target_diam must be > 0, got {target_diam!r}")
    uncovered = np.ones(space.n, dtype=bool)
    pieces: List[PointSubset] = []
    radius = target_diam / 2.0
    while uncovered.any():
        seed = int(np.flatnonzero(uncovered)[0])
        row = space.row(seed)
        claim = np.flatnonzero(uncovered & (row <= radius))
        pieces.append(PointSubset(tuple(int(x) for x in claim)))
        uncovered[claim] = False

    # dist-to-piece rows power both the conflict tests and the assertions
    dists = np.stack([dist_to_set_all(space, p) for p in pieces])
    npieces = len(pieces)
    colors = np.full(npieces, -1, dtype=int)
    for p in range(npieces):
        used = set()
        for q in range(p):
            if float(dists[q][pieces[p].array()].min()) <= R:
                used.add(int(colors[q]))
        c = 0
        while c in used:
            c += 1
        colors[p] = c
    ncolors = int(colors.max()) + 1 if npieces else 0
    families = [[pieces[p] for p in range(npieces) if colors[p] == c]
                for c in range(ncolors)]

    for fam in families:
        rep = r_disjoint_check(space, fam, R)
        if not rep.passed:
            raise ConstructionFailedError(
                f"greedy family not {R}-disjoint", rep.to_json())
    bound = uniformly_bounded_check(space, pieces)
    if bound.bound > target_diam + 1e-9:
        raise ConstructionFailedError(
            f"piece diameter {bound.bound} exceeds target {target_diam}",
            bound.to_json())
    return families


# ---------------------------------------------------------------------------
# point-finite cover transform
# ---------------------------------------------------------------------------

def point_finite_transform(space: FiniteMetricSpace, levels: Sequence[Sequence[PointSubset]],
                     s: float) -> CoverFamily:
    """From 2s-disjoint levels that jointly cover, build a point-finite cover.

    Each member U at level k is trimmed to U' by removing the closed
    s-neighborhoods of all earlier-level members, then enlarged back to
    U* = {x : dist(x, U') <= s}.  The closed enlargement keeps the s-ball
    around U' inside U*, which is what the open-ball Lebesgue check needs.

    Guarantees are verified post-hoc: the output covers the space, has
    Lebesgue number >= s, is uniformly bounded by the input bound plus 2s,
    and has multiplicity at most the level count (at most one member per
    level up to the first level containing the point).
    """
    if s <= 0:
        raise InvalidInputError(f"scale s must be > 0, got {s!r}")
    levels = [list(level) for level in levels]
    covered = np.zeros(space.n, dtype=bool)
    for k, level in enumerate(levels):
        rep = r_disjoint_check(space, level, 2 * s)
        if not rep.passed:
            raise NotTwoSDisjointError(k, rep.witness)
        for member in level:
            covered[member.array()] = True
    if not covered.all():
        raise NotACoverError(int(np.flatnonzero(~covered)[0]))

    input_bound = uniformly_bounded_check(
        space, [m for level in levels for m in level]).bound

    removed = np.zeros(space.n, dtype=bool)
    out_members: List[PointSubset] = []
    for level in levels:
        enlarged_this_level = []
        for member in level:
            trimmed = [x for x in member.ids if not removed[x]]
            if trimmed:
                star = closed_set_ball(space, PointSubset(tuple(trimmed)), s)
                out_members.append(star)
            ball = dist_to_set_all(space, member) <= s
            enlarged_this_level.append(ball)
        for ball in enlarged_this_level:
            removed |= ball

    family = CoverFamily(tuple(out_members), claimed_bound=input_bound + 2 * s)

    masks_cover = np.zeros(space.n, dtype=bool)
    for member in out_members:
        masks_cover[member.array()] = True
    if not masks_cover.all():
        raise ConstructionFailedError(
            f"transform output does not cover point "
            f"{int(np.flatnonzero(~masks_cover)[0])}")
    leb = lebesgue_check(space, family, s)
    if not leb.passed:
        raise ConstructionFailedError(
            f"transform output has Lebesgue number < {s} at point {leb.witness_point}",
            leb.to_json())
    mult = multiplicity(space, family)
    if mult.maximum > len(levels):
        raise ConstructionFailedError(
            f"multiplicity {mult.maximum} exceeds level count {len(levels)}",
            mult.to_json())
    bound = uniformly_bounded_check(space, family)
    if bound.bound > input_bound + 2 * s + 1e-9:
        raise ConstructionFailedError(
            f"output bound {bound.bound} exceeds {input_bound} + 2s",
            bound.to_json())
    return family


def net_ball_levels(space: FiniteMetricSpace, net: Sequence[int],
                    r: float) -> List[List[PointSubset]]:
    """Closed r-balls around net points, one singleton family per ball.

    A net whose closed r-balls cover the space yields infinitely-disjoint
    singleton levels, the canonical well-formed input for the cover
    transform at any scale.
    """
    levels = []
    for x in net:
        ball = closed_set_ball(space, PointSubset((int(x),)), r)
        levels.append([ball])
    covered = np.zeros(space.n, dtype=bool)
    for level in levels:
        covered[level[0].array()] = True
    if not covered.all():
        raise NotACoverError(int(np.flatnonzero(~covered)[0]))
    return levels


# ---------------------------------------------------------------------------
# brick decompositions for grid-like spaces
# ---------------------------------------------------------------------------

def _grid_shape(space: FiniteMetricSpace):
    shape = space.meta.get("grid_shape")
    if not shape or len(shape) not in (1, 2):
        raise NotAGridError(
            "space was not generated as a 1- or 2-dimensional grid box")
    return tuple(int(s) for s in shape)


def brick_tree(space: FiniteMetricSpace, R_schedule: Sequence[float],
               block_scale: float) -> DecompositionTree:
    """Depth-2 decomposition tree of interval blocks (1-d) or bricks (2-d).

    1-d: consecutive blocks of int(block_scale) points, alternating between
    two families; same-family blocks sit one block apart, so the gap is
    block_scale + 1 and block_scale must exceed R_1.

    2-d: square bricks of side int(block_scale) in rows staggered by half a
    brick, cyclically assigned to three families; the binding same-family
    gap is side/2 + 2, which must exceed R_1.

    A space whose diameter is at most block_scale gets the trivial depth-1
    tree (the root itself is the bounded level).
    """
    shape = _grid_shape(space)
    if block_scale < 1:
        raise ScaleTooSmallError(f"block_scale must be >= 1, got {block_scale!r}")
    if space.diameter() <= block_scale:
        root = TreeNode(id=0, level=1, members=space.all_points())
        return DecompositionTree(m=1, arity=(), radii=(), nodes=[root])
    if not R_schedule:
        raise InvalidInputError("depth-2 brick tree needs R_schedule[0]")
    r1 = float(R_schedule[0])

    if len(shape) == 1:
        b = int(math.floor(block_scale))
        if b <= r1:
            raise ScaleTooSmallError(
                f"block_scale {block_scale!r} <= R_1 {r1!r}: families cannot "
                f"stay R_1-disjoint while covering")
        n = shape[0]
        blocks = [PointSubset(tuple(range(lo, min(lo + b, n))))
                  for lo in range(0, n, b)]
        fam_a = [i for i in range(len(blocks)) if i % 2 == 0]
        fam_b = [i for i in range(len(blocks)) if i % 2 == 1]
        families = [f for f in (fam_a, fam_b) if f]
        nodes = [TreeNode(id=0, level=1, members=space.all_points())]
        for i, blk in enumerate(blocks):
            nodes.append(TreeNode(id=i + 1, level=2, members=blk))
        nodes[0].families = [[i + 1 for i in fam] for fam in families]
        tree = DecompositionTree(m=2, arity=(2,), radii=(r1,), nodes=nodes)
    else:
        w, h = shape
        b = int(math.floor(block_scale))
        if b // 2 + 2 <= r1:
            raise ScaleTooSmallError(
                f"block_scale {block_scale!r} too small for R_1 {r1!r}: "
                f"same-family brick gap {b // 2 + 2} would not exceed R_1")
        sigma = b // 2
        bricks: Dict[int, List[int]] = {0: [], 1: [], 2: []}
        brick_sets: List[Tuple[int, PointSubset]] = []
        for t in range((h + b - 1) // b):
            y_lo, y_hi = t * b, min((t + 1) * b, h)
            j_lo = -((sigma * t) // b + 1)
            j_hi = (w - sigma * t) // b + 1
            for j in range(j_lo, j_hi + 1):
                x_lo = max(0, j * b + sigma * t)
                x_hi = min(w, (j + 1) * b + sigma * t)
                if x_lo >= x_hi:
                    continue
                ids = tuple(x * h + y
                            for x in range(x_lo, x_hi)
                            for y in range(y_lo, y_hi))
                brick_sets.append(((j + 2 * t) % 3, PointSubset(ids)))
        nodes = [TreeNode(id=0, level=1, members=space.all_points())]
        for i, (color, blk) in enumerate(brick_sets):
            nodes.append(TreeNode(id=i + 1, level=2, members=blk))
            bricks[color].append(i + 1)
        families = [bricks[c] for c in range(3) if bricks[c]]
        nodes[0].families = families
        tree = DecompositionTree(m=2, arity=(3,), radii=(r1,), nodes=nodes)

    check = tree_validate(space, tree)
    if not check.passed:
        raise ConstructionFailedError(
            f"brick tree failed validation: clause {check.failed_clause}, "
            f"{check.witness}", check.to_json())
    return tree
