"""Recursive bifurcation into a binary hierarchy."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import HOMOGENEOUS, EtsmConfig, _step, iterate
from .dataset import Dataset
from .errors import DichotomyViolationError, ParseError, ValidationError
from .similarity import DISSIMILARITY, SimilarityMatrix, dataset_matrix

TREE_SCHEMA = "etsm-tree"
TREE_SCHEMA_VERSION = 1


class NodeGeometry(NamedTuple):
    branch_length: float
    angle_deg: float


def node_geometry(t_used: int, omega: float) -> NodeGeometry:
    """Branch length ``ln T`` and the angle ``arccos(exp(omega - 1))`` in degrees."""
    branch = math.log(max(int(t_used), 1))
    cosine = min(1.0, abs(-math.exp(omega - 1.0)))
    return NodeGeometry(branch, math.degrees(math.acos(cosine)))


@dataclass(frozen=True, eq=False)
class HierarchyNode:
    members: tuple
    children: tuple = ()
    t_used: int = 0
    omega: float = 1.0
    branch_length: float = 0.0
    angle_deg: float = 0.0
    labels: tuple = field(default=(), repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def member_labels(self) -> tuple:
        return tuple(self.labels[i] for i in self.members)

    def walk(self):
        """Preorder traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list:
        return [node for node in self.walk() if node.is_leaf]

    def internal_nodes(self) -> list:
        return [node for node in self.walk() if not node.is_leaf]

    def leaf_order(self) -> list:
        """Object indices in left-to-right leaf order."""
        return [i for leaf in self.leaves() for i in leaf.members]

    def leaf_signature(self) -> frozenset:
        return frozenset(frozenset(leaf.member_labels) for leaf in self.leaves())

    def clades(self) -> set:
        """Member-label sets of every node."""
        return {frozenset(node.member_labels) for node in self.walk()}

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(child.depth() for child in self.children)


def _leaf(members, labels) -> HierarchyNode:
    return HierarchyNode(tuple(members), (), 0, 1.0, 0.0, 0.0, labels)


@dataclass(frozen=True)
class _Split:
    t_used: int
    omega: float
    sides: tuple  # empty for leaves


def _split_cluster(base: SimilarityMatrix, members: tuple, config: EtsmConfig) -> _Split:
    n = len(members)
    if n == 1:
        return _Split(0, 1.0, ())
    sub = base.entries[np.ix_(members, members)]
    if base.kind is DISSIMILARITY:
        off = sub[~np.eye(n, dtype=bool)]
        homogeneous = off.max() <= config.homogeneity_tol
    else:
        homogeneous = sub.min() >= 1 - config.homogeneity_tol
    if homogeneous:
        return _Split(0, 1.0, ())
    if n == 2:
        # a 2x2 matrix is a fixed point of the transform; one step gives omega
        mode = "AM" if base.kind is DISSIMILARITY else config.mean_mode
        omega = float(_step(sub, mode)[0, 1])
        return _Split(1, omega, ((members[0],), (members[1],)))
    matrix = SimilarityMatrix(sub, base.kind, [base.labels[i] for i in members])
    try:
        outcome = iterate(matrix, config)
    except DichotomyViolationError as exc:
        ids = [base.labels[i] for i in members]
        raise DichotomyViolationError(f"cluster {ids}: {exc}", n_components=exc.n_components,
                                      histogram=exc.histogram, t_used=exc.t_used,
                                      max_delta=exc.max_delta, members=ids) from None
    if outcome.partition is HOMOGENEOUS:
        return _Split(0, 1.0, ())
    left = tuple(members[i] for i in outcome.partition.left)
    right = tuple(members[i] for i in outcome.partition.right)
    return _Split(outcome.t_used, outcome.omega, (left, right))


def build_hierarchy(source, config: EtsmConfig = EtsmConfig(), threads: int = 1) -> HierarchyNode:
    """Build the full binary tree by repeated two-way splitting.

    Parameters
    ----------
    source : Dataset or SimilarityMatrix
        Datasets are turned into a hybrid R/XR similarity matrix, or a
        Euclidean distance matrix when their parameters are coordinates.
    config : EtsmConfig
    threads : int
        Clusters on the same tree level are independent; more than one thread
        processes them concurrently.

    Every cluster is iterated on its own submatrix of the input matrix. Since
    input entries depend only on the two objects involved, this equals
    recomputing the matrix from the members' original data.
    """
    base = dataset_matrix(source) if isinstance(source, Dataset) else source
    if not isinstance(base, SimilarityMatrix):
        raise ValidationError("build_hierarchy needs a Dataset or a SimilarityMatrix")
    splits = {}
    frontier = [tuple(range(base.n))]
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while frontier:
            if pool is None:
                results = [_split_cluster(base, c, config) for c in frontier]
            else:
                results = list(pool.map(lambda c: _split_cluster(base, c, config), frontier))
            next_frontier = []
            for cluster, result in zip(frontier, results):
                splits[cluster] = result
                next_frontier.extend(result.sides)
            frontier = next_frontier
    finally:
        if pool is not None:
            pool.shutdown()

    def assemble(cluster):
        result = splits[cluster]
        if not result.sides:
            return _leaf(cluster, base.labels)
        kids = sorted((assemble(side) for side in result.sides), key=lambda c: min(c.members))
        geom = node_geometry(result.t_used, result.omega)
        return HierarchyNode(tuple(sorted(cluster)), tuple(kids), result.t_used, result.omega,
                             geom.branch_length, geom.angle_deg, base.labels)

    return assemble(tuple(range(base.n)))


def cophenetic_depth(tree: HierarchyNode) -> np.ndarray:
    """Number of splits from the root until two objects are separated.

    Pairs that end up in the same leaf, and the diagonal, get the sentinel
    value ``n``.
    """
    n = len(tree.labels) if tree.labels else max(tree.members) + 1
    out = np.full((n, n), n, dtype=int)
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        if node.is_leaf:
            continue
        left, right = node.children
        li, ri = np.array(left.members), np.array(right.members)
        out[np.ix_(li, ri)] = depth + 1
        out[np.ix_(ri, li)] = depth + 1
        stack.extend((child, depth + 1) for child in node.children)
    return out


def _round(x: float, digits: int = 12) -> float:
    return float(f"{x:.{digits}g}")


def _node_dict(node: HierarchyNode) -> dict:
    return {
        "members": list(node.member_labels),
        "t_used": node.t_used,
        "omega": _round(node.omega),
        "branch_length": _round(node.branch_length),
        "angle_deg": _round(node.angle_deg),
        "children": [_node_dict(c) for c in node.children],
    }


def tree_to_dict(tree: HierarchyNode) -> dict:
    return {"schema": TREE_SCHEMA, "version": TREE_SCHEMA_VERSION,
            "labels": list(tree.labels), "root": _node_dict(tree)}


def tree_to_json(tree: HierarchyNode, indent: int | None = 1) -> str:
    return json.dumps(tree_to_dict(tree), indent=indent) + "\n"


def tree_from_dict(data: dict) -> HierarchyNode:
    if data.get("schema") != TREE_SCHEMA:
        raise ParseError(f"not a tree document (schema {data.get('schema')!r})")
    if data.get("version") != TREE_SCHEMA_VERSION:
        raise ParseError(f"unsupported tree schema version {data.get('version')!r}")
    labels = tuple(str(x) for x in data["labels"])
    index = {label: i for i, label in enumerate(labels)}

    def build(d):
        try:
            members = tuple(sorted(index[m] for m in d["members"]))
        except KeyError as exc:
            raise ParseError(f"unknown member {exc.args[0]!r} in tree document") from None
        kids = tuple(build(c) for c in d.get("children", []))
        if kids and (len(kids) != 2 or sorted(kids[0].members + kids[1].members) != list(members)):
            raise ParseError(f"children of node {d['members']} do not split it in two")
        return HierarchyNode(members, kids, int(d["t_used"]), float(d["omega"]),
                             float(d["branch_length"]), float(d["angle_deg"]), labels)

    return build(data["root"])


def tree_from_json(text: str) -> HierarchyNode:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid tree JSON: {exc}") from None
    return tree_from_dict(data)
