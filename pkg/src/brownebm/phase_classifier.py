"""Energy-gap class tree and 0-1 association rules.

Rows are ordered by energy and split recursively at the largest gap between
successive sorted energies. Each leaf becomes a rule: a 0-1 feature pattern,
the leaf's energy interval, and 0-1 prediction bits.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .ebm import EbmModel, ebm_energies, ebm_energy
from .series_io import format_float

MAX_DEFAULT_K = 2**20


class RuleFormatError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class GapSplit(NamedTuple):
    threshold: float
    gap: float
    boundary: int  # number of sorted energies on the low side


def max_gap_split(energies) -> GapSplit | None:
    """Midpoint of the largest successive gap; ``None`` when all energies are equal.

    Ties go to the lowest boundary.
    """
    e = np.sort(np.asarray(energies, dtype=float))
    if e.shape[0] < 2:
        raise ValueError("max_gap_split needs at least 2 energies")
    gaps = np.diff(e)
    i = int(np.argmax(gaps))
    if gaps[i] <= 0.0:
        return None
    return GapSplit(threshold=(e[i] + e[i + 1]) / 2.0, gap=float(gaps[i]), boundary=i + 1)


def target_class_count(s: int, override: int | None = None) -> int:
    if s < 1:
        raise ValueError(f"feature count must be >= 1, got {s}")
    if override is not None:
        if override < 1:
            raise ValueError(f"class count override must be >= 1, got {override}")
        return int(override)
    return min(2**s, MAX_DEFAULT_K)


@dataclass
class TreeNode:
    members: np.ndarray  # row indices, ascending energy order
    lo: float
    hi: float
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    class_id: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class ClassTree:
    root: TreeNode
    energies: np.ndarray
    leaves: list[TreeNode] = field(default_factory=list)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def leaf_of(self, row_index: int) -> TreeNode:
        for leaf in self.leaves:
            if row_index in leaf.members:
                return leaf
        raise KeyError(row_index)


def _node(members: np.ndarray, energies: np.ndarray) -> TreeNode:
    return TreeNode(members=members, lo=float(energies[members[0]]), hi=float(energies[members[-1]]))


def build_tree_from_energies(energies, K: int, tau: float = 0.0) -> ClassTree:
    """Split the largest-gap leaf first until ``K`` leaves or no leaf qualifies.

    A leaf qualifies when it has two distinct energies and its largest gap is
    at least ``tau`` times the global energy range.
    """
    e = np.asarray(energies, dtype=float)
    if e.ndim != 1 or e.shape[0] < 1:
        raise ValueError("need at least one energy")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")

    order = np.argsort(e, kind="stable")
    root = _node(order, e)
    floor = tau * (e[order[-1]] - e[order[0]])

    heap: list = []
    counter = 0

    def push(node: TreeNode):
        nonlocal counter
        if node.members.shape[0] < 2:
            return
        split = max_gap_split(e[node.members])
        if split is None or split.gap < floor:
            return
        # largest gap first; among equal gaps the lower-energy leaf
        heapq.heappush(heap, (-split.gap, node.lo, counter, node, split))
        counter += 1

    push(root)
    n_leaves = 1
    while heap and n_leaves < K:
        _, _, _, node, split = heapq.heappop(heap)
        node.threshold = split.threshold
        node.left = _node(node.members[: split.boundary], e)
        node.right = _node(node.members[split.boundary:], e)
        n_leaves += 1
        push(node.left)
        push(node.right)

    leaves: list[TreeNode] = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            leaves.append(node)
        else:
            stack.extend((node.right, node.left))
    for cid, leaf in enumerate(leaves):
        leaf.class_id = cid
    e.setflags(write=False)
    return ClassTree(root=root, energies=e, leaves=leaves)


def build_tree(rows, model: EbmModel, K: int, tau: float = 0.0) -> ClassTree:
    return build_tree_from_energies(ebm_energies(model, rows), K, tau)


@dataclass(frozen=True)
class AssociationRule:
    class_id: int
    bits: str
    e_lo: float
    e_hi: float
    pred_bits: str
    support: int

    def __post_init__(self):
        if len(self.bits) != len(self.pred_bits):
            raise ValueError("bits and pred_bits must have equal length")
        if not self.e_lo <= self.e_hi:
            raise ValueError(f"empty energy range [{self.e_lo}, {self.e_hi}]")

    @property
    def midpoint(self) -> float:
        return (self.e_lo + self.e_hi) / 2.0

    def contains(self, energy: float) -> bool:
        return self.e_lo <= energy <= self.e_hi


def _bitstring(flags) -> str:
    return "".join("1" if f else "0" for f in flags)


def extract_rules(tree: ClassTree, rows) -> list[AssociationRule]:
    """One rule per leaf, binarizing each feature at its global median."""
    X = np.asarray(rows, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != tree.energies.shape[0]:
        raise ValueError(f"tree covers {tree.energies.shape[0]} rows, got {X.shape[0]}")
    median = np.median(X, axis=0)
    row_bits = X > median
    rules = []
    for leaf in tree.leaves:
        members = leaf.members
        assert members.size > 0, "empty leaf"
        bits = X[members].mean(axis=0) > median
        pred = 2 * row_bits[members].sum(axis=0) > members.size
        rules.append(
            AssociationRule(
                class_id=leaf.class_id,
                bits=_bitstring(bits),
                e_lo=leaf.lo,
                e_hi=leaf.hi,
                pred_bits=_bitstring(pred),
                support=int(members.size),
            )
        )
    return rules


def rule_for_energy(rules: list[AssociationRule], energy: float) -> AssociationRule:
    if not rules:
        raise ValueError("no rules to classify against")
    ranked = sorted(rules, key=lambda r: r.class_id)
    for rule in ranked:
        if rule.contains(energy):
            return rule
    return min(ranked, key=lambda r: abs(r.midpoint - energy))


def classify_point(rules: list[AssociationRule], model: EbmModel, row) -> AssociationRule:
    return rule_for_energy(rules, ebm_energy(model, row))


# --- rule files --------------------------------------------------------------

def render_rules(rules: list[AssociationRule]) -> str:
    return "".join(
        f"RULE,{r.class_id},{r.bits},{format_float(r.e_lo)},{format_float(r.e_hi)},{r.pred_bits},{r.support}\n"
        for r in rules
    )


def write_rules(rules: list[AssociationRule], path) -> None:
    Path(path).write_text(render_rules(rules), encoding="utf-8")


def _check_bits(s: str, what: str, lineno: int) -> str:
    if not s or set(s) - {"0", "1"}:
        raise RuleFormatError(f"{what} {s!r} is not a 0/1 string", lineno)
    return s


def parse_rules(text: str) -> list[AssociationRule]:
    rules = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 7 or fields[0] != "RULE":
            raise RuleFormatError(f"expected 7 fields starting with RULE, got {len(fields)}", lineno)
        bits = _check_bits(fields[2], "bits", lineno)
        pred = _check_bits(fields[5], "pred_bits", lineno)
        if len(bits) != len(pred):
            raise RuleFormatError("bits and pred_bits differ in length", lineno)
        try:
            class_id, support = int(fields[1]), int(fields[6])
            e_lo, e_hi = float(fields[3]), float(fields[4])
        except ValueError as exc:
            raise RuleFormatError(str(exc), lineno) from None
        if not e_lo <= e_hi:
            raise RuleFormatError(f"energy range [{e_lo}, {e_hi}] is empty", lineno)
        rules.append(AssociationRule(class_id, bits, e_lo, e_hi, pred, support))
    return rules


def read_rules(path) -> list[AssociationRule]:
    return parse_rules(Path(path).read_text(encoding="utf-8"))
