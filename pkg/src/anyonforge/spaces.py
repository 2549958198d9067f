"""Fusion-tree bases, elementary braid generators, and block regrouping.

A state space is spanned by left-comb fusion trees: leaves are absorbed one
at a time, so a tree over leaves (l1, ..., ln) is labeled by the running
internal charges m_i = charge(l1 ... li), with m_1 = l_1 and m_n equal to the
total charge.  Basis order is lexicographic in the internal-charge sequence.

Exchanging adjacent strands swaps their charge labels: when the two charges
differ, the braid generator is a unitary from the basis over (.., a, b, ..)
to the basis over (.., b, a, ..).  Callers track the current leaf ordering;
``swap_leaves`` gives the target ordering.

``regroup`` re-expresses the fine basis in trees adapted to a partition of
the strands into contiguous blocks: each basis vector gets a definite charge
per block, an internal tree per block, and a coarse tree over the block
charges.  Braiding whole blocks (``composite_braid_generator``) is the
product of elementary exchanges and, within a definite-charge sector of both
blocks, agrees with the elementary generator of the coarse system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .model import AnyonModel

__all__ = [
    "FusionTree",
    "FusionBasis",
    "StateVector",
    "Grouping",
    "GroupedLabel",
    "GroupedBasis",
    "enumerate_basis",
    "swap_leaves",
    "braid_generator",
    "inverse_braid_generator",
    "regroup",
    "composite_braid_generator",
]


@dataclass(frozen=True)
class FusionTree:
    """One left-comb fusion tree: leaf charges plus running internal charges.

    ``internals[i]`` is the total charge of ``leaves[:i+1]``; in particular
    ``internals[0] == leaves[0]`` and ``internals[-1]`` is the total.
    """

    leaves: tuple[int, ...]
    internals: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.internals[-1]


@dataclass(frozen=True)
class FusionBasis:
    """Ordered basis of fusion trees over fixed leaves and total charge."""

    k: int
    leaves: tuple[int, ...]
    total: int
    trees: tuple[FusionTree, ...]

    @property
    def dim(self) -> int:
        return len(self.trees)

    def index(self, tree: FusionTree) -> int:
        try:
            return self.trees.index(tree)
        except ValueError:
            raise KeyError(f"tree {tree} not in basis") from None


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over a FusionBasis; unit norm within 1e-12."""

    basis: FusionBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got {amps.shape}")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ValueError("state vector is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def apply(self, matrix: np.ndarray, basis: FusionBasis | None = None) -> "StateVector":
        """Apply a unitary; the result lives in ``basis`` (default: same)."""
        return StateVector(basis or self.basis, matrix @ self.amplitudes)


def enumerate_basis(model: AnyonModel, leaves: tuple[int, ...], total: int) -> FusionBasis:
    """All left-comb trees over ``leaves`` with the given total charge."""
    leaves = tuple(model.check_charge(c) for c in leaves)
    total = model.check_charge(total)
    if not leaves:
        raise ValueError("at least one leaf required")
    key = (leaves, total)
    cache = _basis_cache.setdefault(model.k, {})
    hit = cache.get(key)
    if hit is not None:
        return hit
    trees: list[FusionTree] = []
    stack = [(leaves[0],)]
    while stack:
        partial = stack.pop()
        i = len(partial)
        if i == len(leaves):
            if partial[-1] == total:
                trees.append(FusionTree(leaves, partial))
            continue
        # descending push => ascending pop => lexicographic output
        for c in reversed(model.fuse(partial[-1], leaves[i])):
            stack.append(partial + (c,))
    trees.sort(key=lambda t: t.internals)
    basis = FusionBasis(model.k, leaves, total, tuple(trees))
    cache[key] = basis
    return basis


_basis_cache: dict[int, dict] = {}
_generator_cache: dict[int, dict] = {}


def swap_leaves(leaves: tuple[int, ...], position: int) -> tuple[int, ...]:
    """Leaf ordering after exchanging strands at 1-based ``position``."""
    i = position - 1
    swapped = list(leaves)
    swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
    return tuple(swapped)


def braid_generator(model: AnyonModel, basis: FusionBasis, position: int) -> np.ndarray:
    """Counterclockwise exchange of strands ``position`` and ``position``+1.

    Returns the unitary whose columns are indexed by ``basis`` and whose rows
    are indexed by ``enumerate_basis`` over the swapped leaf ordering.  Built
    by an F-move into the definite pair channel, the R phase, and the F-move
    back with the leaves exchanged.
    """
    if not 1 <= position < len(basis.leaves):
        raise ValueError(f"position {position} outside 1..{len(basis.leaves) - 1}")
    key = (basis.leaves, basis.total, position)
    cache = _generator_cache.setdefault(model.k, {})
    hit = cache.get(key)
    if hit is not None:
        return hit
    i = position - 1
    a, b = basis.leaves[i], basis.leaves[i + 1]
    target = enumerate_basis(model, swap_leaves(basis.leaves, position), basis.total)
    matrix = np.zeros((target.dim, basis.dim), dtype=np.complex128)
    for col, tree in enumerate(basis.trees):
        prefix = tree.internals[i - 1] if i >= 1 else 0
        upper = tree.internals[i + 1] if i + 1 < len(tree.internals) else tree.total
        fwd = model.f_symbol(prefix, a, b, upper)
        back = model.f_symbol(prefix, b, a, upper)
        e = tree.internals[i]
        row_of = fwd.rows.index(e)
        for e_new_idx, e_new in enumerate(back.rows):
            amp = 0.0j
            for g_idx, g in enumerate(fwd.cols):
                amp += (
                    fwd.matrix[row_of, g_idx]
                    * model.r_symbol(a, b, g)
                    * back.matrix[e_new_idx, g_idx]
                )
            if amp == 0.0j:
                continue
            internals = list(tree.internals)
            internals[i] = e_new
            row = target.index(FusionTree(target.leaves, tuple(internals)))
            matrix[row, col] = amp
    matrix.setflags(write=False)
    cache[key] = matrix
    return matrix


def inverse_braid_generator(model: AnyonModel, basis: FusionBasis, position: int) -> np.ndarray:
    """Clockwise exchange: the adjoint of the generator taken from the
    swapped ordering back to this one."""
    swapped = enumerate_basis(model, swap_leaves(basis.leaves, position), basis.total)
    return braid_generator(model, swapped, position).conj().T


@dataclass(frozen=True)
class Grouping:
    """Partition of strand positions 1..n into contiguous ordered blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [p for block in self.blocks for p in block]
        if flat != list(range(1, len(flat) + 1)):
            raise ValueError(f"blocks must tile positions 1..n in order, got {self.blocks}")
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))

    @classmethod
    def of_sizes(cls, *sizes: int) -> "Grouping":
        blocks, start = [], 1
        for size in sizes:
            blocks.append(tuple(range(start, start + size)))
            start += size
        return cls(tuple(blocks))

    @property
    def strand_count(self) -> int:
        return sum(len(b) for b in self.blocks)

    def block_charges(self, leaves: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        """Leaf charges per block."""
        return tuple(tuple(leaves[p - 1] for p in block) for block in self.blocks)


@dataclass(frozen=True)
class GroupedLabel:
    """Label of one regrouped basis vector.

    ``block_charges[j]`` is the total charge of block j, ``coarse[j]`` the
    running charge of blocks 0..j, and ``block_internals[j]`` the internal
    comb of block j (one running charge per leaf of the block).
    """

    block_charges: tuple[int, ...]
    coarse: tuple[int, ...]
    block_internals: tuple[tuple[int, ...], ...]

    def sort_key(self):
        return (self.block_charges, self.coarse, self.block_internals)


@dataclass(frozen=True)
class GroupedBasis:
    """Ordered regrouped basis; sectors are runs of equal block charges."""

    k: int
    leaves: tuple[int, ...]
    total: int
    grouping: Grouping
    labels: tuple[GroupedLabel, ...]

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: GroupedLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label} not in basis") from None

    def sectors(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        """Map block-charge assignment -> indices of its basis vectors."""
        out: dict[tuple[int, ...], list[int]] = {}
        for i, label in enumerate(self.labels):
            out.setdefault(label.block_charges, []).append(i)
        return {key: tuple(val) for key, val in out.items()}


def _absorb(model: AnyonModel, prefix: int, block_leaves: tuple[int, ...],
            internals: tuple[int, ...], result: int) -> dict[tuple[int, ...], complex]:
    """Expand |(prefix x block-tree)^result> over comb segments.

    Returns {segment: coefficient} where segment[j] is the charge of
    prefix + block_leaves[:j+1]; segment[-1] == result always.
    """
    if len(block_leaves) == 1:
        return {(result,): 1.0 + 0.0j}
    inner_charge = internals[-2]
    last = block_leaves[-1]
    block = model.f_symbol(prefix, inner_charge, last, result)
    out: dict[tuple[int, ...], complex] = {}
    g_idx = block.cols.index(internals[-1])
    for p_idx, p in enumerate(block.rows):
        coeff = block.matrix[p_idx, g_idx]
        if coeff == 0.0:
            continue
        for segment, sub in _absorb(model, prefix, block_leaves[:-1], internals[:-1],
                                    p).items():
            out[segment + (result,)] = out.get(segment + (result,), 0.0j) + coeff * sub
    return out


def _enumerate_block_trees(model: AnyonModel, leaves: tuple[int, ...]):
    """(charge, internals) pairs for every tree over a block's leaves."""
    for total in range(model.k + 1):
        basis = enumerate_basis(model, leaves, total)
        for tree in basis.trees:
            yield total, tree.internals


def regroup(model: AnyonModel, basis: FusionBasis, grouping: Grouping
            ) -> tuple[GroupedBasis, np.ndarray]:
    """Unitary change of basis from fine comb trees to block-adapted trees.

    Returns ``(grouped, U)`` with ``U[g, f] = <grouped_g | fine_f>``; U is
    unitary, and for the all-singletons grouping it is the identity.
    """
    if grouping.strand_count != len(basis.leaves):
        raise ValueError(
            f"grouping covers {grouping.strand_count} strands, basis has {len(basis.leaves)}"
        )
    per_block = [
        sorted(set(_enumerate_block_trees(model, charges)))
        for charges in grouping.block_charges(basis.leaves)
    ]
    labels: list[GroupedLabel] = []
    for choice in product(*per_block):
        charges = tuple(c for c, _ in choice)
        coarse_seqs = [(charges[0],)]
        for c in charges[1:]:
            coarse_seqs = [
                seq + (nxt,) for seq in coarse_seqs for nxt in model.fuse(seq[-1], c)
            ]
        for coarse in coarse_seqs:
            if coarse[-1] != basis.total:
                continue
            labels.append(GroupedLabel(charges, coarse, tuple(t for _, t in choice)))
    labels.sort(key=GroupedLabel.sort_key)
    grouped = GroupedBasis(model.k, basis.leaves, basis.total, grouping, tuple(labels))

    fine_index = {tree.internals: i for i, tree in enumerate(basis.trees)}
    matrix = np.zeros((len(labels), basis.dim), dtype=np.complex128)
    block_leaf_charges = grouping.block_charges(basis.leaves)
    for row, label in enumerate(labels):
        expansions = []
        for j, block_charges in enumerate(block_leaf_charges):
            prefix = label.coarse[j - 1] if j else 0
            expansions.append(
                _absorb(model, prefix, block_charges, label.block_internals[j],
                        label.coarse[j])
            )
        for combo in product(*[e.items() for e in expansions]):
            internals = tuple(c for segment, _ in combo for c in segment)
            col = fine_index.get(internals)
            if col is None:
                continue
            amp = 1.0 + 0.0j
            for _, coeff in combo:
                amp *= coeff
            matrix[row, col] += np.conj(amp)
    matrix.setflags(write=False)
    return grouped, matrix


def composite_braid_generator(model: AnyonModel, basis: FusionBasis,
                              grouping: Grouping, position: int) -> np.ndarray:
    """Exchange of whole blocks ``position`` and ``position``+1.

    The product of elementary strand exchanges that carries every strand of
    the left block past every strand of the right block, preserving the
    order inside each block.  Columns are indexed by ``basis``, rows by the
    basis over the block-swapped leaf ordering.
    """
    if not 1 <= position < len(grouping.blocks):
        raise ValueError(f"position {position} outside 1..{len(grouping.blocks) - 1}")
    left = grouping.blocks[position - 1]
    right = grouping.blocks[position]
    start = left[0]
    matrix = np.eye(basis.dim, dtype=np.complex128)
    leaves = basis.leaves
    # rightmost strand of the left block crosses first
    for j in range(len(left) - 1, -1, -1):
        for t in range(len(right)):
            pos = start + j + t
            current = enumerate_basis(model, leaves, basis.total)
            matrix = braid_generator(model, current, pos) @ matrix
            leaves = swap_leaves(leaves, pos)
    return matrix


def swap_blocks(grouping: Grouping, position: int) -> Grouping:
    """Grouping after exchanging blocks at 1-based ``position`` (sizes swap)."""
    sizes = [len(b) for b in grouping.blocks]
    i = position - 1
    sizes[i], sizes[i + 1] = sizes[i + 1], sizes[i]
    return Grouping.of_sizes(*sizes)
