"""Braid words, weave evaluation, and exhaustive gate search.

A braid word acts on an ordered row of blocks (composite strands).  Letters
are (position, exponent) pairs, position 1-based, freely reduced.  Words are
evaluated temporally: ``letters[0]`` is applied first, so the matrix of a
concatenation is ``evaluate(w2) @ evaluate(w1)``.

The search enumerates weaves: words in which one designated mobile block
does all the moving inside an allowed span of positions.  Because composite
exchanges preserve every block's charge and act on coarse trees only
(block-internal states ride along untouched), the search tracks one small
coarse matrix per constrained charge sector and scores candidates directly
from those.  The returned braid is re-verified on the full fusion space by
an independent route (products of composite generators) before reporting.

Targets are data: each names the block system, the mobile block, and a set
of per-sector rules (pinned phases, required image columns, or exact
unitaries).  The score of a word is the worst rule deviation.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .codes import EncodingError, multi_qubit_code, single_qubit_code
from .model import AnyonModel
from .spaces import (
    Grouping,
    braid_generator,
    composite_braid_generator,
    enumerate_basis,
    inverse_braid_generator,
    regroup,
    swap_blocks,
)

__all__ = [
    "BraidWord",
    "SearchConfig",
    "SearchStats",
    "SynthesisResult",
    "SynthesisTarget",
    "PhaseRule",
    "ColumnRule",
    "MatrixRule",
    "POLICY_MUST_BE_ONE",
    "POLICY_FREE",
    "POLICY_CANCEL",
    "distance",
    "evaluate",
    "evaluate_tracked",
    "exchange_counts",
    "score_braid",
    "verify_braid_relations",
    "make_target_P",
    "make_target_B1",
    "make_target_B3",
    "make_target_E",
    "make_target_unitary",
    "search",
]

POLICY_MUST_BE_ONE = "must_be_one"
POLICY_FREE = "free"
POLICY_CANCEL = "must_cancel_with_partner"


@dataclass(frozen=True)
class BraidWord:
    """Freely reduced word in the braid group on ``strand_count`` strands."""

    strand_count: int
    letters: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.strand_count < 1:
            raise ValueError("strand_count must be positive")
        letters = tuple((int(p), int(e)) for p, e in self.letters)
        object.__setattr__(self, "letters", letters)
        prev = None
        for pos, exp in letters:
            if not 1 <= pos < self.strand_count:
                raise ValueError(f"position {pos} outside 1..{self.strand_count - 1}")
            if exp not in (1, -1):
                raise ValueError(f"exponent must be +-1, got {exp}")
            if prev == (pos, -exp):
                raise ValueError(f"word is not freely reduced at sigma_{pos}")
            prev = (pos, exp)

    @classmethod
    def reduced(cls, strand_count: int, letters) -> "BraidWord":
        """Build a word, cancelling adjacent inverse pairs."""
        out: list[tuple[int, int]] = []
        for pos, exp in letters:
            if out and out[-1] == (pos, -exp):
                out.pop()
            else:
                out.append((int(pos), int(exp)))
        return cls(strand_count, tuple(out))

    def concat(self, other: "BraidWord") -> "BraidWord":
        if other.strand_count != self.strand_count:
            raise ValueError("strand counts differ")
        return BraidWord.reduced(self.strand_count, self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.strand_count,
                         tuple((p, -e) for p, e in reversed(self.letters)))

    def permutation(self) -> tuple[int, ...]:
        """0-based original index of the strand at each final position."""
        arr = list(range(self.strand_count))
        for pos, _ in self.letters:
            i = pos - 1
            arr[i], arr[i + 1] = arr[i + 1], arr[i]
        return tuple(arr)

    def __len__(self) -> int:
        return len(self.letters)


def distance(U: np.ndarray, V: np.ndarray) -> float:
    """Global-phase-invariant gate distance sqrt(max(0, 1 - |tr(U^dag V)|/n))."""
    U = np.asarray(U)
    V = np.asarray(V)
    if U.shape != V.shape or U.shape[0] != U.shape[1]:
        raise ValueError(f"shape mismatch: {U.shape} vs {V.shape}")
    n = U.shape[0]
    return float(np.sqrt(max(0.0, 1.0 - abs(np.trace(U.conj().T @ V)) / n)))


def _block_swapped_leaves(leaves: tuple[int, ...], grouping: Grouping,
                          position: int) -> tuple[int, ...]:
    charges = grouping.block_charges(leaves)
    blocks = list(charges)
    i = position - 1
    blocks[i], blocks[i + 1] = blocks[i + 1], blocks[i]
    return tuple(c for block in blocks for c in block)


def evaluate_tracked(model: AnyonModel, basis, word: BraidWord,
                     grouping: Grouping | None = None):
    """Product of composite generator matrices, applied letters[0] first.

    Returns (matrix, final_leaves, final_grouping); the matrix maps the
    given basis to the basis over the final leaf arrangement.
    """
    if grouping is None:
        grouping = Grouping.of_sizes(*([1] * len(basis.leaves)))
    if word.strand_count != len(grouping.blocks):
        raise ValueError("word strand count does not match block count")
    U = np.eye(basis.dim, dtype=np.complex128)
    leaves = basis.leaves
    g = grouping
    for pos, exp in word.letters:
        cur = enumerate_basis(model, leaves, basis.total)
        if exp == 1:
            M = composite_braid_generator(model, cur, g, pos)
        else:
            new_leaves = _block_swapped_leaves(leaves, g, pos)
            new_g = swap_blocks(g, pos)
            fwd = composite_braid_generator(
                model, enumerate_basis(model, new_leaves, basis.total), new_g, pos)
            M = fwd.conj().T
        U = M @ U
        leaves = _block_swapped_leaves(leaves, g, pos)
        g = swap_blocks(g, pos)
    return U, leaves, g


def evaluate(model: AnyonModel, basis, word: BraidWord,
             grouping: Grouping | None = None) -> np.ndarray:
    """Unitary of a braid word on the given basis (see evaluate_tracked)."""
    U, _, _ = evaluate_tracked(model, basis, word, grouping)
    return U


def exchange_counts(word: BraidWord, grouping: Grouping) -> dict:
    """Signed and total crossing counts per original block pair (1-based)."""
    if word.strand_count != len(grouping.blocks):
        raise ValueError("word strand count does not match block count")
    arr = list(range(word.strand_count))
    counts: dict[tuple[int, int], dict[str, int]] = {}
    for pos, exp in word.letters:
        i = pos - 1
        a, b = arr[i], arr[i + 1]
        key = (min(a, b) + 1, max(a, b) + 1)
        entry = counts.setdefault(key, {"signed": 0, "total": 0})
        entry["signed"] += exp
        entry["total"] += 1
        arr[i], arr[i + 1] = arr[i + 1], arr[i]
    return counts


def verify_braid_relations(model: AnyonModel, leaves: tuple[int, ...]) -> float:
    """Worst braid-relation residual over every total charge of ``leaves``.

    Checks the Yang-Baxter identity s_i s_{i+1} s_i = s_{i+1} s_i s_{i+1}
    and far commutativity s_i s_j = s_j s_i for |i - j| >= 2, comparing the
    two composite unitaries in operator norm (both sides end on the same
    leaf arrangement, so the comparison is frame-free).
    """
    n = len(leaves)
    worst = 0.0
    for total in model.charges:
        basis = enumerate_basis(model, leaves, total)
        if basis.dim == 0:
            continue
        pairs = [(((i, 1), (i + 1, 1), (i, 1)), ((i + 1, 1), (i, 1), (i + 1, 1)))
                 for i in range(1, n - 1)]
        pairs += [(((i, 1), (j, 1)), ((j, 1), (i, 1)))
                  for i in range(1, n - 1) for j in range(i + 2, n)]
        for left, right in pairs:
            U1 = evaluate(model, basis, BraidWord(n, left))
            U2 = evaluate(model, basis, BraidWord(n, right))
            worst = max(worst, float(np.linalg.norm(U1 - U2, ord=2)))
    return worst


# --- targets -----------------------------------------------------------

@dataclass(frozen=True)
class PhaseRule:
    """One-dimensional sector pinned to a reference phase (or left free)."""

    sector: tuple[int, ...]
    policy: str
    reference: complex = 1.0 + 0.0j

    @property
    def scored(self) -> bool:
        return self.policy == POLICY_MUST_BE_ONE


@dataclass(frozen=True)
class ColumnRule:
    """A designated input column must land on a target direction.

    With ``exact_value`` set, the column must equal value * target entrywise;
    otherwise only the direction is constrained and the phase is free.
    """

    sector: tuple[int, ...]
    input_index: int
    target: tuple[complex, ...]
    exact_value: complex | None = None

    @property
    def scored(self) -> bool:
        return True


@dataclass(frozen=True)
class MatrixRule:
    """The whole sector must match a unitary up to global phase."""

    sector: tuple[int, ...]
    target: tuple[tuple[complex, ...], ...]

    @property
    def scored(self) -> bool:
        return True


@dataclass(frozen=True)
class SynthesisTarget:
    """A block system plus per-sector rules; plain data, process-safe."""

    kind: str
    name: str
    k: int
    leaves: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    mobile: int
    span: tuple[int, int]
    final_arrangement: tuple[int, ...]
    rules: tuple

    @property
    def grouping(self) -> Grouping:
        return Grouping(self.blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def scored_rules(self) -> tuple:
        return tuple(r for r in self.rules if r.scored)


@dataclass(frozen=True)
class SearchConfig:
    max_length: int
    tolerance: float = 1e-9
    phase_tolerance: float = 1e-9
    weave_only: bool = True
    dedup: bool = True

    def __post_init__(self):
        if self.max_length < 1:
            raise ValueError("max_length must be at least 1")
        if self.tolerance <= 0 or self.phase_tolerance <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SearchStats:
    """Per-deepening-pass accounting; one row per pass length."""

    rows: list = field(default_factory=list)  # (length, best, nodes, frontier, seconds)

    def add(self, length: int, best: float, nodes: int, frontier: int, seconds: float):
        self.rows.append((length, best, nodes, frontier, seconds))

    def row(self, length: int) -> tuple:
        for entry in self.rows:
            if entry[0] == length:
                return entry
        raise KeyError(f"no pass at length {length}")

    def nodes_at_depth(self, length: int) -> int:
        """Number of words of exactly this length visited in its pass."""
        return self.row(length)[3]


@dataclass(frozen=True)
class SynthesisResult:
    target: SynthesisTarget
    braid: BraidWord
    distance: float
    leakage: float
    converged: bool
    sector_phases: dict = field(compare=False)
    exchange_counts: dict = field(compare=False)
    stats: SearchStats = field(compare=False)


# --- target factories --------------------------------------------------

def _two_qubit_system(model: AnyonModel, charges: tuple[int, int]):
    code = multi_qubit_code(model, 2, charges)
    return code.basis.leaves, code.grouping


def _pair_sectors(a: int):
    """Block charge assignments (a, q1, q2, a) over the bit channels."""
    return [(a, q1, q2, a) for q1 in (0, 2) for q2 in (0, 2)]


def _comp_index(model: AnyonModel, sector: tuple[int, ...], a: int) -> int:
    """Index of the all-a coarse tree inside a sector's coarse basis."""
    basis = enumerate_basis(model, sector, 0)
    want = (a,) * (len(sector) - 1) + (0,)
    for i, tree in enumerate(basis.trees):
        if tree.internals == want:
            return i
    raise EncodingError(f"sector {sector} has no computational tree")


def make_target_P(model: AnyonModel, charges: tuple[int, int] = (1, 1)) -> SynthesisTarget:
    """Phase gate on the two-qubit code: -1 on |11>, +1 on the other
    computational states, free phase on the non-computational direction."""
    a, _ = charges
    leaves, grouping = _two_qubit_system(model, charges)
    rules = []
    for sector in _pair_sectors(a):
        dim = enumerate_basis(model, sector, 0).dim
        if sector[1] == 2 and sector[2] == 2:
            if dim == 1:
                rules.append(PhaseRule(sector, POLICY_MUST_BE_ONE, reference=-1.0 + 0.0j))
            else:
                comp = _comp_index(model, sector, a)
                target = tuple(1.0 + 0.0j if i == comp else 0.0j for i in range(dim))
                rules.append(ColumnRule(sector, comp, target, exact_value=-1.0 + 0.0j))
        else:
            rules.append(PhaseRule(sector, POLICY_MUST_BE_ONE))
    return SynthesisTarget(
        kind="sector_map", name="P", k=model.k, leaves=leaves,
        blocks=grouping.blocks, mobile=1, span=(1, 3),
        final_arrangement=tuple(range(len(grouping.blocks))), rules=tuple(rules))


def _aggregation_target(model: AnyonModel, charges: tuple[int, int], joined: int,
                        name: str) -> SynthesisTarget:
    """Send the |11> state onto the branch where the two middle pairs
    carry joint charge ``joined``; all other sectors stay one-dimensional
    and their phases are cancelled by the inverse braid later."""
    a, _ = charges
    leaves, grouping = _two_qubit_system(model, charges)
    sector = (a, 2, 2, a)
    basis = enumerate_basis(model, sector, 0)
    if basis.dim == 0:
        raise EncodingError(f"sector {sector} is empty for k={model.k}")
    fm = model.f_symbol(a, 2, 2, a)
    if joined not in fm.cols:
        raise EncodingError(
            f"joined charge {joined} not reachable: channels are {fm.cols}")
    col = fm.cols.index(joined)
    target = [0.0j] * basis.dim
    for r, m in enumerate(fm.rows):
        internals = (a, m, a, 0)
        for i, tree in enumerate(basis.trees):
            if tree.internals == internals:
                target[i] = complex(fm.matrix[r, col])
                break
        else:
            raise EncodingError(f"channel {m} missing from sector basis")
    comp = _comp_index(model, sector, a)
    rules = [ColumnRule(sector, comp, tuple(target), exact_value=None)]
    for other in _pair_sectors(a):
        if other != sector:
            rules.append(PhaseRule(other, POLICY_CANCEL))
    return SynthesisTarget(
        kind="sector_map", name=name, k=model.k, leaves=leaves,
        blocks=grouping.blocks, mobile=1, span=(1, 3),
        final_arrangement=tuple(range(len(grouping.blocks))), rules=tuple(rules))


def make_target_B1(model: AnyonModel, charges: tuple[int, int] = (1, 1)) -> SynthesisTarget:
    """Aggregation braid: on |11>, the joint charge of the two middle pairs
    becomes 1 (twice-spin 2)."""
    return _aggregation_target(model, charges, joined=2, name="B1")


def make_target_B3(model: AnyonModel, charges: tuple[int, int] = (1, 1)) -> SynthesisTarget:
    """Aggregation braid: on |11>, the joint charge becomes 0."""
    return _aggregation_target(model, charges, joined=0, name="B3")


def make_target_E(model: AnyonModel, charges: tuple[int, int] = (1, 1),
                  channel_in: int = 0, channel_out: int = 0) -> SynthesisTarget:
    """Anyon-exchange move joining two four-anyon registers.

    Strand layout (a1 b2 b3 | a4 | b6 b7 a8 | a5): the singleton a4 block
    weaves past the second register's three-anyon block and parks between it
    and the trailing a5, so strands 1..6 afterwards carry a six-anyon
    register while the displaced pair (a4, a5) fuses to the vacuum.  The
    input whose first register carries charge ``channel_in`` must land on
    the direction where the joined six-strand register carries
    ``channel_out`` (both 0 for charge-zero registers); every other sector
    is one-dimensional.
    """
    a, b = charges
    leaves = (a, b, b, a, b, b, a, a)
    grouping = Grouping.of_sizes(3, 1, 3, 1)
    sector = (a, a, a, a)
    basis = enumerate_basis(model, sector, 0)

    def channel_tree(channel: int) -> int:
        want = (a, channel, a, 0)
        for i, tree in enumerate(basis.trees):
            if tree.internals == want:
                return i
        raise EncodingError(f"no channel-{channel} tree in sector {sector}")

    idx_in = channel_tree(channel_in)
    idx_out = channel_tree(channel_out)
    target = tuple(1.0 + 0.0j if i == idx_out else 0.0j for i in range(basis.dim))
    rules = (ColumnRule(sector, idx_in, target, exact_value=None),)
    return SynthesisTarget(
        kind="sector_map", name="E", k=model.k, leaves=leaves,
        blocks=grouping.blocks, mobile=2, span=(2, 4),
        final_arrangement=(0, 2, 1, 3), rules=rules)


def make_target_unitary(model: AnyonModel, matrix: np.ndarray,
                        charges: tuple[int, int] = (1, 1),
                        name: str = "U") -> SynthesisTarget:
    """Exact single-qubit unitary (up to global phase) on the 4-anyon code,
    woven by the leftmost anyon moving through the two middle ones."""
    code = single_qubit_code(model, charges=charges)
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (2, 2):
        raise ValueError("single-qubit target must be 2x2")
    if not np.allclose(matrix.conj().T @ matrix, np.eye(2), atol=1e-12):
        raise ValueError("target is not unitary within 1e-12")
    rows = [index for _, index in code.computational]
    frame = code.transform[rows, :]
    coarse_target = frame.conj().T @ matrix @ frame
    target = tuple(tuple(complex(z) for z in row) for row in coarse_target)
    rules = (MatrixRule(code.basis.leaves, target),)
    return SynthesisTarget(
        kind="exact_unitary", name=name, k=model.k, leaves=code.basis.leaves,
        blocks=Grouping.of_sizes(1, 1, 1, 1).blocks, mobile=1, span=(1, 3),
        final_arrangement=(0, 1, 2, 3), rules=rules)


# --- search core -------------------------------------------------------

def _flat(matrix: np.ndarray) -> tuple:
    return tuple(complex(z) for z in np.asarray(matrix).ravel())


def _flat_mul(G: tuple, M: tuple, n: int) -> tuple:
    if n == 1:
        return (G[0] * M[0],)
    if n == 2:
        a, b, c, d = G
        e, f, g, h = M
        return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    out = []
    for i in range(n):
        for j in range(n):
            acc = 0.0j
            for t in range(n):
                acc += G[i * n + t] * M[t * n + j]
            out.append(acc)
    return tuple(out)


def _rule_deviation(rule, M: tuple, n: int) -> float:
    """Deviation of one flat sector matrix from one rule."""
    if isinstance(rule, PhaseRule):
        return abs(M[0] - rule.reference)
    if isinstance(rule, ColumnRule):
        col = [M[i * n + rule.input_index] for i in range(n)]
        if rule.exact_value is not None:
            return sum(abs(col[i] - rule.exact_value * rule.target[i]) ** 2
                       for i in range(n)) ** 0.5
        return _column_leak(rule, col)
    tr = 0.0j
    for i in range(n):
        for j in range(n):
            tr += M[i * n + j].conjugate() * rule.target[i][j]
    return max(0.0, 1.0 - abs(tr) / n) ** 0.5


def _column_leak(rule: ColumnRule, col) -> float:
    """Norm of the column component orthogonal to the target direction."""
    total = sum(abs(z) ** 2 for z in col)
    along = abs(sum(rule.target[i].conjugate() * col[i] for i in range(len(col))))
    return max(0.0, total - along * along) ** 0.5


class _Problem:
    """Per-worker search context: sector tracking and move generation."""

    def __init__(self, model: AnyonModel, target: SynthesisTarget, config: SearchConfig):
        self.model = model
        self.target = target
        self.config = config
        self.block_count = target.block_count
        self.initial_arr = tuple(range(self.block_count))
        self.final_arr = target.final_arrangement
        self.mobile = target.mobile - 1
        scored = target.scored_rules()
        self.sectors = tuple(sorted({r.sector for r in scored}))
        sector_pos = {s: i for i, s in enumerate(self.sectors)}
        self.dims = tuple(enumerate_basis(model, s, 0).dim for s in self.sectors)
        self.rules = tuple((rule, sector_pos[rule.sector]) for rule in scored)
        self.initial_state = tuple(_flat(np.eye(d)) for d in self.dims)
        self._transitions: dict = {}

    def moves(self, pos: int):
        """Canonical-order letters available to the mobile block at ``pos``."""
        lo, hi = self.target.span
        out = []
        if pos > lo:
            out.append((pos - 1, 1))
            out.append((pos - 1, -1))
        if pos < hi:
            out.append((pos, 1))
            out.append((pos, -1))
        return out

    def all_moves(self):
        out = []
        for p in range(1, self.block_count):
            out.append((p, 1))
            out.append((p, -1))
        return out

    def transition(self, arr: tuple, pos: int, exp: int):
        key = (arr, pos, exp)
        hit = self._transitions.get(key)
        if hit is not None:
            return hit
        i = pos - 1
        new_arr = arr[:i] + (arr[i + 1], arr[i]) + arr[i + 2:]
        gens = []
        for sector in self.sectors:
            charges = tuple(sector[b] for b in arr)
            basis = enumerate_basis(self.model, charges, 0)
            if exp == 1:
                G = braid_generator(self.model, basis, pos)
            else:
                G = inverse_braid_generator(self.model, basis, pos)
            gens.append(_flat(G))
        entry = (new_arr, tuple(gens))
        self._transitions[key] = entry
        return entry

    def score(self, state: tuple, cap: float | None = None) -> float | None:
        """Worst rule deviation; None once it provably exceeds ``cap``."""
        worst = 0.0
        for rule, si in self.rules:
            dev = _rule_deviation(rule, state[si], self.dims[si])
            if dev > worst:
                worst = dev
                if cap is not None and worst > cap:
                    return None
        return worst

    def deviations(self, state: tuple) -> list:
        return [(rule, _rule_deviation(rule, state[si], self.dims[si]))
                for rule, si in self.rules]


def _quantize(arr: tuple, state: tuple) -> tuple:
    parts = [arr]
    for M in state:
        parts.append(tuple((round(z.real, 12), round(z.imag, 12)) for z in M))
    return tuple(parts)


def _letter_key(letters) -> tuple:
    return tuple((p, 0 if e == 1 else 1) for p, e in letters)


class _Best:
    __slots__ = ("score", "length", "letters")

    def __init__(self):
        self.score = float("inf")
        self.length = -1
        self.letters = ()

    def offer(self, score: float, letters: tuple) -> None:
        if self.length < 0:
            self.score, self.length, self.letters = score, len(letters), tuple(letters)
            return
        cand = (score, len(letters), _letter_key(letters))
        cur = (self.score, self.length, _letter_key(self.letters))
        if cand < cur:
            self.score, self.length, self.letters = score, len(letters), tuple(letters)


def _enumerate_prefixes(problem: _Problem, depth: int) -> list:
    """All freely reduced words of exactly ``depth`` letters, in lex order."""
    out: list[tuple] = []
    weave = problem.config.weave_only

    def walk(arr, pos, letters, last):
        if len(letters) == depth:
            out.append(letters)
            return
        for p, e in (problem.moves(pos) if weave else problem.all_moves()):
            if last == (p, -e):
                continue
            i = p - 1
            new_arr = arr[:i] + (arr[i + 1], arr[i]) + arr[i + 2:]
            new_pos = (p if pos == p + 1 else p + 1) if weave else pos
            walk(new_arr, new_pos, letters + ((p, e),), (p, e))

    walk(problem.initial_arr, problem.mobile + 1, (), None)
    return out


def _replay(problem: _Problem, letters: tuple):
    arr = problem.initial_arr
    state = problem.initial_state
    for p, e in letters:
        arr, gens = problem.transition(arr, p, e)
        state = tuple(_flat_mul(g, m, n)
                      for g, m, n in zip(gens, state, problem.dims))
    pos = arr.index(problem.mobile) + 1
    return arr, pos, state


def _worker_job(k: int, target: SynthesisTarget, config: SearchConfig,
                worker: int, worker_count: int, prefix_depth: int):
    """Explore this worker's share of the prefix forest.

    The forest is the set of freely reduced words split at ``prefix_depth``:
    worker 0 owns all shorter words (the stub), and the depth-exact prefixes
    are dealt round-robin.  Every pass of the deepening loop walks the same
    node set a single-worker run would, so node counts and results are
    identical for any worker count.
    """
    model = AnyonModel(k)
    problem = _Problem(model, target, config)
    best = _Best()
    rows = []

    prefixes = _enumerate_prefixes(problem, prefix_depth)
    mine = prefixes[worker::worker_count]
    weave = config.weave_only

    if worker == 0 and problem.initial_arr == problem.final_arr:
        best.offer(problem.score(problem.initial_state), ())

    for limit in range(1, config.max_length + 1):
        t0 = time.perf_counter()
        nodes = 0
        frontier = 0

        def explore(arr, pos, state, letters, last, depth, depth_cap, seen):
            nonlocal nodes, frontier
            for p, e in (problem.moves(pos) if weave else problem.all_moves()):
                if last == (p, -e):
                    continue
                new_arr, gens = problem.transition(arr, p, e)
                new_state = tuple(
                    _flat_mul(g, m, n)
                    for g, m, n in zip(gens, state, problem.dims))
                nodes += 1
                new_depth = depth + 1
                if new_depth == limit:
                    frontier += 1
                new_letters = letters + ((p, e),)
                if new_arr == problem.final_arr:
                    score = problem.score(new_state, cap=best.score)
                    if score is not None:
                        best.offer(score, new_letters)
                if new_depth < depth_cap:
                    if seen is not None:
                        key = (_quantize(new_arr, new_state), new_depth)
                        if key in seen:
                            continue
                        seen.add(key)
                    new_pos = (p if pos == p + 1 else p + 1) if weave else pos
                    explore(new_arr, new_pos, new_state, new_letters,
                            (p, e), new_depth, depth_cap, seen)

        if worker == 0:
            stub_cap = min(limit, prefix_depth - 1)
            if stub_cap >= 1:
                explore(problem.initial_arr, problem.mobile + 1,
                        problem.initial_state, (), None, 0, stub_cap,
                        set() if config.dedup else None)

        if limit >= prefix_depth:
            for letters in mine:
                arr, pos, state = _replay(problem, letters)
                nodes += 1
                if prefix_depth == limit:
                    frontier += 1
                if arr == problem.final_arr:
                    score = problem.score(state, cap=best.score)
                    if score is not None:
                        best.offer(score, letters)
                if limit > prefix_depth:
                    explore(arr, pos, state, letters, letters[-1],
                            prefix_depth, limit,
                            set() if config.dedup else None)

        rows.append((limit, best.score if best.length >= 0 else float("inf"),
                     nodes, frontier, time.perf_counter() - t0))

    return (best.score, best.length, best.letters), rows


def _worker_job_star(args):
    return _worker_job(*args)


def _merge_rows(all_rows: list) -> SearchStats:
    stats = SearchStats()
    by_length: dict[int, list] = {}
    for rows in all_rows:
        for length, best, nodes, frontier, seconds in rows:
            by_length.setdefault(length, []).append((best, nodes, frontier, seconds))
    for length in sorted(by_length):
        entries = by_length[length]
        stats.add(length,
                  min(entry[0] for entry in entries),
                  sum(entry[1] for entry in entries),
                  sum(entry[2] for entry in entries),
                  sum(entry[3] for entry in entries))
    return stats


def search(model: AnyonModel, target: SynthesisTarget, config: SearchConfig,
           workers: int = 1) -> SynthesisResult:
    """Exhaustive iterative-deepening enumeration up to config.max_length.

    Deterministic regardless of worker count: the prefix forest at a fixed
    depth is dealt round-robin to workers and results merge by
    (score, length, letter sequence).  The best word is re-verified on the
    full fusion space before the result is returned.
    """
    if model.k != target.k:
        raise ValueError(f"model k={model.k} does not match target k={target.k}")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    prefix_depth = min(4, config.max_length)
    args = [(model.k, target, config, w, workers, prefix_depth)
            for w in range(workers)]
    if workers == 1:
        outcomes = [_worker_job(*args[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_worker_job_star, args))
    bests = [(score, length, _letter_key(letters), letters)
             for (score, length, letters), _ in outcomes if length >= 0]
    if not bests:
        raise RuntimeError("no candidate word reached the final arrangement")
    bests.sort(key=lambda entry: entry[:3])
    letters = bests[0][3]
    stats = _merge_rows([rows for _, rows in outcomes])
    word = BraidWord(target.block_count, letters)
    return _finish(model, target, config, word, stats)


def score_braid(model: AnyonModel, target: SynthesisTarget, braid: BraidWord,
                config: SearchConfig | None = None) -> SynthesisResult:
    """Score a stored word against a target without searching.

    Runs the same dual-route verification as search: incremental sector
    tracking must agree with the full-space product within 1e-12.
    """
    if model.k != target.k:
        raise ValueError(f"model k={model.k} does not match target k={target.k}")
    if braid.strand_count != target.block_count:
        raise ValueError("braid strand count does not match the block system")
    if braid.permutation() != target.final_arrangement:
        raise ValueError("braid does not realize the target arrangement")
    if config is None:
        config = SearchConfig(max_length=max(1, len(braid)))
    return _finish(model, target, config, braid, SearchStats())


def _finish(model: AnyonModel, target: SynthesisTarget, config: SearchConfig,
            word: BraidWord, stats: SearchStats) -> SynthesisResult:
    """Re-verify the chosen word on the full space and build the result."""
    problem = _Problem(model, target, config)
    _, _, state = _replay(problem, word.letters)
    incremental = problem.score(state)

    coarse = _coarse_from_full(model, target, word)
    full_state = tuple(_flat(coarse[s]) for s in problem.sectors)
    full_score = problem.score(full_state)
    if abs(full_score - incremental) > 1e-12:
        raise RuntimeError(
            f"coarse tracking ({incremental}) and full-space evaluation "
            f"({full_score}) disagree")

    leak = 0.0
    phase_dev = 0.0
    matrix_dev = 0.0
    for rule, dev in problem.deviations(full_state):
        if isinstance(rule, PhaseRule):
            phase_dev = max(phase_dev, dev)
            continue
        matrix_dev = max(matrix_dev, dev)
        if isinstance(rule, ColumnRule):
            si = problem.sectors.index(rule.sector)
            n = problem.dims[si]
            M = full_state[si]
            col = [M[i * n + rule.input_index] for i in range(n)]
            leak = max(leak, _column_leak(rule, col))
    converged = (matrix_dev <= config.tolerance
                 and phase_dev <= config.phase_tolerance)

    phases: dict[tuple[int, ...], complex] = {}
    for sector, matrix in coarse.items():
        if matrix.shape == (1, 1):
            phases[sector] = complex(matrix[0, 0])
    return SynthesisResult(
        target=target, braid=word, distance=full_score, leakage=leak,
        converged=converged, sector_phases=phases,
        exchange_counts=exchange_counts(word, target.grouping), stats=stats)


def _coarse_from_full(model: AnyonModel, target: SynthesisTarget,
                      word: BraidWord) -> dict:
    """Coarse sector matrices extracted from the full-space product route.

    Evaluates the word with composite generators on the fine basis, regroups
    both ends, and checks that every block-internal slice of a sector agrees
    (a composite exchange must not see internal trees); raises otherwise.
    """
    basis = enumerate_basis(model, target.leaves, 0)
    grouping = target.grouping
    U, final_leaves, final_grouping = evaluate_tracked(model, basis, word, grouping)
    g_in, t_in = regroup(model, basis, grouping)
    g_out, t_out = regroup(model, enumerate_basis(model, final_leaves, 0),
                           final_grouping)
    Ug = t_out @ U @ t_in.conj().T

    perm = word.permutation()
    out: dict[tuple[int, ...], np.ndarray] = {}
    for sector in sorted({r.sector for r in target.rules}):
        coarse_in = enumerate_basis(model, sector, 0)
        out_charges = tuple(sector[b] for b in perm)
        coarse_out = enumerate_basis(model, out_charges, 0)
        cols: dict[tuple, dict[tuple, int]] = {}
        for i, label in enumerate(g_in.labels):
            if label.block_charges == sector:
                cols.setdefault(label.block_internals, {})[label.coarse] = i
        rows: dict[tuple, dict[tuple, int]] = {}
        for i, label in enumerate(g_out.labels):
            if label.block_charges == out_charges:
                permuted = tuple(label.block_internals[perm.index(b)]
                                 for b in range(len(perm)))
                rows.setdefault(permuted, {})[label.coarse] = i
        matrix = None
        for internals, col_map in cols.items():
            row_map = rows[internals]
            block = np.zeros((coarse_out.dim, coarse_in.dim), dtype=np.complex128)
            for rj, tree_out in enumerate(coarse_out.trees):
                for cj, tree_in in enumerate(coarse_in.trees):
                    block[rj, cj] = Ug[row_map[tree_out.internals],
                                       col_map[tree_in.internals]]
            if matrix is None:
                matrix = block
            elif not np.allclose(matrix, block, atol=1e-10):
                raise RuntimeError(
                    f"sector {sector}: braid action varies across internal trees")
        out[sector] = matrix
    return out
