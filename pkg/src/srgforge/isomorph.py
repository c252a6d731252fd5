"""Graph automorphism and isomorphism search.

Individualization-refinement backtracking in the nauty style: equitable
partition refinement with trace invariants, discovered automorphisms
inserted into a stabilizer chain for orbit pruning along the first path,
and backjumps to the divergence level when a new automorphism appears.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import kernels
from .graph import Graph
from .perm import Permutation, PermutationGroup, StabilizerChain

__all__ = [
    "AutResult",
    "BudgetExceeded",
    "automorphism_group",
    "find_isomorphism",
    "are_isomorphic",
]

DEFAULT_BUDGET = 10**8


class BudgetExceeded(RuntimeError):
    """Search exceeded its node budget; result unknown."""


@dataclass
class AutResult:
    group: PermutationGroup
    order: int
    nodes: int


def _mask(verts) -> int:
    m = 0
    for v in verts:
        m |= 1 << v
    return m


def _refine(ctx, cells: list[tuple[int, ...]], seeds, expected):
    """Refine to an equitable ordered partition.

    cells is mutated in place.  Returns the trace (tuple of split records)
    or None when it deviates from `expected`.  Split records carry only
    positions, counts and sizes, so equal traces across isomorphic runs.
    """
    trace = []
    ti = 0
    queue = deque(seeds)
    sseq = 0
    while queue:
        splitter = queue.popleft()
        smask = _mask(splitter)
        sseq += 1
        newcells = []
        for pos, cell in enumerate(cells):
            if len(cell) == 1:
                newcells.append(cell)
                continue
            counts = kernels.counts_into(ctx, cell, smask)
            c0 = counts[0]
            if all(c == c0 for c in counts):
                newcells.append(cell)
                continue
            groups: dict[int, list[int]] = {}
            for v, c in zip(cell, counts):
                groups.setdefault(c, []).append(v)
            keys = sorted(groups)
            parts = [tuple(groups[c]) for c in keys]
            entry = (sseq, pos, tuple((c, len(groups[c])) for c in keys))
            if expected is not None:
                if ti >= len(expected) or expected[ti] != entry:
                    return None
            trace.append(entry)
            ti += 1
            newcells.extend(parts)
            largest = max(range(len(parts)), key=lambda i: len(parts[i]))
            for i, p in enumerate(parts):
                if i != largest:
                    queue.append(p)
        cells[:] = newcells
    if expected is not None and ti != len(expected):
        return None
    return tuple(trace)


def _target_cell(cells) -> int:
    """Position of the first smallest non-singleton cell; -1 if discrete."""
    best = -1
    best_size = None
    for pos, cell in enumerate(cells):
        if len(cell) > 1 and (best_size is None or len(cell) < best_size):
            best = pos
            best_size = len(cell)
    return best


def _is_iso_map(rows1, rows2, n, images) -> bool:
    """Does vertex map g1 -> g2 send edges to edges (both k-regular sides)?"""
    for u in range(n):
        ru = rows1[u]
        target = rows2[images[u]]
        if ru.bit_count() != target.bit_count():
            return False
        while ru:
            lsb = ru & -ru
            v = lsb.bit_length() - 1
            ru ^= lsb
            if not target >> images[v] & 1:
                return False
    return True


class _Search:
    """One individualization-refinement search over a single graph."""

    def __init__(self, g: Graph, budget: int, mode: str, guide=None, seeds=()):
        self.g = g
        self.n = g.v
        self.rows = g.rows
        self.ctx = kernels.make_ctx(g.rows, g.v)
        self.budget = budget
        self.nodes = 0
        self.mode = mode  # "aut" or "iso"
        # guide: (traces per depth, target positions, leaf depth, target bytes)
        if guide is not None:
            self.guide_traces, self.guide_tpos, self.leaf_depth, self.target_bytes = guide
            self.guide_complete = True
        else:
            self.guide_traces = []
            self.guide_tpos = []
            self.leaf_depth = None
            self.target_bytes = None
            self.guide_complete = False
        self.path: list[int] = []
        self.base: list[int] | None = None
        self.chain: StabilizerChain | None = None
        self.ref_order: list[int] | None = None
        self.ref_bytes: bytes | None = None
        self.jump_to: int | None = None
        self.found_map: list[int] | None = None
        self.seed_auts = list(seeds)

    # -- guide bookkeeping ---------------------------------------------------

    def _expected_trace(self, depth: int):
        if depth < len(self.guide_traces):
            return self.guide_traces[depth]
        return None

    def _note_trace(self, depth: int, trace) -> None:
        if not self.guide_complete and depth == len(self.guide_traces):
            self.guide_traces.append(trace)

    # -- leaf handling ---------------------------------------------------------

    def _handle_leaf(self, cells, depth) -> bool:
        """Returns True when the iso target has been matched."""
        order = [c[0] for c in cells]
        lb = kernels.leaf_bytes(self.rows, self.n, order)
        if self.ref_order is None:
            self.ref_order = order
            self.ref_bytes = lb
            self.base = list(self.path)
            if not self.guide_complete:
                self.leaf_depth = depth
            self.chain = StabilizerChain(self.n, base_hint=self.base)
            for s in self.seed_auts:
                self.chain.extend(s)
            if self.mode == "aut":
                self.target_bytes = lb
                return False
            return self._check_target(order, lb)
        if self.mode == "iso" and self._check_target(order, lb):
            return True
        if lb == self.ref_bytes:
            images = [0] * self.n
            for i, u in enumerate(self.ref_order):
                images[u] = order[i]
            if kernels.is_automorphism(self.rows, self.n, images):
                grew = self.chain.extend(Permutation(images))
                if grew:
                    d = 0
                    while d < len(self.base) and d < len(self.path) and self.base[d] == self.path[d]:
                        d += 1
                    self.jump_to = d
        return False

    def _check_target(self, order, lb) -> bool:
        if self.target_bytes is not None and lb == self.target_bytes:
            self.found_map = order
            return True
        return False

    # -- recursion ---------------------------------------------------------------

    def _on_base_path(self, depth: int) -> bool:
        return self.base is not None and self.path[:depth] == self.base[:depth]

    def _orbit_hits_done(self, v: int, done: set[int], depth: int) -> bool:
        gens = self.chain.stabilizer_gens(depth) if self.chain else []
        if not gens:
            return False
        orb = [v]
        seen = {v}
        k = 0
        while k < len(orb):
            pt = orb[k]
            for g in gens:
                npt = g.images[pt]
                if npt not in seen:
                    if npt in done:
                        return True
                    seen.add(npt)
                    orb.append(npt)
            k += 1
        return bool(seen & done)

    def _descend(self, cells, depth) -> bool:
        """True when the iso target was found below this node."""
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"node budget {self.budget} exceeded")
        tpos = _target_cell(cells)
        if tpos < 0:
            return self._handle_leaf(cells, depth)
        if self.guide_complete and self.leaf_depth is not None and depth >= self.leaf_depth:
            return False  # guide says leaves live at leaf_depth
        cell = cells[tpos]
        done: set[int] = set()
        for v in cell:
            if self.jump_to is not None:
                break
            if done and self._on_base_path(depth) and self._orbit_hits_done(v, done, depth):
                done.add(v)
                continue
            child = cells[:tpos] + [(v,)] + [tuple(w for w in cell if w != v)] + cells[tpos + 1:]
            trace = _refine(self.ctx, child, [(v,)], self._expected_trace(depth + 1))
            if trace is None:
                done.add(v)
                continue
            self.path.append(v)
            self._note_trace(depth + 1, trace)
            found = self._descend(child, depth + 1)
            self.path.pop()
            if found:
                return True
            done.add(v)
            if self.jump_to is not None:
                if self.jump_to < depth:
                    return False
                self.jump_to = None
        return False

    def run(self) -> bool:
        cells = [tuple(range(self.n))]
        trace = _refine(self.ctx, cells, [tuple(range(self.n))], self._expected_trace(0))
        if trace is None:
            return False
        self._note_trace(0, trace)
        return self._descend(cells, 0)


def _first_path_guide(g: Graph, budget: int):
    """Descend the leftmost path only; returns guide data for iso search."""
    ctx = kernels.make_ctx(g.rows, g.v)
    cells = [tuple(range(g.v))]
    traces = []
    tposes = []
    trace = _refine(ctx, cells, [tuple(range(g.v))], None)
    traces.append(trace)
    depth = 0
    while True:
        tpos = _target_cell(cells)
        tposes.append(tpos)
        if tpos < 0:
            break
        v = cells[tpos][0]
        cells = cells[:tpos] + [(v,)] + [tuple(w for w in cells[tpos] if w != v)] + cells[tpos + 1:]
        trace = _refine(ctx, cells, [(v,)], None)
        traces.append(trace)
        depth += 1
    order = [c[0] for c in cells]
    lb = kernels.leaf_bytes(g.rows, g.v, order)
    return traces, tposes, depth, lb, order


def automorphism_group(
    g: Graph, budget: int = DEFAULT_BUDGET, known_automorphisms=()
) -> AutResult:
    """Full automorphism group via backtracking; exact within the budget.

    known_automorphisms, when given, must be automorphisms (verified) and
    seed the pruning chain; they do not change the result, only the speed.
    """
    if g.v == 0:
        return AutResult(PermutationGroup.trivial(0), 1, 0)
    for s in known_automorphisms:
        if not kernels.is_automorphism(g.rows, g.v, s.images):
            raise ValueError("seed permutation is not an automorphism")
    search = _Search(g, budget, mode="aut", seeds=known_automorphisms)
    search.run()
    chain = search.chain
    if chain is None:  # single leafless... cannot happen for v >= 1
        return AutResult(PermutationGroup.trivial(g.v), 1, search.nodes)
    gens = [p for p in chain.strong]
    group = PermutationGroup(gens, degree=g.v) if gens else PermutationGroup.trivial(g.v)
    return AutResult(group, chain.order(), search.nodes)


def find_isomorphism(
    g1: Graph, g2: Graph, budget: int = DEFAULT_BUDGET
) -> list[int] | None:
    """A vertex map g1 -> g2 preserving adjacency, or None.

    None is an exhaustive-search certificate of non-isomorphism (within
    the budget; budget exhaustion raises instead).
    """
    if g1.v != g2.v:
        return None
    if g1.v == 0:
        return []
    if g1.degree_sequence() != g2.degree_sequence():
        return None
    traces, tposes, leaf_depth, target_bytes, order1 = _first_path_guide(g1, budget)
    search = _Search(
        g2, budget, mode="iso", guide=(traces, tposes, leaf_depth, target_bytes)
    )
    if not search.run():
        return None
    order2 = search.found_map
    images = [0] * g1.v
    for i, u in enumerate(order1):
        images[u] = order2[i]
    if not _is_iso_map(g1.rows, g2.rows, g1.v, images):
        raise RuntimeError("internal error: leaf match failed verification")
    return images


def are_isomorphic(g1: Graph, g2: Graph, budget: int = DEFAULT_BUDGET) -> bool:
    """Isomorphism decision: cheap invariant pre-filter, then backtracking."""
    if g1.v != g2.v or g1.num_edges != g2.num_edges:
        return False
    if g1.degree_sequence() != g2.degree_sequence():
        return False
    e1 = kernels.common_neighbor_profiles(g1.rows, g1.v)
    e2 = kernels.common_neighbor_profiles(g2.rows, g2.v)
    if sorted(e1[0].items()) != sorted(e2[0].items()):
        return False
    if sorted(e1[1].items()) != sorted(e2[1].items()):
        return False
    return find_isomorphism(g1, g2, budget) is not None
