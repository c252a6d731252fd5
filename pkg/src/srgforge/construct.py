"""Designs and regular graphs from unions of point-stabilizer orbits, and
the strongly-regular-graph search pipeline over a family of subgroups.

A union of suborbits that is closed under pairing defines an undirected
regular graph on the coset space; the pipeline enumerates all such unions,
keeps the strongly regular ones, and classifies them up to isomorphism
and complementation.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .action import Suborbit, TransitiveAction, coset_action
from .graph import (
    Graph,
    SrgParams,
    complement,
    fingerprint_levels,
    invariant_fingerprint,
    is_strongly_regular,
    srg_feasibility,
)
from .isomorph import find_isomorphism
from .perm import PermutationGroup

__all__ = [
    "OrbitSelection",
    "DesignResult",
    "SrgClass",
    "SearchReport",
    "enumerate_selections",
    "build_graph",
    "construct_design",
    "srg_search",
    "selection_candidates",
]


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("SRGFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _pool_map(fn, items):
    n = _thread_count()
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class OrbitSelection:
    """A pairing-closed union of nontrivial suborbits."""

    action: TransitiveAction
    indices: frozenset[int]

    def __post_init__(self):
        subs = self.action.suborbits()
        if not self.indices:
            raise ValueError("empty suborbit selection")
        for i in self.indices:
            sub = subs[i]
            if sub.points == (self.action.base_point,):
                raise ValueError("selection contains the trivial suborbit")
            if sub.paired_with not in self.indices:
                raise ValueError(
                    f"selection not closed under pairing: {i} needs {sub.paired_with}"
                )
        if self.union_size >= self.action.degree:
            raise ValueError("selection covers the whole point set")

    @property
    def union_size(self) -> int:
        subs = self.action.suborbits()
        return sum(subs[i].size for i in self.indices)

    def sorted_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))


def enumerate_selections(act: TransitiveAction):
    """All pairing-closed nonempty unions, streamed in mask order."""
    classes = act.pairing_classes()
    nclasses = len(classes)
    for mask in range(1, 1 << nclasses):
        indices = frozenset(
            i for a in range(nclasses) if mask >> a & 1 for i in classes[a]
        )
        yield OrbitSelection(action=act, indices=indices)


def build_graph(sel: OrbitSelection) -> Graph:
    """Union of the selected orbitals as an undirected graph."""
    act = sel.action
    M = act.orbital_matrix()
    n = act.degree
    keep = np.zeros(len(act.suborbits()), dtype=bool)
    for i in sel.indices:
        keep[i] = True
    adj = keep[M]
    rows = []
    for x in range(n):
        packed = np.packbits(adj[x], bitorder="little").tobytes()
        rows.append(int.from_bytes(packed, "little"))
    return Graph(n, rows)


def generator_images_are_automorphisms(graph: Graph, act: TransitiveAction) -> bool:
    return all(
        kernels.is_automorphism(graph.rows, graph.v, g.images)
        for g in act.generator_images
    )


# -- Theorem-1 designs -------------------------------------------------------

@dataclass
class DesignResult:
    """A 1-design built from a union of stabilizer orbits."""

    points: int
    blocks: list[frozenset[int]]
    block_size: int
    replication: int
    block_count: int
    degenerate: bool
    formula_block_count: int | None = None
    formula_replication: Fraction | None = None
    discrepancy: str | None = None


def construct_design(
    G: PermutationGroup,
    act1: TransitiveAction,
    act2: TransitiveAction,
    deltas,
) -> DesignResult:
    """Blocks {Delta2 * g : g in G} for Delta2 a union of G_alpha-orbits.

    act1 and act2 must share the ambient group G; alpha is act1's base
    point.  The block set is materialized as distinct point sets; the
    replication and block-count formulas are cross-checked against direct
    counts and any mismatch is recorded, not raised.
    """
    if act1.ambient is not G or act2.ambient is not G:
        raise ValueError("both actions must be actions of the ambient group G")
    stab = act1.point_stabilizer_ambient(act1.base_point)
    stab_images = [act2.image(h) for h in stab.generators]
    n = act2.degree

    delta2: set[int] = set()
    for d in deltas:
        if d in delta2:
            continue
        orb = [d]
        seen = {d}
        k = 0
        while k < len(orb):
            p = orb[k]
            for g in stab_images:
                q = g.images[p]
                if q not in seen:
                    seen.add(q)
                    orb.append(q)
            k += 1
        delta2.update(seen)

    if len(delta2) == n:
        block = frozenset(range(n))
        return DesignResult(
            points=n,
            blocks=[block],
            block_size=n,
            replication=1,
            block_count=1,
            degenerate=True,
        )

    start = frozenset(delta2)
    blocks = {start}
    queue = [start]
    while queue:
        blk = queue.pop()
        for g in act2.generator_images:
            img = frozenset(g.images[p] for p in blk)
            if img not in blocks:
                blocks.add(img)
                queue.append(img)
    block_list = sorted(blocks, key=sorted)
    counts = [0] * n
    for blk in block_list:
        for p in blk:
            counts[p] += 1
    if len(set(counts)) != 1:
        raise RuntimeError("block orbit is not a 1-design: replication varies")
    replication = counts[0]
    b = len(block_list)

    # setwise stabilizer of Delta2, generated independently via Schreier
    # generators of the block orbit, then cross-checked against the formulas
    discrepancy = None
    formula_b = None
    formula_r = None
    stab_set = _set_stabilizer(act2, start)
    if stab_set is not None:
        m = act1.degree
        ga_order = stab.order
        formula_b_frac = Fraction(m * ga_order, stab_set.order)
        formula_b = int(formula_b_frac) if formula_b_frac.denominator == 1 else None
        orbit_sum = 0
        for d in sorted(set(deltas)):
            gd = act2.point_stabilizer_ambient(d)
            imgs = [act1.image(h) for h in gd.generators]
            orb = [act1.base_point]
            seen = {act1.base_point}
            k = 0
            while k < len(orb):
                p = orb[k]
                for g in imgs:
                    q = g.images[p]
                    if q not in seen:
                        seen.add(q)
                        orb.append(q)
                k += 1
            orbit_sum += len(orb)
        formula_r = Fraction(ga_order, stab_set.order) * orbit_sum
        if formula_b is not None and formula_b != b:
            discrepancy = f"block-count formula {formula_b} != direct count {b}"
        elif formula_r != replication:
            discrepancy = f"replication formula {formula_r} != direct count {replication}"

    return DesignResult(
        points=n,
        blocks=block_list,
        block_size=len(start),
        replication=replication,
        block_count=b,
        degenerate=False,
        formula_block_count=formula_b,
        formula_replication=formula_r,
        discrepancy=discrepancy,
    )


def _set_stabilizer(act: TransitiveAction, block: frozenset[int]) -> PermutationGroup | None:
    """Setwise stabilizer of a block inside the action image, via Schreier
    generators of the block orbit."""
    gens = act.generator_images
    if not gens:
        return PermutationGroup.trivial(act.degree)
    from .perm import Permutation

    start = tuple(sorted(block))
    transversal = {start: Permutation.identity(act.degree)}
    order_list = [start]
    k = 0
    schreier: list[Permutation] = []
    while k < len(order_list):
        blk = order_list[k]
        t = transversal[blk]
        for g in gens:
            img = tuple(sorted(g.images[p] for p in blk))
            if img not in transversal:
                transversal[img] = t * g
                order_list.append(img)
            else:
                s = t * g * transversal[img].inverse()
                if not s.is_identity():
                    schreier.append(s)
        k += 1
    if not schreier:
        return PermutationGroup.trivial(act.degree)
    # the Schreier generators generate the stabilizer; keep a short subset
    target = act.image_group().order // len(order_list)
    chosen: list[Permutation] = []
    group = None
    for s in schreier:
        chosen.append(s)
        group = PermutationGroup(chosen, degree=act.degree)
        if group.order == target:
            return group
    return group


# -- the search pipeline ------------------------------------------------------

@dataclass
class SrgClass:
    """One isomorphism class found by the pipeline."""

    graph: Graph
    params: SrgParams
    subgroup: str
    action_index: int
    selection: tuple[int, ...]
    occurrences: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    fingerprint: str = ""
    complement_of: int | None = None  # class id of the complement
    class_id: int = -1
    _levels: list | None = field(default=None, repr=False)

    def levels(self, depth: int) -> tuple:
        if self._levels is None:
            self._levels = fingerprint_levels(self.graph)
        return tuple(self._levels[: depth + 1])


@dataclass
class SearchReport:
    group_name: str
    max_degree: int
    actions: list[dict]
    classes: list[SrgClass]
    rows: list[dict]
    notes: list[str]


def selection_candidates(act: TransitiveAction):
    """Scan every pairing-closed union for the SRG condition.

    Returns (candidates, n_selections, excluded, classes): candidates is a
    list of (class_mask, k, lam, mu) passing the primitive-SRG filter
    (mu > 0 and connected complement), in mask order; excluded maps each
    dropped mask to the reason (disconnected union / complete multipartite).
    """
    subs = act.suborbits()
    rank = len(subs)
    labels = act.suborbit_labels()
    M = act.orbital_matrix()
    trivial = int(labels[act.base_point])
    P = np.zeros((rank, rank, rank), dtype=np.int64)
    lab64 = labels.astype(np.int64)
    for j, sub in enumerate(subs):
        beta = sub.points[0]
        col = M[:, beta].astype(np.int64)
        np.add.at(P[j], (lab64, col), 1)
    classes = act.pairing_classes()
    nc = len(classes)
    R = np.zeros((nc, nc, rank), dtype=np.int64)
    for a, ca in enumerate(classes):
        for b, cb in enumerate(classes):
            for i in ca:
                for i2 in cb:
                    R[a, b] += P[:, i, i2]
    class_labels = [np.array(c, dtype=np.int64) for c in classes]
    class_points = [sum(subs[i].size for i in c) for c in classes]
    raw = kernels.selection_scan(R, class_labels, class_points, trivial, rank)
    n_selections = (1 << nc) - 1
    candidates = []
    excluded = []
    v = act.degree
    for mask, k, lam, mu in raw:
        if k <= 0 or k >= v - 1:
            continue
        if mu == 0:
            excluded.append((mask, "regular with mu = 0 (disconnected union)"))
            continue
        if v - 2 * k + lam <= 0:
            # complete multipartite: complement disconnected
            excluded.append(
                (mask, "complete multipartite (disconnected complement)")
            )
            continue
        candidates.append((mask, k, lam, mu))
    return candidates, n_selections, excluded, classes


def _mask_to_selection(act: TransitiveAction, classes, mask: int) -> OrbitSelection:
    indices = frozenset(
        i for a in range(len(classes)) if mask >> a & 1 for i in classes[a]
    )
    return OrbitSelection(action=act, indices=indices)


def _same_class(a: SrgClass, levels) -> bool | None:
    """False when an invariant separates, None when a search must decide."""
    for depth in range(4):
        la = a.levels(depth)
        lb = tuple(levels[: depth + 1])
        if la != lb:
            return False
    return None


def srg_search(
    G: PermutationGroup,
    subgroups,
    max_degree: int = 600,
    group_name: str = "G",
    iso_budget: int = 10**8,
    index_bound: int | None = None,
    actions: dict | None = None,
) -> SearchReport:
    """Classify the SRGs on coset spaces of the given subgroups.

    subgroups is a list of (name, PermutationGroup).  Graphs are collected
    up to isomorphism across the whole run; the report lists one row per
    complement pair, represented by the smaller-degree member.
    """
    notes: list[str] = []
    action_rows: list[dict] = []
    action_meta: dict[str, dict] = {}
    classes_found: list[SrgClass] = []
    mask_to_class: dict[tuple[str, int], int] = {}

    for name, H in subgroups:
        act = (actions or {}).get(name)
        if act is None:
            bound = index_bound if index_bound is not None else max(max_degree, 2000)
            act = coset_action(G, H, index_bound=bound)
        if act.degree > max_degree:
            action_rows.append(
                {
                    "subgroup": name,
                    "order": H.order,
                    "index": act.degree,
                    "skipped": f"degree {act.degree} exceeds max_degree {max_degree}",
                }
            )
            continue
        cands, n_sel, excluded, classes = selection_candidates(act)
        for mask, reason in excluded:
            notes.append(
                f"{name}: selection mask {mask:#x} is {reason}, "
                "excluded from the SRG list"
            )
        meta = {
            "subgroup": name,
            "order": H.order,
            "index": act.degree,
            "rank": act.rank(),
            "primitive": act.is_primitive(),
            "selections": n_sel,
            "srg_selections": len(cands),
        }
        action_rows.append(meta)
        action_meta[name] = meta

        built = _pool_map(
            lambda c: _verify_candidate(act, classes, c), cands
        )
        for (mask, k, lam, mu), (sel, graph, params) in zip(cands, built):
            # match into existing classes with the same parameters
            assigned = None
            levels = None
            for rec in classes_found:
                if rec.params != params:
                    continue
                if levels is None:
                    levels = fingerprint_levels(graph)
                if _same_class(rec, levels) is False:
                    continue
                if find_isomorphism(rec.graph, graph, iso_budget) is not None:
                    assigned = rec
                    break
            if assigned is None:
                rec = SrgClass(
                    graph=graph,
                    params=params,
                    subgroup=name,
                    action_index=act.degree,
                    selection=sel.sorted_indices(),
                    fingerprint=invariant_fingerprint(graph),
                    class_id=len(classes_found),
                )
                rec._levels = levels
                classes_found.append(rec)
                assigned = rec
            assigned.occurrences.append((name, sel.sorted_indices()))
            mask_to_class[(name, mask)] = assigned.class_id

        # complements of selections live in the same scan: link classes
        full = (1 << len(classes)) - 1
        for (mask, k, lam, mu) in cands:
            comp = full ^ mask
            key, ckey = (name, mask), (name, comp)
            if key in mask_to_class and ckey in mask_to_class:
                a = classes_found[mask_to_class[key]]
                b = classes_found[mask_to_class[ckey]]
                if a.complement_of is None:
                    a.complement_of = b.class_id
                if b.complement_of is None:
                    b.complement_of = a.class_id

    # any class whose complement was never linked (filtered or cross-action):
    for rec in classes_found:
        if rec.complement_of is None:
            comp_params = rec.params.complement_params()
            cg = complement(rec.graph)
            for other in classes_found:
                if other.params != comp_params:
                    continue
                if find_isomorphism(cg, other.graph, iso_budget) is not None:
                    rec.complement_of = other.class_id
                    other.complement_of = rec.class_id
                    break

    rows = _report_rows(classes_found, action_meta)
    return SearchReport(
        group_name=group_name,
        max_degree=max_degree,
        actions=action_rows,
        classes=classes_found,
        rows=rows,
        notes=notes,
    )


def _verify_candidate(act, classes, cand):
    mask, k, lam, mu = cand
    sel = _mask_to_selection(act, classes, mask)
    graph = build_graph(sel)
    params = is_strongly_regular(graph)
    if params is None or params.as_tuple() != (act.degree, k, lam, mu):
        raise RuntimeError(
            f"scan and direct SRG check disagree on mask {mask:#x}: "
            f"{params} vs ({act.degree},{k},{lam},{mu})"
        )
    srg_feasibility(params)
    if not generator_images_are_automorphisms(graph, act):
        raise RuntimeError("construction group is not a group of automorphisms")
    return sel, graph, params


def _report_rows(classes_found: list[SrgClass], action_meta: dict) -> list[dict]:
    """One row per complement pair, represented by the smaller-k member."""
    rows = []
    used = set()
    for rec in classes_found:
        if rec.class_id in used:
            continue
        partner = (
            classes_found[rec.complement_of]
            if rec.complement_of is not None
            else None
        )
        pick = rec
        if partner is not None and partner.class_id != rec.class_id:
            used.add(partner.class_id)
            if (partner.params.k, partner.fingerprint) < (
                rec.params.k,
                rec.fingerprint,
            ):
                pick, partner = partner, rec
        used.add(rec.class_id)
        meta = action_meta.get(pick.subgroup, {})
        row = {
            "subgroup": pick.subgroup,
            "index": pick.action_index,
            "rank": meta.get("rank"),
            "primitive": meta.get("primitive"),
            "params": list(pick.params.as_tuple()),
            "selection": list(pick.selection),
            "fingerprint": pick.fingerprint,
            "occurrences": [
                {"subgroup": s, "selection": list(sel)} for s, sel in pick.occurrences
            ],
            "complement_params": list(partner.params.as_tuple())
            if partner and partner.class_id != pick.class_id
            else None,
            "file": None,
        }
        rows.append(row)
    rows.sort(key=lambda r: (r["params"], r["fingerprint"]))
    return rows
