"""Transitive actions on coset spaces: rank, suborbits, orbit pairing.

The action of G on the right cosets of H is realized on canonical coset
keys: the key of Hx is the lexicographically least image of the chain's
base tuple over all elements of the coset.  Point 0 is always the coset
H itself (the base point alpha).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .perm import Permutation, PermutationGroup

__all__ = [
    "TransitiveAction",
    "Suborbit",
    "coset_action",
    "suborbits",
    "paired_orbit",
    "action_report",
    "NotASubgroupError",
    "IndexBoundExceeded",
]

DEFAULT_INDEX_BOUND = 2000


class NotASubgroupError(ValueError):
    """H has a generator outside G."""


class IndexBoundExceeded(RuntimeError):
    """[G:H] exceeds the configured coset bound."""


@dataclass(frozen=True)
class Suborbit:
    """An orbit of the base-point stabilizer, with its paired orbit."""

    index: int
    points: tuple[int, ...]
    paired_with: int

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def self_paired(self) -> bool:
        return self.paired_with == self.index


@dataclass
class TransitiveAction:
    """Action of `ambient` on the right cosets of `subgroup`."""

    ambient: PermutationGroup
    subgroup: PermutationGroup
    degree: int
    coset_keys: list[tuple[int, ...]]
    reps: list[Permutation]
    generator_images: list[Permutation]
    base_point: int
    _key_index: dict[tuple[int, ...], int]
    _base_tuple: tuple[int, ...]
    _h_rows: list[tuple[int, ...]]
    _suborbits: list[Suborbit] | None = field(default=None, repr=False)
    _labels: np.ndarray | None = field(default=None, repr=False)
    _orbital_matrix: np.ndarray | None = field(default=None, repr=False)
    _image_group: PermutationGroup | None = field(default=None, repr=False)

    # -- the action homomorphism -------------------------------------------

    def key_of(self, x: Permutation) -> tuple[int, ...]:
        """Canonical key of the coset H*x."""
        imgs = x.images
        return min(tuple(imgs[i] for i in row) for row in self._h_rows)

    def point_of(self, x: Permutation) -> int:
        return self._key_index[self.key_of(x)]

    def image(self, g: Permutation) -> Permutation:
        """Image of an arbitrary ambient element in the coset action."""
        return Permutation([self.point_of(rep * g) for rep in self.reps])

    def image_group(self) -> PermutationGroup:
        if self._image_group is None:
            self._image_group = PermutationGroup(
                self.generator_images, degree=self.degree
            )
        return self._image_group

    def is_primitive(self) -> bool:
        return self.image_group().is_primitive()

    def point_stabilizer_ambient(self, x: int) -> PermutationGroup:
        """Stab_G(point x) as an ambient subgroup: reps[x]^-1 H reps[x]."""
        r = self.reps[x]
        rinv = r.inverse()
        gens = [rinv * h * r for h in self.subgroup.generators]
        if not gens:
            return PermutationGroup.trivial(self.ambient.degree)
        return PermutationGroup(gens, degree=self.ambient.degree)

    # -- suborbits and pairing ---------------------------------------------

    def suborbits(self) -> list[Suborbit]:
        """Orbits of the base-point stabilizer, sorted by (size, min point)."""
        if self._suborbits is not None:
            return self._suborbits
        stab_images = [self.image(h) for h in self.subgroup.generators]
        seen: set[int] = set()
        raw: list[list[int]] = []
        for pt in range(self.degree):
            if pt in seen:
                continue
            orb = [pt]
            seen.add(pt)
            k = 0
            while k < len(orb):
                p = orb[k]
                for g in stab_images:
                    np_ = g.images[p]
                    if np_ not in seen:
                        seen.add(np_)
                        orb.append(np_)
                k += 1
            raw.append(sorted(orb))
        raw.sort(key=lambda o: (len(o), o[0]))

        where = {}
        for idx, orb in enumerate(raw):
            for p in orb:
                where[p] = idx
        paired = []
        for orb in raw:
            beta = orb[0]
            g = self.reps[beta]
            paired.append(where[self.point_of(g.inverse())])
        for i, j in enumerate(paired):
            if paired[j] != i or len(raw[i]) != len(raw[j]):
                raise RuntimeError("orbit pairing failed to be an involution")
        self._suborbits = [
            Suborbit(index=i, points=tuple(orb), paired_with=paired[i])
            for i, orb in enumerate(raw)
        ]
        return self._suborbits

    def rank(self) -> int:
        return len(self.suborbits())

    def suborbit_labels(self) -> np.ndarray:
        """labels[p] = index of the suborbit containing point p."""
        if self._labels is None:
            labels = np.empty(self.degree, dtype=np.int16)
            for sub in self.suborbits():
                for p in sub.points:
                    labels[p] = sub.index
            self._labels = labels
        return self._labels

    def pairing_classes(self) -> list[tuple[int, ...]]:
        """Nontrivial suborbit indices grouped into pairing classes."""
        subs = self.suborbits()
        classes = []
        done = set()
        for s in subs:
            if s.index in done or s.points == (self.base_point,):
                continue
            if s.self_paired:
                classes.append((s.index,))
                done.add(s.index)
            else:
                classes.append(tuple(sorted((s.index, s.paired_with))))
                done.update(classes[-1])
        return classes

    # -- orbital classification --------------------------------------------

    def orbital_matrix(self) -> np.ndarray:
        """M[x, y] = suborbit index of the pair (x, y); M[alpha, y] = labels[y]."""
        if self._orbital_matrix is not None:
            return self._orbital_matrix
        n = self.degree
        labels = self.suborbit_labels()
        # act(reps[x]) built along the BFS tree so each row costs one product
        act_rep: list[Permutation | None] = [None] * n
        act_rep[self.base_point] = Permutation.identity(n)
        order = [self.base_point]
        seen = {self.base_point}
        k = 0
        while k < len(order):
            x = order[k]
            for gi, g in enumerate(self.generator_images):
                y = g.images[x]
                if y not in seen:
                    seen.add(y)
                    act_rep[y] = act_rep[x] * self._tree_gen(gi)
                    order.append(y)
            k += 1
        M = np.empty((n, n), dtype=np.int16)
        for x in range(n):
            inv = act_rep[x].inverse()
            M[x] = labels[np.fromiter(inv.images, dtype=np.int64, count=n)]
        self._orbital_matrix = M
        return M

    def _tree_gen(self, gi: int) -> Permutation:
        return self.generator_images[gi]


def coset_action(
    G: PermutationGroup,
    H: PermutationGroup,
    index_bound: int = DEFAULT_INDEX_BOUND,
) -> TransitiveAction:
    """Build the transitive action of G on the right cosets of H."""
    if H.degree != G.degree:
        raise NotASubgroupError("H acts on a different point set than G")
    for h in H.generators:
        if not G.membership_test(h):
            raise NotASubgroupError(
                f"generator {h.cycle_string()} of H is not an element of G"
            )
    index, rem = divmod(G.order, H.order)
    if rem:
        raise RuntimeError("order of H does not divide order of G")
    if index > index_bound:
        raise IndexBoundExceeded(
            f"[G:H] = {index} exceeds the bound {index_bound}; raise index_bound "
            "to proceed"
        )

    base_tuple = tuple(G.chain.base)
    h_rows = [tuple(h.images[b] for b in base_tuple) for h in H.elements()]

    ident = Permutation.identity(G.degree)

    def key_of(x: Permutation) -> tuple[int, ...]:
        imgs = x.images
        return min(tuple(imgs[i] for i in row) for row in h_rows)

    keys = [key_of(ident)]
    reps = [ident]
    key_index = {keys[0]: 0}
    k = 0
    while k < len(reps):
        x = reps[k]
        for g in G.generators:
            y = x * g
            ky = key_of(y)
            if ky not in key_index:
                key_index[ky] = len(reps)
                keys.append(ky)
                reps.append(y)
        k += 1
    if len(reps) != index:
        raise RuntimeError(
            f"coset enumeration found {len(reps)} cosets, expected {index}"
        )

    gen_images = [
        Permutation([key_index[key_of(reps[i] * g)] for i in range(index)])
        for g in G.generators
    ]

    act = TransitiveAction(
        ambient=G,
        subgroup=H,
        degree=index,
        coset_keys=keys,
        reps=reps,
        generator_images=gen_images,
        base_point=0,
        _key_index=key_index,
        _base_tuple=base_tuple,
        _h_rows=h_rows,
    )
    return act


def suborbits(act: TransitiveAction) -> list[Suborbit]:
    return act.suborbits()


def paired_orbit(act: TransitiveAction, delta: Suborbit) -> Suborbit:
    """The suborbit paired with delta: {alpha*g : alpha*g^-1 in delta}."""
    subs = act.suborbits()
    if not (0 <= delta.index < len(subs)) or subs[delta.index].points != delta.points:
        raise ValueError("not a suborbit of this action")
    return subs[delta.paired_with]


def action_report(act: TransitiveAction, group_name: str, subgroup_name: str) -> dict:
    """Report fragment mirroring one subgroup-table row."""
    return {
        "group": group_name,
        "subgroup_name": subgroup_name,
        "order": act.subgroup.order,
        "index": act.degree,
        "rank": act.rank(),
        "primitive": act.is_primitive(),
    }
