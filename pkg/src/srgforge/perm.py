"""Permutations and permutation groups with deterministic stabilizer chains.

Points are 0-based in code and 1-based in all textual I/O (cycle notation,
fixture files).  Products act left to right: ``(p * q)(i) == q(p(i))``, so
point images compose as ``i^(pq) = (i^p)^q`` (right action).
"""
from __future__ import annotations

import math
import re
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Permutation",
    "PermutationGroup",
    "StabilizerChain",
    "compose",
    "orbit",
    "group_order",
    "point_stabilizer",
    "membership_test",
    "elements",
    "is_primitive",
    "read_group_file",
    "write_group_file",
    "parse_generator_line",
]

DEFAULT_ELEMENT_BOUND = 10**6


class DegreeMismatchError(ValueError):
    """Two permutations of different degrees were combined."""


class ElementBoundExceeded(RuntimeError):
    """Group is larger than the configured element-enumeration bound."""


class Permutation:
    """A bijection of {0, ..., degree-1} stored as an image tuple."""

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        imgs = tuple(images)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError("images do not form a bijection of 0..%d" % (len(imgs) - 1))
        self.images = imgs

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        p = cls.__new__(cls)
        p.images = tuple(range(degree))
        return p

    @classmethod
    def from_cycles(cls, text: str, degree: int) -> "Permutation":
        """Parse 1-based disjoint-cycle notation like ``(1,2,3)(4,5)``."""
        images = list(range(degree))
        seen: set[int] = set()
        body = text.strip()
        if body in ("", "()"):
            return cls.identity(degree)
        if not re.fullmatch(r"(\(\s*\d+(\s*,\s*\d+)*\s*\)\s*)+", body):
            raise ValueError(f"malformed cycle notation: {text!r}")
        for cyc in re.findall(r"\(([^()]*)\)", body):
            pts = [int(tok) - 1 for tok in cyc.split(",")]
            for pt in pts:
                if not 0 <= pt < degree:
                    raise ValueError(f"point {pt + 1} out of range 1..{degree}")
                if pt in seen:
                    raise ValueError(f"point {pt + 1} repeated in {text!r}")
                seen.add(pt)
            for a, b in zip(pts, pts[1:]):
                images[a] = b
            images[pts[-1]] = pts[0]
        return cls(images)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Left-to-right product: apply self first, then other."""
        if len(self.images) != len(other.images):
            raise DegreeMismatchError(
                f"degree mismatch: {len(self.images)} vs {len(other.images)}"
            )
        oth = other.images
        p = Permutation.__new__(Permutation)
        p.images = tuple(oth[i] for i in self.images)
        return p

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        p = Permutation.__new__(Permutation)
        p.images = tuple(inv)
        return p

    def __pow__(self, n: int) -> "Permutation":
        if n < 0:
            return self.inverse() ** (-n)
        result = Permutation.identity(len(self.images))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def order(self) -> int:
        lengths = [len(c) for c in self.cycles()]
        return math.lcm(*lengths) if lengths else 1

    def cycles(self) -> list[list[int]]:
        """Nontrivial cycles, each starting at its least point."""
        out = []
        seen = set()
        for i in range(len(self.images)):
            if i in seen or self.images[i] == i:
                continue
            cyc = [i]
            j = self.images[i]
            while j != i:
                seen.add(j)
                cyc.append(j)
                j = self.images[j]
            out.append(cyc)
        return out

    def cycle_string(self) -> str:
        """1-based disjoint-cycle notation; identity prints as ``()``."""
        cycs = self.cycles()
        if not cycs:
            return "()"
        return "".join("(" + ",".join(str(p + 1) for p in c) + ")" for c in cycs)

    def moved_points(self) -> list[int]:
        return [i for i, j in enumerate(self.images) if i != j]

    def restrict(self, points: Sequence[int]) -> "Permutation":
        """Restriction to an invariant point set, relabelled by position."""
        pos = {p: i for i, p in enumerate(points)}
        try:
            return Permutation([pos[self.images[p]] for p in points])
        except KeyError:
            raise ValueError("point set is not invariant under the permutation")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({self.cycle_string()!r}, degree={self.degree})"


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Left-to-right product: compose(p, q)(i) = q(p(i))."""
    return p * q


class _Level:
    """One level of a stabilizer chain."""

    __slots__ = ("bpt", "gens", "transversal", "trans_inv", "orbit", "checked")

    def __init__(self, bpt: int, degree: int):
        self.bpt = bpt
        self.gens: list[Permutation] = []
        ident = Permutation.identity(degree)
        self.transversal: dict[int, Permutation] = {bpt: ident}
        self.trans_inv: dict[int, Permutation] = {bpt: ident}
        self.orbit: list[int] = [bpt]
        self.checked: set[tuple[int, int]] = set()


class StabilizerChain:
    """Deterministic incremental Schreier-Sims.

    Base points are chosen as the first point moved by the offending
    residue, after any caller-supplied prefix (``base_hint``) has been
    consumed.  The chain stays fully verified after every ``extend``.
    """

    def __init__(self, degree: int, base_hint: Sequence[int] = ()):
        self.degree = degree
        self.base: list[int] = []
        self.levels: list[_Level] = []
        self.strong: list[Permutation] = []
        for pt in base_hint:
            self._append_level(pt)

    def _append_level(self, pt: int) -> None:
        self.base.append(pt)
        self.levels.append(_Level(pt, self.degree))

    def order(self) -> int:
        n = 1
        for lev in self.levels:
            n *= len(lev.orbit)
        return n

    def sift(self, p: Permutation) -> tuple[Permutation, int]:
        """Reduce p through the chain; returns (residue, stuck level)."""
        r = p
        for j, lev in enumerate(self.levels):
            x = r.images[lev.bpt]
            t_inv = lev.trans_inv.get(x)
            if t_inv is None:
                return r, j
            if x != lev.bpt:
                r = r * t_inv
        return r, len(self.levels)

    def contains(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            raise DegreeMismatchError(
                f"degree mismatch: {p.degree} vs {self.degree}"
            )
        residue, _ = self.sift(p)
        return residue.is_identity()

    def extend(self, gen: Permutation) -> bool:
        """Add a generator; returns True if the group grew."""
        if gen.degree != self.degree:
            raise DegreeMismatchError(
                f"degree mismatch: {gen.degree} vs {self.degree}"
            )
        residue, _ = self.sift(gen)
        if residue.is_identity():
            return False
        j = self._add_strong(residue)
        self._close(j)
        return True

    def _add_strong(self, r: Permutation) -> int:
        """Record a sifted non-member; returns its deepest level."""
        j = 0
        while j < len(self.base) and r.images[self.base[j]] == self.base[j]:
            j += 1
        if j == len(self.base):
            for pt in r.moved_points():
                if pt not in self.base:
                    self._append_level(pt)
                    break
        self.strong.append(r)
        for m in range(j + 1):
            self.levels[m].gens.append(r)
        return j

    def _close(self, start: int) -> None:
        i = start
        while i >= 0:
            deeper = self._verify_level(i)
            if deeper is None:
                i -= 1
            else:
                i = deeper

    def _expand_orbit(self, lev: _Level) -> None:
        orbit = lev.orbit
        trans = lev.transversal
        k = 0
        while k < len(orbit):
            pt = orbit[k]
            t = trans[pt]
            for g in lev.gens:
                npt = g.images[pt]
                if npt not in trans:
                    u = t * g
                    trans[npt] = u
                    lev.trans_inv[npt] = u.inverse()
                    orbit.append(npt)
            k += 1

    def _verify_level(self, i: int) -> int | None:
        """Sift unchecked Schreier generators of level i.

        Returns the level at which a new strong generator was placed, or
        None once the level is fully verified.
        """
        lev = self.levels[i]
        self._expand_orbit(lev)
        for pt in lev.orbit:
            t = lev.transversal[pt]
            for gi, g in enumerate(lev.gens):
                if (pt, gi) in lev.checked:
                    continue
                schreier = t * g * self.levels[i].trans_inv[g.images[pt]]
                residue, _ = self._sift_from(i + 1, schreier)
                if residue.is_identity():
                    lev.checked.add((pt, gi))
                    continue
                return self._add_strong(residue)
        return None

    def _sift_from(self, start: int, p: Permutation) -> tuple[Permutation, int]:
        r = p
        for j in range(start, len(self.levels)):
            lev = self.levels[j]
            x = r.images[lev.bpt]
            t_inv = lev.trans_inv.get(x)
            if t_inv is None:
                return r, j
            if x != lev.bpt:
                r = r * t_inv
        return r, len(self.levels)

    def stabilizer_gens(self, i: int) -> list[Permutation]:
        """Strong generators fixing base[:i] pointwise."""
        if i >= len(self.levels):
            return []
        return list(self.levels[i].gens)

    def level_orbits(self, i: int, points: Iterable[int]) -> list[list[int]]:
        """Orbits of the level-i stabilizer on the given points."""
        gens = self.stabilizer_gens(i)
        remaining = list(points)
        member = set(remaining)
        out = []
        while remaining:
            seed = remaining[0]
            orb = [seed]
            seen = {seed}
            k = 0
            while k < len(orb):
                pt = orb[k]
                for g in gens:
                    npt = g.images[pt]
                    if npt not in seen:
                        seen.add(npt)
                        orb.append(npt)
                k += 1
            out.append(sorted(seen & member))
            member -= seen
            remaining = [p for p in remaining if p in member]
        return out

    def iter_elements(self) -> Iterator[Permutation]:
        """Every group element exactly once, deterministic order."""
        levels = [lev for lev in self.levels if len(lev.orbit) > 1]
        ident = Permutation.identity(self.degree)

        # g = (element of stabilizer) * (coset rep): recurse outside-in.
        def rec(i: int) -> Iterator[Permutation]:
            if i >= len(levels):
                yield ident
                return
            lev = levels[i]
            for pt in sorted(lev.orbit):
                t = lev.transversal[pt]
                for rest in rec(i + 1):
                    yield rest * t

        yield from rec(0)

    def random_element(self, rng) -> Permutation:
        g = Permutation.identity(self.degree)
        for lev in reversed(self.levels):
            pt = rng.choice(lev.orbit)
            g = g * lev.transversal[pt]
        return g


class PermutationGroup:
    """Finitely generated permutation group; immutable once the chain exists."""

    def __init__(
        self,
        generators: Iterable[Permutation],
        degree: int | None = None,
        base_hint: Sequence[int] = (),
    ):
        gens = [g for g in generators if not g.is_identity()]
        if degree is None:
            if not gens:
                raise ValueError("degree required for a generator-free group")
            degree = gens[0].degree
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatchError("generators have mixed degrees")
        self.degree = degree
        self.generators: tuple[Permutation, ...] = tuple(gens)
        self._base_hint = tuple(base_hint)
        self._chain: StabilizerChain | None = None

    @classmethod
    def trivial(cls, degree: int) -> "PermutationGroup":
        return cls([], degree=degree)

    @property
    def chain(self) -> StabilizerChain:
        if self._chain is None:
            chain = StabilizerChain(self.degree, self._base_hint)
            for g in self.generators:
                chain.extend(g)
            self._chain = chain
        return self._chain

    @property
    def order(self) -> int:
        return self.chain.order()

    def membership_test(self, p: Permutation) -> bool:
        return self.chain.contains(p)

    def __contains__(self, p: Permutation) -> bool:
        return self.membership_test(p)

    def orbit(self, point: int) -> list[int]:
        """Orbit of a point, breadth-first in generator order."""
        if not 0 <= point < self.degree:
            raise ValueError(f"point {point} out of range 0..{self.degree - 1}")
        orb = [point]
        seen = {point}
        k = 0
        while k < len(orb):
            pt = orb[k]
            for g in self.generators:
                npt = g.images[pt]
                if npt not in seen:
                    seen.add(npt)
                    orb.append(npt)
            k += 1
        return orb

    def orbits(self) -> list[list[int]]:
        """All orbits, ordered by least point."""
        seen: set[int] = set()
        out = []
        for pt in range(self.degree):
            if pt in seen:
                continue
            orb = self.orbit(pt)
            seen.update(orb)
            out.append(orb)
        return out

    def point_stabilizer(self, alpha: int) -> "PermutationGroup":
        """Stabilizer of a point, via a chain based at that point."""
        if not 0 <= alpha < self.degree:
            raise ValueError(f"point {alpha} out of range 0..{self.degree - 1}")
        chain = StabilizerChain(self.degree, base_hint=(alpha,))
        for g in self.generators:
            chain.extend(g)
        gens = chain.stabilizer_gens(1)
        stab = PermutationGroup(gens, degree=self.degree, base_hint=(alpha,))
        return stab

    def elements(self, bound: int = DEFAULT_ELEMENT_BOUND) -> Iterator[Permutation]:
        """Stream all elements; raises if the order exceeds the bound."""
        if self.order > bound:
            raise ElementBoundExceeded(
                f"group order {self.order} exceeds element bound {bound}"
            )
        return self.chain.iter_elements()

    def random_element(self, rng) -> Permutation:
        return self.chain.random_element(rng)

    def is_transitive(self) -> bool:
        return len(self.orbit(0)) == self.degree if self.degree else True

    def is_primitive(self) -> bool:
        """True iff the (transitive) action admits no nontrivial blocks."""
        n = self.degree
        if not self.is_transitive():
            raise ValueError("primitivity is defined for transitive actions only")
        if n <= 2:
            return True
        for beta in range(1, n):
            if self._minimal_block_size(0, beta) != n:
                return False
        return True

    def _minimal_block_size(self, a: int, b: int) -> int:
        """Size of the minimal block containing {a, b} (union-find closure)."""
        parent = list(range(self.degree))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        queue = [(a, b)]
        ra, rb = find(a), find(b)
        parent[rb] = ra
        while queue:
            x, y = queue.pop()
            for g in self.generators:
                gx, gy = find(g.images[x]), find(g.images[y])
                if gx != gy:
                    parent[gy] = gx
                    queue.append((gx, gy))
        root = find(a)
        return sum(1 for pt in range(self.degree) if find(pt) == root)

    def subgroup_of(self, other: "PermutationGroup") -> bool:
        """True iff every generator of self lies in other."""
        return self.degree == other.degree and all(
            other.membership_test(g) for g in self.generators
        )

    def __repr__(self) -> str:
        return f"PermutationGroup(degree={self.degree}, ngens={len(self.generators)})"


# Spec-facing functional aliases.

def orbit(G: PermutationGroup, point: int) -> list[int]:
    return G.orbit(point)


def group_order(G: PermutationGroup) -> int:
    return G.order


def point_stabilizer(G: PermutationGroup, alpha: int) -> PermutationGroup:
    return G.point_stabilizer(alpha)


def membership_test(G: PermutationGroup, p: Permutation) -> bool:
    return G.membership_test(p)


def elements(G: PermutationGroup, bound: int = DEFAULT_ELEMENT_BOUND) -> Iterator[Permutation]:
    return G.elements(bound)


def is_primitive(action) -> bool:
    """Primitivity of a transitive group or of a coset action's image."""
    group = getattr(action, "image_group", None)
    if callable(group):
        return action.image_group().is_primitive()
    return action.is_primitive()


# Fixture file format: line 1 is "degree N", then one generator per line in
# disjoint-cycle notation; blank lines and '#' comments are ignored.

def parse_generator_line(line: str, degree: int) -> Permutation:
    return Permutation.from_cycles(line, degree)


def read_group_file(path) -> PermutationGroup:
    degree = None
    gens: list[Permutation] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if degree is None:
                m = re.fullmatch(r"degree\s+(\d+)", line)
                if not m:
                    raise ValueError(f"{path}: first line must be 'degree N', got {line!r}")
                degree = int(m.group(1))
                continue
            gens.append(parse_generator_line(line, degree))
    if degree is None:
        raise ValueError(f"{path}: empty fixture file")
    if not gens:
        return PermutationGroup.trivial(degree)
    return PermutationGroup(gens, degree=degree)


def write_group_file(path, G: PermutationGroup, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"degree {G.degree}\n")
        for g in G.generators:
            fh.write(g.cycle_string() + "\n")
