"""Graph core: SRG recognition, feasibility, complement, cliques, graph6.

Graphs are simple and undirected, stored as dense bitset rows (Python
ints): bit v of rows[u] is set iff u ~ v.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "Graph",
    "SrgParams",
    "EigenData",
    "is_strongly_regular",
    "srg_feasibility",
    "complement",
    "count_cliques",
    "invariant_fingerprint",
    "graph6_encode",
    "graph6_decode",
    "triangular_graph",
    "cycle_graph",
    "complete_graph",
    "adjacency_identity_holds",
    "InfeasibleParameters",
]


class InfeasibleParameters(ValueError):
    """SRG parameters violate a counting or integrality condition."""


@dataclass(frozen=True)
class SrgParams:
    v: int
    k: int
    lam: int
    mu: int

    def counting_identity_holds(self) -> bool:
        """k(k - lam - 1) == (v - k - 1) mu."""
        return self.k * (self.k - self.lam - 1) == (self.v - self.k - 1) * self.mu

    def complement_params(self) -> "SrgParams":
        v, k, lam, mu = self.v, self.k, self.lam, self.mu
        return SrgParams(v, v - k - 1, v - 2 * k + mu - 2, v - 2 * k + lam)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.v, self.k, self.lam, self.mu)

    def __str__(self) -> str:
        return f"({self.v},{self.k},{self.lam},{self.mu})"


@dataclass(frozen=True)
class EigenData:
    """Restricted eigenvalues r > s and their multiplicities f, g."""

    r: float
    s: float
    f: int
    g: int
    conference: bool


class Graph:
    """Simple undirected graph on vertices 0..v-1, bitset adjacency rows."""

    __slots__ = ("v", "rows", "_words")

    def __init__(self, v: int, rows, validate: bool = True):
        self.v = v
        self.rows = tuple(rows)
        self._words = None
        if validate:
            if len(self.rows) != v:
                raise ValueError("row count does not match vertex count")
            limit = 1 << v
            for u, r in enumerate(self.rows):
                if r >> u & 1:
                    raise ValueError(f"loop at vertex {u}")
                if r >= limit or r < 0:
                    raise ValueError(f"row {u} has bits outside 0..{v - 1}")
            for u in range(v):
                ru = self.rows[u]
                rest = ru >> (u + 1)
                while rest:
                    lsb = rest & -rest
                    w = u + 1 + lsb.bit_length() - 1
                    rest ^= lsb
                    if not self.rows[w] >> u & 1:
                        raise ValueError(f"asymmetric adjacency at ({u},{w})")

    @classmethod
    def from_edges(cls, v: int, edges) -> "Graph":
        rows = [0] * v
        for a, b in edges:
            if a == b:
                raise ValueError(f"loop at vertex {a}")
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(v, rows, validate=False)

    @classmethod
    def from_numpy(cls, mat: np.ndarray) -> "Graph":
        v = mat.shape[0]
        rows = []
        for u in range(v):
            acc = 0
            for w in np.flatnonzero(mat[u]):
                acc |= 1 << int(w)
            rows.append(acc)
        return cls(v, rows)

    def to_numpy(self, dtype=np.int64) -> np.ndarray:
        out = np.zeros((self.v, self.v), dtype=dtype)
        for u in range(self.v):
            r = self.rows[u]
            while r:
                lsb = r & -r
                out[u, lsb.bit_length() - 1] = 1
                r ^= lsb
        return out

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def degree(self, u: int) -> int:
        return self.rows[u].bit_count()

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(r.bit_count() for r in self.rows))

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def edges(self):
        for u in range(self.v):
            rest = self.rows[u] >> (u + 1)
            while rest:
                lsb = rest & -rest
                yield (u, u + 1 + lsb.bit_length() - 1)
                rest ^= lsb

    def permuted(self, images) -> "Graph":
        """Relabel: vertex u becomes images[u]."""
        imgs = list(images)
        rows = [0] * self.v
        for u in range(self.v):
            r = self.rows[u]
            acc = 0
            while r:
                lsb = r & -r
                acc |= 1 << imgs[lsb.bit_length() - 1]
                r ^= lsb
            rows[imgs[u]] = acc
        return Graph(self.v, rows, validate=False)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.v == other.v
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.v, self.rows))

    def __repr__(self) -> str:
        return f"Graph(v={self.v}, edges={self.num_edges})"


# -- construction helpers used by tests and golden checks -------------------

def complete_graph(n: int) -> Graph:
    full = (1 << n) - 1
    return Graph(n, [full ^ (1 << u) for u in range(n)], validate=False)


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def triangular_graph(n: int) -> Graph:
    """T(n): vertices are 2-subsets of an n-set, adjacent iff intersecting."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    idx = {p: i for i, p in enumerate(pairs)}
    edges = []
    for a, pa in enumerate(pairs):
        for b in range(a + 1, len(pairs)):
            pb = pairs[b]
            if set(pa) & set(pb):
                edges.append((a, b))
    return Graph.from_edges(len(pairs), edges)


# -- strongly regular recognition and feasibility ---------------------------

def is_strongly_regular(g: Graph, allow_mu_zero: bool = False) -> SrgParams | None:
    """SRG parameters of g, or None.

    Complete and empty graphs are always rejected; mu == 0 (disjoint
    cliques) is rejected unless allow_mu_zero is set.
    """
    code, k, lam, mu = kernels.srg_check(g.rows, g.v)
    if code != kernels.SRG_OK:
        return None
    if mu == 0 and not allow_mu_zero:
        return None
    return SrgParams(g.v, k, lam, mu)


def srg_feasibility(p: SrgParams) -> EigenData:
    """Eigenvalues and multiplicities; raises InfeasibleParameters."""
    if not p.counting_identity_holds():
        raise InfeasibleParameters(f"counting identity fails for {p}")
    v, k, lam, mu = p.as_tuple()
    disc = (lam - mu) ** 2 + 4 * (k - mu)
    if disc < 0:
        raise InfeasibleParameters(f"negative discriminant for {p}")
    num = 2 * k + (v - 1) * (lam - mu)
    if num == 0:
        # conference case: multiplicities are equal and need no integral sqrt
        if (v - 1) % 2:
            raise InfeasibleParameters(f"conference case needs odd v for {p}")
        f = g = (v - 1) // 2
        root = math.sqrt(disc)
        return EigenData(
            r=(lam - mu + root) / 2, s=(lam - mu - root) / 2, f=f, g=g, conference=True
        )
    root = math.isqrt(disc)
    if root * root != disc:
        raise InfeasibleParameters(f"discriminant {disc} is not a square for {p}")
    r2, rem2 = divmod(lam - mu + root, 2)
    s2, rem3 = divmod(lam - mu - root, 2)
    if rem2 or rem3:
        raise InfeasibleParameters(f"non-integral eigenvalues for {p}")
    fg_num = (v - 1) * root - num
    f2, rem = divmod(fg_num, 2 * root)
    if rem:
        raise InfeasibleParameters(f"non-integral multiplicity for {p}")
    f = f2
    g = v - 1 - f
    if f < 0 or g < 0:
        raise InfeasibleParameters(f"negative multiplicity for {p}")
    if k + f * r2 + g * s2 != 0:
        raise InfeasibleParameters(f"trace check fails for {p}")
    return EigenData(r=r2, s=s2, f=f, g=g, conference=False)


def complement(g: Graph) -> Graph:
    full = (1 << g.v) - 1
    rows = [(~g.rows[u]) & full & ~(1 << u) for u in range(g.v)]
    return Graph(g.v, rows, validate=False)


def adjacency_identity_holds(
    g: Graph, p: SrgParams, sample_rows: int | None = None, rng=None
) -> bool:
    """Exact check of A^2 = kI + lam*A + mu*(J - I - A).

    With sample_rows set, only that many random rows of A^2 are checked
    (for the large graphs); otherwise the full matrix is verified.
    """
    A = g.to_numpy(dtype=np.int64)
    v, k, lam, mu = p.as_tuple()
    eye = np.eye(v, dtype=np.int64)
    expected = k * eye + lam * A + mu * (np.ones((v, v), dtype=np.int64) - eye - A)
    if sample_rows is None or sample_rows >= v:
        return bool((A @ A == expected).all())
    idx = sorted(rng.sample(range(v), sample_rows))
    return bool((A[idx] @ A == expected[idx]).all())


# -- cliques ----------------------------------------------------------------

def count_cliques(g: Graph, size: int) -> int:
    """Exact count of complete subgraphs on `size` vertices."""
    if size < 1:
        raise ValueError("clique size must be >= 1")
    return kernels.count_cliques(g.rows, g.v, size)


# -- isomorphism-invariant fingerprint --------------------------------------

def _refinement_signature(g: Graph) -> tuple:
    """Cell-size multiset of the coarsest equitable refinement of degrees."""
    colors = [r.bit_count() for r in g.rows]
    while True:
        sigs = []
        for u in range(g.v):
            cnt: dict[int, int] = {}
            r = g.rows[u]
            while r:
                lsb = r & -r
                w = lsb.bit_length() - 1
                r ^= lsb
                cnt[colors[w]] = cnt.get(colors[w], 0) + 1
            sigs.append((colors[u], tuple(sorted(cnt.items()))))
        relabel = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [relabel[s] for s in sigs]
        if new == colors:
            break
        colors = new
    sizes: dict[int, int] = {}
    for c in colors:
        sizes[c] = sizes.get(c, 0) + 1
    return tuple(sorted(sizes.values()))


def fingerprint_levels(g: Graph) -> list:
    """Invariant layers, cheap to expensive; equal prefixes are necessary
    for isomorphism."""
    lv0 = ("deg", g.v, g.degree_sequence())
    edge_hist, non_hist = kernels.common_neighbor_profiles(g.rows, g.v)
    lv1 = ("cn", tuple(sorted(edge_hist.items())), tuple(sorted(non_hist.items())))
    lv2 = ("ref", _refinement_signature(g))
    lam_prof = kernels.lambda_graph_edge_profile(g.rows, g.v)
    mu_prof = kernels.mu_graph_edge_profile(g.rows, g.v)
    lv3 = ("k4", tuple(sorted(lam_prof.items())), tuple(sorted(mu_prof.items())))
    return [lv0, lv1, lv2, lv3]


def invariant_fingerprint(g: Graph) -> str:
    """Hex digest of the invariant layers; equality is necessary for
    isomorphism, inequality certifies non-isomorphism."""
    payload = repr(fingerprint_levels(g)).encode()
    return hashlib.sha256(payload).hexdigest()


# -- graph6 codec ------------------------------------------------------------

def _g6_size_bytes(n: int) -> bytes:
    if n < 0:
        raise ValueError("negative vertex count")
    if n <= 62:
        return bytes([n + 63])
    if n <= 258047:
        return bytes([126, ((n >> 12) & 63) + 63, ((n >> 6) & 63) + 63, (n & 63) + 63])
    if n <= 68719476735:
        return bytes(
            [126, 126]
            + [((n >> shift) & 63) + 63 for shift in (30, 24, 18, 12, 6, 0)]
        )
    raise ValueError("vertex count too large for graph6")


def graph6_encode(g: Graph) -> str:
    """Standard graph6 line (no trailing newline)."""
    n = g.v
    head = _g6_size_bytes(n)
    bits = []
    for j in range(1, n):
        col = g.rows[j]
        for i in range(j):
            bits.append(col >> i & 1)
    body = bytearray()
    for i in range(0, len(bits), 6):
        chunk = bits[i:i + 6]
        chunk += [0] * (6 - len(chunk))
        val = 0
        for b in chunk:
            val = val << 1 | b
        body.append(val + 63)
    return (head + bytes(body)).decode("ascii")


def graph6_decode(text: str) -> Graph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    data = s.encode("ascii")
    if not data:
        raise ValueError("empty graph6 string")
    if any(b < 63 or b > 126 for b in data):
        raise ValueError("graph6 byte out of range")
    if data[0] != 126:
        n = data[0] - 63
        rest = data[1:]
    elif len(data) >= 2 and data[1] != 126:
        if len(data) < 4:
            raise ValueError("truncated graph6 size")
        n = ((data[1] - 63) << 12) | ((data[2] - 63) << 6) | (data[3] - 63)
        rest = data[4:]
    else:
        if len(data) < 8:
            raise ValueError("truncated graph6 size")
        n = 0
        for b in data[2:8]:
            n = n << 6 | (b - 63)
        rest = data[8:]
    nbits = n * (n - 1) // 2
    if len(rest) != (nbits + 5) // 6:
        raise ValueError(
            f"graph6 body length {len(rest)} does not match n={n}"
        )
    bits = []
    for b in rest:
        val = b - 63
        bits.extend((val >> shift) & 1 for shift in (5, 4, 3, 2, 1, 0))
    if any(bits[nbits:]):
        raise ValueError("nonzero padding bits in graph6 body")
    rows = [0] * n
    pos = 0
    for j in range(1, n):
        for i in range(j):
            if bits[pos]:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
            pos += 1
    return Graph(n, rows, validate=False)
