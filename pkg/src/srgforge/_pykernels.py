"""Pure-Python bitset kernels: the fallback backend for srgforge.kernels.

Adjacency is a sequence of Python ints; bit v of rows[u] is set iff u ~ v.
The compiled extension (srgforge._kernels) implements the same interface
over uint64 words.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def make_ctx(rows, n):
    """Adjacency context reused across many kernel calls."""
    return (tuple(rows), n)


def ctx_rows(ctx):
    return ctx[0]


# -- strongly regular check ------------------------------------------------

SRG_OK = 0
SRG_NOT_REGULAR = 1
SRG_LAMBDA_VARIES = 2
SRG_MU_VARIES = 3
SRG_DEGENERATE = 4  # complete or empty


def srg_check(rows, n):
    """Classify common-neighbour structure.

    Returns (code, k, lam, mu); lam/mu are -1 when undefined.  mu == 0 is
    reported with code SRG_OK and left to the caller's filter.
    """
    if n == 0:
        return (SRG_DEGENERATE, -1, -1, -1)
    k = rows[0].bit_count()
    for u in range(1, n):
        if rows[u].bit_count() != k:
            return (SRG_NOT_REGULAR, -1, -1, -1)
    if k == 0 or k == n - 1:
        return (SRG_DEGENERATE, k, -1, -1)
    lam = -1
    mu = -1
    for u in range(n):
        ru = rows[u]
        rest = ru >> (u + 1)
        while rest:
            lsb = rest & -rest
            v = u + 1 + lsb.bit_length() - 1
            rest ^= lsb
            c = (ru & rows[v]).bit_count()
            if lam < 0:
                lam = c
            elif c != lam:
                return (SRG_LAMBDA_VARIES, k, lam, -1)
        nonadj = ~ru & ((1 << n) - 1) & ~(1 << u)
        nonadj >>= u + 1
        while nonadj:
            lsb = nonadj & -nonadj
            v = u + 1 + lsb.bit_length() - 1
            nonadj ^= lsb
            c = (ru & rows[v]).bit_count()
            if mu < 0:
                mu = c
            elif c != mu:
                return (SRG_MU_VARIES, k, lam, mu)
    return (SRG_OK, k, lam, mu)


# -- invariant profiles ----------------------------------------------------

def common_neighbor_profiles(rows, n):
    """Histograms of |N(u) & N(v)| over edges and over non-adjacent pairs."""
    edge_hist: dict[int, int] = {}
    non_hist: dict[int, int] = {}
    full = (1 << n) - 1
    for u in range(n):
        ru = rows[u]
        adj = ru >> (u + 1)
        base = u + 1
        while adj:
            lsb = adj & -adj
            v = base + lsb.bit_length() - 1
            adj ^= lsb
            c = (ru & rows[v]).bit_count()
            edge_hist[c] = edge_hist.get(c, 0) + 1
        non = (~ru & full & ~(1 << u)) >> (u + 1)
        while non:
            lsb = non & -non
            v = base + lsb.bit_length() - 1
            non ^= lsb
            c = (ru & rows[v]).bit_count()
            non_hist[c] = non_hist.get(c, 0) + 1
    return edge_hist, non_hist


def _pair_subgraph_edge_hist(rows, n, adjacent):
    """Histogram over vertex pairs of the edge count inside N(u) & N(v)."""
    hist: dict[int, int] = {}
    full = (1 << n) - 1
    for u in range(n):
        ru = rows[u]
        if adjacent:
            pool = ru >> (u + 1)
        else:
            pool = (~ru & full & ~(1 << u)) >> (u + 1)
        base = u + 1
        while pool:
            lsb = pool & -pool
            v = base + lsb.bit_length() - 1
            pool ^= lsb
            cn = ru & rows[v]
            e2 = 0
            rest = cn
            while rest:
                l2 = rest & -rest
                w = l2.bit_length() - 1
                rest ^= l2
                e2 += (rows[w] & cn).bit_count()
            hist[e2 // 2] = hist.get(e2 // 2, 0) + 1
    return hist


def lambda_graph_edge_profile(rows, n):
    """Per-edge edge counts inside the common neighbourhood (K4s per edge)."""
    return _pair_subgraph_edge_hist(rows, n, adjacent=True)


def mu_graph_edge_profile(rows, n):
    """Per-non-edge edge counts inside the common neighbourhood."""
    return _pair_subgraph_edge_hist(rows, n, adjacent=False)


# -- clique counting -------------------------------------------------------

def degeneracy_order(rows, n):
    """Vertex order by repeated minimum-degree removal."""
    alive = (1 << n) - 1
    degs = [rows[u].bit_count() for u in range(n)]
    order = []
    for _ in range(n):
        best = -1
        best_d = n + 1
        for u in range(n):
            if alive >> u & 1 and degs[u] < best_d:
                best = u
                best_d = degs[u]
        order.append(best)
        alive ^= 1 << best
        rest = rows[best] & alive
        while rest:
            lsb = rest & -rest
            w = lsb.bit_length() - 1
            rest ^= lsb
            degs[w] -= 1
    return order


def count_cliques(rows, n, size):
    """Exact number of complete subgraphs with `size` vertices."""
    if size < 1:
        raise ValueError("clique size must be >= 1")
    if size == 1:
        return n
    order = degeneracy_order(rows, n)
    pos = [0] * n
    for i, u in enumerate(order):
        pos[u] = i
    # relabel so that position == vertex index; keep only forward edges
    rel = [0] * n
    for u in range(n):
        ru = rows[u]
        m = 0
        while ru:
            lsb = ru & -ru
            w = lsb.bit_length() - 1
            ru ^= lsb
            m |= 1 << pos[w]
        rel[pos[u]] = m
    forward = [rel[u] & ~((1 << (u + 1)) - 1) for u in range(n)]

    need0 = size - 1

    def rec(cand: int, need: int) -> int:
        if need == 1:
            return cand.bit_count()
        total = 0
        while cand:
            if cand.bit_count() < need:
                break
            lsb = cand & -cand
            u = lsb.bit_length() - 1
            cand ^= lsb
            total += rec(cand & forward[u], need - 1)
        return total

    total = 0
    for u in range(n):
        total += rec(forward[u], need0)
    return total


# -- selection scan --------------------------------------------------------

def selection_scan(R, class_labels, class_points, trivial, rank):
    """Scan all unions of pairing classes for the strongly regular condition.

    R[a, b, j] = sum over labels i in class a, i' in class b of the
    intersection number p^j_{i,i'}.  Returns a list of
    (class_mask, k, lam, mu) for every union whose common-neighbour counts
    are constant on selected labels (lam) and on unselected nontrivial
    labels (mu).  Unions covering every class (complete graph) are skipped.
    """
    nc = len(class_labels)
    cvec = np.zeros(rank, dtype=np.int64)
    sel = np.zeros(rank, dtype=bool)
    nontrivial = np.ones(rank, dtype=bool)
    nontrivial[trivial] = False
    in_set = [False] * nc
    members: list[int] = []
    k_cur = 0
    out = []
    full_mask = (1 << nc) - 1
    for m in range(1, 1 << nc):
        a = (m & -m).bit_length() - 1  # Gray-code toggle position
        if in_set[a]:
            members.remove(a)
            delta = R[a, a].copy()
            for b in members:
                delta += R[a, b]
                delta += R[b, a]
            cvec -= delta
            in_set[a] = False
            sel[class_labels[a]] = False
            k_cur -= class_points[a]
        else:
            delta = R[a, a].copy()
            for b in members:
                delta += R[a, b]
                delta += R[b, a]
            cvec += delta
            members.append(a)
            in_set[a] = True
            sel[class_labels[a]] = True
            k_cur += class_points[a]
        gray = m ^ (m >> 1)
        if gray == full_mask:
            continue
        a_vals = cvec[sel & nontrivial]
        if a_vals.size == 0 or not (a_vals == a_vals[0]).all():
            continue
        b_vals = cvec[~sel & nontrivial]
        if b_vals.size and not (b_vals == b_vals[0]).all():
            continue
        lam = int(a_vals[0])
        mu = int(b_vals[0]) if b_vals.size else -1
        out.append((gray, k_cur, lam, mu))
    return out


# -- refinement / isomorphism helpers --------------------------------------

def counts_into(ctx, verts, mask):
    """For each vertex, the number of its neighbours inside the mask."""
    rows = ctx[0]
    return [(rows[v] & mask).bit_count() for v in verts]


def is_automorphism(rows, n, images):
    """Does the vertex map preserve adjacency?"""
    for u in range(n):
        ru = rows[u]
        target = rows[images[u]]
        while ru:
            lsb = ru & -ru
            v = lsb.bit_length() - 1
            ru ^= lsb
            if not target >> images[v] & 1:
                return False
    return True


def leaf_bytes(rows, n, order):
    """Adjacency matrix in the given vertex order, packed row-major."""
    nb = (n + 7) // 8
    out = bytearray(n * nb)
    inv = [0] * n
    for i, u in enumerate(order):
        inv[u] = i
    for i, u in enumerate(order):
        ru = rows[u]
        acc = 0
        while ru:
            lsb = ru & -ru
            v = lsb.bit_length() - 1
            ru ^= lsb
            acc |= 1 << inv[v]
        out[i * nb:(i + 1) * nb] = acc.to_bytes(nb, "little")
    return bytes(out)
