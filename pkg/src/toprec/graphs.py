"""Diagram expansion of W_{k+1}^(g): trivalent graphs on a planar binary
skeleton tree, their enumeration, a rule checker, and graph weights.

Encoding. Inner vertices are numbered in preorder with the left child first.
Each vertex has two outgoing slots, 0 (left, carries q) and 1 (right, carries
q-bar). parent[i] is the index of the parent vertex (-1 for the root p) and
side[i] the parent slot the arrowed edge leaves from. Non-arrowed edges join
two endpoints, ("v", i, s) for a vertex slot or ("p", j) for leaf p_j.
"""
from __future__ import annotations

import itertools
import os
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import mpq

from .curve import SpectralCurve
from .recursion import (LocalKernel, MultiDifferential, _max_effective, _q_side,
                        _zero, bergmann, contract_with_kernel)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class DiagramGraph:
    k: int  # number of leaves p_1..p_k
    g: int
    parent: tuple
    side: tuple
    edges: tuple  # sorted tuple of sorted endpoint pairs

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    def children(self, i: int) -> dict:
        return {self.side[c]: c for c in range(self.n_vertices) if self.parent[c] == i}

    def ancestors(self, i: int) -> list:
        out = []
        while self.parent[i] != -1:
            i = self.parent[i]
            out.append(i)
        return out

    def slot_contents(self) -> dict:
        """{(i, s): ("arrow", child) | ("edge", other endpoint)}."""
        out = {}
        for c, (par, s) in enumerate(zip(self.parent, self.side)):
            if par >= 0:
                out[(par, s)] = ("arrow", c)
        for a, b in self.edges:
            if a[0] == "v":
                out[(a[1], a[2])] = ("edge", b)
            if b[0] == "v":
                out[(b[1], b[2])] = ("edge", a)
        return out

    def encoding(self) -> tuple:
        return (self.k, self.g, self.parent, self.side, self.edges)

    def to_text(self) -> str:
        """Adjacency list: one line per edge with its kind."""
        lines = [f"G k={self.k} g={self.g}"]
        for c, (par, s) in enumerate(zip(self.parent, self.side)):
            src = "p" if par < 0 else f"v{par}.{'LR'[s]}"
            lines.append(f"arrow {src} -> v{c}")
        for a, b in self.edges:
            lines.append(f"line {_endpoint_text(a)} -- {_endpoint_text(b)}")
        return "\n".join(lines)


def _endpoint_text(e) -> str:
    return f"p{e[1]}" if e[0] == "p" else f"v{e[1]}.{'LR'[e[2]]}"


def _edge(a, b) -> tuple:
    return tuple(sorted((a, b)))


# ------------------------------------------------------------ enumeration


@lru_cache(maxsize=None)
def planar_binary_trees(n: int) -> tuple:
    """All planar binary trees with n nodes as nested (left, right) tuples, None for absent."""
    if n == 0:
        return (None,)
    out = []
    for nl in range(n):
        for left in planar_binary_trees(nl):
            for right in planar_binary_trees(n - 1 - nl):
                out.append((left, right))
    return tuple(out)


def _flatten(tree) -> tuple[tuple, tuple]:
    parent, side = [], []

    def walk(node, par, s):
        idx = len(parent)
        parent.append(par)
        side.append(s)
        for child_side, child in enumerate(node):
            if child is not None:
                walk(child, idx, child_side)

    walk(tree, -1, 0)
    return tuple(parent), tuple(side)


def _is_ancestor(parent, a: int, d: int) -> bool:
    while d != -1:
        d = parent[d]
        if d == a:
            return True
    return False


def _pairings(items: list):
    if not items:
        yield []
        return
    first = items[0]
    for j in range(1, len(items)):
        rest = items[1:j] + items[j + 1:]
        for tail in _pairings(rest):
            yield [(first, items[j])] + tail


def _inner_pair_ok(parent, a, b) -> bool:
    (i, _), (j, _) = a, b
    return i == j or _is_ancestor(parent, i, j) or _is_ancestor(parent, j, i)


def _left_rule_ok(parent, pairs) -> bool:
    """A vertex with an inner line to a descendant sends it from the right slot,
    so its arrowed child is the left one."""
    for a, b in pairs:
        for (i, si), (j, _) in ((a, b), (b, a)):
            if i != j and _is_ancestor(parent, i, j) and si != 1:
                return False
    return True


def enumerate_graphs(k: int, g: int) -> list[DiagramGraph]:
    """All graphs of G_{k+1}^(g)(p, p_1..p_k) in canonical order."""
    if k < 0 or g < 0 or k + 2 * g < 2:
        raise GraphError(f"G_{k + 1}^({g}) needs k + 2g >= 2")
    n = 2 * g + k - 1
    out = set()
    for tree in planar_binary_trees(n):
        parent, side = _flatten(tree)
        used = {(parent[c], side[c]) for c in range(1, n)}
        free = [(i, s) for i in range(n) for s in (0, 1) if (i, s) not in used]
        for leaf_slots in itertools.permutations(free, k):
            rest = [f for f in free if f not in leaf_slots]
            for pairs in _pairings(rest):
                if not all(_inner_pair_ok(parent, a, b) for a, b in pairs):
                    continue
                if not _left_rule_ok(parent, pairs):
                    continue
                edges = [_edge(("v",) + slot, ("p", j + 1)) for j, slot in enumerate(leaf_slots)]
                edges += [_edge(("v",) + a, ("v",) + b) for a, b in pairs]
                out.add(DiagramGraph(k, g, parent, side, tuple(sorted(edges))))
    return sorted(out, key=lambda G: G.encoding())


def count_graphs(k: int, g: int) -> int:
    return len(enumerate_graphs(k, g))


# ------------------------------------------------------------ rule checker


def rule_violations(G: DiagramGraph) -> list[int]:
    """Numbers of the defining rules that G breaks (empty for a valid graph)."""
    bad = []
    k, g, n = G.k, G.g, G.n_vertices
    if n != 2 * g + k - 1:
        bad.append(1)
    leaves = [e for edge in G.edges for e in edge if e[0] == "p"]
    if sorted(x[1] for x in leaves) != list(range(1, k + 1)):
        bad.append(3)
    n_arrow = sum(1 for par in G.parent)  # one incoming arrow per vertex, the root edge included
    if n_arrow + len(G.edges) != 3 * g + 2 * k - 1:
        bad.append(4)
    if len(G.edges) != k + g or n_arrow != 2 * g + k - 1:
        bad.append(5)
    if n == 0 or G.parent.count(-1) != 1 or G.parent[0] != -1:
        bad.append(6)
    if any(a[0] == "p" and b[0] == "p" for a, b in G.edges):
        bad.append(7)
    # spanning tree: parents precede children, each parent slot used once
    slots = Counter((G.parent[c], G.side[c]) for c in range(n) if G.parent[c] >= 0)
    if any(G.parent[c] >= c for c in range(1, n)) or any(v > 1 for v in slots.values()):
        bad.append(8)
    # trivalence: every vertex slot carries exactly one edge
    ends = Counter((e[1], e[2]) for edge in G.edges for e in edge if e[0] == "v")
    for i in range(n):
        for s in (0, 1):
            if ends[(i, s)] + slots[(i, s)] != 1:
                bad.append(2)
                break
        else:
            continue
        break
    inner = [(a, b) for a, b in G.edges if a[0] == "v" and b[0] == "v"]
    if len(inner) != g or any(not _inner_pair_ok(G.parent, a[1:], b[1:]) for a, b in inner):
        bad.append(9)
    for i in range(n):
        ch = G.children(i)
        to_desc = [e for a, b in inner for e, o in ((a, b), (b, a))
                   if e[1] == i and o[1] != i and _is_ancestor(G.parent, i, o[1])]
        if ch and to_desc and 0 not in ch:
            bad.append(10)
            break
    return sorted(set(bad))


def is_valid(G: DiagramGraph) -> bool:
    return not rule_violations(G)


# ------------------------------------------------------------ leaf removal


def _canonicalize(k, g, parent, side, edges, with_map: bool = False):
    """Renumber vertices in preorder (left first)."""
    n = len(parent)
    kids = defaultdict(dict)
    root = None
    for c in range(n):
        if parent[c] == -1:
            root = c
        else:
            kids[parent[c]][side[c]] = c
    order = []

    def walk(v):
        order.append(v)
        for s in (0, 1):
            if s in kids[v]:
                walk(kids[v][s])

    walk(root)
    new = {old: i for i, old in enumerate(order)}
    par = tuple(-1 if parent[o] == -1 else new[parent[o]] for o in order)
    sd = tuple(side[o] for o in order)

    def ep(e):
        return ("v", new[e[1]], e[2]) if e[0] == "v" else e

    es = tuple(sorted(_edge(ep(a), ep(b)) for a, b in edges))
    G = DiagramGraph(k, g, par, sd, es)
    return (G, new) if with_map else G


def remove_last_leaf(G: DiagramGraph) -> tuple[DiagramGraph, tuple]:
    """Collapse leaf p_k and its vertex.

    Returns the smaller graph and the edge of it that the removed vertex sat
    on: ("arrow", child) for an arrowed edge, ("line", endpoint, endpoint) otherwise.
    """
    k = G.k
    (slot_edge,) = [e for e in G.edges if ("p", k) in e]
    v_end = slot_edge[0] if slot_edge[0][0] == "v" else slot_edge[1]
    v, s_leaf = v_end[1], v_end[2]
    other = 1 - s_leaf
    kind, what = G.slot_contents()[(v, other)]
    parent, side = list(G.parent), list(G.side)
    edges = [e for e in G.edges if e != slot_edge]
    par, ps = parent[v], side[v]
    if kind == "arrow":
        parent[what], side[what] = par, ps
    else:
        if par == -1:
            raise GraphError("leaf vertex under the root with a line sibling cannot collapse")
        old = _edge(("v", v, other), what)
        edges.remove(old)
        edges.append(_edge(("v", par, ps), what))
    keep = [i for i in range(len(parent)) if i != v]
    remap = {old: i for i, old in enumerate(keep)}
    parent2 = tuple(-1 if parent[i] == -1 else remap[parent[i]] for i in keep)
    side2 = tuple(side[i] for i in keep)

    def ep(e):
        return ("v", remap[e[1]], e[2]) if e[0] == "v" else e

    edges2 = [_edge(ep(a), ep(b)) for a, b in edges]
    smaller, new = _canonicalize(k - 1, G.g, parent2, side2, edges2, with_map=True)

    def fin(e):
        return ("v", new[remap[e[1]]], e[2]) if e[0] == "v" else e

    if kind == "arrow":
        site = ("arrow", new[remap[what]])
    else:
        site = ("line",) + _edge(fin(("v", par, ps)), fin(what))
    return smaller, site


@dataclass
class AddLegReport:
    k: int
    g: int
    edges_per_graph: int  # 3g + 2k - 1
    preimages: dict  # encoding of G' -> number of graphs collapsing onto it
    distinct_edges: dict  # encoding of G' -> number of distinct insertion sites

    @property
    def ok(self) -> bool:
        e = self.edges_per_graph
        return (all(v == e for v in self.distinct_edges.values())
                and all(v == 2 * e for v in self.preimages.values()))


def add_leg_map_check(k: int, g: int) -> AddLegReport:
    """Collapse p_{k+1} on every graph of G_{k+2}^(g).

    Every graph of G_{k+1}^(g) is hit from each of its 3g + 2k - 1 edges, and
    from each edge twice: the new leaf may sit on either side of the inserted
    vertex, a distinction the planar encoding keeps.
    """
    small = enumerate_graphs(k, g)
    big = enumerate_graphs(k + 1, g)
    hits = Counter()
    sites = defaultdict(set)
    known = {G.encoding() for G in small}
    for G in big:
        H, site = remove_last_leaf(G)
        if H.encoding() not in known:
            raise GraphError(f"collapse left G_{k + 1}^({g}):\n{H.to_text()}")
        hits[H.encoding()] += 1
        sites[H.encoding()].add(site)
    edges = 3 * g + 2 * k - 1
    return AddLegReport(k, g, edges, {e: hits[e] for e in known}, {e: len(sites[e]) for e in known})


# ------------------------------------------------------------ weights


class GraphWeigher:
    """Weights w(G) as pole-basis tensors on one curve."""

    def __init__(self, curve: SpectralCurve):
        self.curve = curve
        self.locations = curve.branch_locations
        self.kernels = [LocalKernel(curve, i) for i in range(len(self.locations))]

    def weight(self, G: DiagramGraph) -> MultiDifferential:
        contents = G.slot_contents()
        md, legs = self._vertex(G, 0, contents)
        order = [legs.index(("p", j)) for j in range(1, G.k + 1)]
        if sorted(order) != list(range(len(legs))):
            raise GraphError("dangling legs at the root")
        perm = [0] + [1 + i for i in order]
        terms = {tuple(key[p] for p in perm): c for key, c in md.items()}
        return MultiDifferential.from_terms(G.k + 1, G.g, terms, self.locations)

    def _factor(self, G, i, s, contents):
        """The form hanging off slot (i, s): ('md', MD, legs) or ('line', endpoint) or ('down',)."""
        kind, what = contents[(i, s)]
        if kind == "arrow":
            md, legs = self._vertex(G, what, contents)
            return ("md", md, legs)
        if what[0] == "v" and what[1] == i:
            return ("loop",)
        if what[0] == "v" and _is_ancestor(G.parent, i, what[1]):
            return ("down",)
        return ("md", bergmann(self.locations), [what])

    def _vertex(self, G, i, contents):
        """(terms keyed (incoming slot, legs...), legs) for the subtree below vertex i."""
        f0 = self._factor(G, i, 0, contents)
        f1 = self._factor(G, i, 1, contents)
        out = defaultdict(_zero)
        for kern in self.kernels:
            pairs = defaultdict(lambda: defaultdict(_zero))
            diagonal = {}
            if f0[0] == "loop":
                diagonal = {(): mpq(1)}
                legs = []
            elif f0[0] == "down" or f1[0] == "down":
                s_down = 0 if f0[0] == "down" else 1
                _, md, legs_sub = f1 if s_down == 0 else f0
                j = legs_sub.index(("v", i, s_down))
                legs = legs_sub[:j] + legs_sub[j + 1:]
                for key, c in md.items():
                    own, virt = key[0], key[1 + j]
                    rest = key[1:1 + j] + key[2 + j:]
                    b = (own, virt) if s_down == 1 else (virt, own)
                    pairs[b][rest] += c
            else:
                _, A, la = f0
                _, C, lc = f1
                legs = la + lc
                if A.bergmann and C.bergmann:
                    GA, GC = _q_side(A, 0, kern, 0), _q_side(C, 0, kern, 0)
                elif A.bergmann:
                    GC = _q_side(C, 0, kern, 0)
                    GA = _q_side(A, 0, kern, max(_max_effective(GC, kern), 0))
                elif C.bergmann:
                    GA = _q_side(A, 0, kern, 0)
                    GC = _q_side(C, 0, kern, max(_max_effective(GA, kern), 0))
                else:
                    GA, GC = _q_side(A, 0, kern, 0), _q_side(C, 0, kern, 0)
                for b1, rows1 in GA.items():
                    for b2, rows2 in GC.items():
                        if kern.effective_order(b1) + kern.effective_order(b2) < 0:
                            continue
                        dest = pairs[(b1, b2)]
                        for r1, c1 in rows1:
                            for r2, c2 in rows2:
                                dest[r1 + r2] += c1 * c2
            for key, c in contract_with_kernel(kern, pairs, diagonal).items():
                out[key] += c
        md = MultiDifferential.from_terms(len(legs) + 1, 0, out, self.locations)
        return md, legs


def _weight_job(args):
    curve, G = args
    return GraphWeigher(curve).weight(G)


def weight(G: DiagramGraph, curve: SpectralCurve) -> MultiDifferential:
    return GraphWeigher(curve).weight(G)


def weight_sum(curve: SpectralCurve, k: int, g: int, workers: int | None = None) -> MultiDifferential:
    """Sum of w(G) over G_{k+1}^(g); workers defaults to TOPREC_THREADS or 1."""
    graphs = enumerate_graphs(k, g)
    workers = workers or int(os.environ.get("TOPREC_THREADS", "1"))
    if workers > 1 and len(graphs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            weights = list(pool.map(_weight_job, [(curve, G) for G in graphs], chunksize=8))
    else:
        w = GraphWeigher(curve)
        weights = [w.weight(G) for G in graphs]
    total = MultiDifferential.zero(k + 1, g, curve.branch_locations)
    for W in weights:
        total = total + W
    return total


def swap_children(G: DiagramGraph, i: int) -> DiagramGraph:
    """Exchange what hangs off the two slots of vertex i (the result may break the left-child rule)."""
    side = tuple(1 - s if G.parent[c] == i else s for c, s in enumerate(G.side))

    def ep(e):
        return ("v", i, 1 - e[2]) if e[0] == "v" and e[1] == i else e

    edges = [_edge(ep(a), ep(b)) for a, b in G.edges]
    return _canonicalize(G.k, G.g, G.parent, side, edges)
