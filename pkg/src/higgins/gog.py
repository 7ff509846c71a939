"""Graph-of-groups data model.

A directed graph with edge involution carries a group backend per vertex, a
subgroup context of the terminal vertex group per directed edge, and
generator-level edge isomorphisms (inverse pairs).  A spanning tree fixes the
stable letters that are trivial in the fundamental group; inflation and
deflation move words between the full stable alphabet and the working one.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from .words import Alphabet, Word, invert


class GogError(ValueError):
    pass


class Edge:
    __slots__ = ("name", "src", "dst", "reverse")

    def __init__(self, name, src, dst):
        self.name = name
        self.src = src  # initial vertex
        self.dst = dst  # terminal vertex; edge subgroup lives here

    def __repr__(self):
        return f"<edge {self.name}: {self.src} -> {self.dst}>"


class DirectedGraph:
    def __init__(self):
        self.vertices: list[str] = []
        self.edges: dict[str, Edge] = {}
        self.pairs: list[tuple[str, str]] = []  # (declared, reverse) names

    def add_vertex(self, name: str):
        if name in self.vertices:
            raise GogError(f"duplicate vertex {name!r}")
        self.vertices.append(name)

    def add_edge_pair(self, name: str, src: str, dst: str, reverse_name: Optional[str] = None) -> Edge:
        if reverse_name is None:
            reverse_name = name + "~"
        for nm in (name, reverse_name):
            if nm in self.edges:
                raise GogError(f"duplicate edge {nm!r}")
        for v in (src, dst):
            if v not in self.vertices:
                raise GogError(f"unknown vertex {v!r}")
        e = Edge(name, src, dst)
        r = Edge(reverse_name, dst, src)
        e.reverse = r
        r.reverse = e
        self.edges[name] = e
        self.edges[reverse_name] = r
        self.pairs.append((name, reverse_name))
        return e

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            v = todo.pop()
            for e in self.edges.values():
                if e.src == v and e.dst not in seen:
                    seen.add(e.dst)
                    todo.append(e.dst)
        return len(seen) == len(self.vertices)


class SpanningTree:
    def __init__(self, graph: DirectedGraph, tree_edge_names, root: str):
        self.graph = graph
        self.edge_names = frozenset(tree_edge_names)
        self.root = root
        # parent[v] = edge whose dst is v on the path from the root
        self.parent: dict[str, Optional[Edge]] = {root: None}
        self.depth = {root: 0}
        changed = True
        while changed:
            changed = False
            for nm in sorted(self.edge_names):
                e = graph.edges[nm]
                if e.src in self.depth and e.dst not in self.depth:
                    self.parent[e.dst] = e
                    self.depth[e.dst] = self.depth[e.src] + 1
                    changed = True
        if len(self.depth) != len(graph.vertices):
            raise GogError("tree does not span the graph")

    def contains(self, edge: Edge) -> bool:
        return edge.name in self.edge_names

    def path(self, u: str, v: str) -> list[Edge]:
        """The unique reduced tree path from u to v, as directed edges."""
        up, vp = [], []
        a, b = u, v
        while self.depth[a] > self.depth[b]:
            up.append(self.parent[a])
            a = self.parent[a].src
        while self.depth[b] > self.depth[a]:
            vp.append(self.parent[b])
            b = self.parent[b].src
        while a != b:
            up.append(self.parent[a])
            a = self.parent[a].src
            vp.append(self.parent[b])
            b = self.parent[b].src
        return [e.reverse for e in up] + list(reversed(vp))


def maximal_tree(graph: DirectedGraph) -> SpanningTree:
    """Deterministic breadth-first tree rooted at the least-named vertex."""
    if not graph.is_connected():
        raise GogError("graph is not connected")
    root = min(graph.vertices)
    seen = {root}
    tree = []
    queue = deque([root])
    edges_sorted = sorted(graph.edges.values(), key=lambda e: e.name)
    while queue:
        v = queue.popleft()
        for e in edges_sorted:
            if e.src == v and e.dst not in seen:
                seen.add(e.dst)
                tree.append(e.name)
                tree.append(e.reverse.name)
                queue.append(e.dst)
    return SpanningTree(graph, tree, root)


class GraphOfGroups:
    """The quadruple: graph, vertex backends, edge subgroup contexts, edge isos.

    `edge_iso[e]` lists, per generator of the edge subgroup at e, its image as
    a word over the generators of the subgroup at the reverse edge.
    """

    def __init__(self, graph: DirectedGraph, vertex_backends, edge_contexts, edge_iso):
        self.graph = graph
        self.vertex_backends = dict(vertex_backends)
        self.edge_contexts = dict(edge_contexts)
        self.edge_iso = dict(edge_iso)

    def backend(self, vertex: str):
        return self.vertex_backends[vertex]

    def ctx(self, edge: Edge):
        return self.edge_contexts[edge.name]

    def apply_iso(self, edge: Edge, yword: Word) -> Word:
        """Image of a word over Y_e under the edge isomorphism, over Y_ebar."""
        images = self.edge_iso[edge.name]
        src_ctx = self.ctx(edge)
        dst_ctx = self.ctx(edge.reverse)
        out = dst_ctx.gen_alphabet.empty()
        alpha = src_ctx.gen_alphabet
        for letter in yword.letters:
            # letter = generator i or its inverse
            base = letter
            inverse = False
            if alpha.inv[letter] < letter:
                base = alpha.inv[letter]
                inverse = True
            gi = alpha.generators.index(alpha.names[base])
            img = images[gi]
            out = out * (invert(img) if inverse else img)
        return out

    def validate(self) -> list[str]:
        problems = []
        if not self.graph.is_connected():
            problems.append("graph is not connected")
        for v in self.graph.vertices:
            if v not in self.vertex_backends:
                problems.append(f"vertex {v} has no backend")
        for name, e in sorted(self.graph.edges.items()):
            ctx = self.edge_contexts.get(name)
            if ctx is None:
                problems.append(f"edge {name} has no subgroup context")
                continue
            if ctx.parent is not self.vertex_backends.get(e.dst):
                problems.append(f"edge {name}: subgroup does not live in the backend of {e.dst}")
            images = self.edge_iso.get(name)
            if images is None or len(images) != len(ctx.gen_words):
                problems.append(f"edge {name}: iso must map every subgroup generator")
                continue
            rctx = self.edge_contexts.get(e.reverse.name)
            if rctx is None:
                continue
            rback = self.vertex_backends[e.src]
            for i, img in enumerate(images):
                expanded = rctx.expand(img)
                if not rctx.membership(expanded):
                    problems.append(
                        f"edge {name}: iso image of generator {i + 1} leaves the reverse subgroup")
                back_img = self.apply_iso(e.reverse, img)
                back = self.ctx(e).expand(back_img)
                want = ctx.gen_words[i]
                if ctx.parent.key(back) != ctx.parent.key(want):
                    problems.append(
                        f"edge {name}: iso composed with reverse iso is not the identity "
                        f"on generator {i + 1}")
        return problems


class StableAlphabets:
    """Working (deflated) and full (inflated) alphabets for the fundamental group.

    Vertex generator names are kept bare when globally unique, namespaced as
    vertex.name otherwise; every directed edge pair contributes a stable
    letter s_<edge>, omitted from the working alphabet on tree edges.
    """

    def __init__(self, gog: GraphOfGroups, tree: SpanningTree):
        self.gog = gog
        self.tree = tree
        graph = gog.graph
        counts: dict[str, int] = {}
        for v in graph.vertices:
            for g in gog.backend(v).alphabet.generators:
                counts[g] = counts.get(g, 0) + 1
        stable_names = {f"s_{nm}" for nm, _ in graph.pairs}

        def display(v, g):
            if counts[g] > 1 or g in stable_names:
                return f"{v}.{g}"
            return g

        gens_x, selfinv_x = [], []
        gens_hat, selfinv_hat = [], []
        vertex_letters = []  # (vertex, backend generator name, display)
        for v in graph.vertices:
            backend = gog.backend(v)
            for g in backend.alphabet.generators:
                d = display(v, g)
                vertex_letters.append((v, g, d))
                gens_x.append(d)
                gens_hat.append(d)
                p = backend.alphabet.index(g)
                if backend.alphabet.inv[p] == p:
                    selfinv_x.append(d)
                    selfinv_hat.append(d)
        stable_pairs_x = []
        for nm, rnm in graph.pairs:
            sname = f"s_{nm}"
            gens_hat.append(sname)
            if nm not in tree.edge_names:
                gens_x.append(sname)
                stable_pairs_x.append(nm)
        self.deflated = Alphabet(gens_x, self_inverse=selfinv_x)
        self.inflated = Alphabet(gens_hat, self_inverse=selfinv_hat)

        # classification and conversion tables
        self.kind_x = {}    # X letter -> ("v", vertex, backend letter) | ("e", Edge)
        self.kind_hat = {}  # same for the inflated alphabet
        self.vx_to_x = {}   # (vertex, backend letter) -> X letter
        self.vx_to_hat = {}
        self.edge_to_hat = {}  # edge name -> inflated stable letter
        self.edge_to_x = {}    # non-tree only
        for v, g, d in vertex_letters:
            backend = gog.backend(v)
            p = backend.alphabet.index(g)
            for bl, xl, hl in (
                (p, self.deflated.index(d), self.inflated.index(d)),
                (backend.alphabet.inv[p],
                 self.deflated.inv[self.deflated.index(d)],
                 self.inflated.inv[self.inflated.index(d)]),
            ):
                self.kind_x[xl] = ("v", v, bl)
                self.kind_hat[hl] = ("v", v, bl)
                self.vx_to_x[(v, bl)] = xl
                self.vx_to_hat[(v, bl)] = hl
        for nm, rnm in graph.pairs:
            e = graph.edges[nm]
            sname = f"s_{nm}"
            hl = self.inflated.index(sname)
            self.kind_hat[hl] = ("e", e)
            self.kind_hat[self.inflated.inv[hl]] = ("e", e.reverse)
            self.edge_to_hat[nm] = hl
            self.edge_to_hat[rnm] = self.inflated.inv[hl]
            if nm not in tree.edge_names:
                xl = self.deflated.index(sname)
                self.kind_x[xl] = ("e", e)
                self.kind_x[self.deflated.inv[xl]] = ("e", e.reverse)
                self.edge_to_x[nm] = xl
                self.edge_to_x[rnm] = self.deflated.inv[xl]
        self.x_to_hat = {}
        for xl, kind in self.kind_x.items():
            if kind[0] == "v":
                self.x_to_hat[xl] = self.vx_to_hat[(kind[1], kind[2])]
            else:
                self.x_to_hat[xl] = self.edge_to_hat[kind[1].name]
        self.hat_to_x = {hl: xl for xl, hl in self.x_to_hat.items()}

    def to_vertex_word(self, vertex: str, letters) -> Word:
        return Word(self.gog.backend(vertex).alphabet, tuple(letters))

    def vertex_word_to_x(self, vertex: str, w: Word) -> tuple:
        return tuple(self.vx_to_x[(vertex, bl)] for bl in w.letters)

    def deflate(self, w: Word) -> Word:
        """Drop tree stable letters; result is over the working alphabet."""
        out = []
        for hl in w.letters:
            kind = self.kind_hat[hl]
            if kind[0] == "e" and self.tree.contains(kind[1]):
                continue
            out.append(self.hat_to_x[hl])
        return Word(self.deflated, tuple(out))

    def inflate(self, w: Word, start: str) -> Word:
        """Insert tree stable letters so the word parses as an alternating
        path word starting at `start`."""
        out = []
        cur = start
        for xl in w.letters:
            kind = self.kind_x[xl]
            if kind[0] == "v":
                v = kind[1]
                if v != cur:
                    for e in self.tree.path(cur, v):
                        out.append(self.edge_to_hat[e.name])
                    cur = v
                out.append(self.x_to_hat[xl])
            else:
                e = kind[1]
                if e.src != cur:
                    for te in self.tree.path(cur, e.src):
                        out.append(self.edge_to_hat[te.name])
                out.append(self.edge_to_hat[e.name])
                cur = e.dst
        return Word(self.inflated, tuple(out))
