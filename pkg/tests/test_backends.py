import itertools

import pytest

from higgins.backends import (
    BackendError, abelian_backend, abelian_subgroup, finite_backend,
    finite_subgroup, free_backend, free_subgroup_cyclic, trivial_subgroup,
)
from higgins.fsa import enumerate_language
from higgins.words import Word, all_words, free_reduce, invert


# --- brute-force oracles ------------------------------------------------------

def brute_abelian_member(backend, gen_vecs, vec, bound=8):
    """Is vec in the subgroup lattice?  Exhaustive integer-combination search."""
    k = len(gen_vecs)
    for coeffs in itertools.product(range(-bound, bound + 1), repeat=k):
        s = [sum(c * g[i] for c, g in zip(coeffs, gen_vecs)) for i in range(backend.n)]
        if backend.normalize(tuple(a - b for a, b in zip(vec, s))) == (0,) * backend.n:
            return True
    return False


def brute_coset_rep(ctx, w, max_len):
    """Shortlex-least word over the parent alphabet in the same right coset."""
    best = None
    target = ctx.parent.key(w)
    for cand in all_words(ctx.parent.alphabet, max_len):
        diff = cand * invert(w)
        if ctx.membership(diff):
            return cand  # shortlex enumeration: first hit is least
    return best


def perm_mult_table(perms):
    idx = {p: i for i, p in enumerate(perms)}
    table = []
    for p in perms:
        row = []
        for q in perms:
            pq = tuple(p[q[i]] for i in range(len(p)))  # apply q then p? fix below
            row.append(idx[pq])
        table.append(row)
    return table


def s3_table():
    # elements ordered: identity first, then by one-line form
    e = (0, 1, 2)
    r = (1, 2, 0)
    r2 = (2, 0, 1)
    s = (0, 2, 1)
    sr = (2, 1, 0)
    sr2 = (1, 0, 2)
    perms = [e, r, r2, s, sr, sr2]
    idx = {p: i for i, p in enumerate(perms)}
    table = [[idx[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms]
    return perms, table


# --- abelian backend ----------------------------------------------------------

def test_abelian_canonical_collects():
    G = abelian_backend(2)
    assert str(G.canonical(G.alphabet.word("x1 x2 x1"))) == "x1 x1 x2"


def test_abelian_torsion_reduction():
    G = abelian_backend(0, [4], names=["t"])
    assert str(G.canonical(G.alphabet.word("t t t t t"))) == "t"
    assert str(G.canonical(G.alphabet.word("t t t"))) == "t^-1"
    assert str(G.canonical(G.alphabet.word("t t"))) == "t t"  # tie toward positive


def test_abelian_geodesic_length():
    G = abelian_backend(1)
    assert G.geodesic_length(G.alphabet.word("x1 x1^-1")) == 0


def test_abelian_canonical_equals_brute_equality():
    G = abelian_backend(1, [3], names=["x", "t"])
    seen = {}
    for w in all_words(G.alphabet, 4):
        vec = G.normalize(G.vec(w))
        key = G.canonical(w).letters
        if vec in seen:
            assert seen[vec] == key
        else:
            seen[vec] = key


def test_abelian_ball_count():
    G = abelian_backend(2)
    assert len(G.ball(2)) == 13  # |{(a,b): |a|+|b| <= 2}|
    ball = G.ball(3)
    assert len(set(w.letters for w in ball)) == len(ball)


def test_abelian_canonical_language_agrees():
    G = abelian_backend(1, [4], names=["x", "t"])
    dfa = G.canonical_language
    for w in all_words(G.alphabet, 5):
        assert dfa.accepts(w) == (G.canonical(w) == w)


# --- abelian subgroups ----------------------------------------------------------

def test_abelian_subgroup_diag_example():
    G = abelian_backend(2)
    H = abelian_subgroup(G, [G.alphabet.word("x1 x2")])
    w = G.alphabet.word("x1 x1 x2 x2 x2")  # exponent vector (2, 3)
    assert str(H.coset_rep(w)) == "x1^-1"
    h = H.h_express(w * invert(H.coset_rep(w)))
    assert str(h) == "y1 y1 y1"
    assert H.coset_rep(G.alphabet.empty()) == G.alphabet.empty()


def test_abelian_subgroup_axis():
    G = abelian_backend(2)
    H = abelian_subgroup(G, [G.alphabet.word("x1")])
    lang = enumerate_language(H.coset_language, 3)
    assert [str(w) for w in lang] == [
        "ε", "x2", "x2^-1", "x2 x2", "x2^-1 x2^-1", "x2 x2 x2", "x2^-1 x2^-1 x2^-1"]


def test_abelian_subgroup_enumeration_example():
    G = abelian_backend(2)
    H = abelian_subgroup(G, [G.alphabet.word("x1 x2")])
    lang = enumerate_language(H.coset_language, 2)
    assert [str(w) for w in lang] == ["ε", "x1", "x1^-1", "x1 x1", "x1^-1 x1^-1"]


def test_abelian_membership_against_brute():
    G = abelian_backend(2, [4], names=["x1", "x2", "t"])
    gens = [G.alphabet.word("x1 x2 t t"), G.alphabet.word("x2 x2")]
    H = abelian_subgroup(G, gens)
    gen_vecs = [G.vec(g) for g in gens] + [(0, 0, 4)]
    for w in all_words(G.alphabet, 3):
        assert H.membership(w) == brute_abelian_member(G, gen_vecs, G.vec(w)), str(w)


def test_abelian_decomposition_identity():
    G = abelian_backend(2, [4], names=["x1", "x2", "t"])
    H = abelian_subgroup(G, [G.alphabet.word("x1 t")])
    for w in G.ball(4):
        rep = H.coset_rep(w)
        h = H.h_express(w * invert(rep))
        assert G.key(H.expand(h) * rep) == G.key(w)
        # constancy on the coset, sampled over generator multiples
        for g in H.gen_words:
            assert H.coset_rep(g * w) == rep


def test_abelian_coset_rep_is_shortlex_least():
    G = abelian_backend(2)
    for gens in ([G.alphabet.word("x1 x2")], [G.alphabet.word("x1 x1 x2")]):
        H = abelian_subgroup(G, gens)
        for w in G.ball(3):
            rep = H.coset_rep(w)
            brute = brute_coset_rep(H, w, len(rep))
            assert brute == rep, f"{w} -> {rep} vs {brute}"


def test_abelian_mixed_subgroup_synthesized_dfa():
    G = abelian_backend(2, [4], names=["x1", "x2", "t"])
    H = abelian_subgroup(G, [G.alphabet.word("x1 t")])
    dfa = H.coset_language
    for w in all_words(G.alphabet, 5):
        assert dfa.accepts(w) == H.is_rep(w), str(w)


def test_abelian_coset_language_unique_reps():
    G = abelian_backend(2)
    H = abelian_subgroup(G, [G.alphabet.word("x1 x2")])
    seen = {}
    for w in enumerate_language(H.coset_language, 8):
        key = H.lattice.key(G.vec(w))
        assert key not in seen
        seen[key] = w
    # every coset met in the radius-4 ball is covered
    for w in G.ball(4):
        assert H.lattice.key(G.vec(w)) in seen


def test_abelian_coset_language_geodesic():
    G = abelian_backend(2, [4], names=["x1", "x2", "t"])
    H = abelian_subgroup(G, [G.alphabet.word("x1 t")])
    for w in enumerate_language(H.coset_language, 6):
        assert len(w) == H.min_coset_length(w)


def test_abelian_rejects_bad_modulus():
    with pytest.raises(BackendError):
        abelian_backend(1, [1])


# --- trivial subgroup -----------------------------------------------------------

def test_trivial_subgroup():
    G = abelian_backend(2)
    T = trivial_subgroup(G)
    w = G.alphabet.word("x1 x2 x1^-1")
    assert T.coset_rep(w) == G.canonical(w)
    assert T.membership(G.alphabet.word("x1 x1^-1"))
    assert not T.membership(w)
    assert T.h_express(G.alphabet.word("x1 x1^-1")) == T.gen_alphabet.empty()


# --- free backend ---------------------------------------------------------------

def test_free_canonical_and_ball():
    F = free_backend(2)
    assert F.canonical(F.alphabet.word("a b b^-1")) == F.alphabet.word("a")
    assert len(F.ball(2)) == 17  # 1 + 4 + 12
    dfa = F.canonical_language
    for w in all_words(F.alphabet, 4):
        assert dfa.accepts(w) == (free_reduce(w) == w)


def test_free_cyclic_membership():
    F = free_backend(2)
    H = free_subgroup_cyclic(F, F.alphabet.word("a"))
    assert H.membership(F.alphabet.word("a^-1 a^-1 a^-1"))
    assert not H.membership(F.alphabet.word("a b"))
    assert str(H.h_express(F.alphabet.word("a a"))) == "y1 y1"


def test_free_cyclic_coset_rep_examples():
    F = free_backend(2)
    H = free_subgroup_cyclic(F, F.alphabet.word("a"))
    assert str(H.coset_rep(F.alphabet.word("a a b a"))) == "b a"
    H2 = free_subgroup_cyclic(F, F.alphabet.word("a b"))
    assert str(H2.coset_rep(F.alphabet.word("a b a b b"))) == "b"


def test_free_cyclic_rep_constant_and_least():
    F = free_backend(2)
    for gen in ("a", "a b", "a a"):
        H = free_subgroup_cyclic(F, F.alphabet.word(gen))
        for w in F.ball(3):
            rep = H.coset_rep(w)
            assert H.coset_rep(H.gen_words[0] * w) == rep
            assert H.coset_rep(invert(H.gen_words[0]) * w) == rep
            brute = brute_coset_rep(H, w, len(rep))
            assert brute == rep, f"gen {gen}: {w} -> {rep} vs {brute}"


def test_free_cyclic_language_agrees():
    F = free_backend(2)
    H = free_subgroup_cyclic(F, F.alphabet.word("a"))
    lang = H.coset_language
    for w in all_words(F.alphabet, 4):
        expected = free_reduce(w) == w and H.coset_rep(w) == w
        assert lang.accepts(w) == expected
    H2 = free_subgroup_cyclic(F, F.alphabet.word("a b"))
    lazy = H2.coset_language
    for w in all_words(F.alphabet, 4):
        expected = free_reduce(w) == w and H2.coset_rep(w) == w
        assert lazy.accepts(w) == expected


def test_free_cyclic_rejects_unreduced():
    F = free_backend(2)
    with pytest.raises(BackendError):
        free_subgroup_cyclic(F, F.alphabet.word("a b a^-1"))
    with pytest.raises(BackendError):
        free_subgroup_cyclic(F, F.alphabet.empty())


# --- finite backend --------------------------------------------------------------

def test_finite_z2():
    G = finite_backend([[0, 1], [1, 0]], {"t": 1})
    assert str(G.canonical(G.alphabet.word("t t t"))) == "t"
    assert G.geodesic_length(G.alphabet.word("t t")) == 0
    assert G.alphabet.inv[G.alphabet.index("t")] == G.alphabet.index("t")


def test_finite_s3_cosets():
    perms, table = s3_table()
    G = finite_backend(table, {"r": 1, "s": 3})
    H = finite_subgroup(G, [G.alphabet.word("s")])
    assert H.coset_count() == 3
    # brute force: orbit of right multiplication
    cosets = set()
    for g in range(6):
        coset = frozenset(table[h][g] for h in (0, 3))
        cosets.add(coset)
    assert len(cosets) == 3


def test_finite_trivial_subgroup_rep_is_canonical():
    perms, table = s3_table()
    G = finite_backend(table, {"r": 1, "s": 3})
    H = finite_subgroup(G, [])
    for w in all_words(G.alphabet, 3):
        assert H.coset_rep(w) == G.canonical(w)


def test_finite_canonical_matches_table():
    perms, table = s3_table()
    G = finite_backend(table, {"r": 1, "s": 3})
    for w in all_words(G.alphabet, 4):
        e = 0
        for x in w.letters:
            e = table[e][G._letter_elt[x]]
        assert G.eval(w) == e
        assert G.eval(G.canonical(w)) == e


def test_finite_subgroup_language_and_h_express():
    perms, table = s3_table()
    G = finite_backend(table, {"r": 1, "s": 3})
    H = finite_subgroup(G, [G.alphabet.word("s")])
    lang = enumerate_language(H.coset_language, 4)
    assert len(lang) == 3 and lang[0] == G.alphabet.empty()
    for w in all_words(G.alphabet, 3):
        if H.membership(w):
            assert G.eval(H.expand(H.h_express(w))) == G.eval(w)


def test_finite_validation_errors():
    with pytest.raises(BackendError):
        finite_backend([[0, 1], [1, 1]])
    with pytest.raises(BackendError):
        finite_backend([[0, 1, 2], [1, 2, 0], [2, 0, 1]], {"r": 0})  # identity generates nothing


def test_backend_canonical_idempotent_across_backends():
    perms, table = s3_table()
    backends = [
        abelian_backend(2),
        abelian_backend(1, [3], names=["x", "t"]),
        free_backend(2),
        finite_backend(table, {"r": 1, "s": 3}),
    ]
    for G in backends:
        for w in all_words(G.alphabet, 3):
            c = G.canonical(w)
            assert G.canonical(c) == c
            assert G.geodesic_length(c) == len(c)
            v = G.alphabet.word(str(G.alphabet.letter(G.alphabet.names[0])))
            assert G.canonical(w * v * invert(v)) == c
