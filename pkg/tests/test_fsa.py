
import random

import pytest

from higgins.fsa import (
    Dfa, DfaFormatError, LazyLanguage, PairAlphabet, build_pair_machine,
    complement, concat, dfa_from_text, dfa_to_text, empty_dfa,
    enumerate_language, intersect, minimize, project_first, single_word_dfa,
    union, universal_dfa, word_set_dfa,
)
from higgins.words import Alphabet, Word, all_words

AB = Alphabet(["a", "b"])


def words(*texts):
    return [AB.word(t) for t in texts]


def enum_set(lang, n):
    return {w.letters for w in enumerate_language(lang, n)}


def brute_set(dfa, n):
    return {w.letters for w in all_words(dfa.alphabet, n) if dfa.accepts(w)}


def random_dfa(rng, alphabet=AB, max_states=5):
    n = rng.randint(1, max_states)
    transitions = {}
    for s in range(n):
        for a in range(len(alphabet)):
            if rng.random() < 0.8:
                transitions[(s, a)] = rng.randrange(n)
    accepting = {s for s in range(n) if rng.random() < 0.4}
    return Dfa(alphabet, n, 0, accepting, transitions, "rand")


def test_concat_example():
    a = single_word_dfa(AB.word("a"))
    b = word_set_dfa(words("b", "b b"), AB)
    c = concat(a, b)
    assert enum_set(c, 4) == {w.letters for w in words("a b", "a b b")}


def test_complement_involution():
    rng = random.Random(7)
    for _ in range(10):
        d = random_dfa(rng)
        assert enum_set(complement(complement(d)), 8) == enum_set(d, 8)


def test_intersect_with_universal():
    rng = random.Random(8)
    for _ in range(10):
        d = random_dfa(rng)
        assert enum_set(intersect(d, universal_dfa(AB)), 8) == enum_set(d, 8)


def test_boolean_ops_agree_with_enumeration():
    rng = random.Random(9)
    for _ in range(50):
        d1, d2 = random_dfa(rng), random_dfa(rng)
        s1, s2 = enum_set(d1, 6), enum_set(d2, 6)
        assert enum_set(intersect(d1, d2), 6) == s1 & s2
        assert enum_set(union(d1, d2), 6) == s1 | s2
        full = {w.letters for w in all_words(AB, 6)}
        assert enum_set(complement(d1), 6) == full - s1


def test_minimize_idempotent_and_language_preserving():
    rng = random.Random(10)
    for _ in range(50):
        d = random_dfa(rng)
        m1 = minimize(d)
        m2 = minimize(m1)
        assert m1.n_states == m2.n_states
        assert m1.transitions == m2.transitions and m1.accepting == m2.accepting
        assert enum_set(m1, 7) == enum_set(d, 7)


def test_enumerate_examples():
    star = Dfa(Alphabet(["x"]), 1, 0, {0}, {(0, 0): 0}, "xstar")
    got = enumerate_language(star, 2)
    assert [str(w) for w in got] == ["ε", "x", "x x"]
    assert enumerate_language(empty_dfa(AB), 5) == []


def test_enumerate_matches_acceptance():
    rng = random.Random(11)
    for _ in range(20):
        d = random_dfa(rng)
        assert enum_set(d, 6) == brute_set(d, 6)
        got = enumerate_language(d, 6)
        keys = [(len(w), w.letters) for w in got]
        assert keys == sorted(keys) and len(set(keys)) == len(keys)


def test_lazy_language_enumeration():
    lang = LazyLanguage(AB, membership=lambda w: len(w) % 2 == 0)
    got = enumerate_language(lang, 3)
    assert all(len(w) % 2 == 0 for w in got)
    assert len(got) == 1 + 16


# --- pair machines ----------------------------------------------------------

Z2 = Alphabet(["x1", "x2"])


def z2_vec(letters):
    v = [0, 0]
    for x in letters:
        i, s = divmod(x, 2)
        v[i] += 1 if s == 0 else -1
    return tuple(v)


def z2_diff_table(radius):
    """Word differences d = v(t)^-1 w(t) for Z^2, as exponent vectors."""
    deltas = {None: (0, 0)}
    for x in range(4):
        deltas[x] = z2_vec((x,))
    ball = [
        (i, j)
        for i in range(-radius, radius + 1)
        for j in range(-radius, radius + 1)
        if abs(i) + abs(j) <= radius
    ]
    table = {}
    for d in ball:
        for a in list(range(4)) + [None]:
            for b in list(range(4)) + [None]:
                if a is None and b is None:
                    continue
                da, db = deltas[a], deltas[b]
                d2 = (d[0] - db[0] + da[0], d[1] - db[1] + da[1])
                if abs(d2[0]) + abs(d2[1]) <= radius:
                    table[(d, (a, b))] = d2
    return ball, table


def test_pair_machine_diagonal():
    x = Alphabet(["x"])
    table = {((0,), (a, a)): (0,) for a in range(2)}
    m = build_pair_machine(x, [(0,)], table, {(0,)})
    pa = m.alphabet
    w1, w2 = x.word("x x"), x.word("x x")
    assert m.accepts(pa.pair_word(w1, w2))
    assert not m.accepts(pa.pair_word(w1, x.word("x")))


def test_pair_machine_z2_identity_target():
    ball, table = z2_diff_table(2)
    m = build_pair_machine(Z2, [(0, 0)] + [d for d in ball if d != (0, 0)], table, {(0, 0)})
    pa = m.alphabet
    assert m.accepts(pa.pair_word(Z2.word("x1 x2"), Z2.word("x2 x1")))
    assert not m.accepts(pa.pair_word(Z2.word("x1 x2"), Z2.word("x1 x1")))


def test_pair_machine_z2_x1_target():
    ball, table = z2_diff_table(2)
    m = build_pair_machine(Z2, [(0, 0)] + [d for d in ball if d != (0, 0)], table, {(1, 0)})
    pa = m.alphabet
    # difference v^-1 w = x1 when w = x1 x2, v = x2
    assert m.accepts(pa.pair_word(Z2.word("x1 x2"), Z2.word("x2")))
    assert not m.accepts(pa.pair_word(Z2.word("x1 x2"), Z2.word("x2 x1")))


def test_pair_machine_rejects_interior_padding():
    ball, table = z2_diff_table(2)
    m = build_pair_machine(Z2, [(0, 0)] + [d for d in ball if d != (0, 0)], table, {(0, 0)})
    pa = m.alphabet
    pad = pa.pad
    x1 = 0
    word = Word(pa, (pa.encode(x1, pad), pa.encode(x1, x1)))
    assert not m.accepts(word)


def test_project_first():
    ball, table = z2_diff_table(2)
    diffs = [(0, 0)] + [d for d in ball if d != (0, 0)]
    diag = build_pair_machine(Z2, diffs, {k: v for k, v in table.items()
                                          if k[1][0] is not None and k[1][1] is not None},
                              {(0, 0)})
    proj = project_first(diag)
    # every word pairs with itself, so the projection is universal on short words
    for w in all_words(Z2, 3):
        assert proj.accepts(w)

    nothing = project_first(
        build_pair_machine(Z2, diffs, table, set()))
    assert enumerate_language(nothing, 4) == []

    one = build_pair_machine(Z2, diffs, table, {(0, 0)})
    pa = one.alphabet
    only = intersect_pairs_with_single(one, pa, Z2.word("x1 x2"), Z2.word("x2 x1"))
    got = project_first(only)
    assert enum_set(got, 4) == {Z2.word("x1 x2").letters}


def intersect_pairs_with_single(machine, pa, w, v):
    from higgins.fsa import intersect as fsa_intersect
    return fsa_intersect(machine, single_word_dfa(pa.pair_word(w, v)))


def test_project_first_existential_brute():
    ball, table = z2_diff_table(2)
    diffs = [(0, 0)] + [d for d in ball if d != (0, 0)]
    m = build_pair_machine(Z2, diffs, table, {(1, 0)})
    proj = project_first(m)
    pa = m.alphabet
    for w in all_words(Z2, 3):
        exists = any(
            m.accepts(pa.pair_word(w, v)) for v in all_words(Z2, len(w) + 2)
        )
        assert proj.accepts(w) == exists


# --- text format ------------------------------------------------------------

def test_dfa_text_roundtrip():
    d = minimize(word_set_dfa(words("a", "a b", "b b"), AB))
    text = dfa_to_text(d)
    back = dfa_from_text(text)
    assert back == d
    assert dfa_to_text(minimize(back)) == text


def test_dfa_text_errors():
    with pytest.raises(DfaFormatError):
        dfa_from_text("dfa x\nalphabet a a^-1\nstates 1 begin 0\naccept 0\n")
    with pytest.raises(DfaFormatError):
        dfa_from_text("dfa x\n")
    with pytest.raises(DfaFormatError):
        dfa_from_text("dfa x\nalphabet a a^-1\nstates 1 start 0\naccept 3\n")
