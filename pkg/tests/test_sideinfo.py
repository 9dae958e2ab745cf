import itertools
import math
import random
from fractions import Fraction

import pytest

from lzguess.seqcore import Alphabet, BitSource, DyadicProb, SymbolSeq, generate_corpus
from lzguess.lz78 import DecodeError, incremental_parse
from lzguess.fsgm import FSGMSpec, run as fsgm_run
from lzguess.sideinfo import (CondBoundReport, chain_code_len, chain_decode,
                              chain_encode, chain_gap_probs, chain_draw,
                              cond_block_guess_prob, cond_block_sample,
                              cond_bounds, cond_code, cond_code_length,
                              cond_complexity, cond_decode,
                              cond_fsgm_run, cond_fsgm_sequence_prob,
                              cond_guess_prob, cond_machine_from_fsgm,
                              cond_sample, copy_machine, epsilon1,
                              joint_parse, pack_pairs, _BitReader)
from conftest import FixedBits, all_seqs, seq

AB = Alphabet(("a", "b"))
B01 = Alphabet(("0", "1"))


def all_pairs(n, alphabet=B01):
    for x in all_seqs(alphabet, n):
        for y in all_seqs(alphabet, n):
            yield x, y


# --- joint parsing ------------------------------------------------------------

def test_joint_parse_example():
    jp = joint_parse(seq("abab", AB), seq("aaaa", AB))
    assert jp.c_xy == 3
    assert len(jp.y_phrases) == 2
    assert jp.c_j == [2, 1]
    assert jp.u == 2.0


def test_u_of_x_given_x_is_zero():
    rng = random.Random(1)
    cases = [generate_corpus("periodic", 64, pattern="ab"),
             generate_corpus("thue_morse", 64),
             generate_corpus("bernoulli", 64, p=0.5, seed=4)]
    for _ in range(20):
        n = rng.randrange(1, 40)
        cases.append(SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n))))
    for x in cases:
        jp = joint_parse(x, x)
        assert jp.u == 0.0
        assert all(c == 1 for c in jp.c_j)


def test_counts_sum_to_phrase_count():
    rng = random.Random(2)
    for _ in range(100):
        n = rng.randrange(1, 50)
        x = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        y = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        jp = joint_parse(x, y)
        assert sum(jp.c_j) == jp.c_xy


def test_u_at_most_c_log_c():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randrange(2, 60)
        x = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        y = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        jp = joint_parse(x, y)
        if jp.c_xy > 1:
            assert jp.u <= jp.c_xy * math.log2(jp.c_xy) + 1e-9


def test_pack_pairs_guard():
    big = Alphabet(tuple(range(20)))
    x = SymbolSeq(big, bytes(range(20)))
    with pytest.raises(ValueError, match="product"):
        pack_pairs(x, x)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        joint_parse(seq("ab", AB), seq("a", AB))


# --- the chain index code -------------------------------------------------------

def test_chain_code_complete_and_decodable():
    for L in range(1, 20):
        probs = chain_gap_probs(L)
        assert sum(p.as_fraction() for p in probs) == 1
        kraft = Fraction(0)
        for g in range(L):
            code = chain_encode(g, L)
            assert len(code) == chain_code_len(g, L)
            r = _BitReader(code)
            assert chain_decode(r, L) == g and r.pos == len(code)
            assert probs[g].as_fraction() >= Fraction(1, 2 ** len(code))
            kraft += Fraction(1, 2 ** len(code))
        assert kraft <= 1
        assert chain_code_len(0, L) == (1 if L > 1 else 0)


def test_chain_draw_matches_probs():
    L = 6
    probs = chain_gap_probs(L)
    counts = [0] * L
    rounds = 40000
    for k in range(rounds):
        counts[chain_draw(BitSource(31, substream=k), L)] += 1
    for g in range(L):
        pf = float(probs[g])
        sigma = math.sqrt(pf * (1 - pf) / rounds)
        assert abs(counts[g] / rounds - pf) <= 3.5 * sigma


# --- conditional code ------------------------------------------------------------

def test_cond_roundtrip_exhaustive_n5():
    for n in range(0, 6):
        for x, y in all_pairs(n):
            code = cond_code(x, y)
            assert cond_decode(code, y, n) == x


def test_cond_roundtrip_random_longer():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randrange(50, 300)
        x = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        y = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        assert cond_decode(cond_code(x, y), y, n) == x


def test_cond_roundtrip_ternary_x_binary_y():
    abc = Alphabet(("a", "b", "c"))
    rng = random.Random(8)
    for _ in range(10):
        n = rng.randrange(5, 80)
        x = SymbolSeq(abc, bytes(rng.randrange(3) for _ in range(n)))
        y = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        assert cond_decode(cond_code(x, y), y, n, abc) == x


def test_cond_kraft_per_y():
    for n in (3, 4, 5):
        for y in all_seqs(B01, n):
            total = Fraction(0)
            for x in all_seqs(B01, n):
                total += Fraction(1, 2 ** len(cond_code(x, y)))
            assert total <= 1


def test_cond_decode_errors():
    x, y = seq("0011", B01), seq("0101", B01)
    code = cond_code(x, y)
    with pytest.raises(DecodeError):
        cond_decode(code[:-1], y, 4)
    with pytest.raises(DecodeError):
        cond_decode(code + "0", y, 4)


def test_cond_code_self_is_cheap():
    x = generate_corpus("bernoulli", 4096, p=0.5, seed=7)
    assert cond_code_length(x, x) / 4096 <= 0.25


def test_cond_length_envelope_on_corpora():
    n = 4096
    xb = generate_corpus("bernoulli", n, p=0.5, seed=7)
    yb = generate_corpus("bernoulli", n, p=0.5, seed=8)
    xt = generate_corpus("thue_morse", n)
    xp = generate_corpus("periodic", n, pattern="ab")
    budget = n * epsilon1(n)
    for x, y in ((xb, xb), (xb, yb), (xt, xt), (xp, xp), (xp, xb),
                 (xt, xb), (xb, xt), (xt, xp)):
        jp = joint_parse(x, y)
        L = cond_code_length(x, y)
        assert L <= jp.u + budget


# --- conditional sampler and guess probability ------------------------------------

def blackbox_cond_distribution(y, n, bit_len):
    counts = {}
    for v in range(1 << bit_len):
        bits = FixedBits(format(v, "0%db" % bit_len))
        out = cond_sample(y, n, bits)
        counts[out] = counts.get(out, 0) + 1
    return {x: Fraction(c, 1 << bit_len) for x, c in counts.items()}


def test_cond_guess_prob_matches_blackbox_enumeration():
    for ytext in ("000", "010", "111", "001"):
        y = seq(ytext, B01)
        dist = blackbox_cond_distribution(y, 3, 11)
        for x in all_seqs(B01, 3):
            assert dist.get(x, Fraction(0)) == \
                cond_guess_prob(x, y).as_fraction(), (x.render(), ytext)


def test_cond_guess_prob_sums_to_one():
    for n in (3, 6):
        for y in all_seqs(B01, n):
            total = DyadicProb.zero()
            for x in all_seqs(B01, n):
                total = total + cond_guess_prob(x, y)
            assert total == DyadicProb.one()


def test_cond_dominance_exhaustive():
    for n in range(1, 7):
        for x, y in all_pairs(n):
            q = cond_guess_prob(x, y)
            L = len(cond_code(x, y))
            assert q.as_fraction() >= Fraction(1, 2 ** L)


def test_cond_dominance_on_corpora():
    n = 4096
    xb = generate_corpus("bernoulli", n, p=0.5, seed=7)
    yb = generate_corpus("bernoulli", n, p=0.5, seed=8)
    xt = generate_corpus("thue_morse", n)
    for x, y in ((xb, xb), (xb, yb), (xt, xb)):
        assert -cond_guess_prob(x, y).log2() <= cond_code_length(x, y)


def test_cond_sample_empirical():
    y = seq("0110", B01)
    rounds = 60000
    counts = {}
    for k in range(rounds):
        out = cond_sample(y, 4, BitSource(23, substream=k))
        counts[out] = counts.get(out, 0) + 1
    for x in all_seqs(B01, 4):
        qf = float(cond_guess_prob(x, y))
        emp = counts.get(x, 0) / rounds
        sigma = math.sqrt(max(qf * (1 - qf), 1e-12) / rounds)
        assert abs(emp - qf) <= 3.8 * sigma


def test_cond_self_guessing_beats_unconditional():
    from lzguess.guessers import lz_guess_prob
    for x in (generate_corpus("periodic", 64, pattern="ab"),
              generate_corpus("bernoulli", 64, p=0.5, seed=5)):
        q_cond = cond_guess_prob(x, x)
        q_plain = lz_guess_prob(x)
        assert q_cond > q_plain


def test_cond_block_product():
    rng = random.Random(9)
    for _ in range(20):
        n = rng.randrange(1, 24)
        ell = rng.randrange(1, 7)
        x = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        y = SymbolSeq(B01, bytes(rng.randrange(2) for _ in range(n)))
        expect = Fraction(1)
        for b in range(0, n, ell):
            e = min(b + ell, n)
            expect *= cond_guess_prob(x[b:e], y[b:e]).as_fraction()
        assert cond_block_guess_prob(x, y, ell).as_fraction() == expect


def test_cond_block_sample_runs():
    y = generate_corpus("bernoulli", 32, p=0.5, seed=6)
    out = cond_block_sample(y, 32, 8, BitSource(3))
    assert len(out) == 32


# --- conditional bounds -------------------------------------------------------------

def test_cond_bounds_self_clamps_and_orders():
    x = generate_corpus("bernoulli", 1024, p=0.5, seed=7)
    rep = cond_bounds(x, x, s=2, ell=4, zeta=1.0)
    assert rep.converse_u == 0.0
    assert rep.ordering_ok
    assert rep.u == 0.0


def test_cond_bounds_ordering_on_corpus_pairs():
    n = 1024
    xb = generate_corpus("bernoulli", n, p=0.5, seed=7)
    yb = generate_corpus("bernoulli", n, p=0.5, seed=8)
    xt = generate_corpus("thue_morse", n)
    xp = generate_corpus("periodic", n, pattern="ab")
    for x, y in ((xb, xb), (xb, yb), (xt, xb), (xp, xb), (xt, xt)):
        for zeta in (0.5, 1.0, 2.0):
            rep = cond_bounds(x, y, s=2, ell=4, zeta=zeta)
            assert rep.ordering_ok, (zeta, rep)


def test_cond_bounds_independent_close_to_unconditional():
    # only meaningful in the well-sampled regime: at large ell the m = n/ell
    # joint blocks are almost all distinct and the empirical conditional
    # entropy collapses, so the comparison is made at ell = 2
    from lzguess.bounds import block_entropy
    from lzguess.guessers import Guesser, lz_guess_prob, moment_log2
    n = 4096
    x = generate_corpus("bernoulli", n, p=0.5, seed=7)
    y = generate_corpus("bernoulli", n, p=0.5, seed=8)
    rep = cond_bounds(x, y, s=2, ell=2, zeta=1.0)
    h_plain = block_entropy(x, 2)
    assert rep.H_ell_cond == pytest.approx(h_plain, abs=0.1)
    measured_plain = moment_log2(lz_guess_prob(x).log2(), 1.0) / n
    assert rep.measured == pytest.approx(measured_plain, abs=0.35)


# --- conditional machines -------------------------------------------------------------

def test_lifted_machine_equals_plain_run():
    plain = FSGMSpec(B01, ["z"], "z", {"z": 1}, {"z": [(0, "z"), (1, "z")]})
    lifted = cond_machine_from_fsgm(plain)
    y = seq("0101", B01)
    out_plain = fsgm_run(plain, FixedBits("0110"), 4).output
    out_cond = cond_fsgm_run(lifted, y, FixedBits("0110"), 4)
    assert out_plain == out_cond


def test_copy_machine_reproduces_y():
    spec = copy_machine(B01, ell=1)
    y = seq("011010", B01)
    out = cond_fsgm_run(spec, y, FixedBits(""), 6)
    assert out == y
    assert cond_fsgm_sequence_prob(spec, y, y) == DyadicProb.one()
    other = seq("011011", B01)
    assert cond_fsgm_sequence_prob(spec, other, y).is_zero()


def test_cond_fsgm_forward_matches_enumeration():
    # 2-state, ell=1 machine that reads one bit and xors with y
    delta = {}
    table = {}
    for z in ("p", "q"):
        for yb in (b"\x00", b"\x01"):
            delta[(z, yb)] = 1
            flip = yb[0]
            table[(z, yb)] = [(bytes([0 ^ flip]), "q"),
                              (bytes([1 ^ flip]), "p")]
    spec = __import__("lzguess.sideinfo", fromlist=["CondFSGMSpec"]).\
        CondFSGMSpec(B01, B01, 1, ["p", "q"], "p", delta, table)
    y = seq("0110", B01)
    total = DyadicProb.zero()
    counts = {}
    for v in range(1 << 4):
        out = cond_fsgm_run(spec, y, FixedBits(format(v, "04b")), 4)
        counts[out] = counts.get(out, 0) + 1
    for x in all_seqs(B01, 4):
        expect = Fraction(counts.get(x, 0), 16)
        got = cond_fsgm_sequence_prob(spec, x, y)
        assert got.as_fraction() == expect
        total = total + got
    assert total == DyadicProb.one()


def test_cond_fsgm_run_requires_divisibility():
    spec = copy_machine(B01, ell=2)
    with pytest.raises(ValueError, match="divide"):
        cond_fsgm_run(spec, seq("010", B01), FixedBits(""), 3)
