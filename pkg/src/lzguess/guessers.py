"""Randomized guessers built on the LZ78 dictionary, and their moments.

The full-sequence sampler feeds fair bits to an LZ78-style decoder: with t
nodes in the dictionary it reads ceil(log2(t)) bits for a pointer (value mod
t) and ceil(log2(alpha)) bits for a symbol (value mod alpha), emits the
pointed word plus the symbol, and keeps the dictionary equal to the
incremental parse of everything emitted so far (the parse cursor carries
across draws, so a draw that lands on an already-seen word simply deepens the
cursor instead of adding a node).  The final draw may overshoot the target
length; surplus symbols are discarded.  Modulo mapping keeps every
probability dyadic and gives each phrase probability at least 2**-(pointer
bits + symbol bits), which is what makes the sampler dominate 2**-LZ(x).

Because the dictionary state is a function of the emitted prefix alone, the
exact probability of emitting a given x is a forward pass over positions
0..n, far cheaper than enumerating draw sequences.  Guess probabilities sum
to one exactly over each length-n alphabet power.

The block guesser restarts the dictionary every ell symbols (a final short
block just uses a shorter target), multiplying per-block probabilities, and
compiles to an explicit finite-state machine whose states are (determined
block prefix, symbols still pending emission).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .seqcore import Alphabet, BitSource, BudgetError, DyadicProb, SymbolSeq
from . import lz78
from .fsgm import FSGMSpec

LOG2E = math.log2(math.e)


def _sym_counts(alphabet: Alphabet) -> list[int]:
    """How many raw symbol-field patterns map to each symbol under mod."""
    a = alphabet.bits_per_symbol
    return [((1 << a) - 1 - s) // alphabet.size + 1 for s in range(alphabet.size)]


def _ptr_count(node: int, t: int, width: int) -> int:
    """How many raw pointer-field patterns map to node id under mod t."""
    return ((1 << width) - 1 - node) // t + 1


# ---------------------------------------------------------------------------
# full-sequence sampler and its exact emission probability
# ---------------------------------------------------------------------------

def lz_sample(alphabet: Alphabet, n: int, bits: BitSource) -> SymbolSeq:
    """Draw one length-n guess from the LZ dictionary sampler."""
    if n < 1:
        raise ValueError("need n >= 1")
    a_bits = alphabet.bits_per_symbol
    alpha = alphabet.size
    words = [b""]
    children: list[dict] = [{}]
    cursor = 0
    out = bytearray()
    while len(out) < n:
        t = len(words)
        ptr = bits.next_bits((t - 1).bit_length()) % t
        sym = bits.next_bits(a_bits) % alpha
        word = words[ptr] + bytes([sym])
        for c in word:
            if len(out) == n:
                break
            out.append(c)
            child = children[cursor].get(c)
            if child is None:
                children[cursor][c] = len(words)
                words.append(words[cursor] + bytes([c]))
                children.append({})
                cursor = 0
            else:
                cursor = child
    return SymbolSeq(alphabet, bytes(out))


def _parse_history(x: SymbolSeq):
    """The parse trie of x plus t_at[e] = node count after e symbols."""
    parse = lz78.incremental_parse(x)
    trie = parse.trie
    t_at = [1] * (len(x) + 1)
    node = 0
    t = 1
    for e, c in enumerate(x):
        child = trie.children[node].get(c)
        # replay: a child created later than the current count is the one
        # this very step creates
        if child is None or child >= t:
            t += 1
            node = 0
        else:
            node = child
        t_at[e + 1] = t
    return parse, t_at


def _subtree_ptr_count(trie: lz78.ParseTrie, node: int, limit: int,
                       t: int, width: int) -> int:
    """Sum of pointer-pattern counts over node and its descendants with
    id < limit (descendant ids always exceed ancestor ids)."""
    total = 0
    stack = [node]
    while stack:
        v = stack.pop()
        total += _ptr_count(v, t, width)
        for child in trie.children[v].values():
            if child < limit:
                stack.append(child)
    return total


def lz_guess_prob(x: SymbolSeq) -> DyadicProb:
    """Exact probability that :func:`lz_sample` emits x.

    Forward pass over emitted-prefix lengths e: the dictionary after a
    matching prefix of length e is the parse trie of x[0:e], so each state
    only needs the probability mass arriving at it.  From e, a draw either
    extends the match to e + d + 1 (pointer to the depth-d node on the trie
    path of x[e:], then the matching symbol) or, when the path covers the
    whole residual, overshoots into any descendant and wins with any symbol.
    """
    n = len(x)
    if n == 0:
        return DyadicProb.one()
    alphabet = x.alphabet
    a_bits = alphabet.bits_per_symbol
    sym_counts = _sym_counts(alphabet)
    parse, t_at = _parse_history(x)
    trie = parse.trie
    idx = x.indices

    p: list = [None] * (n + 1)
    p[0] = DyadicProb.one()
    success = DyadicProb.zero()
    for e in range(n):
        pe = p[e]
        if pe is None:
            continue
        t = t_at[e]
        width = (t - 1).bit_length()
        denom = width + a_bits
        for d, node in trie.walk(idx[e:], limit=t):
            if e + d == n:
                sub = _subtree_ptr_count(trie, node, t, t, width)
                success = success + pe * DyadicProb.from_ratio(sub, width)
                break
            weight = _ptr_count(node, t, width) * sym_counts[idx[e + d]]
            gain = pe * DyadicProb.from_ratio(weight, denom)
            tgt = e + d + 1
            p[tgt] = gain if p[tgt] is None else p[tgt] + gain
    if p[n] is not None:
        success = success + p[n]
    return success


def aligned_guess_prob(x: SymbolSeq) -> DyadicProb:
    """Probability of the single draw path aligned with x's own parse.

    One factor per complete phrase (pointer patterns hitting the parent node
    times symbol patterns hitting the innovation) plus an overshoot factor
    for an incomplete tail.  A lower bound on lz_guess_prob and at least
    2**-code_length(x)."""
    n = len(x)
    if n == 0:
        return DyadicProb.one()
    alphabet = x.alphabet
    a_bits = alphabet.bits_per_symbol
    sym_counts = _sym_counts(alphabet)
    parse, t_at = _parse_history(x)
    trie = parse.trie
    idx = x.indices
    prob = DyadicProb.one()
    ends = parse.boundaries[1:] + [n]
    for j, (b, end) in enumerate(zip(parse.boundaries, ends), start=1):
        t = t_at[b]
        width = (t - 1).bit_length()
        if j == parse.c_lz and not parse.last_complete:
            node = next(v for d, v in trie.walk(idx[b:], limit=t)
                        if d == end - b)
            sub = _subtree_ptr_count(trie, node, t, t, width)
            prob = prob * DyadicProb.from_ratio(sub, width)
        else:
            parent = trie.parent[j]
            weight = _ptr_count(parent, t, width) * sym_counts[idx[end - 1]]
            prob = prob * DyadicProb.from_ratio(weight, width + a_bits)
    return prob


# ---------------------------------------------------------------------------
# block-restarted guesser
# ---------------------------------------------------------------------------

def _blocks(n: int, ell: int):
    for b in range(0, n, ell):
        yield b, min(b + ell, n)


def block_sample(alphabet: Alphabet, n: int, ell: int,
                 bits: BitSource) -> SymbolSeq:
    """Independent dictionary restarts every ell symbols."""
    if ell < 1:
        raise ValueError("need ell >= 1")
    out = bytearray()
    for b, e in _blocks(n, ell):
        out.extend(lz_sample(alphabet, e - b, bits).indices)
    return SymbolSeq(alphabet, bytes(out))


def block_guess_prob(x: SymbolSeq, ell: int) -> DyadicProb:
    """Product of per-block emission probabilities (trie reset per block)."""
    if ell < 1:
        raise ValueError("need ell >= 1")
    prob = DyadicProb.one()
    for b, e in _blocks(len(x), ell):
        prob = prob * lz_guess_prob(x[b:e])
    return prob


def compile_block_guesser_to_fsgm(ell: int, alphabet: Alphabet,
                                  state_budget: int = 4096) -> FSGMSpec:
    """An explicit machine whose output law equals the block guesser's.

    State (u, k): the block's first |u| symbols are determined to be u and
    the last k of them are still pending emission.  Draw states (k = 0) read
    a whole pointer+symbol field at once and spread the word over idle
    states; the block resets to the empty state every ell symbols.  The
    construction is compared against the ell * alpha**ell budget and flags
    any excess.
    """
    alpha = alphabet.size
    if ell < 1:
        raise ValueError("need ell >= 1")
    if ell * alpha ** ell > state_budget:
        raise BudgetError("compile budget exceeded: ell*alpha**ell = %d > %d"
                          % (ell * alpha ** ell, state_budget))
    a_bits = alphabet.bits_per_symbol

    def name(u: bytes, k: int) -> str:
        text = "".join(str(alphabet.tokens[c]) for c in u) or "."
        return "%s|%d" % (text, k)

    start = (b"", 0)
    delta: dict = {}
    table: dict = {}
    pending = [start]
    seen = {start}
    while pending:
        u, k = pending.pop()
        z = name(u, k)
        if k > 0:
            nxt = (u, k - 1)
            if len(u) == ell and k - 1 == 0:
                nxt = start
            delta[z] = 0
            table[z] = [(u[len(u) - k], name(*nxt))]
            if nxt not in seen:
                seen.add(nxt)
                pending.append(nxt)
            continue
        # draw state: dictionary is the parse trie of u
        parse, t_at = _parse_history(SymbolSeq(alphabet, u))
        trie = parse.trie
        t = t_at[len(u)]
        width = (t - 1).bit_length()
        delta[z] = width + a_bits
        rows = []
        for w in range(1 << (width + a_bits)):
            ptr = (w >> a_bits) % t
            sym = (w & ((1 << a_bits) - 1)) % alpha
            word = trie.word(ptr) + bytes([sym])
            u_full = (u + word)[:ell]
            kp = len(u_full) - len(u) - 1
            nxt = (u_full, kp)
            if len(u_full) == ell and kp == 0:
                nxt = start
            rows.append((u_full[len(u)], name(*nxt)))
            if nxt not in seen:
                seen.add(nxt)
                pending.append(nxt)
        table[z] = rows

    names = [name(*s) for s in seen]
    spec = FSGMSpec(alphabet, sorted(set(names)), name(*start), delta, table,
                    name="block-guesser-ell%d" % ell)
    if spec.state_count > ell * alpha ** ell:
        import warnings
        warnings.warn("compiled machine uses %d states, above the "
                      "ell*alpha**ell = %d budget"
                      % (spec.state_count, ell * alpha ** ell))
    return spec


# ---------------------------------------------------------------------------
# guesser objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Guesser:
    """A randomized guessing distribution over length-n sequences.

    kinds: "lz_full" (one dictionary for the whole guess), "lz_block"
    (dictionary restarts every ell symbols), "uniform" (one fresh symbol
    per position; exactly uniform when alpha is a power of two), "fsgm"
    (an explicit machine).
    """

    kind: str
    alphabet: Alphabet
    n: int
    ell: int | None = None
    spec: FSGMSpec | None = None

    def __post_init__(self):
        if self.kind not in ("lz_full", "lz_block", "uniform", "fsgm"):
            raise ValueError("unknown guesser kind %r" % self.kind)
        if self.kind == "lz_block" and (self.ell is None or self.ell < 1):
            raise ValueError("lz_block needs ell >= 1")
        if self.kind == "fsgm" and self.spec is None:
            raise ValueError("fsgm guesser needs a machine spec")

    def describe(self) -> str:
        if self.kind == "lz_block":
            return "lz_block(ell=%d)" % self.ell
        if self.kind == "fsgm":
            return "fsgm(%s)" % (self.spec.name or "anonymous")
        return self.kind

    def sample(self, bits: BitSource) -> SymbolSeq:
        if self.kind == "lz_full":
            return lz_sample(self.alphabet, self.n, bits)
        if self.kind == "lz_block":
            return block_sample(self.alphabet, self.n, self.ell, bits)
        if self.kind == "uniform":
            return block_sample(self.alphabet, self.n, 1, bits)
        from .fsgm import run
        return run(self.spec, bits, self.n).output

    def guess_prob(self, x: SymbolSeq) -> DyadicProb:
        if len(x) != self.n:
            raise ValueError("target length %d != guesser length %d"
                             % (len(x), self.n))
        if self.kind == "lz_full":
            return lz_guess_prob(x)
        if self.kind == "lz_block":
            return block_guess_prob(x, self.ell)
        if self.kind == "uniform":
            return block_guess_prob(x, 1)
        from .fsgm import sequence_prob
        return sequence_prob(self.spec, x)


# ---------------------------------------------------------------------------
# geometric moments
# ---------------------------------------------------------------------------

class MomentResult(NamedTuple):
    value: float
    rel_err: float


def moment_exact(q, zeta: float, rel_tol: float = 1e-12,
                 force_series: bool = False) -> MomentResult:
    """E[G^zeta] for G geometric with success probability q.

    Closed forms for zeta in {1, 2}; otherwise the series
    sum_k k^zeta (1-q)^(k-1) q, stopped once a geometric tail bound
    certifies relative error below rel_tol.  force_series skips the closed
    forms (used to cross-check the series against them).
    """
    qf = float(q)
    if not 0.0 < qf <= 1.0:
        raise ValueError("divergent moment: need 0 < q <= 1, got %r" % (qf,))
    if zeta <= 0:
        raise ValueError("need zeta > 0")
    if not force_series:
        if zeta == 1:
            return MomentResult(1.0 / qf, 0.0)
        if zeta == 2:
            return MomentResult((2.0 - qf) / (qf * qf), 0.0)
    if qf == 1.0:
        return MomentResult(1.0, 0.0)
    one_minus = 1.0 - qf
    total = 0.0
    term_geom = qf          # q * (1-q)^(k-1)
    k = 1
    while True:
        total += (k ** zeta) * term_geom
        # past the peak, terms shrink at least geometrically with ratio r
        r = ((1.0 + 1.0 / k) ** zeta) * one_minus
        if r < 1.0:
            tail = (((k + 1) ** zeta) * term_geom * one_minus) / (1.0 - r)
            if tail <= rel_tol * total:
                return MomentResult(total + 0.5 * tail, tail / total)
        term_geom *= one_minus
        k += 1


def moment_lower_bound(q, zeta: float) -> float:
    """(2**-zeta / e**2) * q**-zeta, valid for q <= 1/2."""
    qf = float(q)
    if not 0.0 < qf <= 0.5:
        raise ValueError("the lower bound needs 0 < q <= 1/2, got %r" % (qf,))
    if zeta <= 0:
        raise ValueError("need zeta > 0")
    return (2.0 ** -zeta) / math.e ** 2 * qf ** -zeta


def moment_log2(q_log2: float, zeta: float) -> float:
    """log2 E[G^zeta] from log2 q, usable when q underflows floats.

    For q >= 2**-40 this is the exact evaluator in log form.  Below that the
    geometric sum is the Gamma integral up to corrections of order q, so
    log2 Gamma(zeta+1) - zeta*log2(q) is accurate to far beyond double
    precision.
    """
    if q_log2 > 0:
        raise ValueError("q_log2 must be <= 0")
    if zeta == 1:
        return -q_log2
    if q_log2 >= -40:
        return math.log2(moment_exact(2.0 ** q_log2, zeta).value)
    if zeta == 2:
        return 1.0 - 2.0 * q_log2
    return math.lgamma(zeta + 1.0) * LOG2E - zeta * q_log2


def moment_lower_bound_log2(q_log2: float, zeta: float) -> float:
    """log2 of :func:`moment_lower_bound`."""
    if q_log2 > -1:
        raise ValueError("the lower bound needs q <= 1/2")
    return -zeta - 2.0 * LOG2E - zeta * q_log2


# ---------------------------------------------------------------------------
# the guessing game, Monte Carlo side
# ---------------------------------------------------------------------------

def _lz_run_tables(x: SymbolSeq):
    """Per-position draw outcome tables for fast game simulation.

    tables[e] is indexed by the raw pointer+symbol field; entries are the
    next matched length, WIN (-2), or FAIL (-1)."""
    n = len(x)
    alphabet = x.alphabet
    a_bits = alphabet.bits_per_symbol
    alpha = alphabet.size
    parse, t_at = _parse_history(x)
    trie = parse.trie
    idx = x.indices
    widths = []
    tables = []
    for e in range(n):
        t = t_at[e]
        width = (t - 1).bit_length()
        size = 1 << (width + a_bits)
        table = [-1] * size
        path = dict(trie.walk(idx[e:], limit=t))
        node_to_depth = {v: d for d, v in path.items()}
        for raw_ptr in range(1 << width):
            node = raw_ptr % t
            base = raw_ptr << a_bits
            d = node_to_depth.get(node)
            if d is None:
                continue
            if e + d == n:
                for raw_sym in range(1 << a_bits):
                    table[base | raw_sym] = -2
                continue
            want = idx[e + d]
            tgt = e + d + 1
            code = -2 if tgt == n else tgt
            for raw_sym in range(1 << a_bits):
                if raw_sym % alpha == want:
                    table[base | raw_sym] = code
        # overshoot wins: descendants of the full-residual node
        full = next((v for d, v in path.items() if d == n - e), None)
        if full is not None:
            stack = [v for v in trie.children[full].values() if v < t]
            while stack:
                v = stack.pop()
                for raw_ptr in range(v, 1 << width, t):
                    base = raw_ptr << a_bits
                    for raw_sym in range(1 << a_bits):
                        table[base | raw_sym] = -2
                stack.extend(c for c in trie.children[v].values() if c < t)
        widths.append(width + a_bits)
        tables.append(table)
    return widths, tables


def _lz_full_runner(x: SymbolSeq) -> Callable[[BitSource], bool]:
    widths, tables = _lz_run_tables(x)

    def attempt(bits: BitSource) -> bool:
        e = 0
        while True:
            e = tables[e][bits.next_bits(widths[e])]
            if e == -2:
                return True
            if e == -1:
                return False

    return attempt


def _block_runner(x: SymbolSeq, ell: int) -> Callable[[BitSource], bool]:
    runners = [_lz_full_runner(x[b:e]) for b, e in _blocks(len(x), ell)]

    def attempt(bits: BitSource) -> bool:
        for r in runners:
            if not r(bits):
                return False
        return True

    return attempt


def _fsgm_runner(spec: FSGMSpec, x: SymbolSeq) -> Callable[[BitSource], bool]:
    target = x.indices
    init = spec._idx[spec.initial]
    delta = spec.delta
    table = spec.table

    def attempt(bits: BitSource) -> bool:
        z = init
        for want in target:
            out, z = table[z][bits.next_bits(delta[z])]
            if out != want:
                return False
        return True

    return attempt


def make_runner(guesser: Guesser, x: SymbolSeq) -> Callable[[BitSource], bool]:
    """A single-guess attempt function; aborts at the first mismatch (the
    unread bits are independent, so the per-run success law is unchanged)."""
    if guesser.kind == "lz_full":
        if len(x) <= 512:
            return _lz_full_runner(x)
        return _block_runner(x, len(x))
    if guesser.kind == "lz_block":
        return _block_runner(x, guesser.ell)
    if guesser.kind == "uniform":
        return _block_runner(x, 1)
    return _fsgm_runner(guesser.spec, x)


@dataclass
class MomentEstimate:
    """Exact and Monte-Carlo views of E[G^zeta] for one guesser and target."""

    q: DyadicProb | None
    q_log2: float
    zeta: float
    exact_moment: float          # inf when it overflows a double
    exact_moment_log2: float
    exponent: float              # exact_moment_log2 / n
    mc_mean: float | None = None
    mc_ci: float | None = None   # 3 standard errors of the mean
    censored: int | None = None
    rounds: int | None = None


def estimate_moment(q: DyadicProb, zeta: float, n: int) -> MomentEstimate:
    """Exact fields only."""
    if q.is_zero():
        raise ValueError("zero-probability target")
    q_log2 = q.log2()
    m_log2 = moment_log2(q_log2, zeta)
    value = 2.0 ** m_log2 if m_log2 < 1020 else math.inf
    return MomentEstimate(q, q_log2, zeta, value, m_log2, m_log2 / n)


def _mc_chunk(args):
    """One contiguous block of rounds; a top-level function so worker
    processes can receive it.  Results do not depend on the chunking because
    round k always uses substream k."""
    guesser, x, zeta, start, count, seed, cap = args
    attempt = make_runner(guesser, x)
    total = 0.0
    total_sq = 0.0
    censored = 0
    for k in range(start, start + count):
        bits = BitSource(seed, substream=k)
        g = 0
        while True:
            g += 1
            if attempt(bits):
                break
            if g >= cap:
                censored += 1
                break
        gz = float(g) ** zeta
        total += gz
        total_sq += gz * gz
    return total, total_sq, censored


def run_game(guesser: Guesser, x: SymbolSeq, zeta: float = 1.0,
             rounds: int = 0, seed: int = 0, cap: int = 1 << 20,
             jobs: int = 1) -> MomentEstimate:
    """Play the guessing game: exact moment from the guesser's exact q, plus
    Monte Carlo over independent rounds (substream k drives round k).

    Rounds are censored at `cap` guesses; censored rounds enter the mean at
    the cap, so pick caps large enough for the q at hand or read the
    censored count.  jobs > 1 fans the rounds out to worker processes; the
    substream discipline keeps results identical for any worker count.
    """
    q = guesser.guess_prob(x)
    if q.is_zero():
        raise ValueError("zero-probability target for %s" % guesser.describe())
    est = estimate_moment(q, zeta, len(x))
    if rounds < 1:
        return est
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        step = -(-rounds // jobs)
        chunks = [(guesser, x, zeta, start, min(step, rounds - start), seed,
                   cap) for start in range(0, rounds, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_mc_chunk, chunks))
    else:
        parts = [_mc_chunk((guesser, x, zeta, 0, rounds, seed, cap))]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    censored = sum(p[2] for p in parts)
    mean = total / rounds
    var = max(total_sq / rounds - mean * mean, 0.0)
    est.mc_mean = mean
    est.mc_ci = 3.0 * math.sqrt(var / rounds)
    est.censored = censored
    est.rounds = rounds
    return est


def survival_curve(guesser: Guesser, x: SymbolSeq, ks, rounds: int,
                   seed: int, cap: int | None = None) -> dict[int, float]:
    """Empirical Pr{G >= k} at the requested k values.

    Each round runs the real game (censored at max(ks)); Pr{G >= k} is the
    fraction of rounds whose first k-1 attempts all failed.
    """
    ks = sorted(ks)
    cap = cap or ks[-1]
    attempt = make_runner(guesser, x)
    at_least = dict.fromkeys(ks, 0)
    for r in range(rounds):
        bits = BitSource(seed, substream=r)
        g = 0
        while True:
            g += 1
            if attempt(bits):
                break
            if g >= cap:
                g = cap + 1
                break
        for k in ks:
            if g >= k:
                at_least[k] += 1
    return {k: c / rounds for k, c in at_least.items()}
