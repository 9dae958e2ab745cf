"""Finite-n converse and direct bound calculators.

Everything is reported in bits per symbol (base-2 logs throughout, converting
the mixed natural-log statements once and for all).  The uncomputable
max-distinct phrase count c(x) is replaced by the incremental-parse count
c_lz(x), which never undershoots it by more than one; the K-state
compressibility rho_K is bracketed by computable surrogates instead of being
minimized over encoders.

Converse side, for any s-state machine generating x with probability at most
one half and any divisor ell of n:

  * entropy form:   zeta * [H_ell(x)/ell - log2(s^3 e)/ell] - log2(e^2 2^zeta)/n
  * c-log-c form:   zeta * [c_lz log2 c_lz / n - delta_n(s)]

with delta_n(s) minimized over divisors ell of n using
K(ell) = (alpha^(ell+1) - 1)/(alpha - 1).  Negative values are clamped to
zero since E[G^zeta] >= 1 forces nonnegative exponents.

Direct side, for the full-sequence LZ sampler:

  * zeta * [c_lz log2 c_lz / n + eps(n)]

where eps(n) collects the per-phrase overhead of the concrete code via the
phrase-count bound c_lz <= n log2(alpha) / ((1 - eps_n) log2 n); the eps_n
closed form follows the Cover-Thomas style estimate adapted to alphabet
size alpha and is clamped (with a warning) when n is too small for it to be
meaningful.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .seqcore import SymbolSeq
from .lz78 import incremental_parse
from .guessers import Guesser, moment_log2

LOG2E = math.log2(math.e)


def divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def block_entropy(x: SymbolSeq, ell: int) -> float:
    """Empirical entropy (bits) of the non-overlapping ell-blocks of x.

    If ell does not divide n the trailing partial block is dropped with a
    warning; ell > n is an error.
    """
    n = len(x)
    if ell < 1 or ell > n:
        raise ValueError("need 1 <= ell <= n, got ell=%d, n=%d" % (ell, n))
    if n % ell:
        warnings.warn("ell=%d does not divide n=%d; truncating the tail"
                      % (ell, n))
    m = n // ell
    counts: dict = {}
    idx = x.indices
    for i in range(m):
        block = idx[i * ell:(i + 1) * ell]
        counts[block] = counts.get(block, 0) + 1
    h = 0.0
    for c in counts.values():
        p = c / m
        h -= p * math.log2(p)
    return h


def K_of_ell(ell: int, alpha: int) -> int:
    """(alpha**(ell+1) - 1) // (alpha - 1): states of the ell-block Shannon
    encoder, exactly the power sum 1 + alpha + ... + alpha**ell."""
    if ell < 0:
        raise ValueError("need ell >= 0")
    return (alpha ** (ell + 1) - 1) // (alpha - 1)


def epsilon_n(n: int, alpha: int) -> float:
    """eps_n in the phrase-count bound c(x) <= n log2(alpha)/((1-eps_n) log2 n).

    Closed form (log2 log2 n + 2 log2 alpha + 2) / log2 n, the Cover-Thomas
    style estimate with the alphabet worked in; at alpha = 2 it is the
    textbook (log log n + 4)/log n.  Values >= 1 (tiny n) are clamped just
    below 1 with a warning, which only weakens the bounds that use it.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    log_n = math.log2(n)
    value = (math.log2(max(log_n, 1.0)) + 2 * math.log2(alpha) + 2) / log_n
    if value >= 1.0:
        warnings.warn("eps_n >= 1 at n=%d; clamped (bounds are vacuous here)"
                      % n)
        return 1.0 - 1.0 / (4 * log_n)
    return value


def epsilon_lz(n: int, alpha: int) -> float:
    """eps(n) in code_length(x) <= c_lz log2 c_lz + n*eps(n).

    [log2 e + n log2(alpha) log2(2 alpha) / ((1-eps_n) log2 n)
     + log2(2 alpha (n+1))] / n, which tends to zero like 1/log n.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    en = epsilon_n(n, alpha)
    mid = n * math.log2(alpha) * math.log2(2 * alpha) / ((1.0 - en) * math.log2(n))
    return (LOG2E + mid + math.log2(2 * alpha * (n + 1))) / n


def entropy_converse_at(x: SymbolSeq, s: int, zeta: float, ell: int) -> float:
    """The entropy-form converse evaluated at one block length, clamped."""
    n = len(x)
    h = block_entropy(x, ell)
    value = zeta * (h / ell - (3 * math.log2(s) + LOG2E) / ell) \
        - (2 * LOG2E + zeta) / n
    return max(value, 0.0)


def converse_entropy(x: SymbolSeq, s: int, zeta: float) -> float:
    """Best entropy-form converse over all divisors of n (bits/symbol)."""
    if s < 1:
        raise ValueError("need s >= 1")
    return max(entropy_converse_at(x, s, zeta, ell) for ell in divisors(len(x)))


def delta_n_at(n: int, alpha: int, s: int, zeta: float, ell: int) -> float:
    """One candidate of the delta_n(s) minimization."""
    if (ell + 1) * math.log2(alpha) > 500:
        return math.inf
    K = K_of_ell(ell, alpha)
    log4K2 = math.log2(4 * K * K)
    en = epsilon_n(n, alpha)
    return (log4K2 * math.log2(alpha) / ((1.0 - en) * math.log2(n))
            + K * K * log4K2 / n
            + (1 + 3 * math.log2(s) + LOG2E) / ell
            + (2 * LOG2E + zeta) / n)


def delta_n(n: int, alpha: int, s: int, zeta: float) -> float:
    """delta_n(s): vanishes as n grows at fixed s, minimized over divisors."""
    return min(delta_n_at(n, alpha, s, zeta, ell) for ell in divisors(n))


def converse_clogc(x: SymbolSeq, s: int, zeta: float) -> float:
    """The computable c-log-c converse, normalized per symbol and clamped."""
    if s < 1:
        raise ValueError("need s >= 1")
    n = len(x)
    c = incremental_parse(x).c_lz
    rate = c * math.log2(c) / n if c > 1 else 0.0
    return max(zeta * (rate - delta_n(n, x.alphabet.size, s, zeta)), 0.0)


def direct_clogc(x: SymbolSeq, zeta: float) -> float:
    """Upper bound on the full-sequence LZ sampler's exponent (bits/symbol)."""
    n = len(x)
    if n < 2:
        raise ValueError("need n >= 2")
    c = incremental_parse(x).c_lz
    rate = c * math.log2(c) / n if c > 1 else 0.0
    return zeta * (rate + epsilon_lz(n, x.alphabet.size))


def rho_upper(x: SymbolSeq, ell: int) -> float:
    """(H_ell(x) + 1)/ell: the Shannon-code surrogate upper bound on the
    K(ell)-state compressibility of x."""
    return (block_entropy(x, ell) + 1.0) / ell


@dataclass
class BoundRow:
    ell: int
    H_ell: float
    converse_entropy: float
    converse_clogc: float
    direct: float
    measured: float


@dataclass
class BoundReport:
    """Converse and direct values around one measured guessing exponent."""

    sequence_id: str
    n: int
    zeta: float
    s: int
    guesser: str
    q_log2: float
    measured: float              # (1/n) log2 E[G^zeta] from exact q
    converse_entropy: float
    converse_clogc: float
    direct: float
    chosen_ell: int              # maximizer of the entropy converse
    rows: list[BoundRow] = field(default_factory=list)

    @property
    def ordering_ok(self) -> bool:
        return (self.converse_entropy <= self.measured + 1e-12
                and self.converse_clogc <= self.measured + 1e-12
                and self.measured <= self.direct + 1e-12)


def sandwich(x: SymbolSeq, zeta: float, s: int, guesser: Guesser,
             sequence_id: str = "") -> BoundReport:
    """Evaluate converse <= measured <= direct for one guesser and target.

    The measured exponent uses the guesser's exact per-round success
    probability; the direct value applies to the full-sequence LZ sampler.
    """
    n = len(x)
    q = guesser.guess_prob(x)
    if q.is_zero():
        raise ValueError("guesser cannot emit the target")
    q_log2 = q.log2()
    measured = moment_log2(q_log2, zeta) / n
    direct = direct_clogc(x, zeta)
    alpha = x.alphabet.size
    c = incremental_parse(x).c_lz
    rate = c * math.log2(c) / n if c > 1 else 0.0
    rows = []
    best_val = -math.inf
    best_ell = 1
    for ell in divisors(n):
        h = block_entropy(x, ell)
        ce = entropy_converse_at(x, s, zeta, ell)
        cc = max(zeta * (rate - delta_n_at(n, alpha, s, zeta, ell)), 0.0)
        rows.append(BoundRow(ell, h, ce, cc, direct, measured))
        if ce > best_val:
            best_val = ce
            best_ell = ell
    report = BoundReport(
        sequence_id=sequence_id or repr(x),
        n=n, zeta=zeta, s=s, guesser=guesser.describe(),
        q_log2=q_log2, measured=measured,
        converse_entropy=max(r.converse_entropy for r in rows),
        converse_clogc=max(r.converse_clogc for r in rows),
        direct=direct, chosen_ell=best_ell, rows=rows)
    return report
