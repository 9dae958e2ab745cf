"""The randomized guessing game: exact moments and Monte Carlo.

Draw guesses from the LZ dictionary sampler, compute the exact per-round
success probability of a secret, evaluate moments of the number of rounds,
and watch the block-restarted variant compile down to a machine.
"""

from lzguess import (Alphabet, BitSource, Guesser, SymbolSeq,
                     compile_block_guesser_to_fsgm, lz_guess_prob,
                     moment_exact, moment_lower_bound, run_game)
from lzguess.guessers import block_guess_prob, lz_sample

b01 = Alphabet(("0", "1"))

print("ten guesses at n = 12 from the dictionary sampler:")
for k in range(10):
    print("  ", lz_sample(b01, 12, BitSource(2024, substream=k)).render())

secret = SymbolSeq.from_text("000000000000", b01)
q = lz_guess_prob(secret)
print("\nsecret         :", secret.render())
print("exact q        :", q.as_fraction(), "= 2^%.3f" % q.log2())
print("E[G]           : %.1f rounds" % moment_exact(q, 1).value)
print("E[G^2]         : %.3e" % moment_exact(q, 2).value)
print("lower bound    : %.1f <= E[G] (2^-zeta/e^2 * q^-zeta)"
      % moment_lower_bound(q, 1))

est = run_game(Guesser("lz_full", b01, 12), secret, zeta=1.0,
               rounds=2000, seed=9, cap=1 << 14)
print("Monte Carlo    : mean %.1f +- %.1f over %d rounds (%d censored)"
      % (est.mc_mean, est.mc_ci, est.rounds, est.censored))

# the compressible secret is orders of magnitude easier than a random one
rnd = SymbolSeq.from_text("011010011101", b01)
print("\nrandom-looking :", rnd.render(), " q =",
      lz_guess_prob(rnd).as_fraction())

# block restarts trade exponent for machine realizability
print("\nblock restarts on 0^12:")
for ell in (1, 2, 3, 4, 6, 12):
    bq = block_guess_prob(secret, ell)
    print("  ell=%-2d  -log2 q = %6.2f" % (ell, -bq.log2()))

spec = compile_block_guesser_to_fsgm(3, b01)
print("\nthe ell=3 block guesser compiles to", spec.state_count,
      "states (budget ell*alpha^ell = 24)")
