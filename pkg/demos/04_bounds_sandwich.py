"""Finite-n converse and direct bounds around measured guessing exponents.

For three standard corpora, sandwich the exact per-symbol exponent of the
full-sequence sampler between the entropy/c-log-c converses and the c-log-c
direct bound.
"""

from lzguess import Guesser, generate_corpus, sandwich

corpora = {
    "periodic (ab)^2048": generate_corpus("periodic", 4096, pattern="ab"),
    "thue-morse n=4096": generate_corpus("thue_morse", 4096),
    "bernoulli(0.5) n=4096": generate_corpus("bernoulli", 4096, p=0.5,
                                             seed=7),
}

print("zeta = 1, s = 2, exponents in bits/symbol\n")
print("%-22s %10s %10s %10s %10s" % ("corpus", "conv(H)", "conv(clogc)",
                                     "measured", "direct"))
for name, x in corpora.items():
    g = Guesser("lz_full", x.alphabet, len(x))
    rep = sandwich(x, 1.0, 2, g, sequence_id=name)
    print("%-22s %10.4f %10.4f %10.4f %10.4f   ordering %s"
          % (name, rep.converse_entropy, rep.converse_clogc, rep.measured,
             rep.direct, "ok" if rep.ordering_ok else "VIOLATED"))

x = corpora["bernoulli(0.5) n=4096"]
g = Guesser("lz_full", x.alphabet, len(x))
rep = sandwich(x, 1.0, 2, g)
print("\nper-block-length table for the random corpus:")
print("%6s %10s %12s %12s" % ("ell", "H_ell", "conv(H)", "conv(clogc)"))
for row in rep.rows:
    print("%6d %10.4f %12.4f %12.4f"
          % (row.ell, row.H_ell, row.converse_entropy, row.converse_clogc))
print("best block length for the entropy converse:", rep.chosen_ell)
