"""Finite-state guessing machines and their exact output laws.

Build the 7-state machine realizing the word mapping 0->ab, 10->bac,
11->ca, drive it on chosen bits, and compute exact sequence probabilities
through the induced hidden-Markov kernel.  Then expand a variable-length
word tree into the fixed-Delta form.
"""

from lzguess import (Alphabet, BitSource, SymbolSeq, build_fig1_machine,
                     expand_tree_machine, output_distribution, run,
                     sequence_prob)
from lzguess.fsgm import TreeFSGMSpec, format_machine

spec = build_fig1_machine()
print("machine:", spec.name, "with states", ", ".join(spec.names))
print()
print(format_machine(spec))

trace = run(spec, BitSource(42), 9)
print("seeded run     :", trace.output.render(),
      "(consumed %d bits)" % trace.bits_consumed)
print("state path     :", "".join(trace.states))

# the first two symbols are forced before any branch applies
dist = output_distribution(spec, 4)
print("\nexact law of the first 4 symbols:")
for x, p in sorted(dist.items(), key=lambda kv: kv[0].render()):
    print("  %s  %s" % (x.render(), p.as_fraction()))

impossible = sequence_prob(spec, SymbolSeq(spec.alphabet, bytes([1, 0, 0])))
print("\nP(output starts 'ba') =", impossible.as_fraction(),
      "(the opening 'ab' is forced)")

# tree machines: per-state prefix-free word trees, expanded to full depth
b01 = Alphabet(("0", "1"))
tree = TreeFSGMSpec(b01, "z", {"z": {"0": ("0", "z"),
                                     "10": ("1", "z"),
                                     "11": ("0", "z")}})
expanded = expand_tree_machine(tree)
print("\ntree {0,10,11} expands to Delta =", expanded.delta[0],
      "with f(z,00) == f(z,01):",
      expanded.table[0][0b00] == expanded.table[0][0b01])
