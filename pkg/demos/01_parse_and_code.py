"""Incremental parsing and the exact bit-level code.

Walk through the 15-symbol example string: parse it into shortest-new
phrases, price the concrete code phrase by phrase, round-trip the bits, and
check Kraft's inequality exhaustively at small n.
"""

from fractions import Fraction
from itertools import product

from lzguess import Alphabet, SymbolSeq, decode, encode, incremental_parse
from lzguess.lz78 import c_max_oracle

ab = Alphabet(("a", "b"))
x = SymbolSeq.from_text("abbabaabbaaabaa", ab)

r = incremental_parse(x)
print("sequence      :", x.render())
print("phrases       :", ",".join(r.phrase_texts()))
print("c_lz          :", r.c_lz, "(last complete)" if r.last_complete
      else "(last phrase incomplete)")
print("code length   :", r.code_length_bits, "bits")

bits = encode(x)
print("encoded       :", bits)
print("round trip ok :", decode(bits, len(x), ab) == x)

# the exhaustive oracle for the max number of distinct phrases
print("c_max oracle  :", c_max_oracle(x), " (c_lz <= c_max + 1)")

# Kraft sums: the code is prefix-free per target length
for n in (4, 8, 10):
    total = Fraction(0)
    for combo in product("ab", repeat=n):
        s = SymbolSeq.from_text("".join(combo), ab)
        total += Fraction(1, 2 ** incremental_parse(s).code_length_bits)
    print("Kraft sum n=%-2d: %s  (<= 1)" % (n, total))
