import itertools

import pytest

from lzguess.seqcore import Alphabet, SymbolSeq


class FixedBits:
    """A scripted bit source for driving machines through exact inputs.

    Raises when the script runs out unless pad=True, which appends zeros.
    """

    def __init__(self, text, pad=False):
        self.text = text
        self.pos = 0
        self.consumed = 0
        self.pad = pad

    def next_bits(self, k):
        if k == 0:
            return 0
        chunk = self.text[self.pos:self.pos + k]
        if len(chunk) < k:
            if not self.pad:
                raise RuntimeError("scripted bits exhausted")
            chunk = chunk + "0" * (k - len(chunk))
        self.pos += k
        self.consumed += k
        return int(chunk, 2)

    def next_bit(self):
        return self.next_bits(1)


@pytest.fixture
def binary():
    return Alphabet(("0", "1"))


@pytest.fixture
def ab():
    return Alphabet(("a", "b"))


def all_seqs(alphabet, n):
    for combo in itertools.product(range(alphabet.size), repeat=n):
        yield SymbolSeq(alphabet, bytes(combo))


def seq(text, alphabet):
    return SymbolSeq.from_text(text, alphabet)
