"""Word codes over {1..N}: disjointness, decoding, and decoding counts.

A disjoint code (no word prefixes another) decodes any one-sided stream
uniquely from the left.  Bi-infinite streams may still be parsed in more
than one way; the classical 4-word example realizes two parsings, and the
count never exceeds the longest word length.
"""

import numpy as np

from nonhyp.codes import (
    CodeBook,
    PeriodicStream,
    count_decodings,
    forward_decode,
    is_disjoint,
    power,
)

a, b = 1, 2
code = CodeBook(((a, b, a), (a, b, b), (b, a), (b, b, a)))
print("code:", code.words)
print("disjoint:", is_disjoint(code))          # pairwise prefix scan
print("R (max word length):", code.max_len)

# forward decoding round trip: 40 random codewords, spelled then re-read
rng = np.random.default_rng(1)
idx = rng.integers(0, code.size, size=40)
stream = sum((code.words[i] for i in idx), ())
dec = forward_decode(code, stream)
print("round trip exact:", dec.indices == list(idx) and dec.residual == ())

# the bi-infinite stream ...abb abb | aba aba... parses two ways
stream = PeriodicStream(left=(a, b, b), center=(a, b, a), right=(a, b, a))
n = count_decodings(code, stream)
print("decodings of the ambiguous stream:", n)   # 2

# decoding counts never exceed R, here sampled over random periodic streams
worst = 0
for _ in range(100):
    pick = lambda k: sum((code.words[int(i)] for i in rng.integers(0, 4, k)), ())
    s = PeriodicStream(pick(2), pick(3), pick(2))
    worst = max(worst, count_decodings(code, s))
print("worst count over 100 streams:", worst, "<=", code.max_len)

# powers concatenate m-fold and stay disjoint
squared = power(code, 2)
print("code^2:", squared.size, "words, disjoint:", is_disjoint(squared))
