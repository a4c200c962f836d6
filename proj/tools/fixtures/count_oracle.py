#!/usr/bin/env python3
"""Independent unigram/document frequency counter used to freeze golden files.

One document per line, blank lines are not documents. ASCII whitespace split,
ASCII punctuation split out as single tokens, ASCII lowercasing.

usage: count_oracle.py <corpus> > <golden.freq>
"""
import collections
import string
import sys

PUNCT = set(string.punctuation)


def tokens(line):
    out, cur = [], []
    for ch in line:
        if ch in " \t\r\n\v\f":
            if cur:
                out.append("".join(cur))
                cur = []
        elif ch in PUNCT:
            if cur:
                out.append("".join(cur))
                cur = []
            out.append(ch)
        else:
            cur.append(ch.lower() if ch.isascii() else ch)
    if cur:
        out.append("".join(cur))
    return out


def main():
    f, d = collections.Counter(), collections.Counter()
    m = docs = 0
    with open(sys.argv[1], encoding="utf-8") as fh:
        for line in fh:
            toks = tokens(line)
            if not toks:
                continue
            docs += 1
            m += len(toks)
            f.update(toks)
            d.update(set(toks))
    sys.stdout.write(f"#M={m} D={docs}\n")
    for tok in sorted(f, key=lambda t: (-f[t], t.encode("utf-8"))):
        sys.stdout.write(f"{tok}\t{f[tok]}\t{d[tok]}\n")


if __name__ == "__main__":
    main()
