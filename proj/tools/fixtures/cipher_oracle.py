#!/usr/bin/env python3
"""Literal transcription of the bit-cipher generation procedure, used to
freeze expected rank orders. Prints one bit string per rank, bit 1 first.

usage: cipher_oracle.py <N> <b>
"""
import sys


def bit_cipher(n, b):
    basis = [tuple(1 if c == i else 0 for c in range(b)) for i in range(b)]
    levels = [[tuple([0] * b)]] + [[] for _ in range(b)]
    out = []
    i, j, k = 0, 0, 1
    for _ in range(n):
        assigned = False
        while not assigned:
            u = tuple(abs(x - y) for x, y in zip(levels[k - 1][j], basis[i]))
            if sum(u) == k and u not in levels[k]:
                levels[k].append(u)
                out.append(u)
                assigned = True
            j += 1
            if j == len(levels[k - 1]):
                j = 0
                i += 1
                if i == b:
                    if k == 1:
                        basis.reverse()
                    i = 0
                    levels[k].reverse()
                    k += 1
    return out


if __name__ == "__main__":
    for row in bit_cipher(int(sys.argv[1]), int(sys.argv[2])):
        print("".join(map(str, row)))
