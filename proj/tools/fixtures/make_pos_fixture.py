#!/usr/bin/env python3
"""Builds the real-text probe fixture.

Text: prose from CPython's pydoc_data/topics.py, topped up with module and
function docstrings from the standard library (PSF license).
Tags: Brill lexicon shipped with textblob (en/en-lexicon.txt, MIT), mapped
to coarse universal-style tags and reduced to words present in the text.

usage: make_pos_fixture.py <en-lexicon.txt> <out-dir> [max-tokens]
"""
import ast
import re
import sys
import sysconfig
from pathlib import Path

import pydoc_data.topics as topics

COARSE = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "NOUN", "NNPS": "NOUN",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB", "VBP": "VERB",
    "VBZ": "VERB", "MD": "VERB",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
    "RB": "ADV", "RBR": "ADV", "RBS": "ADV", "WRB": "ADV",
    "DT": "DET", "PDT": "DET", "WDT": "DET",
    "IN": "ADP", "TO": "PRT", "RP": "PRT",
    "PRP": "PRON", "PRP$": "PRON", "WP": "PRON", "WP$": "PRON", "EX": "PRON",
    "CC": "CONJ", "CD": "NUM",
}
PUNCT = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


def tokenize(line):
    # mirrors the toolkit tokenizer: ASCII whitespace split, punctuation
    # bytes split out, ASCII lowercase
    out = []
    for chunk in line.split():
        cur = ""
        for ch in chunk:
            if ch in PUNCT:
                if cur:
                    out.append(cur)
                    cur = ""
                out.append(ch)
            else:
                cur += ch
        if cur:
            out.append(cur)
    return [t.lower() if t.isascii() else t for t in out]


def paragraphs():
    for key in sorted(topics.topics):
        yield from re.split(r"\n\s*\n", topics.topics[key])
    stdlib = Path(sysconfig.get_paths()["stdlib"])
    for path in sorted(stdlib.glob("*.py")):
        try:
            tree = ast.parse(path.read_text(encoding="utf-8"))
        except (SyntaxError, UnicodeDecodeError):
            continue
        for node in ast.walk(tree):
            if isinstance(node, (ast.Module, ast.ClassDef, ast.FunctionDef)):
                doc = ast.get_docstring(node)
                if doc:
                    yield from re.split(r"\n\s*\n", doc)


def main():
    lexicon_path, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    max_tokens = int(sys.argv[3]) if len(sys.argv) > 3 else 100_000

    lex = {}
    for raw in lexicon_path.read_text(encoding="utf-8").splitlines():
        if raw.startswith(";;;") or not raw.strip():
            continue
        word, tag = raw.split()[:2]
        key = word.lower()
        if key not in lex or word == key:
            lex[key] = tag

    lines, seen, total = [], set(), 0
    for para in paragraphs():
        # keep prose paragraphs, drop code samples and grammar blocks
        if para.startswith(" ") or ">>>" in para or "::=" in para:
            continue
        text = " ".join(para.split())
        if not text.isascii() or len(text) < 40 or text in seen:
            continue
        toks = tokenize(text)
        if total + len(toks) > max_tokens:
            break
        seen.add(text)
        lines.append(text)
        total += len(toks)

    used = {}
    for text in lines:
        for tok in tokenize(text):
            if tok in used:
                continue
            if all(c in PUNCT for c in tok):
                used[tok] = "PUNCT"
            elif tok in lex and lex[tok] in COARSE:
                used[tok] = COARSE[lex[tok]]

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "real_text.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    with open(out_dir / "pos_lexicon.tsv", "w", encoding="utf-8") as f:
        for tok in sorted(used):
            f.write(f"{tok}\t{used[tok]}\n")
    print(f"{len(lines)} lines, {total} tokens, {len(used)} tagged types")


if __name__ == "__main__":
    main()
