#!/usr/bin/env python3
"""Checks the synthetic corpus construction from the outside.

The generator promises that on the order-dependent half the positive and
negative documents use identical token multisets, so any bag-of-words
classifier is blind there, while the lexical half carries an explicit
polarity word. This script regenerates a corpus through the command-line
tool, fits a bag-of-words logistic regression per subset (no library code
involved), and asserts near-chance accuracy on the order half and high
accuracy on the lexical half.
"""

import argparse
import os
import subprocess
import sys

import numpy as np

US = "\x1f"


def read_corpus(path):
    """doc_id -> list of sentences, each a token list."""
    docs = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            doc_id, text = line.split("\t", 1)
            docs[doc_id] = [sent.split() for sent in text.split(US)]
    return docs


def read_pairs(path):
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            key, value = line.split("\t", 1)
            out[key] = value
    return out


def logistic_fit(x, y, iters=400, lr=0.5):
    # Full-batch gradient descent on mean log loss; deterministic.
    w = np.zeros(x.shape[1])
    b = 0.0
    for _ in range(iters):
        z = x @ w + b
        p = 1.0 / (1.0 + np.exp(-z))
        g = p - (y > 0)
        w -= lr * (x.T @ g) / len(y)
        b -= lr * float(np.mean(g))
    return w, b


def accuracy(w, b, x, y):
    pred = np.where(x @ w + b >= 0.0, 1, -1)
    return float(np.mean(pred == y))


def subset_accuracy(token_lists, labels, ids, seed):
    vocab = sorted({t for i in ids for t in token_lists[i]})
    index = {t: j for j, t in enumerate(vocab)}
    x = np.zeros((len(ids), len(vocab)))
    y = np.zeros(len(ids), dtype=int)
    for row, doc_id in enumerate(ids):
        for t in token_lists[doc_id]:
            x[row, index[t]] += 1.0
        y[row] = labels[doc_id]
    order = np.random.default_rng(seed).permutation(len(ids))
    half = len(ids) // 2
    tr, te = order[:half], order[half:]
    w, b = logistic_fit(x[tr], y[tr])
    return accuracy(w, b, x[te], y[te])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True, help="path to the sentdoc binary")
    ap.add_argument("--workdir", required=True)
    ap.add_argument("--docs", type=int, default=400)
    ap.add_argument("--seed", type=int, default=101)
    args = ap.parse_args()

    os.makedirs(args.workdir, exist_ok=True)
    prefix = os.path.join(args.workdir, "bow-")
    subprocess.run(
        [args.cli, "synth", "--seed", str(args.seed), "--docs",
         str(args.docs), "--aspects", "2", "--out-prefix", prefix],
        check=True, stdout=subprocess.DEVNULL)

    docs = read_corpus(prefix + "corpus.tsv")
    subset = read_pairs(prefix + "subset.tsv")
    whole_doc = {i: [t for sent in sents for t in sent]
                 for i, sents in docs.items()}
    failures = []
    for a, aspect in enumerate(("smell", "taste")):
        labels = {k: int(v)
                  for k, v in read_pairs(prefix + f"labels-{aspect}.tsv").items()}
        order_ids = sorted(i for i in docs if subset[i] == "order")
        lex_ids = sorted(i for i in docs if subset[i] == "lexical")
        # Order half: even with every token of the document, counts carry no
        # signal. Lexical half: the aspect's own sentence (sentence a) names
        # the polarity outright; whole-document counts would be confounded by
        # the other aspect's polarity words, which is intentional.
        own_sentence = {i: docs[i][a] for i in lex_ids}
        acc_order = subset_accuracy(whole_doc, labels, order_ids, seed=7)
        acc_lex = subset_accuracy(own_sentence, labels, lex_ids, seed=7)
        print(f"{aspect}: bag-of-words accuracy order={acc_order:.3f} "
              f"lexical(own sentence)={acc_lex:.3f}")
        if acc_order > 0.60:
            failures.append(f"{aspect}: order subset separable ({acc_order:.3f})")
        if acc_lex < 0.95:
            failures.append(f"{aspect}: lexical subset not separable "
                            f"({acc_lex:.3f})")
    for f in failures:
        print(f"FAIL {f}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
