#!/usr/bin/env python3
"""Independent recomputation of one document's loss breakdown.

Reads a binary checkpoint and the key<TAB>value dump produced by
`sentdoc oracle`, then rebuilds every dumped number from scratch with
straight-line numpy float64 code: sentence encodings through the
convolutional stack, plain and length-adjusted context vectors, logits
against the candidate encoder, per-target and combined losses. The sampled
negatives are replayed from the dump (their token ids are listed), so no
random generator is involved here. Exits 0 iff every dumped value matches
the recomputation within --tol (absolute).

This file deliberately shares no code with the library; it is the
cross-check, written from the on-disk format and the model description
alone.
"""

import argparse
import struct
import sys

import numpy as np

MIN_LEN = 10  # encoder inputs shorter than this are padded with id 0
PAD_ID = 0


def read_checkpoint(path):
    """Returns (vocab, d_w, d, sections: name -> float64 ndarray)."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != b"SDOC":
        raise ValueError("bad magic")
    version = blob[4]
    if version != 1:
        raise ValueError(f"unsupported version {version}")
    vocab, d_w, d = struct.unpack_from("<III", blob, 5)
    off = 5 + 12
    sections = {}
    order = []
    while off < len(blob):
        (name_len,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        (count,) = struct.unpack_from("<Q", blob, off)
        off += 8
        data = np.frombuffer(blob, dtype="<f4", count=count, offset=off)
        off += 4 * count
        sections[name] = data.astype(np.float64)
        order.append(name)
    return vocab, d_w, d, sections


class Encoder:
    """One convolutional sentence encoder rebuilt from named sections."""

    def __init__(self, sections, prefix, d_w):
        def get(name, shape):
            return sections[f"{prefix}.{name}"].reshape(shape)

        self.c1w = get("conv1.w", (128, 2, d_w))
        self.c1b = get("conv1.b", (128,))
        self.c2w = get("conv2.w", (256, 2, 128))
        self.c2b = get("conv2.b", (256,))
        self.c3w = get("conv3.w", (256, 2, 256))
        self.c3b = get("conv3.b", (256,))
        self.c4w = get("conv4.w", (256, 2, 256))
        self.c4b = get("conv4.b", (256,))
        self.f1w = get("fc1.w", (1024, 256))
        self.f1b = get("fc1.b", (1024,))
        self.f2w = get("fc2.w", (100, 1024))
        self.f2b = get("fc2.b", (100,))

    @staticmethod
    def conv(x, w, b):
        # x: [T, Cin]; w: [Cout, 2, Cin]; valid convolution, width 2.
        windows = np.stack([x[:-1], x[1:]], axis=1)  # [T-1, 2, Cin]
        return np.einsum("twi,owi->to", windows, w) + b

    @staticmethod
    def pool(x):
        # Window 2, stride 2; a trailing odd row is dropped.
        p = x.shape[0] // 2
        pairs = x[: 2 * p].reshape(p, 2, -1)
        return pairs.max(axis=1)

    def __call__(self, embedding, ids):
        ids = list(ids) + [PAD_ID] * max(0, MIN_LEN - len(ids))
        x = embedding[ids]
        x = np.maximum(self.conv(x, self.c1w, self.c1b), 0.0)
        x = np.maximum(self.conv(x, self.c2w, self.c2b), 0.0)
        x = self.pool(x)
        x = np.maximum(self.conv(x, self.c3w, self.c3b), 0.0)
        x = np.maximum(self.conv(x, self.c4w, self.c4b), 0.0)
        x = self.pool(x)
        x = x.mean(axis=0)
        x = np.maximum(self.f1w @ x + self.f1b, 0.0)
        return self.f2w @ x + self.f2b


def softplus(x):
    return np.logaddexp(0.0, x)


def loss_of(l_t, l_negs, form):
    if form == "standard":
        return softplus(-l_t) + sum(softplus(l) for l in l_negs)
    return softplus(-l_t) - sum(softplus(-l) for l in l_negs)


def length_adjust(mean_vec, norms):
    n = np.sqrt(mean_vec @ mean_vec)
    if n < 1e-12:
        return mean_vec
    return mean_vec * (np.mean(norms) / n)


def parse_dump(path):
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            key, value = line.split("\t", 1)
            out[key] = value
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ckpt", required=True)
    ap.add_argument("--dump", required=True)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    vocab, d_w, d, sections = read_checkpoint(args.ckpt)
    dump = parse_dump(args.dump)

    embedding = sections["embedding"].reshape(vocab, d_w)
    e_cntx = Encoder(sections, "cntx", d_w)
    e_cdd = Encoder(sections, "cdd", d_w)

    k = int(dump["k"])
    r = int(dump["r"])
    alpha = float(dump["alpha"])
    form = dump["form"]
    n = int(dump["n_sentences"])
    if int(dump["vocab_size"]) != vocab:
        print(f"vocab mismatch: dump {dump['vocab_size']} vs ckpt {vocab}")
        return 1

    sents = [
        [int(t) for t in dump[f"sent.{s}"].split()] for s in range(n)
    ]

    checked = 0
    max_err = 0.0
    failures = []

    def check(key, got):
        nonlocal checked, max_err
        want = np.asarray([float(v) for v in dump[key].split()])
        got = np.atleast_1d(np.asarray(got, dtype=np.float64))
        if want.shape != got.shape:
            failures.append(f"{key}: shape {got.shape} vs {want.shape}")
            return
        err = float(np.max(np.abs(want - got))) if want.size else 0.0
        checked += want.size
        max_err = max(max_err, err)
        if err > args.tol:
            failures.append(f"{key}: |err|={err:.3e}")

    cntx_enc = [e_cntx(embedding, s) for s in sents]
    cdd_enc = {}

    def cdd_of(ids):
        key = tuple(ids)
        if key not in cdd_enc:
            cdd_enc[key] = e_cdd(embedding, ids)
        return cdd_enc[key]

    # Context loss: mean over targets t = k+1 .. n-k of the per-target loss,
    # context = plain average of the 2k neighbor encodings.
    l_cntx = None
    if dump["cntx.valid"] == "1":
        target_losses = []
        for t in range(k + 1, n - k + 1):
            base = f"cntx.t{t}"
            neigh = [
                cntx_enc[s - 1]
                for s in range(t - k, t + k + 1)
                if s != t
            ]
            ctx = np.zeros(d)
            for v in neigh:
                ctx += v
            ctx /= len(neigh)
            check(f"{base}.context", ctx)
            l_t = ctx @ cdd_of(sents[t - 1])
            check(f"{base}.l_t", l_t)
            l_negs = []
            for i in range(r):
                neg_ids = [int(x) for x in dump[f"{base}.neg{i}.ids"].split()]
                l_neg = ctx @ cdd_of(neg_ids)
                check(f"{base}.l_neg{i}", l_neg)
                l_negs.append(l_neg)
            loss = loss_of(l_t, l_negs, form)
            check(f"{base}.loss", loss)
            target_losses.append(loss)
        l_cntx = sum(target_losses) / len(target_losses)
        check("cntx.loss", l_cntx)

    # Document loss: every target scores against one shared
    # length-adjusted mean of all sentence encodings.
    norms = [float(np.sqrt(v @ v)) for v in cntx_enc]
    mean_vec = np.zeros(d)
    for v in cntx_enc:
        mean_vec += v
    mean_vec /= n
    check("doc.context_mean", mean_vec)
    check("doc.norms", norms)
    adjusted = length_adjust(mean_vec, norms)
    check("doc.context_adjusted", adjusted)
    doc_losses = []
    for t in range(1, n + 1):
        base = f"doc.t{t}"
        l_t = adjusted @ cdd_of(sents[t - 1])
        check(f"{base}.l_t", l_t)
        l_negs = []
        for i in range(r):
            neg_ids = [int(x) for x in dump[f"{base}.neg{i}.ids"].split()]
            l_neg = adjusted @ cdd_of(neg_ids)
            check(f"{base}.l_neg{i}", l_neg)
            l_negs.append(l_neg)
        loss = loss_of(l_t, l_negs, form)
        check(f"{base}.loss", loss)
        doc_losses.append(loss)
    l_doc = sum(doc_losses) / n
    check("doc.loss", l_doc)

    total = l_doc if l_cntx is None else alpha * l_cntx + (1 - alpha) * l_doc
    check("total", total)

    print(f"checked {checked} values, max_abs_err={max_err:.3e}, tol={args.tol:g}")
    for f in failures:
        print(f"MISMATCH {f}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
