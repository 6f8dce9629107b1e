"""Vocabulary with reserved ids and pretrained-embedding loading."""

import logging
from collections import Counter

import numpy as np

logger = logging.getLogger(__name__)

PAD_ID = 0
UNK_ID = 1
EOS_ID = 2
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
EOS_TOKEN = "<eos>"
RESERVED = [PAD_TOKEN, UNK_TOKEN, EOS_TOKEN]


class Vocabulary:
    """Bidirectional token<->id map; ids 0..2 are PAD/UNK/EOS forever."""

    def __init__(self, tokens, counts=None):
        self.id_to_token = list(RESERVED) + list(tokens)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")
        self.counts = [0, 0, 0] + (list(counts) if counts is not None else [0] * len(tokens))

    def __len__(self):
        return len(self.id_to_token)

    def encode(self, token):
        return self.token_to_id.get(token, UNK_ID)

    def encode_tokens(self, tokens):
        return [self.encode(t) for t in tokens]

    def decode(self, token_id):
        return self.id_to_token[token_id]

    def decode_ids(self, ids):
        return [self.id_to_token[i] for i in ids]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for i, tok in enumerate(self.id_to_token):
                fh.write(f"{tok}\t{i}\t{self.counts[i]}\n")

    @classmethod
    def load(cls, path):
        tokens, counts = [], []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                tok, idx, count = line.rstrip("\n").split("\t")
                idx = int(idx)
                if idx < 3:
                    if tok != RESERVED[idx]:
                        raise ValueError(f"reserved id {idx} maps to {tok!r} in {path}")
                    continue
                tokens.append(tok)
                counts.append(int(count))
        return cls(tokens, counts)


def build_vocab(corpus, max_size):
    """Frequency-ranked vocabulary from an iterable of token lists.

    Keeps the (max_size - 3) most frequent tokens after the reserved ids;
    ties broken by first occurrence in the corpus.
    """
    if max_size <= 3:
        raise ValueError(f"max_size must exceed the 3 reserved ids, got {max_size}")
    counts = Counter()
    first_seen = {}
    n_tokens = 0
    for tokens in corpus:
        for t in tokens:
            n_tokens += 1
            counts[t] += 1
            if t not in first_seen:
                first_seen[t] = len(first_seen)
    if n_tokens == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    kept = ranked[: max_size - 3]
    return Vocabulary(kept, [counts[t] for t in kept])


def load_embeddings(path, vocab, dim, rng=None):
    """Load word vectors (token then `dim` floats per line) for a vocabulary.

    Returns (matrix of shape (len(vocab), dim), coverage ratio).  Tokens
    absent from the file -- including the reserved ids -- are initialized
    uniform(-0.1, 0.1).  Lines that fail to parse are skipped with a
    warning; a parseable line with fewer than `dim` values is an error.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    matrix = rng.uniform(-0.1, 0.1, size=(len(vocab), dim))
    found = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.rstrip("\n").split(" ")
            if len(fields) < 2:
                continue
            if len(fields) - 1 < dim:
                try:
                    [float(v) for v in fields[1:]]
                except ValueError:
                    logger.warning("skipping malformed embedding line %d in %s", lineno, path)
                    continue
                raise ValueError(
                    f"embedding dim mismatch at line {lineno}: got {len(fields) - 1}, want {dim}"
                )
            # tokens may themselves contain spaces; the vector is the tail
            token = " ".join(fields[: len(fields) - dim])
            try:
                vec = [float(v) for v in fields[len(fields) - dim :]]
            except ValueError:
                logger.warning("skipping malformed embedding line %d in %s", lineno, path)
                continue
            idx = vocab.token_to_id.get(token)
            if idx is not None and idx not in found:
                matrix[idx] = vec
                found.add(idx)
    coverage = len(found) / max(len(vocab) - 3, 1)
    return matrix, coverage
