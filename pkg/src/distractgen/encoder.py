"""Hierarchical article encoder and question encoders.

Article: a 2-layer bidirectional word LSTM encodes each sentence, the
top-layer summary of each sentence feeds a 1-layer bidirectional
sentence LSTM whose per-step states form the sentence matrix and whose
summary is the article vector.  The question runs through the same word
LSTM (shared parameters) for co-attention, and through a separate
2-layer unidirectional LSTM that initializes the decoder.

Sentences made entirely of PAD are treated as padding: their state
columns are exactly zero and they are skipped by the sentence LSTM, so
appending them never changes valid outputs.
"""

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .lstm import lstm_cell, run_stacked_bilstm
from .vocab import PAD_ID


@dataclass
class ArticleEncoding:
    word_states: list  # per input sentence: Tensor (r, l_i) or None for padding
    word_lengths: list  # ints, 0 for padding sentences
    sent_mask: np.ndarray  # bool (k_in,)
    sent_embeddings: object  # Tensor (r, k_in), zero columns where masked
    sent_states: object  # Tensor (r, k_in), zero columns where masked
    article_vector: object  # Tensor (r, 1)

    @property
    def num_valid(self):
        return int(self.sent_mask.sum())


@dataclass
class QuestionEncoding:
    states: object  # Tensor (r, m)
    length: int
    last_token_id: int


def _valid_length(token_ids):
    """Tokens before the first PAD; logical content never contains PAD."""
    for i, t in enumerate(token_ids):
        if t == PAD_ID:
            return i
    return len(token_ids)


def _embed_tokens(embed_table, token_ids):
    return [T.embedding_col(embed_table, t) for t in token_ids]


def encode_token_sequence(word_layers, embed_table, token_ids):
    """Shared word-level encoder: top-layer states plus summary vector."""
    if not token_ids:
        raise ValueError("cannot encode an empty token sequence")
    inputs = _embed_tokens(embed_table, token_ids)
    states, summary = run_stacked_bilstm(inputs, word_layers)
    return states, summary


def encode_article(word_layers, sent_layer, embed_table, sentences):
    """Encode a list of sentences (token-id lists, PAD-padded allowed)."""
    k_in = len(sentences)
    word_states = []
    word_lengths = []
    sent_embs = []  # valid sentences only, in order
    for sent in sentences:
        n = _valid_length(sent)
        word_lengths.append(n)
        if n == 0:
            word_states.append(None)
            sent_embs.append(None)
            continue
        states, summary = encode_token_sequence(word_layers, embed_table, sent[:n])
        word_states.append(T.concat(states, axis=1))
        sent_embs.append(summary)
    sent_mask = np.array([n > 0 for n in word_lengths], dtype=bool)
    valid_embs = [e for e in sent_embs if e is not None]
    if not valid_embs:
        raise ValueError("article has no non-empty sentence")

    fwd_weights, bwd_weights = sent_layer
    from .lstm import run_bilstm

    valid_states, article_vector = run_bilstm(valid_embs, fwd_weights, bwd_weights)

    r = article_vector.shape[0]
    zero_col = T.Tensor.zeros((r, 1))
    emb_cols = []
    state_cols = []
    it = iter(valid_states)
    for e in sent_embs:
        if e is None:
            emb_cols.append(zero_col)
            state_cols.append(zero_col)
        else:
            emb_cols.append(e)
            state_cols.append(next(it))
    sent_embeddings = T.concat(emb_cols, axis=1) if k_in > 1 else emb_cols[0]
    sent_states = T.concat(state_cols, axis=1) if k_in > 1 else state_cols[0]
    return ArticleEncoding(
        word_states=word_states,
        word_lengths=word_lengths,
        sent_mask=sent_mask,
        sent_embeddings=sent_embeddings,
        sent_states=sent_states,
        article_vector=article_vector,
    )


def encode_question(word_layers, embed_table, question_ids):
    """Question word states from the shared word-level LSTM."""
    n = _valid_length(question_ids)
    if n == 0:
        raise ValueError("cannot encode an empty question")
    states, _ = encode_token_sequence(word_layers, embed_table, question_ids[:n])
    return QuestionEncoding(
        states=T.concat(states, axis=1) if n > 1 else states[0],
        length=n,
        last_token_id=question_ids[n - 1],
    )


def encode_question_init(init_layers, embed_table, question_ids):
    """Run the 2-layer unidirectional initializer over the question.

    Returns (per-layer (h, c) finals, last question token id), the
    decoder's initial state and first input.
    """
    n = _valid_length(question_ids)
    if n == 0:
        raise ValueError("cannot encode an empty question")
    inputs = _embed_tokens(embed_table, question_ids[:n])
    layer_finals = []
    states = inputs
    for weights in init_layers:
        hd = weights["hidden"]
        h = T.Tensor.zeros((hd, 1))
        c = T.Tensor.zeros((hd, 1))
        outs = []
        for x in states:
            h, c = lstm_cell(x, h, c, weights)
            outs.append(h)
        layer_finals.append((h, c))
        states = outs
    return layer_finals, question_ids[n - 1]
