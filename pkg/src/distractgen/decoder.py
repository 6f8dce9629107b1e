"""Hierarchical-attention LSTM decoder.

Each step runs a 2-layer unidirectional LSTM, scores every article
sentence (bilinear against the merged sentence states) and every word
within each sentence (bilinear against the word states), softmaxes the
two levels separately and multiplies them, so the combined weights sum
to 1 by construction.  The attended context and the top hidden state mix
through a tanh projection that feeds the vocabulary softmax.  No input
feeding: the attentional vector is not recycled into the next input.
"""

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .lstm import lstm_cell


@dataclass(frozen=True)
class DecoderState:
    layers: tuple  # ((h, c) per layer), each (d, 1)
    step: int = 0


@dataclass
class StepOutput:
    log_probs: object  # Tensor (|V|, 1)
    attention: np.ndarray  # (k_in, max_len) combined weights, masked slots 0
    attentional: object  # Tensor (d, 1)
    state: DecoderState

    @property
    def probs(self):
        """Vocabulary distribution as a plain array (sums to 1)."""
        return np.exp(self.log_probs.values)


def hierarchical_attention(merged_states, article, dec_hidden, sent_w, word_w):
    """Two-level attention over the article; returns (weights, context).

    merged_states: (r, k_in) final sentence representations; article: an
    ArticleEncoding (word states + masks); dec_hidden: (d, 1) top-layer
    decoder state.  weights is a dense (k_in, max_words) array whose
    valid entries sum to 1; context is the weighted sum of word states.
    """
    k_in = len(article.word_states)
    n_valid = article.num_valid
    if n_valid == 0:
        raise T.DegenerateMaskError("no valid sentence to attend to")
    if not article.sent_mask[:n_valid].all():
        raise ValueError("sentence mask is not a valid prefix")

    sent_query = T.matmul(sent_w, dec_hidden)  # (r, 1)
    word_query = T.matmul(word_w, dec_hidden)  # (r, 1)

    valid_states = merged_states
    if n_valid < k_in:
        valid_states = T.slice_cols(merged_states, 0, n_valid)
    sent_scores = T.matmul(T.transpose(valid_states), sent_query)  # (n_valid, 1)
    sent_probs = T.softmax(sent_scores, axis=0)

    max_words = max(article.word_lengths) if article.word_lengths else 0
    weights = np.zeros((k_in, max(max_words, 1)))
    context = None
    for i in range(n_valid):
        words = article.word_states[i]  # (r, l_i)
        word_scores = T.matmul(T.transpose(words), word_query)  # (l_i, 1)
        word_probs = T.softmax(word_scores, axis=0)
        sent_weight = T.pick(sent_probs, i, 0)
        combined = T.smul(word_probs, sent_weight)  # (l_i, 1)
        weights[i, : article.word_lengths[i]] = combined.values[:, 0]
        contrib = T.matmul(words, combined)  # (r, 1)
        context = contrib if context is None else T.add(context, contrib)
    return weights, context


def decode_step(token_id, state, article, merged_states, embed_table, params):
    """Advance one step from `token_id`; returns a StepOutput."""
    vocab_size = embed_table.shape[0]
    if not 0 <= token_id < vocab_size:
        raise ValueError(f"token id {token_id} outside vocabulary of size {vocab_size}")
    x = T.embedding_col(embed_table, token_id)
    new_layers = []
    for (h, c), weights in zip(state.layers, params["decoder_layers"]):
        h, c = lstm_cell(x, h, c, weights)
        new_layers.append((h, c))
        x = h
    top_hidden = new_layers[-1][0]
    attention, context = hierarchical_attention(
        merged_states, article, top_hidden, params["attn_sent_w"], params["attn_word_w"]
    )
    attentional = T.tanh(T.matmul(params["combine_w"], T.concat([top_hidden, context], axis=0)))
    logits = T.add(T.matmul(params["out_w"], attentional), params["out_b"])
    log_probs = T.log_softmax(logits, axis=0)
    return StepOutput(
        log_probs=log_probs,
        attention=attention,
        attentional=attentional,
        state=DecoderState(layers=tuple(new_layers), step=state.step + 1),
    )


def initial_state(layer_finals):
    """Decoder start state from the question initializer's per-layer finals."""
    return DecoderState(layers=tuple(layer_finals), step=0)


def teacher_forced_unroll(first_input, target_ids, state, article, merged_states, embed_table, params):
    """Feed gold tokens; returns (per-step log-prob tensors, last top hidden).

    Inputs are (first_input, target_ids[:-1]); outputs align with
    target_ids, whose last entry is EOS.  The returned hidden state is the
    top decoder layer after the final step.
    """
    if not target_ids:
        raise ValueError("empty target sequence")
    inputs = [first_input] + list(target_ids[:-1])
    steps = []
    for tok in inputs:
        out = decode_step(tok, state, article, merged_states, embed_table, params)
        steps.append(out)
        state = out.state
    last_hidden = state.layers[-1][0]
    return steps, last_hidden
