"""Article-question co-attention and the gated merge.

Both attention directions derive from one similarity matrix between
down-projected sentence states (one column per article sentence) and
down-projected question word states.  The per-sentence distribution over
question words and the per-word distribution over sentences are stored
as (m, k) matrices so the question-to-article product type-checks; rows
or columns beyond the valid lengths are exactly zero.

Masks must be valid-prefix (padding trails content); the valid block is
sliced out, normalized, and zero-padded back.
"""

from dataclasses import dataclass

import numpy as np

from . import tensor as T


@dataclass
class CoAttentionOut:
    sent_proj: object  # (r/4, k) projected sentence states
    quest_proj: object  # (r/4, m) projected question states
    similarity: object  # (k, m)
    attn_over_question: object  # (m, k), columns sum to 1 over valid words
    attn_over_sentences: object  # (m, k), rows sum to 1 over valid sentences
    quest_aware: object  # (r/4, k) question summary per sentence
    sent_aware: object  # (r/4, k) sentence summary routed back per sentence
    fused: object  # (r, k)
    merged: object  # (r, k) final sentence representations


def _prefix_len(mask, what):
    mask = np.asarray(mask, dtype=bool)
    n = int(mask.sum())
    if n == 0:
        raise T.DegenerateMaskError(f"no valid {what}")
    if not mask[:n].all():
        raise ValueError(f"{what} mask is not a valid prefix: {mask}")
    return n


def transform(sent_states, quest_states, proj_w, proj_b):
    """Shared affine down-projection of both representations to r/4 rows."""
    r = sent_states.shape[0]
    if r % 4 != 0:
        raise T.DimensionError(f"hidden size {r} not divisible by 4")
    k = sent_states.shape[1]
    m = quest_states.shape[1]
    sent_proj = T.add(T.matmul(proj_w, sent_states), T.broadcast_cols(proj_b, k))
    quest_proj = T.add(T.matmul(proj_w, quest_states), T.broadcast_cols(proj_b, m))
    return sent_proj, quest_proj


def similarity(sent_proj, quest_proj, sim_w):
    """S[i, j] = w . [h_i ; u_j ; h_i * u_j] for sentence i, question word j."""
    d = sent_proj.shape[0]
    k = sent_proj.shape[1]
    m = quest_proj.shape[1]
    w_sent = T.slice_rows(sim_w, 0, d)
    w_quest = T.slice_rows(sim_w, d, 2 * d)
    w_prod = T.slice_rows(sim_w, 2 * d, 3 * d)
    sent_term = T.matmul(T.transpose(sent_proj), w_sent)  # (k, 1)
    quest_term = T.matmul(T.transpose(quest_proj), w_quest)  # (m, 1)
    prod_term = T.matmul(
        T.transpose(sent_proj), T.mul(quest_proj, T.broadcast_cols(w_prod, m))
    )  # (k, m)
    return T.add(
        T.add(T.broadcast_cols(sent_term, m), T.transpose(T.broadcast_cols(quest_term, k))),
        prod_term,
    )


def attention_weights(sim, sent_mask, quest_mask):
    """Normalize the similarity matrix in both directions.

    Returns (attn_over_question, attn_over_sentences), both (m, k):
    column j of the first is sentence j's distribution over question
    words; row i of the second is question word i's distribution over
    sentences.  Masked positions are exactly 0.
    """
    k, m = sim.shape
    kv = _prefix_len(sent_mask, "sentences")
    mv = _prefix_len(quest_mask, "question words")
    block = sim
    if kv < k:
        block = T.slice_rows(block, 0, kv)
    if mv < m:
        block = T.slice_cols(block, 0, mv)
    over_question = T.transpose(T.softmax(block, axis=1))  # (mv, kv)
    over_sentences = T.transpose(T.softmax(block, axis=0))  # (mv, kv)

    def _pad(t):
        if kv < k:
            t = T.concat([t, T.Tensor.zeros((mv, k - kv))], axis=1)
        if mv < m:
            t = T.concat([t, T.Tensor.zeros((m - mv, k))], axis=0)
        return t

    return _pad(over_question), _pad(over_sentences)


def attend_article_to_question(quest_proj, attn_over_question):
    """Per-sentence weighted sum of question word vectors: (r/4, k)."""
    return T.matmul(quest_proj, attn_over_question)


def attend_question_to_article(sent_proj, attn_over_sentences, attn_over_question):
    """Sentence summaries routed through question words back to sentences."""
    per_word = T.matmul(sent_proj, T.transpose(attn_over_sentences))  # (r/4, m)
    return T.matmul(per_word, attn_over_question)  # (r/4, k)


def fuse(sent_proj, quest_aware, sent_aware):
    """Concatenate [h ; u~ ; h*u~ ; h*h~] per column: (r, k)."""
    return T.concat(
        [
            sent_proj,
            quest_aware,
            T.mul(sent_proj, quest_aware),
            T.mul(sent_proj, sent_aware),
        ],
        axis=0,
    )


def merge(fused, sent_states):
    """Parameter-free sigmoid gate blending original and fused states."""
    gate = T.sigmoid(fused)
    ones = T.Tensor(np.ones(gate.shape))
    return T.add(T.mul(gate, sent_states), T.mul(T.sub(ones, gate), fused))


def coattend(sent_states, quest_states, sent_mask, quest_mask, proj_w, proj_b, sim_w):
    """Full pass: returns CoAttentionOut with merged final states (r, k)."""
    sent_proj, quest_proj = transform(sent_states, quest_states, proj_w, proj_b)
    sim = similarity(sent_proj, quest_proj, sim_w)
    over_question, over_sentences = attention_weights(sim, sent_mask, quest_mask)
    quest_aware = attend_article_to_question(quest_proj, over_question)
    sent_aware = attend_question_to_article(sent_proj, over_sentences, over_question)
    fused = fuse(sent_proj, quest_aware, sent_aware)
    merged = merge(fused, sent_states)
    return CoAttentionOut(
        sent_proj=sent_proj,
        quest_proj=quest_proj,
        similarity=sim,
        attn_over_question=over_question,
        attn_over_sentences=over_sentences,
        quest_aware=quest_aware,
        sent_aware=sent_aware,
        fused=fused,
        merged=merged,
    )
