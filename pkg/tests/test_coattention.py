"""Co-attention: projections, similarity, both attention directions, merge."""

import numpy as np
import pytest

from distractgen import coattention as CA
from distractgen import tensor as T
from distractgen.gradcheck import grad_check


def tensors(*arrays):
    return [T.Tensor(np.asarray(a, dtype=float)) for a in arrays]


def full_mask(n):
    return np.ones(n, dtype=bool)


# ---------------------------------------------------------------------------
# transform


def test_transform_zero_weights():
    h_star, u_star = tensors(np.ones((8, 3)), np.ones((8, 2)))
    w, b = tensors(np.zeros((2, 8)), np.zeros((2, 1)))
    H, U = CA.transform(h_star, u_star, w, b)
    assert np.array_equal(H.values, np.zeros((2, 3)))
    assert np.array_equal(U.values, np.zeros((2, 2)))


def test_transform_quarter_rows_and_hand_example():
    rng = np.random.default_rng(0)
    h_star = T.Tensor(rng.standard_normal((8, 3)))
    u_star = T.Tensor(rng.standard_normal((8, 2)))
    w = T.Tensor(rng.standard_normal((2, 8)))
    b = T.Tensor(rng.standard_normal((2, 1)))
    H, U = CA.transform(h_star, u_star, w, b)
    assert H.shape == (2, 3) and U.shape == (2, 2)
    assert np.allclose(H.values, w.values @ h_star.values + b.values, atol=1e-12)
    assert np.allclose(U.values, w.values @ u_star.values + b.values, atol=1e-12)


def test_transform_rejects_bad_hidden_size():
    h_star, u_star = tensors(np.ones((6, 2)), np.ones((6, 2)))
    w, b = tensors(np.zeros((1, 6)), np.zeros((1, 1)))
    with pytest.raises(T.DimensionError):
        CA.transform(h_star, u_star, w, b)


# ---------------------------------------------------------------------------
# similarity


def test_similarity_zero_inputs():
    H, U = tensors(np.zeros((2, 3)), np.zeros((2, 4)))
    w = T.Tensor(np.random.default_rng(1).standard_normal((6, 1)))
    S = CA.similarity(H, U, w)
    assert np.array_equal(S.values, np.zeros((3, 4)))


def test_similarity_unit_weights_hand_checked():
    # with unit weights every entry is sum(h) + sum(u) + sum(h*u)
    rng = np.random.default_rng(2)
    H = T.Tensor(rng.standard_normal((2, 2)))
    U = T.Tensor(rng.standard_normal((2, 3)))
    w = T.Tensor(np.ones((6, 1)))
    S = CA.similarity(H, U, w)
    assert S.shape == (2, 3)
    for i in range(2):
        for j in range(3):
            h = H.values[:, i]
            u = U.values[:, j]
            assert S.values[i, j] == pytest.approx(h.sum() + u.sum() + (h * u).sum(), abs=1e-12)


def test_similarity_matches_column_pair_formula():
    rng = np.random.default_rng(3)
    H = T.Tensor(rng.standard_normal((4, 3)))
    U = T.Tensor(rng.standard_normal((4, 5)))
    w = T.Tensor(rng.standard_normal((12, 1)))
    S = CA.similarity(H, U, w)
    for i in range(3):
        for j in range(5):
            h = H.values[:, i]
            u = U.values[:, j]
            feat = np.concatenate([h, u, h * u])
            assert S.values[i, j] == pytest.approx(float(w.values[:, 0] @ feat), abs=1e-10)


# ---------------------------------------------------------------------------
# attention weights


def test_attention_weights_uniform():
    S = T.Tensor(np.zeros((3, 2)))
    over_q, over_s = CA.attention_weights(S, full_mask(3), full_mask(2))
    assert over_q.shape == (2, 3) and over_s.shape == (2, 3)
    assert np.allclose(over_q.values, 0.5, atol=1e-12)  # columns over 2 words
    assert np.allclose(over_s.values, 1.0 / 3.0, atol=1e-12)  # rows over 3 sentences


def test_attention_weights_derived_2x2():
    S = T.Tensor(np.array([[0.0, 1.0], [1.0, 0.0]]))
    over_q, _ = CA.attention_weights(S, full_mask(2), full_mask(2))
    e = np.exp(1.0)
    low, high = 1.0 / (1.0 + e), e / (1.0 + e)
    assert np.allclose(over_q.values[:, 0], [low, high], atol=1e-8)
    assert np.allclose(over_q.values[:, 1], [high, low], atol=1e-8)
    assert np.allclose(over_q.values[:, 0], [0.2689, 0.7311], atol=1e-4)


def test_attention_weights_normalization_axes():
    rng = np.random.default_rng(4)
    S = T.Tensor(rng.standard_normal((3, 4)))
    over_q, over_s = CA.attention_weights(S, full_mask(3), full_mask(4))
    # per sentence over question words: columns of over_q
    assert np.allclose(over_q.values.sum(axis=0), 1.0, atol=1e-9)
    # per question word over sentences: rows of over_s
    assert np.allclose(over_s.values.sum(axis=1), 1.0, atol=1e-9)


def test_attention_weights_masking():
    rng = np.random.default_rng(5)
    S = T.Tensor(rng.standard_normal((3, 4)))
    sent_mask = np.array([True, True, False])
    quest_mask = np.array([True, True, True, False])
    over_q, over_s = CA.attention_weights(S, sent_mask, quest_mask)
    assert np.array_equal(over_q.values[:, 2], np.zeros(4))  # padded sentence column
    assert np.array_equal(over_q.values[3, :], np.zeros(3))  # padded word row
    assert np.array_equal(over_s.values[3, :], np.zeros(3))
    assert np.allclose(over_q.values[:, :2].sum(axis=0), 1.0, atol=1e-9)
    assert np.allclose(over_s.values[:3, :].sum(axis=1), 1.0, atol=1e-9)
    with pytest.raises(T.DegenerateMaskError):
        CA.attention_weights(S, np.zeros(3, dtype=bool), quest_mask)
    with pytest.raises(ValueError):
        CA.attention_weights(S, np.array([True, False, True]), quest_mask)


# ---------------------------------------------------------------------------
# attends


def test_attend_a2q_one_hot_selects_question_vector():
    rng = np.random.default_rng(6)
    U = T.Tensor(rng.standard_normal((3, 2)))
    over_q = T.Tensor(np.array([[0.0], [1.0]]))  # one-hot on word 1, k=1
    got = CA.attend_article_to_question(U, over_q)
    assert np.allclose(got.values[:, 0], U.values[:, 1], atol=1e-12)


def test_attend_a2q_uniform_is_mean():
    rng = np.random.default_rng(7)
    U = T.Tensor(rng.standard_normal((3, 2)))
    over_q = T.Tensor(np.full((2, 1), 0.5))
    got = CA.attend_article_to_question(U, over_q)
    assert np.allclose(got.values[:, 0], U.values.mean(axis=1), atol=1e-12)


def test_attend_a2q_matches_matmul_oracle():
    rng = np.random.default_rng(8)
    U = T.Tensor(rng.standard_normal((3, 4)))
    over_q = T.Tensor(rng.random((4, 2)))
    got = CA.attend_article_to_question(U, over_q)
    assert np.allclose(got.values, U.values @ over_q.values, atol=1e-12)


def test_attend_q2a_single_sentence_identity():
    rng = np.random.default_rng(9)
    H = T.Tensor(rng.standard_normal((3, 1)))
    S = CA.similarity(H, T.Tensor(rng.standard_normal((3, 4))), T.Tensor(rng.standard_normal((9, 1))))
    over_q, over_s = CA.attention_weights(S, full_mask(1), full_mask(4))
    got = CA.attend_question_to_article(H, over_s, over_q)
    assert np.allclose(got.values, H.values, atol=1e-12)


def test_attend_q2a_zero_and_oracle():
    rng = np.random.default_rng(10)
    zero_H = T.Tensor(np.zeros((3, 2)))
    over_s = T.Tensor(rng.random((2, 2)))
    over_q = T.Tensor(rng.random((2, 2)))
    assert np.array_equal(
        CA.attend_question_to_article(zero_H, over_s, over_q).values, np.zeros((3, 2))
    )
    H = T.Tensor(rng.standard_normal((3, 2)))
    got = CA.attend_question_to_article(H, over_s, over_q)
    assert np.allclose(got.values, H.values @ over_s.values.T @ over_q.values, atol=1e-12)


# ---------------------------------------------------------------------------
# fuse / merge


def test_fuse_zero_attention_parts():
    rng = np.random.default_rng(11)
    H = T.Tensor(rng.standard_normal((2, 3)))
    zero = T.Tensor(np.zeros((2, 3)))
    G = CA.fuse(H, zero, zero)
    assert G.shape == (8, 3)
    assert np.array_equal(G.values[:2], H.values)
    assert np.array_equal(G.values[2:], np.zeros((6, 3)))


def test_fuse_pointwise_oracle():
    rng = np.random.default_rng(12)
    H, U_, Ht = (T.Tensor(rng.standard_normal((2, 3))) for _ in range(3))
    G = CA.fuse(H, U_, Ht)
    expect = np.concatenate(
        [H.values, U_.values, H.values * U_.values, H.values * Ht.values], axis=0
    )
    assert np.array_equal(G.values, expect)


def test_merge_examples():
    rng = np.random.default_rng(13)
    h_star = T.Tensor(rng.standard_normal((4, 2)))
    zero_G = T.Tensor(np.zeros((4, 2)))
    z = CA.merge(zero_G, h_star)
    assert np.allclose(z.values, 0.5 * h_star.values, atol=1e-12)
    z2 = CA.merge(h_star, h_star)
    assert np.allclose(z2.values, h_star.values, atol=1e-12)


def test_merge_pointwise_oracle_and_envelope():
    rng = np.random.default_rng(14)
    G = T.Tensor(rng.standard_normal((4, 3)))
    h_star = T.Tensor(rng.standard_normal((4, 3)))
    z = CA.merge(G, h_star).values
    gate = 1.0 / (1.0 + np.exp(-G.values))
    assert np.allclose(z, gate * h_star.values + (1 - gate) * G.values, atol=1e-12)
    lo = np.minimum(h_star.values, G.values)
    hi = np.maximum(h_star.values, G.values)
    assert np.all(z >= lo - 1e-12) and np.all(z <= hi + 1e-12)


# ---------------------------------------------------------------------------
# full block


def test_coattend_invariants_and_gradcheck():
    rng = np.random.default_rng(15)
    k, m, r = 3, 4, 8
    h_star = T.Tensor(rng.standard_normal((r, k)))
    u_star = T.Tensor(rng.standard_normal((r, m)))
    proj_w = T.Parameter("w", rng.uniform(-0.5, 0.5, (r // 4, r)))
    proj_b = T.Parameter("b", rng.uniform(-0.5, 0.5, (r // 4, 1)))
    sim_w = T.Parameter("s", rng.uniform(-0.5, 0.5, (3 * r // 4, 1)))
    out = CA.coattend(
        h_star, u_star, full_mask(k), full_mask(m),
        proj_w.tensor, proj_b.tensor, sim_w.tensor,
    )
    assert np.allclose(out.attn_over_question.values.sum(axis=0), 1.0, atol=1e-9)
    assert np.allclose(out.attn_over_sentences.values.sum(axis=1), 1.0, atol=1e-9)
    # quest_aware columns live in the convex hull of the projected words
    hull_lo = out.quest_proj.values.min(axis=1, keepdims=True)
    hull_hi = out.quest_proj.values.max(axis=1, keepdims=True)
    assert np.all(out.quest_aware.values >= hull_lo - 1e-9)
    assert np.all(out.quest_aware.values <= hull_hi + 1e-9)
    assert out.fused.shape == (r, k)
    r_out = T.Tensor(0.1 * rng.standard_normal((r, k)))

    def f():
        o = CA.coattend(
            h_star, u_star, full_mask(k), full_mask(m),
            proj_w.tensor, proj_b.tensor, sim_w.tensor,
        )
        return T.sum_all(T.mul(o.merged, r_out))

    assert grad_check(f, [proj_w, proj_b, sim_w], eps=1e-5) < 1e-4
