"""Hierarchical encoders: oracles, masking, parameter sharing."""

import numpy as np
import pytest

from conftest import lstm_weight_lists, ref_bilstm
from distractgen import tensor as T
from distractgen.encoder import (
    encode_article,
    encode_question,
    encode_question_init,
    encode_token_sequence,
)
from distractgen.gradcheck import grad_check
from distractgen.model import DistractorModel
from distractgen.synth import toy_config, toy_sample
from distractgen.vocab import PAD_ID


@pytest.fixture(scope="module")
def small_model():
    return DistractorModel(toy_config(hidden_size=8, vocab_size=20, embed_dim=4, seed=2))


def zeroed(model):
    for p in model.parameters().values():
        p.tensor.values[:] = 0.0
    return model


def test_zero_weights_zero_states():
    model = zeroed(DistractorModel(toy_config(hidden_size=8, vocab_size=20, embed_dim=4, seed=3)))
    art = encode_article(model.word_layers, model.sent_layer, model.embed, [[3, 4], [5]])
    for ws in art.word_states:
        assert np.array_equal(ws.values, np.zeros_like(ws.values))
    assert np.array_equal(art.sent_states.values, np.zeros((8, 2)))
    assert np.array_equal(art.article_vector.values, np.zeros((8, 1)))
    quest = encode_question(model.word_layers, model.embed, [3, 4])
    assert np.array_equal(quest.states.values, np.zeros((8, 2)))
    finals, _ = encode_question_init(model.qinit_layers, model.embed, [3, 4])
    for h, c in finals:
        assert np.array_equal(h.values, np.zeros((8, 1)))
        assert np.array_equal(c.values, np.zeros((8, 1)))


def test_word_states_match_stacked_reference(small_model):
    model = small_model
    tokens = [4, 7, 9]
    states, summary = encode_token_sequence(model.word_layers, model.embed, tokens)
    inputs = [model.embed.values[t].tolist() for t in tokens]
    l0_states, _ = ref_bilstm(
        inputs, lstm_weight_lists(model.word_layers[0][0]), lstm_weight_lists(model.word_layers[0][1])
    )
    l1_states, l1_summary = ref_bilstm(
        l0_states, lstm_weight_lists(model.word_layers[1][0]), lstm_weight_lists(model.word_layers[1][1])
    )
    for got, want in zip(states, l1_states):
        assert np.allclose(got.values[:, 0], want, atol=1e-12, rtol=0)
    assert np.allclose(summary.values[:, 0], l1_summary, atol=1e-12, rtol=0)


def test_single_token_sentence_summary_equals_word_state(small_model):
    states, summary = encode_token_sequence(small_model.word_layers, small_model.embed, [5])
    assert np.allclose(states[0].values, summary.values, atol=1e-12, rtol=0)


def test_sentence_encoder_matches_reference(small_model):
    model = small_model
    sentences = [[3, 4, 5], [6, 7], [8, 9, 10]]
    art = encode_article(model.word_layers, model.sent_layer, model.embed, sentences)
    embs = [art.sent_embeddings.values[:, i].tolist() for i in range(3)]
    ref_states, ref_summary = ref_bilstm(
        embs, lstm_weight_lists(model.sent_layer[0]), lstm_weight_lists(model.sent_layer[1])
    )
    for i, want in enumerate(ref_states):
        assert np.allclose(art.sent_states.values[:, i], want, atol=1e-12, rtol=0)
    assert np.allclose(art.article_vector.values[:, 0], ref_summary, atol=1e-12, rtol=0)


def test_single_sentence_article(small_model):
    art = encode_article(
        small_model.word_layers, small_model.sent_layer, small_model.embed, [[3, 4]]
    )
    assert art.sent_states.shape == (8, 1)
    assert np.allclose(art.sent_states.values, art.article_vector.values, atol=1e-12)


def test_trailing_pad_sentences_leave_valid_outputs_unchanged(small_model):
    model = small_model
    sentences = [[3, 4, 5], [6, 7]]
    base = encode_article(model.word_layers, model.sent_layer, model.embed, sentences)
    padded_sents = sentences + [[PAD_ID, PAD_ID], [PAD_ID]]
    padded = encode_article(model.word_layers, model.sent_layer, model.embed, padded_sents)
    assert padded.sent_mask.tolist() == [True, True, False, False]
    assert np.array_equal(padded.sent_states.values[:, :2], base.sent_states.values)
    assert np.array_equal(padded.sent_states.values[:, 2:], np.zeros((8, 2)))
    assert np.array_equal(padded.article_vector.values, base.article_vector.values)
    for i in range(2):
        assert np.array_equal(padded.word_states[i].values, base.word_states[i].values)
    assert padded.word_states[2] is None


def test_pad_suffix_inside_sentence_ignored(small_model):
    model = small_model
    base = encode_article(model.word_layers, model.sent_layer, model.embed, [[3, 4]])
    padded = encode_article(model.word_layers, model.sent_layer, model.embed, [[3, 4, PAD_ID]])
    assert np.array_equal(
        padded.word_states[0].values, base.word_states[0].values
    )
    assert padded.word_lengths == [2]


def test_question_shares_word_lstm(small_model):
    model = small_model
    tokens = [4, 6, 8]
    quest = encode_question(model.word_layers, model.embed, tokens)
    states, _ = encode_token_sequence(model.word_layers, model.embed, tokens)
    for i in range(3):
        assert np.array_equal(quest.states.values[:, i], states[i].values[:, 0])
    # perturbing the shared weights moves both article and question states
    w = model.word_layers[0][0]["w_in"]
    w.values[0, 0] += 0.05
    quest2 = encode_question(model.word_layers, model.embed, tokens)
    art2 = encode_article(model.word_layers, model.sent_layer, model.embed, [tokens])
    assert not np.array_equal(quest2.states.values, quest.states.values)
    assert not np.allclose(art2.word_states[0].values, quest.states.values)
    w.values[0, 0] -= 0.05


def test_exactly_one_word_level_lstm_parameter_set(small_model):
    names = [n for n in small_model.parameters() if ".word." in n]
    assert names == [
        f"encoder.word.l{layer}.{direction}.{leaf}"
        for layer in (0, 1)
        for direction in ("fwd", "bwd")
        for leaf in ("w_in", "w_rec", "bias")
    ]


def test_question_init_returns_last_token(small_model):
    finals, last = encode_question_init(small_model.qinit_layers, small_model.embed, [3, 9, 6])
    assert last == 6
    assert len(finals) == 2
    for h, c in finals:
        assert h.shape == (8, 1)


def test_empty_inputs_rejected(small_model):
    with pytest.raises(ValueError):
        encode_question(small_model.word_layers, small_model.embed, [])
    with pytest.raises(ValueError):
        encode_question_init(small_model.qinit_layers, small_model.embed, [PAD_ID])
    with pytest.raises(ValueError):
        encode_article(small_model.word_layers, small_model.sent_layer, small_model.embed, [[PAD_ID]])


def test_encoder_outputs_finite_and_gradcheck():
    cfg = toy_config(hidden_size=8, vocab_size=16, embed_dim=4, seed=5)
    model = DistractorModel(cfg)
    sample = toy_sample(16, num_sentences=2, sentence_len=3, question_len=3, seed=6)
    rng = np.random.default_rng(8)
    r_states = T.Tensor(0.1 * rng.standard_normal((8, 2)))
    r_vec = T.Tensor(0.1 * rng.standard_normal((8, 1)))

    def f():
        art = encode_article(model.word_layers, model.sent_layer, model.embed, sample.sentences)
        return T.add(
            T.sum_all(T.mul(art.sent_states, r_states)),
            T.sum_all(T.mul(art.article_vector, r_vec)),
        )

    assert np.isfinite(f().item())
    params = [
        p for name, p in model.parameters().items()
        if name.startswith(("embed.", "encoder.word.", "encoder.sent."))
    ]
    err = grad_check(f, params, eps=1e-5, max_coords_per_param=25, rng=np.random.default_rng(9))
    assert err < 1e-4
