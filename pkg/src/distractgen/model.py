"""Full model: parameter registry plus the forward passes.

Parameter layout (checkpoint key prefixes):
    embed.weight                         vocabulary embeddings
    encoder.word.l{0,1}.{fwd,bwd}.*      shared word-level BiLSTM (2 layers)
    encoder.sent.{fwd,bwd}.*             sentence-level BiLSTM (1 layer)
    encoder.qinit.l{0,1}.*               question initializer (2 layers, uni)
    coattn.{proj_w,proj_b,sim_w}         co-attention
    decoder.l{0,1}.*                     decoder LSTM (2 layers, uni)
    attn.{sent_w,word_w}                 hierarchical attention bilinear maps
    attn.combine_w                       attentional-vector projection
    out.{proj_w,proj_b}                  vocabulary projection

Each sample is its own graph; minibatches accumulate gradients across
per-sample backward passes.
"""

from collections import OrderedDict

import numpy as np

from . import coattention as coattn
from . import objective
from . import tensor as T
from .decoder import initial_state, teacher_forced_unroll
from .encoder import encode_article, encode_question, encode_question_init
from .lstm import init_lstm_params


class ParamRegistry:
    def __init__(self):
        self.params = OrderedDict()

    def add(self, name, values):
        if name in self.params:
            raise ValueError(f"duplicate parameter name {name!r}")
        p = T.Parameter(name, values)
        self.params[name] = p
        return p.tensor


class DistractorModel:
    """Co-attention hierarchical encoder-decoder over one vocabulary."""

    def __init__(self, config, embed_init=None):
        config.validate()
        self.config = config
        r = config.hidden_size
        if r % 4 != 0:
            raise ValueError(f"hidden size {r} must be divisible by 4")
        half = r // 2
        rng = np.random.default_rng(config.seed)
        reg = ParamRegistry()

        if embed_init is None:
            embed_init = rng.uniform(-0.1, 0.1, (config.vocab_size, config.embed_dim))
        elif embed_init.shape != (config.vocab_size, config.embed_dim):
            raise ValueError(
                f"embedding init shape {embed_init.shape} != "
                f"({config.vocab_size}, {config.embed_dim})"
            )
        self.embed = reg.add("embed.weight", embed_init)

        self.word_layers = []
        in_dim = config.embed_dim
        for layer in range(2):
            fwd = init_lstm_params(reg, f"encoder.word.l{layer}.fwd", in_dim, half, rng)
            bwd = init_lstm_params(reg, f"encoder.word.l{layer}.bwd", in_dim, half, rng)
            self.word_layers.append((fwd, bwd))
            in_dim = r
        self.sent_layer = (
            init_lstm_params(reg, "encoder.sent.fwd", r, half, rng),
            init_lstm_params(reg, "encoder.sent.bwd", r, half, rng),
        )
        self.qinit_layers = [
            init_lstm_params(reg, "encoder.qinit.l0", config.embed_dim, r, rng),
            init_lstm_params(reg, "encoder.qinit.l1", r, r, rng),
        ]
        quarter = r // 4
        self.coattn_proj_w = reg.add("coattn.proj_w", rng.uniform(-0.1, 0.1, (quarter, r)))
        self.coattn_proj_b = reg.add("coattn.proj_b", rng.uniform(-0.1, 0.1, (quarter, 1)))
        self.coattn_sim_w = reg.add("coattn.sim_w", rng.uniform(-0.1, 0.1, (3 * quarter, 1)))

        self.decoder_params = {
            "decoder_layers": [
                init_lstm_params(reg, "decoder.l0", config.embed_dim, r, rng),
                init_lstm_params(reg, "decoder.l1", r, r, rng),
            ],
            "attn_sent_w": reg.add("attn.sent_w", rng.uniform(-0.1, 0.1, (r, r))),
            "attn_word_w": reg.add("attn.word_w", rng.uniform(-0.1, 0.1, (r, r))),
            "combine_w": reg.add("attn.combine_w", rng.uniform(-0.1, 0.1, (r, 2 * r))),
            "out_w": reg.add("out.proj_w", rng.uniform(-0.1, 0.1, (config.vocab_size, r))),
            "out_b": reg.add("out.proj_b", rng.uniform(-0.1, 0.1, (config.vocab_size, 1))),
        }
        self._registry = reg

    # -- parameters ---------------------------------------------------------

    def parameters(self):
        return self._registry.params

    def zero_grad(self):
        for p in self._registry.params.values():
            p.tensor.zero_grad()

    def gradients(self):
        """Name -> gradient array (zeros when a parameter was unused)."""
        out = OrderedDict()
        for name, p in self._registry.params.items():
            g = p.tensor.grad
            out[name] = g if g is not None else np.zeros_like(p.tensor.values)
        return out

    def set_values(self, values_by_name):
        mine = self._registry.params
        missing = set(mine) - set(values_by_name)
        extra = set(values_by_name) - set(mine)
        if missing or extra:
            raise ValueError(f"parameter set mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        for name, vals in values_by_name.items():
            t = mine[name].tensor
            if vals.shape != t.values.shape:
                raise ValueError(f"shape mismatch for {name}: {vals.shape} vs {t.values.shape}")
            t.values = np.asarray(vals, dtype=t.values.dtype)

    def value_snapshot(self):
        return OrderedDict(
            (name, p.tensor.values.copy()) for name, p in self._registry.params.items()
        )

    # -- forward ------------------------------------------------------------

    def encode(self, sample):
        """Article + question encodings and the merged sentence states."""
        article = encode_article(self.word_layers, self.sent_layer, self.embed, sample.sentences)
        question = encode_question(self.word_layers, self.embed, sample.question)
        if self.config.coattention:
            k_in = len(sample.sentences)
            quest_mask = np.ones(question.length, dtype=bool)
            out = coattn.coattend(
                article.sent_states,
                question.states,
                article.sent_mask[:k_in],
                quest_mask,
                self.coattn_proj_w,
                self.coattn_proj_b,
                self.coattn_sim_w,
            )
            merged = out.merged
        else:
            merged = article.sent_states
        return article, question, merged

    def decoder_init(self, sample):
        layer_finals, last_q = encode_question_init(self.qinit_layers, self.embed, sample.question)
        return initial_state(layer_finals), last_q

    def sample_loss(self, sample, distractor_index=0, lam=None):
        """Loss graph for one (article, question, distractor) instance.

        Returns (loss Tensor, LossBreakdown).
        """
        cfg = self.config
        if lam is None:
            lam = cfg.lambda_ssl if cfg.ssl else 0.0
        target = sample.distractors[distractor_index]
        article, _question, merged = self.encode(sample)
        state, first_input = self.decoder_init(sample)
        steps, last_hidden = teacher_forced_unroll(
            first_input, target, state, article, merged, self.embed, self.decoder_params
        )
        nll, n_tokens = objective.nll_loss([s.log_probs for s in steps], target)
        if cfg.ssl:
            rep = objective.distractor_representation(last_hidden, article.article_vector)
            cos = objective.cosine(rep, article.article_vector)
            loss = objective.total_loss(nll, cos, lam)
            cos_value = cos.item()
        else:
            loss = nll
            cos_value = 0.0
        return loss, objective.LossBreakdown(
            nll=nll.item(),
            cos_sim=cos_value,
            total=loss.item(),
            lam=lam,
            num_tokens=n_tokens,
        )
