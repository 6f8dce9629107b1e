"""Training loss: masked NLL plus the semantic-similarity term."""

from dataclasses import dataclass

from . import tensor as T
from .vocab import PAD_ID

NORM_FLOOR = 1e-12


@dataclass
class LossBreakdown:
    nll: float
    cos_sim: float
    total: float
    lam: float
    num_tokens: int


def nll_loss(log_prob_steps, target_ids):
    """Sum of negative log-likelihoods over non-PAD target positions.

    log_prob_steps are per-step (|V|, 1) log-probability tensors aligned
    with target_ids.
    """
    if len(log_prob_steps) != len(target_ids):
        raise ValueError(
            f"{len(log_prob_steps)} steps vs {len(target_ids)} targets"
        )
    total = None
    n_valid = 0
    for logp, target in zip(log_prob_steps, target_ids):
        if target == PAD_ID:
            continue
        term = T.pick(logp, target, 0)
        total = term if total is None else T.add(total, term)
        n_valid += 1
    if n_valid == 0:
        raise ValueError("no valid target steps")
    return T.scale(total, -1.0), n_valid


def distractor_representation(last_hidden, article_vector):
    """Sequence representation as the difference of the two final states."""
    return T.sub(last_hidden, article_vector)


def cosine(a, b):
    """cos(a, b) with norm floors at 1e-12, clamped into [-1, 1]."""
    dot = T.matmul(T.transpose(a), b)  # (1, 1)
    norm_a = T.clamp_min(T.sqrt(T.sum_all(T.mul(a, a))), NORM_FLOOR)
    norm_b = T.clamp_min(T.sqrt(T.sum_all(T.mul(b, b))), NORM_FLOOR)
    return T.clamp(T.div(dot, T.mul(norm_a, norm_b)), -1.0, 1.0)


def total_loss(nll, cos_sim, lam):
    """nll - lam * cos_sim; gradient flows through both terms."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if lam == 0.0:
        return nll
    return T.add(nll, T.scale(cos_sim, -lam))
