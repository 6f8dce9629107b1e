"""SGD training loop: clipping, plateau LR decay, validation, checkpoints."""

import json
import logging
import math
import os

import numpy as np

from . import tensor as T
from .checkpoint import save_checkpoint
from .kernels import sum_all

logger = logging.getLogger(__name__)


def clip_gradients(grads, max_norm):
    """Scale all gradients so the global L2 norm is at most max_norm.

    Mutates the arrays in place; returns the pre-clip global norm.
    """
    sq = 0.0
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in {name}")
        sq += float(sum_all(g * g))
    norm = math.sqrt(sq)
    if norm > max_norm:
        factor = max_norm / norm
        for g in grads.values():
            g *= factor
    return norm


def sgd_step(params, grads, lr):
    """p <- p - lr * g for every parameter."""
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.tensor.values.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape "
                             f"{p.tensor.values.shape} for {name}")
        p.tensor.values -= lr * g


def lr_schedule(history, lr, decay, mode="plateau"):
    """Next learning rate given the validation-loss history.

    plateau: multiply by `decay` when the latest validation loss failed to
    improve on the previous epoch's.  epoch: multiply every epoch.
    """
    if mode == "epoch":
        return lr * decay
    if len(history) >= 2 and history[-1] >= history[-2]:
        return lr * decay
    return lr


def expand_instances(samples):
    """One (sample, distractor index) instance per gold distractor."""
    return [(i, j) for i, s in enumerate(samples) for j in range(len(s.distractors))]


def _epoch_batches(instances, samples, batch_size, rng):
    """Shuffled batches, grouped by article sentence count to limit padding."""
    order = rng.permutation(len(instances))
    keyed = sorted(order, key=lambda idx: len(samples[instances[idx][0]].sentences))
    batches = [keyed[i : i + batch_size] for i in range(0, len(keyed), batch_size)]
    rng.shuffle(batches)
    return [[instances[i] for i in batch] for batch in batches]


def evaluate_nll(model, samples, instances=None):
    """Validation pass: (per-token NLL, mean cosine similarity)."""
    if instances is None:
        instances = expand_instances(samples)
    total_nll = 0.0
    total_tokens = 0
    total_cos = 0.0
    with T.no_grad():
        for si, di in instances:
            _, parts = model.sample_loss(samples[si], di)
            total_nll += parts.nll
            total_tokens += parts.num_tokens
            total_cos += parts.cos_sim
    n = max(len(instances), 1)
    return total_nll / max(total_tokens, 1), total_cos / n


def train(config, model, train_samples, valid_samples, out_dir, log_every=1):
    """Run the training loop; returns a summary dict.

    Writes epoch_N.ckpt, best.ckpt, and train_log.jsonl under out_dir.
    """
    os.makedirs(out_dir, exist_ok=True)
    params = model.parameters()
    instances = expand_instances(train_samples)
    if not instances or not valid_samples:
        raise ValueError("empty training or validation set")
    rng = np.random.default_rng(config.seed)
    lr = config.lr_init
    history = []
    best_nll = math.inf
    best_epoch = -1
    stale = 0
    log_path = os.path.join(out_dir, "train_log.jsonl")
    with open(log_path, "w", encoding="utf-8") as log:
        for epoch in range(config.epochs):
            step = 0
            for batch in _epoch_batches(instances, train_samples, config.batch_size, rng):
                model.zero_grad()
                batch_parts = []
                inv = 1.0 / len(batch)
                for si, di in batch:
                    loss, parts = model.sample_loss(train_samples[si], di)
                    if not math.isfinite(parts.total):
                        raise RuntimeError(
                            f"non-finite loss {parts.total} on sample "
                            f"{train_samples[si].id!r} (epoch {epoch}, step {step})"
                        )
                    T.backward(T.scale(loss, inv))
                    batch_parts.append(parts)
                grads = model.gradients()
                grad_norm = clip_gradients(grads, config.clip_norm)
                sgd_step(params, grads, lr)
                if step % log_every == 0:
                    log.write(json.dumps({
                        "epoch": epoch,
                        "step": step,
                        "nll": sum(p.nll for p in batch_parts) * inv,
                        "cos": sum(p.cos_sim for p in batch_parts) * inv,
                        "total": sum(p.total for p in batch_parts) * inv,
                        "tokens": sum(p.num_tokens for p in batch_parts),
                        "lr": lr,
                        "grad_norm": grad_norm,
                    }) + "\n")
                step += 1
            last_epoch = epoch == config.epochs - 1
            if not last_epoch and (epoch + 1) % config.validate_every != 0:
                continue
            valid_nll, valid_cos = evaluate_nll(model, valid_samples)
            history.append(valid_nll)
            snapshot = model.value_snapshot()
            ckpt_path = os.path.join(out_dir, f"epoch_{epoch}.ckpt")
            save_checkpoint(ckpt_path, snapshot, config.model_hash())
            improved = valid_nll < best_nll
            if improved:
                best_nll = valid_nll
                best_epoch = epoch
                stale = 0
                save_checkpoint(os.path.join(out_dir, "best.ckpt"), snapshot, config.model_hash())
            else:
                stale += 1
            log.write(json.dumps({
                "epoch": epoch,
                "valid_nll_per_token": valid_nll,
                "valid_cos": valid_cos,
                "lr": lr,
                "best": improved,
            }) + "\n")
            logger.info(
                "epoch %d: valid nll/token %.6f cos %.4f lr %.4f%s",
                epoch, valid_nll, valid_cos, lr, " *" if improved else "",
            )
            lr = lr_schedule(history, lr, config.lr_decay, config.lr_schedule)
            if config.target_nll > 0 and valid_nll < config.target_nll:
                logger.info("target NLL reached, stopping")
                break
            if stale >= config.early_stop_patience:
                logger.info("early stop after %d stale epochs", stale)
                break
    return {
        "epochs_run": len(history),
        "best_epoch": best_epoch,
        "best_valid_nll_per_token": best_nll,
        "best_checkpoint": os.path.join(out_dir, "best.ckpt"),
        "log": log_path,
    }
