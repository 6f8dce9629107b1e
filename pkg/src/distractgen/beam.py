"""Beam-search decoding and Jaccard-diverse candidate selection."""

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .decoder import decode_step
from .vocab import EOS_ID


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple  # emitted ids, EOS excluded
    log_prob: float
    state: object
    finished: bool = False
    steps: int = 0  # decode steps taken (counts the closing EOS)


@dataclass
class Candidate:
    tokens: tuple
    score: float
    log_prob: float
    finished: bool


def _score(log_prob, steps, length_norm):
    if not length_norm:
        return log_prob
    return log_prob / max(steps, 1)


def beam_search(model, sample, beam_size=None, max_len=None, length_norm=None):
    """Decode up to beam_size candidates for one sample, best first.

    A hypothesis finishes when it emits EOS; its log-probability includes
    the EOS step and, with length normalization on (default), its score is
    log-probability divided by the number of decode steps taken (EOS
    included).  Ties break by ascending token-id sequence.  If nothing
    finishes within max_len steps the best unfinished hypotheses are
    returned with finished=False.
    """
    cfg = model.config
    beam_size = cfg.beam_size if beam_size is None else beam_size
    max_len = cfg.max_decode_len if max_len is None else max_len
    length_norm = cfg.length_norm if length_norm is None else length_norm
    if beam_size < 1 or max_len < 1:
        raise ValueError("beam_size and max_len must be >= 1")

    with T.no_grad():
        article, _question, merged = model.encode(sample)
        state, first_input = model.decoder_init(sample)
        beams = [Hypothesis(tokens=(), log_prob=0.0, state=state)]
        finished = []
        for _ in range(max_len):
            if not beams:
                break
            expansions = []
            for hyp in beams:
                prev = hyp.tokens[-1] if hyp.tokens else first_input
                out = decode_step(prev, hyp.state, article, merged, model.embed,
                                  model.decoder_params)
                logp = out.log_probs.values[:, 0]
                if len(logp) <= beam_size:
                    top = range(len(logp))
                elif len(logp) <= 4096:
                    # stable sort keeps tied scores in ascending-id order
                    top = sorted(range(len(logp)), key=lambda t: (-logp[t], t))[:beam_size]
                else:
                    part = np.argpartition(-logp, beam_size)[:beam_size]
                    top = sorted(part.tolist(), key=lambda t: (-logp[t], t))
                for tok in top:
                    expansions.append((hyp.log_prob + float(logp[tok]), hyp, int(tok), out.state))
            expansions.sort(key=lambda e: (-e[0], e[1].tokens + (e[2],)))
            beams = []
            for total, hyp, tok, new_state in expansions:
                if tok == EOS_ID:
                    finished.append(
                        Hypothesis(hyp.tokens, total, None, finished=True, steps=hyp.steps + 1)
                    )
                elif len(beams) < beam_size:
                    beams.append(
                        Hypothesis(hyp.tokens + (tok,), total, new_state, steps=hyp.steps + 1)
                    )

    pool = finished if finished else beams
    candidates = [
        Candidate(
            tokens=h.tokens,
            score=_score(h.log_prob, h.steps, length_norm),
            log_prob=h.log_prob,
            finished=h.finished,
        )
        for h in pool
    ]
    candidates.sort(key=lambda c: (-c.score, c.tokens))
    return candidates[:beam_size]


def jaccard_distance(a, b):
    """1 - |set(a) & set(b)| / |set(a) | set(b)|; two empties give 0."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return 1.0 - len(sa & sb) / len(union)


@dataclass
class DiverseSelection:
    picks: list  # 3 Candidates
    effective_threshold: float
    relaxed: bool
    degenerate: bool = False
    notes: list = field(default_factory=list)


def select_diverse(candidates, threshold=0.5, relax_step=0.1):
    """Pick three mutually distant candidates in rank order.

    The top candidate is always first; each later slot takes the highest
    ranked candidate whose Jaccard distance to every previous pick exceeds
    the threshold.  When a slot cannot be filled the threshold relaxes in
    0.1 steps (recorded); with fewer than three candidates the last pick
    is duplicated and the result is flagged degenerate.
    """
    if not candidates:
        raise ValueError("no candidates to select from")
    picks = [candidates[0]]
    used = {0}
    effective = threshold
    relaxed = False
    notes = []
    for slot in (2, 3):
        thr = threshold
        chosen = None
        while chosen is None:
            for idx, cand in enumerate(candidates):
                if idx in used:
                    continue
                if all(jaccard_distance(cand.tokens, p.tokens) > thr for p in picks):
                    chosen = idx
                    break
            if chosen is None:
                if len(used) == len(candidates):
                    break  # pool exhausted outright
                thr -= relax_step
        if chosen is None:
            picks.append(picks[-1])
            notes.append(f"slot {slot}: candidate pool exhausted, duplicated previous pick")
            continue
        if thr < threshold:
            relaxed = True
            effective = min(effective, thr)
            notes.append(f"slot {slot}: threshold relaxed to {thr:.2f}")
        picks.append(candidates[chosen])
        used.add(chosen)
    degenerate = len(candidates) < 3
    return DiverseSelection(
        picks=picks,
        effective_threshold=effective,
        relaxed=relaxed,
        degenerate=degenerate,
        notes=notes,
    )
