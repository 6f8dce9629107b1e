"""Corpus BLEU-1..4 and ROUGE-1/2/L with per-slot reporting.

BLEU is corpus-level modified n-gram precision with multi-reference
clipping, cumulative geometric mean, brevity penalty against the closest
reference length, and no smoothing.  ROUGE-n and ROUGE-L are per-sample
F1 (max over references) averaged over samples.  Scores are scaled to
[0, 100]; two-decimal rounding happens only at render time.
"""

import json
import math
from collections import Counter
from dataclasses import dataclass

from .text import tokenize

METRIC_NAMES = ["BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-1", "ROUGE-2", "ROUGE-L"]


def ngram_counts(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates, reference_sets, max_order=4):
    """Cumulative BLEU-1..max_order over a corpus, scaled to [0, 100]."""
    if not candidates or len(candidates) != len(reference_sets):
        raise ValueError("need one candidate and one reference set per sample")
    matches = [0] * max_order
    totals = [0] * max_order
    cand_len = 0
    ref_len = 0
    for cand, refs in zip(candidates, reference_sets):
        if not refs:
            raise ValueError("every sample needs at least one reference")
        cand_len += len(cand)
        ref_len += min((len(r) for r in refs), key=lambda L: (abs(L - len(cand)), L))
        for order in range(1, max_order + 1):
            counts = ngram_counts(cand, order)
            if not counts:
                continue
            cap = Counter()
            for ref in refs:
                for g, c in ngram_counts(ref, order).items():
                    if c > cap[g]:
                        cap[g] = c
            totals[order - 1] += sum(counts.values())
            matches[order - 1] += sum(min(c, cap[g]) for g, c in counts.items())
    precisions = [m / t if t > 0 else 0.0 for m, t in zip(matches, totals)]
    if cand_len == 0:
        return [0.0] * max_order
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    scores = []
    for order in range(1, max_order + 1):
        ps = precisions[:order]
        if any(p == 0.0 for p in ps):
            scores.append(0.0)
        else:
            geo = math.exp(sum(math.log(p) for p in ps) / order)
            scores.append(100.0 * bp * geo)
    return scores


def _f1(precision, recall):
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidates, reference_sets, n):
    """Mean over samples of the best-reference n-gram F1, in [0, 100]."""
    if not candidates or len(candidates) != len(reference_sets):
        raise ValueError("need one candidate and one reference set per sample")
    total = 0.0
    for cand, refs in zip(candidates, reference_sets):
        cand_counts = ngram_counts(cand, n)
        cand_total = sum(cand_counts.values())
        best = 0.0
        for ref in refs:
            ref_counts = ngram_counts(ref, n)
            ref_total = sum(ref_counts.values())
            overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
            p = overlap / cand_total if cand_total else 0.0
            r = overlap / ref_total if ref_total else 0.0
            best = max(best, _f1(p, r))
        total += best
    return 100.0 * total / len(candidates)


def lcs_length(a, b):
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidates, reference_sets):
    """Mean over samples of the best-reference LCS F1, in [0, 100]."""
    if not candidates or len(candidates) != len(reference_sets):
        raise ValueError("need one candidate and one reference set per sample")
    total = 0.0
    for cand, refs in zip(candidates, reference_sets):
        best = 0.0
        for ref in refs:
            lcs = lcs_length(cand, ref)
            p = lcs / len(cand) if cand else 0.0
            r = lcs / len(ref) if ref else 0.0
            best = max(best, _f1(p, r))
        total += best
    return 100.0 * total / len(candidates)


@dataclass
class SlotScores:
    bleu: list  # BLEU-1..4
    rouge1: float
    rouge2: float
    rougeL: float

    def row(self):
        return self.bleu + [self.rouge1, self.rouge2, self.rougeL]


@dataclass
class EvalReport:
    slots: list  # SlotScores for 1st/2nd/3rd distractor

    def to_dict(self):
        return {
            f"distractor_{i + 1}": dict(zip(METRIC_NAMES, slot.row()))
            for i, slot in enumerate(self.slots)
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self):
        header = f"{'':<16}" + "".join(f"{name:>9}" for name in METRIC_NAMES)
        lines = [header]
        labels = ["1st Distractor", "2nd Distractor", "3rd Distractor"]
        for label, slot in zip(labels, self.slots):
            lines.append(f"{label:<16}" + "".join(f"{v:>9.2f}" for v in slot.row()))
        return "\n".join(lines)


def score_slot(candidates, reference_sets):
    return SlotScores(
        bleu=corpus_bleu(candidates, reference_sets),
        rouge1=rouge_n(candidates, reference_sets, 1),
        rouge2=rouge_n(candidates, reference_sets, 2),
        rougeL=rouge_l(candidates, reference_sets),
    )


def evaluate_corpus(generated, gold_samples, strict_slots=False):
    """Score generated distractors against gold references.

    generated: iterable of {"id", "distractors": [3 strings]}.
    gold_samples: iterable of {"id", "distractors": [strings]} (raw records).
    Slot i is scored against the full gold set per question, or against
    gold slot i only when strict_slots is set.
    """
    gold = {}
    for rec in gold_samples:
        refs = [tokenize(d) for d in rec.get("distractors", [])]
        refs = [r for r in refs if r]
        if refs:
            gold[str(rec["id"])] = refs
    slots = []
    generated = list(generated)
    if not generated:
        raise ValueError("no generated samples")
    for slot in range(3):
        cands = []
        ref_sets = []
        for rec in generated:
            rid = str(rec["id"])
            if rid not in gold:
                raise KeyError(f"generated sample {rid!r} missing from the gold dataset")
            refs = gold[rid]
            out = rec["distractors"]
            cands.append(tokenize(out[slot]) if slot < len(out) else [])
            if strict_slots:
                ref_sets.append([refs[min(slot, len(refs) - 1)]])
            else:
                ref_sets.append(refs)
        slots.append(score_slot(cands, ref_sets))
    return EvalReport(slots=slots)
