"""Independent metric implementations for cross-checking.

Deliberately structured differently from the package versions: explicit
dict bookkeeping, recursive memoized LCS, per-order passes.
"""

import math
from functools import lru_cache


def _grams(tokens, n):
    out = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i : i + n])
        out[g] = out.get(g, 0) + 1
    return out


def oracle_bleu(candidates, reference_sets, max_order=4):
    per_order = []
    for order in range(1, max_order + 1):
        match = 0
        total = 0
        for cand, refs in zip(candidates, reference_sets):
            cand_grams = _grams(cand, order)
            best = {}
            for ref in refs:
                for g, c in _grams(ref, order).items():
                    if c > best.get(g, 0):
                        best[g] = c
            for g, c in cand_grams.items():
                match += min(c, best.get(g, 0))
                total += c
        per_order.append((match, total))

    cand_len = sum(len(c) for c in candidates)
    ref_len = 0
    for cand, refs in zip(candidates, reference_sets):
        ref_len += sorted((abs(len(r) - len(cand)), len(r)) for r in refs)[0][1]
    if cand_len == 0:
        return [0.0] * max_order
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)

    out = []
    for order in range(1, max_order + 1):
        ps = []
        for match, total in per_order[:order]:
            ps.append(match / total if total else 0.0)
        if min(ps) <= 0.0:
            out.append(0.0)
        else:
            log_mean = sum(math.log(p) for p in ps) / order
            out.append(100.0 * bp * math.exp(log_mean))
    return out


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r else 0.0


def oracle_rouge_n(candidates, reference_sets, n):
    scores = []
    for cand, refs in zip(candidates, reference_sets):
        cand_grams = _grams(cand, n)
        n_cand = sum(cand_grams.values())
        best = 0.0
        for ref in refs:
            ref_grams = _grams(ref, n)
            n_ref = sum(ref_grams.values())
            hit = sum(min(c, ref_grams.get(g, 0)) for g, c in cand_grams.items())
            p = hit / n_cand if n_cand else 0.0
            r = hit / n_ref if n_ref else 0.0
            best = max(best, _f1(p, r))
        scores.append(best)
    return 100.0 * sum(scores) / len(scores)


def oracle_rouge_l(candidates, reference_sets):
    def lcs(a, b):
        @lru_cache(maxsize=None)
        def rec(i, j):
            if i == len(a) or j == len(b):
                return 0
            if a[i] == b[j]:
                return 1 + rec(i + 1, j + 1)
            return max(rec(i + 1, j), rec(i, j + 1))

        return rec(0, 0)

    scores = []
    for cand, refs in zip(candidates, reference_sets):
        best = 0.0
        for ref in refs:
            hit = lcs(tuple(cand), tuple(ref))
            p = hit / len(cand) if cand else 0.0
            r = hit / len(ref) if ref else 0.0
            best = max(best, _f1(p, r))
        scores.append(best)
    return 100.0 * sum(scores) / len(scores)
