"""Synthetic desk-scale data: toy samples and a memorization corpus."""

import numpy as np

from .config import Config
from .text import McqSample
from .vocab import EOS_ID


def toy_config(hidden_size=32, vocab_size=50, embed_dim=8, seed=7, **overrides):
    cfg = Config(
        hidden_size=hidden_size,
        vocab_size=vocab_size,
        embed_dim=embed_dim,
        seed=seed,
        epochs=1,
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg.validate()


def toy_sample(vocab_size, num_sentences=3, sentence_len=4, question_len=4,
               distractor_len=4, seed=11, sample_id="toy"):
    """Random in-vocabulary sample; content ids avoid PAD/UNK/EOS."""
    rng = np.random.default_rng(seed)

    def ids(n):
        return rng.integers(3, vocab_size, size=n).tolist()

    return McqSample(
        id=sample_id,
        sentences=[ids(sentence_len) for _ in range(num_sentences)],
        question=ids(question_len),
        answer=ids(2),
        distractors=[ids(distractor_len) + [EOS_ID]],
        question_text="",
    )


def memorization_corpus(n_samples=32, n_word_types=170, seed=5):
    """Raw JSONL-style records a small model can memorize.

    Each record pairs a unique question with exactly one distractor so the
    question -> distractor mapping is a function; articles reuse a shared
    word pool.  About 190 token types in total.
    """
    rng = np.random.default_rng(seed)
    pool = [f"w{i:03d}" for i in range(n_word_types)]
    fillers = ["the", "a", "is", "was", "story", "mainly", "about", "tells", "us"]
    records = []
    for i in range(n_samples):
        topic = f"topic{i:02d}"

        def words(n):
            return [pool[j] for j in rng.integers(0, len(pool), size=n)]

        sent1 = " ".join([topic] + words(4)) + " ."
        sent2 = " ".join(words(5)) + " ."
        question = f"what is {topic} mainly about ?"
        distractor = " ".join([topic] + words(int(rng.integers(3, 6))))
        answer = " ".join(words(3))
        records.append(
            {
                "id": f"mem{i:02d}",
                "article": [sent1, sent2],
                "question": question,
                "answer": answer,
                "distractors": [distractor],
            }
        )
    # fillers keep the vocabulary near 200 types even if unused by articles
    records[0]["article"].append(" ".join(fillers) + " .")
    return records
