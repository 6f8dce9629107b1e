"""Tokenization, sentence splitting, dataset ingestion and statistics.

Input files are JSON lines, one object per sample:

    {"id": ..., "article": "raw text" | ["sentence", ...],
     "question": ..., "answer": ..., "distractors": ["...", up to 3]}

Each gold distractor becomes one training instance sharing its article
and question, so reported sample counts are instance counts.
"""

import json
import logging
import re
from dataclasses import dataclass, field

from .vocab import EOS_ID

logger = logging.getLogger(__name__)

PUNCT = set(".,!?;:\"'()")
BLANK = "_"
SENTENCE_END = {".", "!", "?"}

_TOKEN_RE = re.compile(r"[.,!?;:\"'()]|[^.,!?;:\"'()\s]+")
_SPLIT_RE = re.compile(r"[.!?]+(?=\s+[A-Z])|[.!?]+(?=\s*$)")


def tokenize(text):
    """Lowercase, split on whitespace, detach punctuation as single tokens."""
    return _TOKEN_RE.findall(text.lower())


def split_sentences(text):
    """Split a raw article after ./!/? followed by whitespace+uppercase or end."""
    sentences = []
    start = 0
    for m in _SPLIT_RE.finditer(text):
        chunk = text[start : m.end()].strip()
        if chunk:
            sentences.append(chunk)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass
class TokenizedSample:
    id: str
    sentences: list  # list of token lists
    question: list
    answer: list
    distractors: list  # 1..3 token lists


@dataclass
class McqSample:
    """One encoded record; distractor token-id lists end with EOS."""

    id: str
    sentences: list  # list of token-id lists
    question: list
    answer: list
    distractors: list
    question_text: str = ""


@dataclass
class DatasetStats:
    num_samples: int
    pct_incomplete_questions: float
    avg_article_tokens: float
    avg_question_tokens: float
    avg_distractor_tokens: float

    def lines(self):
        return [
            f"# samples                        {self.num_samples}",
            f"% incomplete-sentence questions  {self.pct_incomplete_questions:.2f}",
            f"Avg. article length              {self.avg_article_tokens:.2f}",
            f"Avg. question length             {self.avg_question_tokens:.2f}",
            f"Avg. distractor length           {self.avg_distractor_tokens:.2f}",
        ]


def read_jsonl(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return records


def tokenize_record(record):
    article = record["article"]
    if isinstance(article, str):
        raw_sentences = split_sentences(article)
    else:
        raw_sentences = list(article)
    sentences = [tokenize(s) for s in raw_sentences]
    sentences = [s for s in sentences if s]
    distractors = [tokenize(d) for d in record.get("distractors", [])]
    distractors = [d for d in distractors if d]
    return TokenizedSample(
        id=str(record.get("id", "")),
        sentences=sentences,
        question=tokenize(record.get("question", "")),
        answer=tokenize(record.get("answer", "")),
        distractors=distractors,
    )


def tokenize_records(records):
    return [tokenize_record(r) for r in records]


def _last_content_index(tokens):
    for i in range(len(tokens) - 1, -1, -1):
        if tokens[i] not in PUNCT:
            return i
    return None


def question_is_fillable(question_tokens):
    """True when any blank sits anywhere but the final content position."""
    last = _last_content_index(question_tokens)
    return any(t == BLANK and i != last for i, t in enumerate(question_tokens))


def filter_dataset(samples):
    """Drop samples whose question has a blank before its final position."""
    return [s for s in samples if not question_is_fillable(s.question)]


def question_is_incomplete(question_tokens):
    """Trailing blank, or no terminal sentence punctuation."""
    if not question_tokens:
        return True
    last = question_tokens[-1]
    return last == BLANK or last not in SENTENCE_END


def compute_stats(samples):
    """Instance-level dataset statistics (one instance per distractor)."""
    n = 0
    incomplete = 0
    art_tokens = 0
    q_tokens = 0
    d_tokens = 0
    for s in samples:
        art_len = sum(len(sent) for sent in s.sentences)
        inc = question_is_incomplete(s.question)
        for d in s.distractors:
            n += 1
            incomplete += int(inc)
            art_tokens += art_len
            q_tokens += len(s.question)
            d_tokens += len(d)
    if n == 0:
        raise ValueError("cannot compute statistics for an empty dataset")
    return DatasetStats(
        num_samples=n,
        pct_incomplete_questions=100.0 * incomplete / n,
        avg_article_tokens=art_tokens / n,
        avg_question_tokens=q_tokens / n,
        avg_distractor_tokens=d_tokens / n,
    )


@dataclass
class TruncationReport:
    sentences_dropped: int = 0
    sentence_tokens_dropped: int = 0
    question_tokens_dropped: int = 0
    distractor_tokens_dropped: int = 0
    samples_skipped: int = 0
    skipped_ids: list = field(default_factory=list)

    def total(self):
        return (
            self.sentences_dropped
            + self.sentence_tokens_dropped
            + self.question_tokens_dropped
            + self.distractor_tokens_dropped
        )


def encode_samples(
    samples,
    vocab,
    max_sentences=40,
    max_sentence_tokens=50,
    max_question_tokens=30,
    max_distractor_tokens=30,
):
    """Encode tokenized samples to ids, truncating to the configured limits.

    Article keeps its leading sentences and each sentence its leading
    tokens; the question keeps its trailing tokens (the final token seeds
    the decoder).  Records without article/question/distractor content are
    skipped and reported.
    """
    out = []
    report = TruncationReport()
    for s in samples:
        if not s.sentences or not s.question or not s.distractors:
            report.samples_skipped += 1
            report.skipped_ids.append(s.id)
            logger.warning("skipping incomplete sample %s", s.id)
            continue
        sentences = s.sentences
        if len(sentences) > max_sentences:
            report.sentences_dropped += len(sentences) - max_sentences
            sentences = sentences[:max_sentences]
        enc_sents = []
        for sent in sentences:
            if len(sent) > max_sentence_tokens:
                report.sentence_tokens_dropped += len(sent) - max_sentence_tokens
                sent = sent[:max_sentence_tokens]
            enc_sents.append(vocab.encode_tokens(sent))
        question = s.question
        if len(question) > max_question_tokens:
            report.question_tokens_dropped += len(question) - max_question_tokens
            question = question[-max_question_tokens:]
        distractors = []
        for d in s.distractors[:3]:
            if len(d) > max_distractor_tokens:
                report.distractor_tokens_dropped += len(d) - max_distractor_tokens
                d = d[:max_distractor_tokens]
            distractors.append(vocab.encode_tokens(d) + [EOS_ID])
        out.append(
            McqSample(
                id=s.id,
                sentences=enc_sents,
                question=vocab.encode_tokens(question),
                answer=vocab.encode_tokens(s.answer),
                distractors=distractors,
                question_text=" ".join(s.question),
            )
        )
    return out, report


def iter_corpus_tokens(samples):
    """Token lists feeding vocabulary construction."""
    for s in samples:
        for sent in s.sentences:
            yield sent
        yield s.question
        yield s.answer
        for d in s.distractors:
            yield d
