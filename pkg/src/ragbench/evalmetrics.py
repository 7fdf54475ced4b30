"""Character n-gram F-score (chrF) and exact-match METEOR, from first principles.

Both metrics compare a model-generated hypothesis against an expert reference.
The METEOR variant here is exact-match only (no stemming or synonym modules)
so it needs no linguistic resources; reports label it "METEOR-exact".
"""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyList, EmptyReference

METEOR_VARIANT = "METEOR-exact"

# Above this many candidate alignments METEOR falls back to leftmost-greedy
# chunk counting instead of exhaustive minimization.
ALIGNMENT_ENUMERATION_CAP = 10_000


@dataclass(frozen=True)
class ChrfConfig:
    n_max: int = 6
    beta: float = 2.0
    remove_whitespace: bool = True
    lowercase: bool = True

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class MeteorBreakdown:
    m: int
    t: int
    r: int
    chunks: int
    precision: float
    recall: float
    f_mean: float
    penalty: float
    score: float


@dataclass(frozen=True)
class MetricScores:
    meteor: float
    chrf: float


_WS = re.compile(r"\s+")


def _chrf_chars(text: str, cfg: ChrfConfig) -> str:
    if cfg.lowercase:
        text = text.lower()
    text = _WS.sub(" ", text).strip()
    if cfg.remove_whitespace:
        text = text.replace(" ", "")
    return text


def _ngram_counts(chars: str, n: int) -> Counter:
    return Counter(chars[i:i + n] for i in range(len(chars) - n + 1))


def chrf(hypothesis: str, reference: str, cfg: ChrfConfig = ChrfConfig()) -> float:
    """chrF score in [0, 1].

    Per n-gram order: clipped-match precision and recall. Orders where both
    sides lack n-grams are skipped; orders where only one side has them
    contribute zero. The per-order means combine via F_beta.
    """
    ref_chars = _chrf_chars(reference, cfg)
    if not ref_chars:
        raise EmptyReference("reference is empty after preprocessing")
    hyp_chars = _chrf_chars(hypothesis, cfg)
    if not hyp_chars:
        return 0.0

    precisions: list[float] = []
    recalls: list[float] = []
    for n in range(1, cfg.n_max + 1):
        hyp_grams = _ngram_counts(hyp_chars, n)
        ref_grams = _ngram_counts(ref_chars, n)
        hyp_total = sum(hyp_grams.values())
        ref_total = sum(ref_grams.values())
        if hyp_total == 0 and ref_total == 0:
            continue
        matched = sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())
        precisions.append(matched / hyp_total if hyp_total else 0.0)
        recalls.append(matched / ref_total if ref_total else 0.0)

    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p * r == 0.0:
        return 0.0
    b2 = cfg.beta ** 2
    return (1 + b2) * p * r / (b2 * p + r)


_TOKEN = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace with punctuation detached."""
    return _TOKEN.findall(text.lower())


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    """Number of maximal runs adjacent in both hypothesis and reference."""
    chunks = 0
    prev = None
    for h, r in sorted(pairs):
        if prev is None or h != prev[0] + 1 or r != prev[1] + 1:
            chunks += 1
        prev = (h, r)
    return chunks


def _align(hyp: list[str], ref: list[str]) -> tuple[int, int, list[tuple[int, int]]]:
    """Maximum-cardinality exact alignment with minimal chunk count.

    Returns (m, chunks, pairs). Exhaustive over all maximum alignments up to
    ALIGNMENT_ENUMERATION_CAP candidates, leftmost-greedy beyond that.
    """
    hyp_pos: dict[str, list[int]] = {}
    ref_pos: dict[str, list[int]] = {}
    for i, tok in enumerate(hyp):
        hyp_pos.setdefault(tok, []).append(i)
    for i, tok in enumerate(ref):
        ref_pos.setdefault(tok, []).append(i)
    shared = [t for t in hyp_pos if t in ref_pos]
    m = sum(min(len(hyp_pos[t]), len(ref_pos[t])) for t in shared)
    if m == 0:
        return 0, 0, []

    # Per shared token type: every way to pick which occurrences match and how
    # they pair up. A full alignment is one choice per type.
    per_type_options: list[list[list[tuple[int, int]]]] = []
    total = 1
    for tok in shared:
        hp, rp = hyp_pos[tok], ref_pos[tok]
        k = min(len(hp), len(rp))
        options = [
            list(zip(hsub, rperm))
            for hsub in itertools.combinations(hp, k)
            for rsub in itertools.combinations(rp, k)
            for rperm in itertools.permutations(rsub)
        ]
        per_type_options.append(options)
        total *= len(options)
        if total > ALIGNMENT_ENUMERATION_CAP:
            break

    if total > ALIGNMENT_ENUMERATION_CAP:
        pairs = _greedy_pairs(shared, hyp_pos, ref_pos)
        return m, _count_chunks(pairs), pairs

    best_pairs: list[tuple[int, int]] | None = None
    best_chunks = m + 1
    for combo in itertools.product(*per_type_options):
        pairs = [p for opt in combo for p in opt]
        chunks = _count_chunks(pairs)
        if chunks < best_chunks:
            best_chunks = chunks
            best_pairs = pairs
    return m, best_chunks, sorted(best_pairs)


def _greedy_pairs(shared, hyp_pos, ref_pos) -> list[tuple[int, int]]:
    # leftmost occurrences matched in order, per token type
    pairs = []
    for tok in shared:
        k = min(len(hyp_pos[tok]), len(ref_pos[tok]))
        pairs.extend(zip(hyp_pos[tok][:k], ref_pos[tok][:k]))
    return sorted(pairs)


def meteor(hypothesis: str, reference: str) -> MeteorBreakdown:
    """Exact-match METEOR with fragmentation penalty.

    f_mean = 10PR / (R + 9P); penalty = 0.5 * (chunks/m)^3;
    score = f_mean * (1 - penalty). Score is 0 when nothing matches.
    """
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise EmptyReference("reference has no tokens")
    hyp_tokens = tokenize(hypothesis)

    m, chunks, _ = _align(hyp_tokens, ref_tokens)
    t, r = len(hyp_tokens), len(ref_tokens)
    if m == 0:
        return MeteorBreakdown(m=0, t=t, r=r, chunks=0, precision=0.0,
                               recall=0.0, f_mean=0.0, penalty=0.0, score=0.0)
    precision = m / t
    recall = m / r
    f_mean = 10 * precision * recall / (recall + 9 * precision)
    penalty = 0.5 * (chunks / m) ** 3
    return MeteorBreakdown(
        m=m, t=t, r=r, chunks=chunks, precision=precision, recall=recall,
        f_mean=f_mean, penalty=penalty, score=f_mean * (1 - penalty),
    )


def score_response(hypothesis: str, reference: str,
                   chrf_cfg: ChrfConfig = ChrfConfig()) -> MetricScores:
    return MetricScores(
        meteor=meteor(hypothesis, reference).score,
        chrf=chrf(hypothesis, reference, chrf_cfg),
    )


def average_scores(scores: list[MetricScores]) -> MetricScores:
    if not scores:
        raise EmptyList("cannot average an empty score list")
    return MetricScores(
        meteor=sum(s.meteor for s in scores) / len(scores),
        chrf=sum(s.chrf for s in scores) / len(scores),
    )
