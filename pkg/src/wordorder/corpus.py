"""Corpus ingestion: vocabulary with UNK typing, noun-phrase markup, shuffled instances.

A training corpus is plain text, one pre-tokenized sentence per line.  From
it we build a frequency-thresholded vocabulary in which every surface token
maps to exactly one id: itself if frequent enough, otherwise one of three
replacement classes (capitalized sentence-initial unknowns, other unknowns,
and tokens containing a digit).  Sentences plus optional base-noun-phrase
spans become `Instance` objects: a gold-ordered list of phrases together
with a deterministic shuffle of that list.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SpanError
from .rng import SplitMix64, derive_seed, shuffled_indices

START = "<s>"
END = "</s>"
BNP_START = "<bnp>"
BNP_END = "</bnp>"
UNK_CAP = "<unk-c>"
UNK = "<unk>"
NUM = "<num>"

SPECIAL_TOKENS = (START, END, BNP_START, BNP_END, UNK_CAP, UNK, NUM)

WORDS = "words"
WORDS_BNPS = "words-bnps"
VARIANTS = (WORDS, WORDS_BNPS)

_DIGITS = set("0123456789")


class Vocabulary:
    """Token/id mapping with dense ids; the seven special tokens occupy ids 0-6."""

    def __init__(self, tokens: Sequence[str], min_count: int):
        if tuple(tokens[:7]) != SPECIAL_TOKENS:
            raise ValueError("vocabulary must start with the special tokens")
        self.min_count = min_count
        self.id_to_token: tuple[str, ...] = tuple(tokens)
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(tokens)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate token in vocabulary")

    start_id = 0
    end_id = 1
    bnp_start_id = 2
    bnp_end_id = 3
    unk_cap_id = 4
    unk_id = 5
    num_id = 6

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.id_to_token == other.id_to_token
            and self.min_count == other.min_count
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(
                {"min_count": self.min_count, "tokens": list(self.id_to_token)},
                f,
                ensure_ascii=False,
            )
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as f:
            blob = json.load(f)
        return cls(blob["tokens"], blob["min_count"])


def _contains_digit(token: str) -> bool:
    return any(ch in _DIGITS for ch in token)


def build_vocabulary(corpus: Iterable[Sequence[str]], min_count: int) -> Vocabulary:
    """Count types and keep those seen at least `min_count` times.

    Tokens containing a digit are normalized to the numeric symbol *before*
    counting, so numerals never enter the surviving type set.  An empty
    corpus yields a vocabulary of exactly the special tokens.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for sentence in corpus:
        for token in sentence:
            if not _contains_digit(token):
                counts[token] += 1
    survivors = [t for t, c in counts.items() if c >= min_count and t not in SPECIAL_TOKENS]
    survivors.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(list(SPECIAL_TOKENS) + survivors, min_count)


def replace_token(token: str, sentence_initial: bool, vocab: Vocabulary) -> int:
    """Map one surface token to its vocabulary id.

    Total: every nonempty token maps to exactly one id.  Numeric
    normalization applies regardless of frequency; unknowns split into the
    capitalized sentence-initial class and the plain class.
    """
    if not token:
        raise ValueError("empty token")
    if _contains_digit(token):
        return vocab.num_id
    wid = vocab.token_to_id.get(token)
    if wid is not None:
        return wid
    if sentence_initial and token[0].isupper():
        return vocab.unk_cap_id
    return vocab.unk_id


def encode_sentence(tokens: Sequence[str], vocab: Vocabulary) -> list[int]:
    """UNK-replace a whole sentence; position 0 counts as sentence-initial."""
    return [replace_token(t, i == 0, vocab) for i, t in enumerate(tokens)]


@dataclass(frozen=True)
class Phrase:
    """One orderable unit: a single word, or a marked base noun phrase."""

    word_ids: tuple[int, ...]
    is_bnp: bool = False

    def __post_init__(self):
        if not self.word_ids:
            raise ValueError("empty phrase")
        if self.is_bnp:
            if (
                len(self.word_ids) < 3
                or self.word_ids[0] != Vocabulary.bnp_start_id
                or self.word_ids[-1] != Vocabulary.bnp_end_id
            ):
                raise ValueError("BNP phrase must be <bnp> ... </bnp> with >= 1 word inside")
        elif len(self.word_ids) != 1:
            raise ValueError("non-BNP phrase must hold exactly one word")

    def __len__(self) -> int:
        return len(self.word_ids)


@dataclass(frozen=True)
class Instance:
    """One linearization problem.

    `gold_phrases` is the original order; `shuffle` is the permutation that
    produces the decoder's input bag (`shuffled_phrases[k] =
    gold_phrases[shuffle[k]]`).  `original_tokens` keeps the surface tokens
    before UNK replacement so that evaluation can substitute them back.
    """

    id: str
    gold_phrases: tuple[Phrase, ...]
    shuffle: tuple[int, ...]
    variant: str
    original_tokens: tuple[str, ...]
    bnp_spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = len(self.gold_phrases)
        if sorted(self.shuffle) != list(range(n)):
            raise ValueError("shuffle is not a permutation of the phrase indices")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == WORDS and any(p.is_bnp for p in self.gold_phrases):
            raise ValueError("words variant admits no BNP phrases")

    @property
    def shuffled_phrases(self) -> tuple[Phrase, ...]:
        return tuple(self.gold_phrases[i] for i in self.shuffle)

    @property
    def token_count(self) -> int:
        """M: total tokens across phrases, BNP markers included."""
        return sum(len(p) for p in self.gold_phrases)


def _check_spans(spans: Sequence[tuple[int, int]], n_tokens: int) -> list[tuple[int, int]]:
    ordered = sorted((int(s), int(e)) for s, e in spans)
    last_end = 0
    for s, e in ordered:
        if s < 0 or e > n_tokens or s >= e:
            raise SpanError(f"span {s}:{e} out of bounds for {n_tokens} tokens")
        if s < last_end:
            raise SpanError(f"span {s}:{e} overlaps a previous span")
        last_end = e
    return ordered

def make_instance(
    instance_id: str,
    tokens: Sequence[str],
    bnp_spans: Sequence[tuple[int, int]],
    variant: str,
    vocab: Vocabulary,
    seed: int,
    shuffle: Sequence[int] | None = None,
) -> Instance:
    """Build phrases for the task variant and shuffle them deterministically.

    Spans are 0-based half-open [start, end) index ranges into `tokens`,
    disjoint and in bounds; they must be empty under the single-word
    variant.  The shuffle is Fisher-Yates over a splitmix64 stream seeded by
    fnv1a64(instance_id) XOR seed, so the same (tokens, spans, seed, id)
    always produce the same instance.  Passing `shuffle` explicitly skips
    the PRNG (used when reloading serialized instances).
    """
    if not tokens:
        raise ValueError("empty sentence")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == WORDS and bnp_spans:
        raise SpanError("BNP spans supplied for the words variant")
    spans = _check_spans(bnp_spans, len(tokens))

    ids = encode_sentence(tokens, vocab)
    phrases: list[Phrase] = []
    pos = 0
    for s, e in spans:
        while pos < s:
            phrases.append(Phrase((ids[pos],)))
            pos += 1
        phrases.append(
            Phrase(
                (vocab.bnp_start_id, *ids[s:e], vocab.bnp_end_id),
                is_bnp=True,
            )
        )
        pos = e
    while pos < len(tokens):
        phrases.append(Phrase((ids[pos],)))
        pos += 1

    if shuffle is None:
        stream = SplitMix64(derive_seed(seed, instance_id))
        shuffle = shuffled_indices(len(phrases), stream)
    return Instance(
        id=instance_id,
        gold_phrases=tuple(phrases),
        shuffle=tuple(shuffle),
        variant=variant,
        original_tokens=tuple(tokens),
        bnp_spans=tuple(spans),
    )


def replacement_pools(instance: Instance, vocab: Vocabulary) -> dict[int, list[str]]:
    """Original surface tokens grouped by the replacement class they mapped to.

    Keys are the three replacement ids; values keep gold order.  Used by the
    decoder to substitute original tokens back into UNK slots.
    """
    pools: dict[int, list[str]] = {vocab.unk_cap_id: [], vocab.unk_id: [], vocab.num_id: []}
    for i, token in enumerate(instance.original_tokens):
        wid = replace_token(token, i == 0, vocab)
        if wid in pools:
            pools[wid].append(token)
    return pools


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def read_corpus(path: str) -> list[list[str]]:
    """Plain-text corpus: one tokenized sentence per line, space-separated."""
    sentences = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            tokens = line.split()
            if tokens:
                sentences.append(tokens)
    return sentences


def write_corpus(path: str, sentences: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for sentence in sentences:
            f.write(" ".join(sentence))
            f.write("\n")


def read_spans(path: str) -> list[list[tuple[int, int]]]:
    """Span file aligned line-for-line with a corpus file.

    Each line lists zero or more "start:end" ranges (0-based, half-open)
    separated by spaces; an empty line means no spans for that sentence.
    """
    per_line = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            spans = []
            for item in line.split():
                try:
                    s, e = item.split(":")
                    spans.append((int(s), int(e)))
                except ValueError as exc:
                    raise SpanError(f"{path}:{lineno}: bad span {item!r}") from exc
            per_line.append(spans)
    return per_line


def write_spans(path: str, per_line: Iterable[Sequence[tuple[int, int]]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for spans in per_line:
            f.write(" ".join(f"{s}:{e}" for s, e in spans))
            f.write("\n")


def instance_to_json(instance: Instance) -> str:
    record = {
        "id": instance.id,
        "tokens": list(instance.original_tokens),
        "spans": [list(span) for span in instance.bnp_spans],
        "variant": instance.variant,
        "shuffle": list(instance.shuffle),
    }
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def instance_from_json(line: str, vocab: Vocabulary) -> Instance:
    record = json.loads(line)
    return make_instance(
        record["id"],
        record["tokens"],
        [tuple(span) for span in record["spans"]],
        record["variant"],
        vocab,
        seed=0,
        shuffle=record["shuffle"],
    )


def save_instances(path: str, instances: Iterable[Instance]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for instance in instances:
            f.write(instance_to_json(instance))
            f.write("\n")


def load_instances(path: str, vocab: Vocabulary) -> list[Instance]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(instance_from_json(line, vocab))
    return out
