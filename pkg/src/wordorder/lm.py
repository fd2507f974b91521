"""Shared language-model contract: state, transition, next-word distribution.

A model exposes an initial state h0, a deterministic transition
advance(word, state) -> state, and two log-probability queries:
logprob(word, state) for the next-word distribution at a state and
unigram_logprob(word) for the model's own smoothed unigram distribution.
States are immutable values; any number of concurrent decodes may share one
model.  All log-probabilities are natural logs.
"""

from __future__ import annotations

import math
from typing import Iterable, Protocol, Sequence, runtime_checkable

from .corpus import Phrase


@runtime_checkable
class LanguageModel(Protocol):
    vocab: tuple[str, ...]
    start_id: int
    end_id: int

    def init_state(self): ...

    def advance(self, word: int, state): ...

    def logprob(self, word: int, state) -> float: ...

    def unigram_logprob(self, word: int) -> float: ...


def start_state(model: LanguageModel):
    """The state every scored sequence is conditioned on: h0 advanced through <s>."""
    return model.advance(model.start_id, model.init_state())


def score_sequence(model: LanguageModel, words: Sequence[int]) -> float:
    """Sum of stepwise log-probabilities of `words`, first word conditioned on <s>.

    The empty sequence scores 0.  No end-of-sentence term is added here;
    callers that want one add logprob(end_id, final state) themselves.
    """
    state = start_state(model)
    total = 0.0
    for w in words:
        total += model.logprob(w, state)
        state = model.advance(w, state)
    return total


def score_and_state(model: LanguageModel, words: Sequence[int]) -> tuple[float, object]:
    """Like score_sequence but also returns the final state."""
    state = start_state(model)
    total = 0.0
    for w in words:
        total += model.logprob(w, state)
        state = model.advance(w, state)
    return total, state


def future_cost(model: LanguageModel, remaining: Iterable[Phrase]) -> float:
    """Unigram estimate of the score still to come from unplaced phrases.

    Sums unigram log-probabilities of every token in every remaining phrase,
    BNP marker tokens included; empty input gives 0, so ranking a finished
    beam by score-plus-estimate reduces to the score alone.
    """
    total = 0.0
    for phrase in remaining:
        for w in phrase.word_ids:
            total += model.unigram_logprob(w)
    return total


def perplexity(model: LanguageModel, sentences: Iterable[Sequence[int]]) -> float:
    """exp of mean negative log-likelihood per predicted token (<\\s> included)."""
    nll = 0.0
    count = 0
    for words in sentences:
        state = start_state(model)
        for w in words:
            nll -= model.logprob(w, state)
            state = model.advance(w, state)
        nll -= model.logprob(model.end_id, state)
        count += len(words) + 1
    if count == 0:
        return float("nan")
    return math.exp(nll / count)
