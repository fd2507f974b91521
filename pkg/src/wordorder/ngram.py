"""Count-based n-gram language model with interpolated modified Kneser-Ney smoothing.

Counting pads each sentence with one start token and one end token and
counts every window of every length up to the model order.  Estimation
follows the standard modified Kneser-Ney recipe:

* adjusted counts: raw counts at the highest order and for grams starting
  with the start token (they cannot be extended to the left); continuation
  counts (number of distinct left extensions) everywhere else;
* three discounts per order from the counts-of-counts of the adjusted
  counts, D_k = k - (k+1) * Y * n_{k+1} / n_k with Y = n_1 / (n_1 + 2 n_2),
  falling back to a single absolute discount of 0.5 at any order whose
  statistics are degenerate (some n_k = 0, or a discount outside [0, k]);
* interpolation with the next-lower order, terminating in the uniform
  distribution over the predictable vocabulary (everything but the start
  token).

The start token is context only: it gets no probability mass, is excluded
from normalization sums, and is exported to ARPA with the conventional
dummy log10 probability of -99.  All probabilities are handled internally
in natural log; the ARPA boundary converts to and from base 10.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from . import corpus as _corpus
from .errors import ArpaError

_LN10 = math.log(10.0)
_ARPA_DUMMY = -99.0  # conventional log10 "probability" of the start token

Gram = tuple[int, ...]


@dataclass
class NGramCounts:
    """Raw occurrence counts for every k-gram window, 1 <= k <= order."""

    order: int
    tables: list[dict[Gram, int]]  # tables[k-1] holds the k-gram counts
    start_id: int
    end_id: int

    def count(self, gram: Sequence[int]) -> int:
        gram = tuple(gram)
        return self.tables[len(gram) - 1].get(gram, 0)


def count_ngrams(
    sentences: Iterable[Sequence[int]],
    order: int,
    start_id: int = _corpus.Vocabulary.start_id,
    end_id: int = _corpus.Vocabulary.end_id,
) -> NGramCounts:
    """Count all k-gram windows of `<s> sentence </s>` for k = 1..order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    tables: list[dict[Gram, int]] = [defaultdict(int) for _ in range(order)]
    for sentence in sentences:
        padded = (start_id, *sentence, end_id)
        n = len(padded)
        for k in range(1, order + 1):
            table = tables[k - 1]
            for i in range(n - k + 1):
                table[padded[i : i + k]] += 1
    return NGramCounts(order, [dict(t) for t in tables], start_id, end_id)


@dataclass
class KNModel:
    """Smoothed n-gram model in backoff form.

    `logprob_tables[k-1]` maps stored k-grams to natural-log conditional
    probabilities; `backoff_tables[k-1]` maps k-gram contexts to natural-log
    backoff weights.  `discounts[k-1]` records the (D1, D2, D3+) actually
    used at order k, or None for a model loaded from ARPA (the file does not
    retain them).
    """

    order: int
    vocab: tuple[str, ...]
    logprob_tables: list[dict[Gram, float]]
    backoff_tables: list[dict[Gram, float]]
    discounts: list[tuple[float, float, float]] | None
    start_id: int | None
    end_id: int | None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def init_state(self) -> Gram:
        return ()

    def advance(self, word: int, state: Gram) -> Gram:
        if self.order == 1:
            return ()
        return (state + (word,))[-(self.order - 1) :]

    def logprob(self, word: int, state: Gram) -> float:
        """Backoff-chain lookup of ln p(word | state).

        Finite for every predictable word in every context; querying the
        start token (or an id outside the vocabulary) is a contract
        violation and raises.
        """
        key = (state, word)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if word == self.start_id or not 0 <= word < len(self.vocab):
            raise ValueError(f"word id {word} is not a predictable vocabulary item")
        ctx = state if len(state) < self.order else state[-(self.order - 1) :]
        acc = 0.0
        while ctx:
            val = self.logprob_tables[len(ctx)].get(ctx + (word,))
            if val is not None:
                acc += val
                break
            acc += self.backoff_tables[len(ctx) - 1].get(ctx, 0.0)
            ctx = ctx[1:]
        else:
            acc += self.logprob_tables[0][(word,)]
        self._cache[key] = acc
        return acc

    def unigram_logprob(self, word: int) -> float:
        if word == self.start_id or not 0 <= word < len(self.vocab):
            raise ValueError(f"word id {word} is not a predictable vocabulary item")
        return self.logprob_tables[0][(word,)]


def _discount_stats(values: Iterable[int]) -> Counter:
    cc: Counter = Counter()
    for v in values:
        if v <= 4:
            cc[v] += 1
    return cc


def _estimate_discounts(cc: Counter, order_k: int) -> tuple[tuple[float, float, float], bool]:
    """Modified discounts from counts-of-counts; (discounts, fell_back)."""
    n1, n2, n3, n4 = cc[1], cc[2], cc[3], cc[4]
    if n1 > 0 and n2 > 0 and n3 > 0 and n4 > 0:
        y = n1 / (n1 + 2.0 * n2)
        d1 = 1.0 - 2.0 * y * n2 / n1
        d2 = 2.0 - 3.0 * y * n3 / n2
        d3 = 3.0 - 4.0 * y * n4 / n3
        if 0.0 <= d1 <= 1.0 and 0.0 <= d2 <= 2.0 and 0.0 <= d3 <= 3.0:
            return (d1, d2, d3), False
    warnings.warn(
        f"degenerate counts-of-counts at order {order_k} "
        f"(n1..n4 = {n1},{n2},{n3},{n4}); using absolute discount 0.5",
        RuntimeWarning,
        stacklevel=3,
    )
    return (0.5, 0.5, 0.5), True


def _discount_for(count: int, d: tuple[float, float, float]) -> float:
    if count >= 3:
        return d[2]
    if count == 2:
        return d[1]
    if count == 1:
        return d[0]
    return 0.0


def estimate_kn(
    counts: NGramCounts,
    vocab: Sequence[str],
    prune_singletons: bool = False,
) -> KNModel:
    """Estimate an interpolated modified Kneser-Ney model from counts.

    Every predictable vocabulary item receives positive probability in
    every context, and for every stored context the probabilities sum to 1
    by construction.  `prune_singletons` drops count-1 grams of the highest
    order from the stored model before estimating that order (their mass
    reaches the decoder through backoff); lower orders are unaffected.
    """
    n = counts.order
    start_id = counts.start_id
    if not counts.tables[0]:
        raise ValueError("empty counts: train on at least one sentence")

    # adjusted counts, highest order downward
    adjusted: list[dict[Gram, int]] = [dict() for _ in range(n)]
    top = counts.tables[n - 1]
    if prune_singletons and n > 1:
        adjusted[n - 1] = {g: c for g, c in top.items() if c >= 2}
    else:
        adjusted[n - 1] = dict(top)
    for k in range(n - 1, 0, -1):
        source = counts.tables[k] if k == n - 1 and prune_singletons else adjusted[k]
        # continuation counts: distinct left extensions in the order above
        cont: dict[Gram, int] = defaultdict(set)  # type: ignore[assignment]
        for gram in source:
            cont[gram[1:]].add(gram[0])
        adj: dict[Gram, int] = {}
        for gram, c in counts.tables[k - 1].items():
            if gram[0] == start_id:
                adj[gram] = c
            else:
                left = cont.get(gram)
                adj[gram] = len(left) if left else 0
        adjusted[k - 1] = {g: c for g, c in adj.items() if c > 0}

    n_pred = len(vocab) - (1 if _corpus.START in vocab else 0)
    discounts: list[tuple[float, float, float]] = []
    logprob_tables: list[dict[Gram, float]] = [dict() for _ in range(n)]
    backoff_tables: list[dict[Gram, float]] = [dict() for _ in range(n)]

    token_to_id = {t: i for i, t in enumerate(vocab)}
    sid = token_to_id.get(_corpus.START)

    # unigrams
    uni = adjusted[0]
    cc = _discount_stats(c for g, c in uni.items() if g != (start_id,))
    d, _ = _estimate_discounts(cc, 1)
    discounts.append(d)
    total = sum(c for g, c in uni.items() if g != (start_id,))
    n1 = sum(1 for g, c in uni.items() if c == 1 and g != (start_id,))
    n2 = sum(1 for g, c in uni.items() if c == 2 and g != (start_id,))
    n3p = sum(1 for g, c in uni.items() if c >= 3 and g != (start_id,))
    gamma1 = (d[0] * n1 + d[1] * n2 + d[2] * n3p) / total
    uniform = 1.0 / n_pred
    for wid in range(len(vocab)):
        if wid == sid:
            continue
        a = uni.get((wid,), 0)
        p = max(a - _discount_for(a, d), 0.0) / total + gamma1 * uniform
        logprob_tables[0][(wid,)] = math.log(p)

    # higher orders
    for k in range(2, n + 1):
        table = adjusted[k - 1]
        cc = _discount_stats(table.values())
        d, _ = _estimate_discounts(cc, k)
        discounts.append(d)
        by_context: dict[Gram, list[tuple[int, int]]] = defaultdict(list)
        for gram, a in table.items():
            by_context[gram[:-1]].append((gram[-1], a))
        for ctx in sorted(by_context):
            items = by_context[ctx]
            total = sum(a for _, a in items)
            n1 = sum(1 for _, a in items if a == 1)
            n2 = sum(1 for _, a in items if a == 2)
            n3p = sum(1 for _, a in items if a >= 3)
            gamma = (d[0] * n1 + d[1] * n2 + d[2] * n3p) / total
            backoff_tables[k - 2][ctx] = math.log(gamma)
            lower = logprob_tables[k - 2]
            for wid, a in items:
                p_low = math.exp(lower[ctx[1:] + (wid,)])
                p = max(a - _discount_for(a, d), 0.0) / total + gamma * p_low
                logprob_tables[k - 1][ctx + (wid,)] = math.log(p)

    return KNModel(
        order=n,
        vocab=tuple(vocab),
        logprob_tables=logprob_tables,
        backoff_tables=backoff_tables,
        discounts=discounts,
        start_id=sid,
        end_id=token_to_id.get(_corpus.END),
    )


# ---------------------------------------------------------------------------
# ARPA import/export
# ---------------------------------------------------------------------------

def _format_log10(value: float) -> str:
    return repr(value / _LN10)


def write_arpa(model: KNModel, out: TextIO) -> None:
    """Standard ARPA text: \\data\\ header, then per-order prob/backoff lines.

    Unigrams appear in vocabulary-id order (so a round trip preserves ids);
    higher orders are sorted by id tuples.  Stored values are written at
    full precision, in log base 10.
    """
    entries: list[list[tuple[Gram, str]]] = []
    for k in range(1, model.order + 1):
        table = model.logprob_tables[k - 1]
        bows = model.backoff_tables[k - 1]
        rows = []
        grams: Iterable[Gram]
        if k == 1:
            grams = [(wid,) for wid in range(len(model.vocab))]
        else:
            grams = sorted(table)
        for gram in grams:
            if k == 1 and gram[0] == model.start_id:
                logp_str = repr(_ARPA_DUMMY)
            elif gram in table:
                logp_str = _format_log10(table[gram])
            else:
                continue
            words = " ".join(model.vocab[w] for w in gram)
            if gram in bows:
                rows.append((gram, f"{logp_str}\t{words}\t{_format_log10(bows[gram])}"))
            else:
                rows.append((gram, f"{logp_str}\t{words}"))
        entries.append(rows)

    out.write("\\data\\\n")
    for k, rows in enumerate(entries, 1):
        out.write(f"ngram {k}={len(rows)}\n")
    for k, rows in enumerate(entries, 1):
        out.write(f"\n\\{k}-grams:\n")
        for _, line in rows:
            out.write(line)
            out.write("\n")
    out.write("\n\\end\\\n")


def to_arpa(model: KNModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        write_arpa(model, f)


def read_arpa(lines: Iterable[str]) -> KNModel:
    """Parse ARPA text into a model; raises ArpaError with a line number."""
    it = enumerate(lines, 1)
    declared: dict[int, int] = {}

    lineno = 0
    for lineno, line in it:
        if line.strip() == "\\data\\":
            break
    else:
        raise ArpaError("missing \\data\\ header", lineno or None)
    for lineno, line in it:
        text = line.strip()
        if not text:
            break
        try:
            head, count = text.split()
            k = int(head.split("=")[0].removeprefix("ngram "))
            declared[int(text.split()[1].split("=")[0])] = 0  # placeholder, replaced below
        except (ValueError, IndexError):
            raise ArpaError(f"bad count line {text!r}", lineno) from None
        try:
            k_str, v_str = text.removeprefix("ngram ").split("=")
            declared[int(k_str)] = int(v_str)
        except ValueError:
            raise ArpaError(f"bad count line {text!r}", lineno) from None
    if not declared:
        raise ArpaError("no ngram counts declared", lineno)
    order = max(declared)
    if sorted(declared) != list(range(1, order + 1)):
        raise ArpaError("non-contiguous ngram orders in \\data\\ section", lineno)

    vocab: list[str] = []
    token_to_id: dict[str, int] = {}
    raw: list[list[tuple[tuple[str, ...], float, float | None]]] = [[] for _ in range(order)]
    current = 0  # current section order, 0 = outside
    seen: dict[int, int] = {k: 0 for k in declared}
    ended = False
    for lineno, line in it:
        text = line.strip()
        if not text:
            continue
        if text == "\\end\\":
            ended = True
            break
        if text.startswith("\\") and text.endswith("-grams:"):
            try:
                current = int(text[1:-7])
            except ValueError:
                raise ArpaError(f"bad section header {text!r}", lineno) from None
            if current not in declared:
                raise ArpaError(f"section \\{current}-grams: was not declared", lineno)
            continue
        if current == 0:
            raise ArpaError(f"unexpected content {text!r} outside any section", lineno)
        fields = text.split()
        if len(fields) == current + 1:
            backoff = None
        elif len(fields) == current + 2:
            try:
                backoff = float(fields[-1]) * _LN10
            except ValueError:
                raise ArpaError(f"bad backoff weight {fields[-1]!r}", lineno) from None
            fields = fields[:-1]
        else:
            raise ArpaError(
                f"expected {current + 1} or {current + 2} fields, got {len(fields)}", lineno
            )
        try:
            logp = float(fields[0]) * _LN10
        except ValueError:
            raise ArpaError(f"bad log probability {fields[0]!r}", lineno) from None
        raw[current - 1].append((tuple(fields[1:]), logp, backoff))
        seen[current] += 1

    if not ended:
        raise ArpaError("missing \\end\\ marker", lineno)
    for k, want in declared.items():
        if seen[k] != want:
            raise ArpaError(f"declared {want} {k}-grams but found {seen[k]}", lineno)

    for gram, _, _ in raw[0]:
        token = gram[0]
        if token in token_to_id:
            raise ArpaError(f"duplicate unigram {token!r}")
        token_to_id[token] = len(vocab)
        vocab.append(token)

    logprob_tables: list[dict[Gram, float]] = [dict() for _ in range(order)]
    backoff_tables: list[dict[Gram, float]] = [dict() for _ in range(order)]
    sid = token_to_id.get(_corpus.START)
    for k in range(1, order + 1):
        for gram_tokens, logp, backoff in raw[k - 1]:
            try:
                gram = tuple(token_to_id[t] for t in gram_tokens)
            except KeyError as exc:
                raise ArpaError(f"{k}-gram references unknown token {exc.args[0]!r}") from None
            if not (k == 1 and gram[0] == sid):
                logprob_tables[k - 1][gram] = logp
            if backoff is not None:
                backoff_tables[k - 1][gram] = backoff

    return KNModel(
        order=order,
        vocab=tuple(vocab),
        logprob_tables=logprob_tables,
        backoff_tables=backoff_tables,
        discounts=None,
        start_id=sid,
        end_id=token_to_id.get(_corpus.END),
    )


def from_arpa(path: str) -> KNModel:
    with open(path, encoding="utf-8") as f:
        return read_arpa(f)
