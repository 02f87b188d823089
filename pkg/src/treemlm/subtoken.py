"""Byte-pair-encoding subtokenizer shared across languages.

Merges are learned greedily over a token corpus (value nodes and code
tokens together); ties on pair frequency break lexicographically so the
learned table is a pure function of the corpus. Special tokens are atomic:
they are never split and no merge can produce them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

MASK = "[mask]"
PLT = "[PLT]"
JLT = "[JLT]"
UNK = "[UNK]"
CLS = "[CLS]"
EOS = "[EOS]"
PAD = "[PAD]"

SPECIALS = (MASK, PLT, JLT, UNK, CLS, EOS, PAD)

LANGUAGE_TAGS = {"python": PLT, "java": JLT, "unknown": UNK}


class EmptyCorpus(ValueError):
    pass


@dataclass(frozen=True)
class SubtokenVocab:
    merges: tuple[tuple[str, str], ...]
    subtoken_ids: dict[str, int]
    specials: tuple[str, ...] = SPECIALS

    def __len__(self) -> int:
        return len(self.subtoken_ids)

    def id_of(self, subtoken: str) -> int:
        return self.subtoken_ids.get(subtoken, self.subtoken_ids[UNK])

    @property
    def unk_id(self) -> int:
        return self.subtoken_ids[UNK]

    @property
    def pad_id(self) -> int:
        return self.subtoken_ids[PAD]

    @property
    def eos_id(self) -> int:
        return self.subtoken_ids[EOS]

    def strings(self) -> list[str]:
        out = [""] * len(self.subtoken_ids)
        for s, i in self.subtoken_ids.items():
            out[i] = s
        return out


def _pair_counts(symbol_seqs: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in symbol_seqs.items():
        for a, b in zip(symbols, symbols[1:]):
            counts[(a, b)] += freq
    return counts


def _merge_pair(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    out: list[str] = []
    i = 0
    merged = pair[0] + pair[1]
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def learn_bpe(corpus, num_merges: int) -> SubtokenVocab:
    """Greedy most-frequent-pair merging over a sequence of tokens.

    Stops early when no adjacent pair repeats the alphabet any further.
    """
    token_freq = Counter(corpus)
    if not token_freq:
        raise EmptyCorpus("cannot learn subtokens from an empty corpus")
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")

    seqs: dict[tuple[str, ...], int] = {}
    alphabet: set[str] = set()
    for token, freq in token_freq.items():
        if token in SPECIALS:
            continue
        symbols = tuple(token)
        seqs[symbols] = seqs.get(symbols, 0) + freq
        alphabet.update(symbols)

    merges: list[tuple[str, str]] = []
    produced: list[str] = []
    for _ in range(num_merges):
        counts = _pair_counts(seqs)
        if not counts:
            break
        best_freq = max(counts.values())
        pair = min(p for p, c in counts.items() if c == best_freq)
        merges.append(pair)
        produced.append(pair[0] + pair[1])
        seqs = {_merge_pair(sym, pair): f for sym, f in seqs.items()}

    subtoken_ids: dict[str, int] = {s: i for i, s in enumerate(SPECIALS)}
    for sym in sorted(alphabet):
        subtoken_ids[sym] = len(subtoken_ids)
    for sym in produced:
        if sym not in subtoken_ids:
            subtoken_ids[sym] = len(subtoken_ids)
    return SubtokenVocab(tuple(merges), subtoken_ids)


def split_token_strings(vocab: SubtokenVocab, token: str) -> list[str]:
    """Subtoken strings of one token; specials pass through whole."""
    if token in vocab.specials:
        return [token]
    if not token:
        return []
    symbols = tuple(token)
    # apply merges in learned order; each pass is cheap at toy scale
    for pair in vocab.merges:
        if len(symbols) < 2:
            break
        symbols = _merge_pair(symbols, pair)
    return list(symbols)


def split_token(vocab: SubtokenVocab, token: str) -> list[int]:
    """Subtoken ids of one token; out-of-alphabet pieces map to [UNK]."""
    return [vocab.id_of(s) for s in split_token_strings(vocab, token)]


def token_id(vocab: SubtokenVocab, token: str) -> int:
    """Id of a token that is a single subtoken (or special); [UNK] otherwise."""
    if token in vocab.subtoken_ids:
        return vocab.subtoken_ids[token]
    pieces = split_token_strings(vocab, token)
    if len(pieces) == 1:
        return vocab.id_of(pieces[0])
    return vocab.unk_id


def save_vocab(vocab: SubtokenVocab, path: str) -> None:
    """Line 1: tab-separated specials; then one merge pair per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(vocab.specials) + "\n")
        for a, b in vocab.merges:
            fh.write(f"{a}\t{b}\n")
        fh.write("#alphabet\t" + "\t".join(_alphabet_of(vocab)) + "\n")


def _alphabet_of(vocab: SubtokenVocab) -> list[str]:
    produced = {a + b for a, b in vocab.merges}
    return sorted(
        s for s in vocab.subtoken_ids if s not in vocab.specials and s not in produced
    )


def load_vocab(path: str) -> SubtokenVocab:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    specials = tuple(lines[0].split("\t"))
    merges: list[tuple[str, str]] = []
    alphabet: list[str] = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split("\t")
        if parts[0] == "#alphabet":
            alphabet = parts[1:]
            continue
        merges.append((parts[0], parts[1]))
    subtoken_ids: dict[str, int] = {s: i for i, s in enumerate(specials)}
    for sym in alphabet:
        subtoken_ids[sym] = len(subtoken_ids)
    for a, b in merges:
        if a + b not in subtoken_ids:
            subtoken_ids[a + b] = len(subtoken_ids)
    return SubtokenVocab(tuple(merges), subtoken_ids, specials)


def merges_to_closure(corpus) -> int:
    """Merge count sufficient to fuse every distinct corpus token into a
    single subtoken (upper bound; learn_bpe stops early once exhausted)."""
    distinct = {t for t in corpus if t not in SPECIALS}
    return sum(max(len(t) - 1, 0) for t in distinct)
