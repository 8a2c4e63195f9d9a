"""Flat-file corpus handling: parsing, score filtering, calendar slicing,
split construction and the halving subset ladder.

The on-disk format is line oriented.  Each record is one post together with
its comments and is preceded by a header carrying topic, timestamp and id:

    ### topic=politics ts=1349049600 id=p000042
    Title (6): What was the biggest scandal in your school?
    Text:
    optional body lines, any number of them
    Comment (4): Vampires. This was almost 6 years ago ...
    a comment may continue over several lines
    Comment (2): another comment

The integers in parentheses are scores.  Comments inherit topic and
timestamp from their record header.  Text is whitespace normalized on
parse, so multi-line bodies come back as single-space joined strings and
word counts are plain whitespace token counts.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import CorpusFormatError, InsufficientDataError
from .periods import period_of

_HEADER_RE = re.compile(r"^### topic=(\S+) ts=(\S+) id=(\S+)\s*$")
_TITLE_RE = re.compile(r"^Title \(([^)]*)\): ?(.*)$")
_COMMENT_RE = re.compile(r"^Comment \(([^)]*)\): ?(.*)$")
_TEXT_RE = re.compile(r"^Text:\s?(.*)$")

DEFAULT_MIN_SCORE = 2


@dataclass
class Document:
    """One post or comment, timestamped and scored."""

    topic: str
    timestamp: int  # unix seconds, UTC
    kind: str  # "post" or "comment"
    score: int
    text: str  # whitespace normalized, nonempty
    doc_id: str
    parent_id: str | None = None  # comments point at their post

    @property
    def post_id(self) -> str:
        """Id of the post this document travels with when splitting."""
        return self.parent_id if self.parent_id is not None else self.doc_id

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass
class ParseResult:
    documents: list[Document]
    skipped_records: int  # records dropped for malformed score tokens

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)


def _normalize(parts: list[str]) -> str:
    return " ".join(" ".join(parts).split())


class _Record:
    """Parser state for one header-delimited record."""

    def __init__(self, topic: str, timestamp: int, rec_id: str):
        self.topic = topic
        self.timestamp = timestamp
        self.rec_id = rec_id
        self.malformed = False
        # items: (kind, score, text parts)
        self.items: list[tuple[str, int, list[str]]] = []

    def finish(self, out: list[Document]) -> bool:
        """Emit documents, or report False if the record was malformed."""
        if self.malformed:
            return False
        n_comments = 0
        for kind, score, parts in self.items:
            text = _normalize(parts)
            if not text:
                continue
            if kind == "post":
                doc_id, parent = self.rec_id, None
            else:
                doc_id, parent = f"{self.rec_id}/c{n_comments}", self.rec_id
                n_comments += 1
            out.append(
                Document(
                    topic=self.topic,
                    timestamp=self.timestamp,
                    kind=kind,
                    score=score,
                    text=text,
                    doc_id=doc_id,
                    parent_id=parent,
                )
            )
        return True


def parse_flat_corpus(stream: Iterable[str]) -> ParseResult:
    """Parse a flat corpus stream into documents.

    A record whose Title or Comment line carries a non-integer score is
    dropped whole and counted in ``skipped_records``.  A header without a
    valid integer timestamp is a hard error because every downstream
    computation keys off timestamps.
    """
    docs: list[Document] = []
    skipped = 0
    record: _Record | None = None
    state = "idle"  # idle | header | title | body | comment

    def close(rec: _Record | None) -> None:
        nonlocal skipped
        if rec is not None and not rec.finish(docs):
            skipped += 1

    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if line.startswith("###"):
            m = _HEADER_RE.match(line)
            if not m or not m.group(2).isdigit():
                raise CorpusFormatError(
                    f"line {lineno}: bad record header (topic/ts/id required): {line!r}"
                )
            close(record)
            record = _Record(m.group(1), int(m.group(2)), m.group(3))
            state = "header"
            continue
        if record is None:
            if line.strip():
                raise CorpusFormatError(
                    f"line {lineno}: content before any record header"
                )
            continue
        if state == "header":
            m = _TITLE_RE.match(line)
            if not m:
                if not line.strip():
                    continue
                record.malformed = True
                state = "title"
                continue
            score_tok, text = m.group(1), m.group(2)
            if _is_int(score_tok):
                record.items.append(("post", int(score_tok), [text]))
            else:
                record.malformed = True
            state = "title"
            continue
        m = _COMMENT_RE.match(line)
        if m:
            score_tok, text = m.group(1), m.group(2)
            if _is_int(score_tok):
                record.items.append(("comment", int(score_tok), [text]))
            else:
                record.malformed = True
            state = "comment"
            continue
        if state == "title" and _TEXT_RE.match(line):
            first = _TEXT_RE.match(line).group(1)
            if record.items:
                record.items[-1][2].append(first)
            state = "body"
            continue
        # plain continuation line of the current title, body or comment
        if record.items:
            record.items[-1][2].append(line)
    close(record)
    return ParseResult(docs, skipped)


def _is_int(tok: str) -> bool:
    return bool(re.fullmatch(r"-?\d+", tok))


def parse_flat_corpus_file(path: str | Path) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse_flat_corpus(fh)


def write_flat_corpus(docs: Iterable[Document], out: IO[str]) -> None:
    """Write documents back to the flat format, grouped by post id.

    Each group must contain its post.  Round-trips through
    :func:`parse_flat_corpus` up to text normalization.
    """
    groups: dict[str, list[Document]] = {}
    order: list[str] = []
    for doc in docs:
        pid = doc.post_id
        if pid not in groups:
            groups[pid] = []
            order.append(pid)
        groups[pid].append(doc)
    for pid in order:
        group = sorted(groups[pid], key=lambda d: d.kind != "post")
        post = group[0]
        if post.kind != "post":
            raise ValueError(f"post id {pid} has comments but no post")
        out.write(f"### topic={post.topic} ts={post.timestamp} id={pid}\n")
        out.write(f"Title ({post.score}): {post.text}\n")
        out.write("Text:\n")
        for doc in group[1:]:
            out.write(f"Comment ({doc.score}): {doc.text}\n")


def write_flat_corpus_file(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_flat_corpus(docs, fh)


def filter_min_score(docs: Iterable[Document], min_score: int = DEFAULT_MIN_SCORE) -> list[Document]:
    """Keep documents scoring at least ``min_score``, preserving order."""
    return [d for d in docs if d.score >= min_score]


@dataclass
class PeriodBucket:
    period_id: str
    documents: list[Document]
    word_count: int
    insufficient: bool  # below the word floor, excluded from training


def slice_periods(
    docs: Iterable[Document],
    granularity: str = "month",
    min_words: int = 200_000,
) -> dict[str, PeriodBucket]:
    """Group documents into calendar periods keyed by "YYYY-MM".

    Periods under ``min_words`` are kept but flagged insufficient so the
    training pipeline can skip them.  Callers slice one topic at a time.
    """
    if granularity != "month":
        raise ValueError(f"unsupported granularity {granularity!r}")
    buckets: dict[str, list[Document]] = {}
    for doc in docs:
        buckets.setdefault(period_of(doc.timestamp), []).append(doc)
    out = {}
    for pid in sorted(buckets):
        members = buckets[pid]
        words = sum(d.word_count for d in members)
        out[pid] = PeriodBucket(pid, members, words, insufficient=words < min_words)
    return out


@dataclass
class PeriodSlice:
    """Train/dev/test token sequences for one topic-period."""

    topic: str
    period_id: str
    train_full: list[str]
    dev: list[str]
    test: list[str]
    seed: int
    train_post_ids: tuple[str, ...] = ()
    dev_post_ids: tuple[str, ...] = ()
    test_post_ids: tuple[str, ...] = ()

    @property
    def word_counts(self) -> dict[str, int]:
        return {
            "train": len(self.train_full),
            "dev": len(self.dev),
            "test": len(self.test),
        }


def make_splits(
    period_docs: list[Document],
    dev_min: int,
    test_min: int,
    seed: int,
    train_min: int = 0,
    period_id: str | None = None,
) -> PeriodSlice:
    """Shuffle posts into dev, test and train splits for one period.

    A post and its comments move together, so no post id ever lands in two
    splits.  Dev fills first, then test, and everything left is training
    data.  Deterministic in (documents, seed) regardless of input order.
    """
    if not period_docs:
        raise InsufficientDataError("empty period")
    topic = period_docs[0].topic
    pid = period_id or period_of(period_docs[0].timestamp)

    groups: dict[str, list[Document]] = {}
    for doc in period_docs:
        groups.setdefault(doc.post_id, []).append(doc)
    ordered = sorted(
        groups.items(), key=lambda kv: (min(d.timestamp for d in kv[1]), kv[0])
    )
    rng = random.Random(seed)
    rng.shuffle(ordered)

    splits: dict[str, list[str]] = {"dev": [], "test": [], "train": []}
    ids: dict[str, list[str]] = {"dev": [], "test": [], "train": []}
    for post_id, members in ordered:
        if len(splits["dev"]) < dev_min:
            dest = "dev"
        elif len(splits["test"]) < test_min:
            dest = "test"
        else:
            dest = "train"
        for doc in members:
            splits[dest].extend(doc.text.split())
        ids[dest].append(post_id)

    if len(splits["dev"]) < dev_min or len(splits["test"]) < test_min:
        raise InsufficientDataError(
            f"period {pid}: {sum(len(s) for s in splits.values())} words cannot fill "
            f"dev>={dev_min} and test>={test_min}"
        )
    if len(splits["train"]) < train_min:
        raise InsufficientDataError(
            f"period {pid}: train split has {len(splits['train'])} words, "
            f"needs {train_min}"
        )
    return PeriodSlice(
        topic=topic,
        period_id=pid,
        train_full=splits["train"],
        dev=splits["dev"],
        test=splits["test"],
        seed=seed,
        train_post_ids=tuple(ids["train"]),
        dev_post_ids=tuple(ids["dev"]),
        test_post_ids=tuple(ids["test"]),
    )


@dataclass
class SubsetLadder:
    """Nested training subsets, each the leading half of the one above."""

    period_id: str
    sizes: list[int]  # descending, halving
    tokens: list[str]  # the largest subset

    def subset(self, k: int) -> list[str]:
        return self.tokens[: self.sizes[k]]

    def __iter__(self) -> Iterator[tuple[int, list[str]]]:
        for size in self.sizes:
            yield size, self.tokens[:size]


def build_subset_ladder(
    train_full: list[str],
    top_size: int,
    floor_size: int,
    period_id: str = "",
) -> SubsetLadder:
    """Build the halving prefix ladder from a training token sequence.

    Sizes run top, top/2, ... down to the floor, the odd halves rounding
    up, so every subset is a prefix of the full sequence and of every
    larger subset.  The floor must be reachable by repeated halving.
    """
    if top_size < 1 or floor_size < 1 or floor_size > top_size:
        raise ValueError(f"bad ladder bounds top={top_size} floor={floor_size}")
    if len(train_full) < top_size:
        raise InsufficientDataError(
            f"train sequence has {len(train_full)} words, ladder top is {top_size}"
        )
    sizes = [top_size]
    while sizes[-1] > floor_size:
        sizes.append(math.ceil(sizes[-1] / 2))
    if sizes[-1] != floor_size:
        raise ValueError(
            f"floor {floor_size} not reachable by halving from {top_size} "
            f"(ladder would hit {sizes[-1]})"
        )
    return SubsetLadder(period_id=period_id, sizes=sizes, tokens=train_full[:top_size])
