"""Tokenized corpus loading, validation and window iteration.

A corpus is an ordered list of documents, each a sequence of uint32 token
IDs. Fixed-length windows are iterated within documents only; a window
never crosses a document boundary.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

BINARY_MAGIC = b"MSCN"
BINARY_VERSION = 1

TokenSeq = Sequence[int]


class CorpusFormatError(ValueError):
    """Raised when a corpus file is malformed or violates its declared vocab."""


@dataclass(frozen=True)
class WindowRef:
    """Location of a fixed-length window inside a corpus."""

    doc_index: int
    offset: int
    length: int


@dataclass(frozen=True)
class Corpus:
    docs: tuple
    vocab_size: Optional[int] = None
    doc_ids: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(
            self, "docs", tuple(np.asarray(d, dtype=np.uint32) for d in self.docs)
        )
        if self.doc_ids is not None:
            object.__setattr__(self, "doc_ids", tuple(self.doc_ids))
            if len(self.doc_ids) != len(self.docs):
                raise ValueError("doc_ids length must match docs")
        if self.vocab_size is not None:
            for i, d in enumerate(self.docs):
                if len(d) and int(d.max()) >= self.vocab_size:
                    raise CorpusFormatError(
                        f"doc {i} contains token >= vocab_size {self.vocab_size}"
                    )

    @property
    def num_docs(self) -> int:
        return len(self.docs)

    @property
    def total_tokens(self) -> int:
        return int(sum(len(d) for d in self.docs))

    def window(self, ref: WindowRef) -> np.ndarray:
        doc = self.docs[ref.doc_index]
        if ref.offset + ref.length > len(doc):
            raise IndexError("window exceeds document bounds")
        return doc[ref.offset : ref.offset + ref.length]


def load_corpus(path, format: str) -> Corpus:
    """Load a corpus from `path` in the given format ("binary" or "jsonl")."""
    path = Path(path)
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "binary":
        return _load_binary(path)
    raise ValueError(f"unknown corpus format: {format!r}")


def save_corpus(corpus: Corpus, path, format: str) -> None:
    path = Path(path)
    if format == "jsonl":
        _save_jsonl(corpus, path)
    elif format == "binary":
        _save_binary(corpus, path)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")


def _load_jsonl(path: Path) -> Corpus:
    docs = []
    doc_ids = []
    saw_id = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "tokens" not in obj:
                raise CorpusFormatError(f"{path}:{lineno}: missing 'tokens' field")
            tokens = obj["tokens"]
            if not isinstance(tokens, list) or any(
                not isinstance(t, int) or t < 0 for t in tokens
            ):
                raise CorpusFormatError(
                    f"{path}:{lineno}: tokens must be non-negative integers"
                )
            docs.append(np.asarray(tokens, dtype=np.uint32))
            if "id" in obj:
                saw_id = True
                doc_ids.append(str(obj["id"]))
            else:
                doc_ids.append(str(lineno - 1))
    return Corpus(docs=tuple(docs), doc_ids=tuple(doc_ids) if saw_id else None)


def _save_jsonl(corpus: Corpus, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, doc in enumerate(corpus.docs):
            obj = {"tokens": [int(t) for t in doc]}
            if corpus.doc_ids is not None:
                obj = {"id": corpus.doc_ids[i], **obj}
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def _load_binary(path: Path) -> Corpus:
    with open(path, "rb") as fh:
        header = fh.read(4 + 2 + 4 + 8)
        if len(header) == 0:
            return Corpus(docs=())
        if len(header) < 18 or header[:4] != BINARY_MAGIC:
            raise CorpusFormatError(f"{path}: bad magic or truncated header")
        version, vocab_size, doc_count = struct.unpack("<HIQ", header[4:])
        if version != BINARY_VERSION:
            raise CorpusFormatError(f"{path}: unsupported version {version}")
        docs = []
        for i in range(doc_count):
            raw = fh.read(8)
            if len(raw) < 8:
                raise CorpusFormatError(f"{path}: truncated doc header ({i})")
            (length,) = struct.unpack("<Q", raw)
            data = fh.read(4 * length)
            if len(data) < 4 * length:
                raise CorpusFormatError(f"{path}: truncated doc body ({i})")
            docs.append(np.frombuffer(data, dtype="<u4").astype(np.uint32))
        if fh.read(1):
            raise CorpusFormatError(f"{path}: trailing bytes after last document")
    return Corpus(docs=tuple(docs), vocab_size=vocab_size or None)


def _save_binary(corpus: Corpus, path: Path) -> None:
    vocab = corpus.vocab_size or 0
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<HIQ", BINARY_VERSION, vocab, len(corpus.docs)))
        for doc in corpus.docs:
            fh.write(struct.pack("<Q", len(doc)))
            fh.write(np.asarray(doc, dtype="<u4").tobytes())


def iter_windows(
    corpus: Corpus, length: int, step: int = 1
) -> Iterator[tuple[WindowRef, np.ndarray]]:
    """Yield every within-document window of exactly `length` tokens.

    Offsets advance by `step` from 0; documents shorter than `length`
    yield nothing.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if step < 1:
        raise ValueError("step must be >= 1")
    for doc_index, doc in enumerate(corpus.docs):
        last = len(doc) - length
        for offset in range(0, last + 1, step):
            yield WindowRef(doc_index, offset, length), doc[offset : offset + length]


def unique_token_count(seq: TokenSeq) -> int:
    """Number of distinct token values in the sequence."""
    if isinstance(seq, np.ndarray):
        return int(len(np.unique(seq)))
    return len(set(seq))
