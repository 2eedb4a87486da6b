"""Deterministic sentence segmentation on terminator characters."""

from __future__ import annotations

TERMINATORS = ".!?"


def split_sentences(text: str) -> list[str]:
    """Split text into sentences, keeping each trailing terminator.

    A sentence ends at '.', '!' or '?'. Trailing text without a terminator
    forms a final sentence. Whitespace around sentences is stripped; empty
    pieces are dropped.
    """
    sentences: list[str] = []
    current: list[str] = []
    for ch in text:
        current.append(ch)
        if ch in TERMINATORS:
            piece = "".join(current).strip()
            if piece:
                sentences.append(piece)
            current = []
    tail = "".join(current).strip()
    if tail:
        sentences.append(tail)
    return sentences


def normalize_sentence(text: str) -> str:
    """Whitespace-collapsed form used as a lookup key for gold labels."""
    return " ".join(text.split())
