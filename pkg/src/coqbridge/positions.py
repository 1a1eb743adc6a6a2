"""Text positions in LSP coordinates.

LSP positions count lines from 0 and columns in UTF-16 code units, not
Python string indices. Everything that slices document text by a
server-reported range must go through the converters here.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Position:
    line: int
    character: int  # UTF-16 code units from line start

    def as_dict(self) -> dict:
        return {"line": self.line, "character": self.character}

    @classmethod
    def from_dict(cls, d: dict) -> "Position":
        return cls(line=d["line"], character=d["character"])


@dataclass(frozen=True)
class Range:
    start: Position
    end: Position

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"range end {self.end} before start {self.start}")

    def as_dict(self) -> dict:
        return {"start": self.start.as_dict(), "end": self.end.as_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Range":
        return cls(Position.from_dict(d["start"]), Position.from_dict(d["end"]))


def utf16_width(text: str) -> int:
    """Number of UTF-16 code units needed for ``text``."""
    # Characters outside the BMP take a surrogate pair.
    return sum(2 if ord(c) > 0xFFFF else 1 for c in text)


def utf16_to_str_index(line: str, units: int) -> int:
    """String index in ``line`` for a column given in UTF-16 code units."""
    remaining = units
    for i, c in enumerate(line):
        if remaining <= 0:
            return i
        remaining -= 2 if ord(c) > 0xFFFF else 1
    if remaining > 0:
        raise ValueError(f"utf16 column {units} beyond end of line")
    return len(line)


def position_to_offset(text: str, pos: Position) -> int:
    """String offset of ``pos`` inside ``text``."""
    line_start = 0
    for _ in range(pos.line):
        nl = text.find("\n", line_start)
        if nl < 0:
            raise ValueError(f"line {pos.line} beyond end of text")
        line_start = nl + 1
    line_end = text.find("\n", line_start)
    if line_end < 0:
        line_end = len(text)
    return line_start + utf16_to_str_index(text[line_start:line_end], pos.character)


def offset_to_position(text: str, offset: int) -> Position:
    """Inverse of :func:`position_to_offset`."""
    if offset > len(text):
        raise ValueError(f"offset {offset} beyond end of text")
    line = text.count("\n", 0, offset)
    line_start = text.rfind("\n", 0, offset) + 1
    return Position(line, utf16_width(text[line_start:offset]))


def slice_range(text: str, rng: Range) -> str:
    return text[position_to_offset(text, rng.start):position_to_offset(text, rng.end)]
