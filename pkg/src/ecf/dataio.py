"""Line-oriented numeric input: one value per line, '#' starts a comment."""

from __future__ import annotations

import math
import sys
from typing import IO

import numpy as np

from .errors import DataFormatError


def parse_values(stream: IO[str]) -> np.ndarray:
    """Read one float per line, skipping blanks and '#' comments.

    Raises :class:`DataFormatError` with a 1-based line number on the
    first malformed, non-finite, or extra token, and when no data remains.
    """
    out: list[float] = []
    for lineno, raw in enumerate(stream, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) != 1:
            raise DataFormatError(
                f"expected one value per line, found {len(tokens)}", line=lineno
            )
        try:
            value = float(tokens[0])
        except ValueError:
            raise DataFormatError(f"not a number: {tokens[0]!r}", line=lineno) from None
        if not math.isfinite(value):
            raise DataFormatError(f"non-finite value: {tokens[0]!r}", line=lineno)
        out.append(value)
    if not out:
        raise DataFormatError("no numeric data found")
    return np.array(out, dtype=float)


def read_values(source) -> np.ndarray:
    """Parse numbers from a path, '-' for stdin, or an open text stream."""
    if hasattr(source, "read"):
        return parse_values(source)
    if source == "-":
        return parse_values(sys.stdin)
    try:
        with open(source, "r", encoding="utf-8") as handle:
            return parse_values(handle)
    except OSError as exc:
        raise DataFormatError(f"cannot read {source!r}: {exc.strerror or exc}") from None
