"""Word ordinals used in hypothesis ids (H_one, H_final_twenty_one)."""

from __future__ import annotations

import re
from typing import Dict

from ..errors import OutputParseError

_UNITS = ["", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"]
_TEENS = ["ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
          "eighteen", "nineteen"]
_TENS = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"]

MAX_WORD_ORDINAL = 99

_ID_PATTERN = re.compile(r"^H_(?:final_)?([a-z_]+|\d+)$")


def ordinal_word(n: int) -> str:
    """1 -> "one", 21 -> "twenty_one"; numerals beyond ninety_nine."""
    if n < 1:
        raise ValueError(f"ordinal must be positive, got {n}")
    if n > MAX_WORD_ORDINAL:
        return str(n)
    if n < 10:
        return _UNITS[n]
    if n < 20:
        return _TEENS[n - 10]
    tens, units = divmod(n, 10)
    return _TENS[tens] if units == 0 else f"{_TENS[tens]}_{_UNITS[units]}"


_WORD_VALUES: Dict[str, int] = {ordinal_word(n): n for n in range(1, MAX_WORD_ORDINAL + 1)}


def word_index(hypothesis_id: str) -> int:
    """Integer value of the ordinal in an H_[final_]<ordinal> id."""
    match = _ID_PATTERN.match(hypothesis_id.strip())
    if not match:
        raise OutputParseError(f"Unrecognized hypothesis id '{hypothesis_id}'")
    ordinal = match.group(1)
    if ordinal.isdigit():
        value = int(ordinal)
        if value < 1:
            raise OutputParseError(f"Unrecognized ordinal in '{hypothesis_id}'")
        return value
    if ordinal not in _WORD_VALUES:
        raise OutputParseError(f"Unrecognized ordinal in '{hypothesis_id}'")
    return _WORD_VALUES[ordinal]


def final_id(n: int) -> str:
    return f"H_final_{ordinal_word(n)}"
