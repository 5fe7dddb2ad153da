"""Canonical pixel glyphs for the shipped classification tasks.

The 5x4 digit set and the 5x5 letter sets are repository assets; the digit
"2" is pinned by the encoding worked example (column reads [1,0,1,1,1],
[1,0,1,0,1], [1,0,1,0,1], [1,1,1,0,1]) and must never change.
"""
from __future__ import annotations

from .encoding import PixelPattern
from .errors import ConfigError

DIGITS = {
    "1": PixelPattern.from_strings([
        "0010",
        "0110",
        "0010",
        "0010",
        "0111",
    ], label="1"),
    "2": PixelPattern.from_strings([
        "1111",
        "0001",
        "1111",
        "1000",
        "1111",
    ], label="2"),
    "3": PixelPattern.from_strings([
        "1111",
        "0001",
        "0111",
        "0001",
        "1111",
    ], label="3"),
    "4": PixelPattern.from_strings([
        "1001",
        "1001",
        "1111",
        "0001",
        "0001",
    ], label="4"),
}

LETTERS = {
    "X": PixelPattern.from_strings([
        "10001",
        "01010",
        "00100",
        "01010",
        "10001",
    ], label="X"),
    # rounded D: the indented right side keeps U's columns from nesting
    # almost entirely inside D's (which pinches the trainable margin)
    "D": PixelPattern.from_strings([
        "11100",
        "10010",
        "10001",
        "10010",
        "11100",
    ], label="D"),
    "U": PixelPattern.from_strings([
        "10001",
        "10001",
        "10001",
        "10001",
        "01110",
    ], label="U"),
    "N": PixelPattern.from_strings([
        "10001",
        "11001",
        "10101",
        "10011",
        "10001",
    ], label="N"),
    # serif J: the top bar and center stem keep its per-column spike sets
    # from nesting inside U's (nested sets are inseparable after the
    # non-negative optical clamp)
    "J": PixelPattern.from_strings([
        "11111",
        "00100",
        "00100",
        "10100",
        "01100",
    ], label="J"),
}

TASKS = {
    "digits": ("1", "2", "3", "4"),
    "xdu": ("X", "D", "U"),
    "nju": ("N", "J", "U"),
}


def task_patterns(task: str) -> list[PixelPattern]:
    """Ordered pattern list for a named task; order defines target windows."""
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {sorted(TASKS)}")
    pool = DIGITS if task == "digits" else LETTERS
    return [pool[label] for label in TASKS[task]]
