"""Parser and printer for the small pulse-program language.

Statements are separated by newlines or semicolons; ``#`` starts a comment.

    pulse <I|S|both> <angle_deg> <x|y|-x|-y|phase_deg>
    delay <seconds>
    grad <seconds>
    acquire <points> <dwell_seconds>

The angle accepts the literal ``magic`` for arccos(1/sqrt(3)).  ``acquire``
may appear at most once and must be the last statement.  Parse errors carry
a 1-based line and column.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Pulse",
    "Delay",
    "Gradient",
    "Acquire",
    "PulseSequence",
    "PulseProgramError",
    "parse_pulse_program",
]

_PHASE_LABELS = {"x": 0.0, "y": 90.0, "-x": 180.0, "-y": 270.0}
_LABEL_FOR_PHASE = {v: k for k, v in _PHASE_LABELS.items()}

MAGIC_ANGLE_DEG = float(np.degrees(np.arccos(1 / np.sqrt(3))))


class PulseProgramError(ValueError):
    """Syntax or semantic error with its location in the source text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class Pulse:
    target: str  # 'I', 'S' or 'both'
    angle_deg: float
    phase_deg: float

    def format(self) -> str:
        phase = _LABEL_FOR_PHASE.get(self.phase_deg, repr(self.phase_deg))
        return f"pulse {self.target} {self.angle_deg!r} {phase}"


@dataclass(frozen=True)
class Delay:
    duration: float

    def format(self) -> str:
        return f"delay {self.duration!r}"


@dataclass(frozen=True)
class Gradient:
    duration: float

    def format(self) -> str:
        return f"grad {self.duration!r}"


@dataclass(frozen=True)
class Acquire:
    points: int
    dwell: float

    def format(self) -> str:
        return f"acquire {self.points} {self.dwell!r}"


Event = Union[Pulse, Delay, Gradient, Acquire]


@dataclass(frozen=True)
class PulseSequence:
    events: tuple

    def format(self) -> str:
        """Canonical text form; parsing it reproduces this sequence exactly."""
        return "\n".join(e.format() for e in self.events) + ("\n" if self.events else "")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


def _tokenize(text: str):
    """Yield statements as lists of (token, line, column)."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        code = line.split("#", 1)[0]
        start = 0
        while True:
            cut = code.find(";", start)
            chunk = code[start:cut] if cut >= 0 else code[start:]
            tokens = [
                (m.group(0), lineno, start + m.start() + 1)
                for m in re.finditer(r"\S+", chunk)
            ]
            if tokens:
                yield tokens
            if cut < 0:
                break
            start = cut + 1


def _parse_float(token: str, line: int, col: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise PulseProgramError(f"{what} must be a number, got {token!r}", line, col) from None
    if not np.isfinite(value):
        raise PulseProgramError(f"{what} must be finite", line, col)
    return value


def _parse_statement(tokens) -> Event:
    (kw, line, col) = tokens[0]
    kind = kw.lower()
    args = tokens[1:]
    if kind == "pulse":
        if len(args) != 3:
            raise PulseProgramError(
                f"pulse takes a target, an angle and a phase, got {len(args)} argument(s)",
                line, col,
            )
        (t_tok, t_line, t_col), (a_tok, a_line, a_col), (p_tok, p_line, p_col) = args
        target = {"i": "I", "s": "S", "both": "both"}.get(t_tok.lower())
        if target is None:
            raise PulseProgramError(f"pulse target must be I, S or both, got {t_tok!r}", t_line, t_col)
        if a_tok.lower() == "magic":
            angle = MAGIC_ANGLE_DEG
        else:
            angle = _parse_float(a_tok, a_line, a_col, "pulse angle")
        if p_tok.lower() in _PHASE_LABELS:
            phase = _PHASE_LABELS[p_tok.lower()]
        else:
            phase = _parse_float(p_tok, p_line, p_col, "pulse phase")
        return Pulse(target, angle, phase)
    if kind in ("delay", "grad"):
        if len(args) != 1:
            raise PulseProgramError(f"{kind} takes one duration argument", line, col)
        (d_tok, d_line, d_col) = args[0]
        duration = _parse_float(d_tok, d_line, d_col, f"{kind} duration")
        if duration < 0:
            raise PulseProgramError(f"{kind} duration must be nonnegative", d_line, d_col)
        return Delay(duration) if kind == "delay" else Gradient(duration)
    if kind == "acquire":
        if len(args) != 2:
            raise PulseProgramError("acquire takes a point count and a dwell time", line, col)
        (n_tok, n_line, n_col), (d_tok, d_line, d_col) = args
        try:
            points = int(n_tok)
        except ValueError:
            raise PulseProgramError(f"acquire points must be an integer, got {n_tok!r}", n_line, n_col) from None
        if points < 2:
            raise PulseProgramError("acquire needs at least 2 points", n_line, n_col)
        dwell = _parse_float(d_tok, d_line, d_col, "acquire dwell")
        if dwell <= 0:
            raise PulseProgramError("acquire dwell must be positive", d_line, d_col)
        return Acquire(points, dwell)
    raise PulseProgramError(
        f"unknown statement {kw!r}; expected pulse, delay, grad or acquire", line, col
    )


def parse_pulse_program(text: str) -> PulseSequence:
    """Parse a pulse program into its event sequence (time order)."""
    events = []
    acquire_at = None
    for tokens in _tokenize(text):
        if acquire_at is not None:
            (_, line, col) = tokens[0]
            raise PulseProgramError("acquire must be the last statement", line, col)
        event = _parse_statement(tokens)
        if isinstance(event, Acquire):
            acquire_at = tokens[0][1:]
        events.append(event)
    return PulseSequence(tuple(events))
