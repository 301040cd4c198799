"""Enumeration caps shared by the exact (brute-force) routines."""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import ValidationError

ENV_CAPS = "HYPOTEST_CAPS"


@dataclass
class Caps:
    type_class: int = 10**7
    transcript: int = 10**6


CAPS = Caps()


def parse_caps(text: str) -> Caps:
    """Parse ``"typeclass:transcript"`` (either side may be empty)."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ValidationError(f"caps must look like 'typeclass:transcript', got {text!r}")
    defaults = Caps()
    try:
        tc = int(float(parts[0])) if parts[0] else defaults.type_class
        tr = int(float(parts[1])) if parts[1] else defaults.transcript
    except ValueError as exc:
        raise ValidationError(f"bad caps value {text!r}") from exc
    if tc < 1 or tr < 1:
        raise ValidationError("caps must be positive")
    return Caps(tc, tr)


def caps_from_env() -> Caps:
    text = os.environ.get(ENV_CAPS)
    return parse_caps(text) if text else Caps()


def type_class_cap(cap: int | None) -> int:
    return CAPS.type_class if cap is None else cap


def transcript_cap(cap: int | None) -> int:
    return CAPS.transcript if cap is None else cap
