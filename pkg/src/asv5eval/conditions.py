"""Condition metadata: codec bitrates per quality level and attack groups."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError

ATTACK_GROUPS = ("TTS", "VC", "adversarial")

# kbps at quality levels 1..5; mp3 levels are ranges.  "nb" = 8 kHz band.
CODEC_BITRATES_KBPS = {
    "opus": (6.00, 12.00, 18.00, 24.00, 30.00),
    "amr": (6.60, 8.85, 14.25, 18.25, 23.05),
    "speex": (5.75, 9.80, 16.80, 23.80, 34.20),
    "encodec": (1.50, 3.00, 6.00, 12.00, 24.00),
    "mp3": ((45, 85), (80, 120), (120, 150), (170, 210), (220, 260)),
    "m4a": (16.00, 32.00, 64.00, 96.00, 128.00),
    "opus_nb": (4.00, 8.00, 12.00, 16.00, 20.00),
    "amr_nb": (4.75, 6.70, 8.85, 10.20, 12.20),
    "speex_nb": (3.95, 5.95, 11.00, 18.20, 24.60),
}

# Only the attacks whose family is stated outright; A18 = A17 + Malafide,
# A27 = A26 + Malacopula, A30 = A18 + Malacopula.  Override with a JSON map
# covering every attack in the keys.
DEFAULT_ATTACK_GROUPS = {
    "A17": "TTS",
    "A18": "adversarial",
    "A19": "TTS",
    "A21": "TTS",
    "A26": "VC",
    "A27": "adversarial",
    "A28": "TTS",
    "A29": "TTS",
    "A30": "adversarial",
}


def bitrate(codec: str, quality: int):
    """Bitrate (kbps, or a (lo, hi) range for mp3) of a codec at level 1..5."""
    if not 1 <= quality <= 5:
        raise ValueError(f"quality must lie in 1..5, got {quality}")
    try:
        return CODEC_BITRATES_KBPS[codec][quality - 1]
    except KeyError:
        raise KeyError(f"no bitrate table for codec {codec!r}") from None


def validate_group_map(mapping: dict) -> dict:
    bad = {a: g for a, g in mapping.items() if g not in ATTACK_GROUPS}
    if bad:
        raise InputError(f"attack groups must be one of {ATTACK_GROUPS}, got {bad}")
    return dict(mapping)


def load_group_map(path) -> dict:
    """Read ``{"A17": "TTS", ...}`` from a JSON file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object mapping attack -> group")
    return validate_group_map(data)
