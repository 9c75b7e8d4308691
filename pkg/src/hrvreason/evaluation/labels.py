"""Ground-truth label construction and affective-space coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import OutOfRange

STATES = ("HVHA", "HVLA", "LVHA", "LVLA")

# Circumplex quadrant coordinates: (valence, arousal), High = +1, Low = -1.
AFFECT_COORDS = {
    "HVHA": (1, 1),
    "HVLA": (1, -1),
    "LVHA": (-1, 1),
    "LVLA": (-1, -1),
}

MAX_WAD = math.sqrt(8.0)


@dataclass(frozen=True)
class GtLabel:
    valence_raw: int
    arousal_raw: int
    label: str

    @property
    def neutral(self) -> bool:
        return self.label == "neutral"


def construct_label(valence: int, arousal: int) -> GtLabel:
    """Median-split discretization; a rating of 3 on either axis is neutral."""
    for name, v in (("valence", valence), ("arousal", arousal)):
        if not isinstance(v, int) or not 1 <= v <= 5:
            raise OutOfRange(f"{name} rating must be an integer in 1..5, got {v!r}")
    if valence == 3 or arousal == 3:
        label = "neutral"
    else:
        label = f"{'H' if valence > 3 else 'L'}V{'H' if arousal > 3 else 'L'}A"
    return GtLabel(valence_raw=valence, arousal_raw=arousal, label=label)


def wad_distance(label_a: str, label_b: str) -> float:
    """Euclidean distance between two quadrants in the circumplex plane."""
    va, aa = AFFECT_COORDS[label_a]
    vb, ab = AFFECT_COORDS[label_b]
    return math.sqrt((va - vb) ** 2 + (aa - ab) ** 2)
