"""Truncation windows for desk-scale exact computations.

Algebras here are usually infinite-dimensional over the rationals, so every
linear-algebra question is asked inside a window: weight at most `weight`,
total exponent degree at most `poly_degree`, displayed homological degree
inside [hom_min, hom_max]. Reports always record the window used; nothing is
ever computed through an unstated truncation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_COMPLETION_BUDGET = 10_000
DEFAULT_REWRITE_BUDGET = 10_000


def budget(default: int = DEFAULT_COMPLETION_BUDGET) -> int:
    """Step budget, overridable through the FOLWERK_BUDGET environment knob."""
    raw = os.environ.get("FOLWERK_BUDGET", "").strip()
    if raw:
        try:
            val = int(raw)
            if val > 0:
                return val
        except ValueError:
            pass
    return default


@dataclass(frozen=True)
class Window:
    weight: int = 3
    poly_degree: int = 4
    hom_min: int = -4
    hom_max: int = 0

    def admits(self, weight: int, degree: int, poly_degree: int) -> bool:
        return (
            weight <= self.weight
            and poly_degree <= self.poly_degree
            and self.hom_min <= degree <= self.hom_max
        )

    def as_dict(self) -> dict:
        return {
            "weight": self.weight,
            "poly_degree": self.poly_degree,
            "hom_min": self.hom_min,
            "hom_max": self.hom_max,
        }


DEFAULT_WINDOW = Window()
