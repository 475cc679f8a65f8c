from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Side(enum.Enum):
    """Alternative hypothesis for a point-null test at zero."""

    TWO_SIDED = "two_sided"
    POSITIVE_ONLY = "positive_only"


class Support(enum.Enum):
    FULL = "full"
    NON_NEGATIVE = "non_negative"


@dataclass(frozen=True)
class GaussianEstimate:
    mean: float
    sd: float = 0.0

    def __post_init__(self):
        if not self.sd >= 0:
            raise ValueError("sd must be >= 0")

    @property
    def rel_error(self) -> float:
        return self.sd / abs(self.mean) if self.mean else math.inf

    @classmethod
    def parse(cls, text: str) -> GaussianEstimate:
        """Parse ``"mean,sd"`` or ``"mean"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (1, 2):
            raise ValueError(f"expected 'mean,sd', got {text!r}")
        return cls(float(parts[0]), float(parts[1]) if len(parts) == 2 else 0.0)

    def as_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "sd": self.sd}
