from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

# exp() of anything above this overflows a double
_MAX_LOG = 709.0


@dataclass
class Estimate:
    """Result of one Psi(x, y) evaluation.

    ``log_value`` is always populated. ``value`` is None when exp(log_value)
    would overflow a double; exact counts keep ``value`` as a Python int.
    """

    log_value: float
    method: str
    value: Optional[float | int] = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_log(cls, log_value: float, method: str, **diagnostics: Any) -> "Estimate":
        value = math.exp(log_value) if log_value < _MAX_LOG else None
        return cls(log_value=float(log_value), method=method, value=value,
                   diagnostics=diagnostics)

    @property
    def overflowed(self) -> bool:
        return self.value is None

    def ratio_to(self, other: "Estimate") -> float:
        return math.exp(self.log_value - other.log_value)

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"value": self.value, "log_value": self.log_value,
                               "method": self.method}
        out.update(self.diagnostics)
        return out
