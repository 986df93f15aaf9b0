"""Verdicts, search budgets and the serializable certificate report."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Any

from .errors import InputError


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def worst_verdict(verdicts) -> Verdict:
    """fail dominates inconclusive dominates pass."""
    vs = list(verdicts)
    if Verdict.FAIL in vs:
        return Verdict.FAIL
    if Verdict.INCONCLUSIVE in vs:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS


def _default_eps_grid() -> tuple[float, ...]:
    return tuple(10.0 ** -k for k in range(7))


def _default_delta_candidates() -> tuple[float, ...]:
    return tuple(2.0 ** -k for k in range(21))


@dataclass(frozen=True)
class SearchBudget:
    """Finite search budget shared by every checker.

    eps_grid: levels at which universally quantified conditions are probed.
    delta_candidates: strictly decreasing candidates for existential deltas.
    nu_horizon: maximum shift searched for existential indices.
    index_horizon: how many leading indices (or index pairs) are examined.
    pair_samples: sampled point pairs for mapping-level checks.
    slack: numeric tolerance for strict inequalities.
    """

    eps_grid: tuple[float, ...] = field(default_factory=_default_eps_grid)
    delta_candidates: tuple[float, ...] = field(default_factory=_default_delta_candidates)
    nu_horizon: int = 64
    index_horizon: int = 256
    pair_samples: int = 200
    slack: float = 1e-9

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps_grid", tuple(float(e) for e in self.eps_grid))
        object.__setattr__(self, "delta_candidates", tuple(float(d) for d in self.delta_candidates))
        if not self.eps_grid or any(e <= 0 for e in self.eps_grid):
            raise InputError("eps_grid must be non-empty and positive")
        if not self.delta_candidates or any(d <= 0 for d in self.delta_candidates):
            raise InputError("delta_candidates must be non-empty and positive")
        if any(b >= a for a, b in zip(self.delta_candidates, self.delta_candidates[1:])):
            raise InputError("delta_candidates must be strictly decreasing")
        if self.nu_horizon < 1 or self.index_horizon < 1 or self.pair_samples < 1:
            raise InputError("horizons and sample counts must be positive")
        if self.slack <= 0:
            raise InputError("slack must be positive")

    def scaled(self, factor: float) -> "SearchBudget":
        """Scale the discrete budget knobs by ``factor`` (grids unchanged)."""
        if factor <= 0:
            raise InputError("budget scale factor must be positive")
        return replace(
            self,
            nu_horizon=max(1, round(self.nu_horizon * factor)),
            index_horizon=max(1, round(self.index_horizon * factor)),
            pair_samples=max(1, round(self.pair_samples * factor)),
        )

    def to_json(self) -> dict:
        return {
            "eps_grid": list(self.eps_grid),
            "delta_candidates": list(self.delta_candidates),
            "nu_horizon": self.nu_horizon,
            "index_horizon": self.index_horizon,
            "pair_samples": self.pair_samples,
            "slack": self.slack,
        }


def sanitize(value: Any) -> Any:
    """Coerce numpy scalars / sequences into plain JSON-friendly values."""
    import numpy as np

    if isinstance(value, (bool,)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, str) or value is None:
        return value
    if isinstance(value, (list, tuple, np.ndarray)):
        return [sanitize(v) for v in value]
    if isinstance(value, dict):
        return {str(k): sanitize(v) for k, v in value.items()}
    return str(value)


def witness(**fields: Any) -> dict:
    """Build a witness record with JSON-safe values."""
    return {k: sanitize(v) for k, v in fields.items()}


@dataclass
class CertificateReport:
    """Verdict for one condition, with the evidence that produced it.

    A fail verdict always carries at least one witness; a pass verdict for
    an existentially quantified condition carries the witnessing delta/nu.
    """

    condition_id: str
    verdict: Verdict
    witnesses: list[dict] = field(default_factory=list)
    budget: SearchBudget | None = None
    resolution_note: str = ""

    def __post_init__(self) -> None:
        if self.verdict is Verdict.FAIL and not self.witnesses:
            raise InputError(f"{self.condition_id}: fail verdict requires at least one witness")

    def to_json(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "verdict": self.verdict.value,
            "witnesses": sanitize(self.witnesses),
            "budget": self.budget.to_json() if self.budget is not None else None,
            "resolution_note": self.resolution_note,
        }


def reports_to_json_text(reports: list[CertificateReport]) -> str:
    """Deterministic serialization used by the file writers and tests."""
    return json.dumps([r.to_json() for r in reports], sort_keys=True, indent=2)
