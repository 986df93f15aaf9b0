"""Comparison gauges on [0, inf) and families of them.

A Gauge wraps a scalar function together with the regularity profile its
author claims for it; verify_gauge_regularity tests each claimed entry
numerically.  Families (explicit lists or the iterates of a base gauge)
feed the tail conditions used by the sequence certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import ConfigurationError, InputError
from .expressions import Expression, compile_expression
from .reports import CertificateReport, Verdict, witness, worst_verdict

PROFILE_NAMES = frozenset(
    {
        "nondecreasing",
        "right_continuous",
        "continuous",
        "positive_on_positive",
        "zero_at_zero",
        "strictly_below_identity",
        "upper_semicontinuous",
        "right_upper_semicontinuous",
    }
)

DEFAULT_T_MAX = 1e3


@dataclass(frozen=True)
class Gauge:
    """A scalar gauge with a declared regularity profile.

    Evaluation outside [0, t_max] is an input error: gauges are only ever
    probed inside their declared working range.
    """

    name: str
    fn: Expression | Callable[[float], float]
    profile: frozenset = frozenset()
    t_max: float = DEFAULT_T_MAX

    def __post_init__(self) -> None:
        unknown = set(self.profile) - PROFILE_NAMES
        if unknown:
            raise ConfigurationError(f"unknown gauge profile entries {sorted(unknown)}")
        if self.t_max <= 0:
            raise ConfigurationError("gauge t_max must be positive")
        object.__setattr__(self, "profile", frozenset(self.profile))

    def _check_range(self, t: float) -> None:
        if t < 0 or t > self.t_max:
            raise InputError(
                f"gauge {self.name!r} evaluated at t={t} outside its working range "
                f"[0, {self.t_max}]"
            )

    def __call__(self, t: float) -> float:
        t = float(t)
        self._check_range(t)
        if isinstance(self.fn, Expression):
            return float(self.fn(t=t))
        return float(self.fn(t))

    def apply_array(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr, dtype=float)
        if arr.size:
            lo, hi = float(np.min(arr)), float(np.max(arr))
            self._check_range(lo)
            self._check_range(hi)
        with np.errstate(all="ignore"):
            if isinstance(self.fn, Expression):
                out = self.fn(t=arr)
            else:
                out = self.fn(arr)
        out = np.asarray(out, dtype=float)
        if out.shape != arr.shape:
            out = np.vectorize(lambda t: float(self.fn(t)))(arr)
        return out


_FULLY_REGULAR = frozenset(
    {
        "nondecreasing",
        "right_continuous",
        "continuous",
        "positive_on_positive",
        "zero_at_zero",
        "upper_semicontinuous",
        "right_upper_semicontinuous",
    }
)

_BUILTINS: dict[str, tuple[Callable[[Any], Any], frozenset]] = {
    "half": (lambda t: 0.5 * t, _FULLY_REGULAR | {"strictly_below_identity"}),
    "mk": (lambda t: t / (1.0 + t), _FULLY_REGULAR | {"strictly_below_identity"}),
    "id": (lambda t: t, _FULLY_REGULAR),
    "step01": (
        lambda t: np.where(np.asarray(t, dtype=float) < 1.0, 0.0, 1.0),
        frozenset(
            {
                "nondecreasing",
                "right_continuous",
                "zero_at_zero",
                "upper_semicontinuous",
                "right_upper_semicontinuous",
            }
        ),
    ),
}


def builtin_gauge(name: str, t_max: float = DEFAULT_T_MAX, profile: frozenset | None = None) -> Gauge:
    if name not in _BUILTINS:
        raise ConfigurationError(f"unknown builtin gauge {name!r}; have {sorted(_BUILTINS)}")
    fn, default_profile = _BUILTINS[name]
    return Gauge(name=name, fn=fn, profile=profile if profile is not None else default_profile,
                 t_max=t_max)


def expression_gauge(
    source: str,
    name: str | None = None,
    profile: frozenset = frozenset(),
    t_max: float = DEFAULT_T_MAX,
) -> Gauge:
    expr = compile_expression(source, variables=("t",))
    return Gauge(name=name or source, fn=expr, profile=profile, t_max=t_max)


@dataclass(frozen=True)
class GaugeFamily:
    """Indexed family of gauges: explicit members or iterates of a base.

    zero_fixed declares that every member sends 0 to 0.
    """

    kind: str  # "iterated" | "explicit"
    zero_fixed: bool
    base: Gauge | None = None
    members: tuple[Gauge, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "iterated":
            if self.base is None:
                raise ConfigurationError("iterated family needs a base gauge")
        elif self.kind == "explicit":
            if not self.members:
                raise ConfigurationError("explicit family needs at least one member")
        else:
            raise ConfigurationError(f"unknown family kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "iterated":
            return f"iterated({self.base.name})"
        return f"explicit[{len(self.members)}]"


def iterated_family(base: Gauge, zero_fixed: bool | None = None) -> GaugeFamily:
    if zero_fixed is None:
        zero_fixed = base(0.0) == 0.0
    return GaugeFamily(kind="iterated", zero_fixed=zero_fixed, base=base)


def explicit_family(members: list[Gauge], zero_fixed: bool) -> GaugeFamily:
    return GaugeFamily(kind="explicit", zero_fixed=zero_fixed, members=tuple(members))


def iterate_gauge(family: GaugeFamily, n: int, t: float) -> float:
    """Member n evaluated at t.  Members are 1-indexed; member 1 of an
    iterated family is the base itself and member n costs exactly n base
    evaluations."""
    if n < 1:
        raise InputError("family members are indexed from 1")
    if family.kind == "iterated":
        v = float(t)
        for _ in range(n):
            v = family.base(v)
        return v
    if n > len(family.members):
        raise InputError(f"explicit family has {len(family.members)} members, asked for {n}")
    return family.members[n - 1](t)


def family_member_array(family: GaugeFamily, n: int, arr: np.ndarray) -> np.ndarray:
    if n < 1:
        raise InputError("family members are indexed from 1")
    if family.kind == "iterated":
        out = np.asarray(arr, dtype=float)
        for _ in range(n):
            out = family.base.apply_array(out)
        return out
    if n > len(family.members):
        raise InputError(f"explicit family has {len(family.members)} members, asked for {n}")
    return family.members[n - 1].apply_array(arr)


# ---------------------------------------------------------------------------
# Regularity verification


def regularity_grid(t_max: float = DEFAULT_T_MAX) -> tuple[float, ...]:
    """Default verification grid: log-spaced down to 1e-6 plus a linear
    band through the unit scale (contains 0 and 1 exactly)."""
    log_part = np.logspace(-6, math.log10(t_max), 40)
    lin_part = np.linspace(0.0, min(10.0, t_max), 41)
    grid = np.unique(np.concatenate([log_part, lin_part, [0.0]]))
    return tuple(float(t) for t in grid if 0.0 <= t <= t_max)


def _limit_deviation(
    g: Gauge, t: float, h: float, sign: int, refine: int, eta: float
) -> tuple[bool, float]:
    """Probe g(t + sign*h*2^-k) for k=1..refine.

    Returns (converges_to_g(t), final_signed_deviation).  Convergence holds
    when the deviation either falls below the tolerance or keeps shrinking
    geometrically, which distinguishes a genuine one-sided limit from a jump.
    """
    base_val = g(t)
    devs = []
    for k in range(1, refine + 1):
        s = t + sign * h * 2.0 ** -k
        if s < 0 or s > g.t_max:
            devs.append(0.0)
            continue
        devs.append(g(s) - base_val)
    final = devs[-1]
    tol = max(eta, eta * abs(base_val))
    if abs(final) <= tol:
        return True, final
    mid = devs[len(devs) // 2]
    if abs(final) <= 0.25 * abs(mid):
        return True, final
    return False, final


def verify_gauge_regularity(
    g: Gauge,
    grid: tuple[float, ...] | None = None,
    eta: float = 1e-9,
    refine: int = 20,
) -> list[CertificateReport]:
    """One report per profile entry (ids REG-<entry>).

    Raises:
        InputError: empty or non-increasing grid.
    """
    if grid is None:
        grid = regularity_grid(g.t_max)
    grid = tuple(float(t) for t in grid)
    if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError("verification grid must be strictly increasing with >= 3 points")
    if grid[0] < 0 or grid[-1] > g.t_max:
        raise InputError("verification grid must lie inside the gauge working range")

    vals = [g(t) for t in grid]
    note = (
        f"grid of {len(grid)} points in [{grid[0]}, {grid[-1]}], one-sided sampling "
        f"resolution h*2^-{refine}, slack eta={eta}"
    )
    bad_values = [
        witness(t=t, value=v) for t, v in zip(grid, vals) if not math.isfinite(v) or v < 0
    ]
    reports: list[CertificateReport] = []

    def spacing(i: int, side: str) -> float:
        if side == "right":
            return grid[i + 1] - grid[i] if i + 1 < len(grid) else grid[i] - grid[i - 1]
        return grid[i] - grid[i - 1] if i > 0 else grid[i + 1] - grid[i]

    for entry in sorted(g.profile):
        cid = f"REG-{entry}"
        if bad_values:
            reports.append(
                CertificateReport(cid, Verdict.FAIL, bad_values[:4],
                                  resolution_note=note + "; gauge produced invalid values")
            )
            continue
        bad: list[dict] = []
        if entry == "nondecreasing":
            for i in range(len(grid) - 1):
                if vals[i + 1] < vals[i] - eta:
                    bad.append(witness(t_lo=grid[i], t_hi=grid[i + 1],
                                       drop=vals[i] - vals[i + 1]))
        elif entry == "right_continuous":
            for i, t in enumerate(grid):
                if t + spacing(i, "right") * 0.5 > g.t_max:
                    continue
                ok, dev = _limit_deviation(g, t, spacing(i, "right"), +1, refine, eta)
                if not ok:
                    bad.append(witness(t=t, right_deviation=dev,
                                       resolution=spacing(i, "right") * 2.0 ** -refine))
        elif entry == "continuous":
            for i, t in enumerate(grid):
                if t + spacing(i, "right") * 0.5 <= g.t_max:
                    ok, dev = _limit_deviation(g, t, spacing(i, "right"), +1, refine, eta)
                    if not ok:
                        bad.append(witness(t=t, side="right", deviation=dev))
                        continue
                if t > 0:
                    ok, dev = _limit_deviation(g, t, spacing(i, "left"), -1, refine, eta)
                    if not ok:
                        bad.append(witness(t=t, side="left", deviation=dev))
        elif entry == "positive_on_positive":
            for t, v in zip(grid, vals):
                if t > 0 and v <= 0.0:
                    bad.append(witness(t=t, value=v))
        elif entry == "zero_at_zero":
            v0 = g(0.0)
            if abs(v0) > eta:
                bad.append(witness(t=0.0, value=v0))
        elif entry == "strictly_below_identity":
            # strict claim: only a value at or above the identity refutes it;
            # a sub-eta positive margin still counts as strictly below
            for t, v in zip(grid, vals):
                if t > 0.0 and v >= t:
                    bad.append(witness(t=t, value=v, margin=t - v))
        elif entry in ("upper_semicontinuous", "right_upper_semicontinuous"):
            sides = [+1] if entry == "right_upper_semicontinuous" else [+1, -1]
            for i, t in enumerate(grid):
                for sign in sides:
                    if sign > 0 and t + spacing(i, "right") * 0.5 > g.t_max:
                        continue
                    if sign < 0 and t <= 0:
                        continue
                    h = spacing(i, "right" if sign > 0 else "left")
                    ok, dev = _limit_deviation(g, t, h, sign, refine, eta)
                    if not ok and dev > eta:
                        bad.append(witness(t=t, side="right" if sign > 0 else "left",
                                           approach_excess=dev))
        reports.append(
            CertificateReport(cid, Verdict.FAIL if bad else Verdict.PASS, bad[:8],
                              resolution_note=note)
        )
    return reports


def require_profile(g: Gauge, entries: frozenset, eta: float = 1e-9) -> None:
    """Refuse (loudly) unless the gauge declares *and* numerically passes
    every requested profile entry.  Used as a checker precondition."""
    from .errors import RefusalError

    missing = set(entries) - set(g.profile)
    if missing:
        raise RefusalError(
            f"gauge {g.name!r} does not declare required profile entries {sorted(missing)}"
        )
    probe = Gauge(name=g.name, fn=g.fn, profile=frozenset(entries), t_max=g.t_max)
    for rep in verify_gauge_regularity(probe, eta=eta):
        if rep.verdict is Verdict.FAIL:
            raise RefusalError(
                f"gauge {g.name!r} fails required regularity {rep.condition_id}: "
                f"witness {rep.witnesses[0]}"
            )


# ---------------------------------------------------------------------------
# Family tail conditions


def _family_values(family: GaugeFamily, t: float, horizon: int) -> list[float]:
    if family.kind == "iterated":
        out = []
        v = float(t)
        for _ in range(horizon):
            v = family.base(v)
            out.append(v)
        return out
    horizon = min(horizon, len(family.members))
    return [iterate_gauge(family, n, t) for n in range(1, horizon + 1)]


def check_family_C6(
    family: GaugeFamily,
    eps_grid: tuple[float, ...],
    n_horizon: int = 64,
    eta: float = 1e-9,
) -> CertificateReport:
    """Tail-limsup of member_n(eps) must sit strictly below eps.

    The limsup is estimated as the max over the last quarter of the horizon.
    A pass needs that estimate below eps - eta together with a stabilized
    (variation <= eta) or nonincreasing-within-eta tail; a stabilized tail at
    or above eps - eta fails; anything else is inconclusive.
    """
    if n_horizon < 4:
        raise InputError("C6 horizon must be at least 4")
    per_eps: list[Verdict] = []
    wits: list[dict] = []
    for eps in eps_grid:
        values = _family_values(family, eps, n_horizon)
        q = max(1, len(values) // 4)
        tail = values[-q:]
        est = max(tail)
        stabilized = (max(tail) - min(tail)) <= eta
        monotone = all(b <= a + eta for a, b in zip(tail, tail[1:]))
        if est < eps - eta and (stabilized or monotone):
            per_eps.append(Verdict.PASS)
            wits.append(witness(eps=eps, limsup_estimate=est,
                                tail="stabilized" if stabilized else "nonincreasing"))
        elif est >= eps - eta and stabilized:
            per_eps.append(Verdict.FAIL)
            wits.append(witness(eps=eps, limsup_estimate=est, tail="stabilized"))
        else:
            per_eps.append(Verdict.INCONCLUSIVE)
            wits.append(witness(eps=eps, limsup_estimate=est, tail="unstable"))
    return CertificateReport(
        "C6",
        worst_verdict(per_eps),
        wits,
        resolution_note=(
            f"tail over last quarter of horizon {n_horizon}; unstabilized, "
            f"non-monotone tails are never a pass"
        ),
    )


def check_family_C7(
    family: GaugeFamily,
    eps: float,
    delta_candidates: tuple[float, ...] | None = None,
    t_samples: int = 17,
    nu_horizon: int = 64,
    eta: float = 1e-9,
) -> CertificateReport:
    """Search (delta, per-t nu) so every t in [eps, eps+delta] is pulled
    strictly below eps by some member with index <= nu_horizon.

    A defeat for every candidate delta is reported as inconclusive with the
    defeating t recorded: a finite search cannot refute the existential.
    """
    if eps <= 0:
        raise InputError("C7 needs eps > 0")
    if delta_candidates is None:
        delta_candidates = tuple(2.0 ** -k for k in range(21))
    defeats: list[dict] = []
    for delta in delta_candidates:
        ts = np.linspace(eps, eps + delta, t_samples)
        max_nu = 0
        defeated_t = None
        for t in ts:
            values = _family_values(family, float(t), nu_horizon)
            found = None
            for nu, v in enumerate(values, start=1):
                if v < eps - eta:
                    found = nu
                    break
            if found is None:
                defeated_t = float(t)
                break
            max_nu = max(max_nu, found)
        if defeated_t is None:
            return CertificateReport(
                "C7",
                Verdict.PASS,
                [witness(eps=eps, delta=delta, max_nu=max_nu)],
                resolution_note=f"{t_samples} samples per band, nu horizon {nu_horizon}",
            )
        defeats.append(witness(eps=eps, delta=delta, defeating_t=defeated_t))
    return CertificateReport(
        "C7",
        Verdict.INCONCLUSIVE,
        defeats[:8],
        resolution_note=(
            "fail-evidence at this budget: every candidate delta has a sampled t "
            "no member pulls below eps; a finite search cannot refute the "
            "existential delta"
        ),
    )


def check_family_C7_multi(
    family: GaugeFamily,
    eps_grid: tuple[float, ...],
    delta_candidates: tuple[float, ...] | None = None,
    t_samples: int = 17,
    nu_horizon: int = 64,
    eta: float = 1e-9,
) -> CertificateReport:
    """check_family_C7 across a grid of eps levels, merged into one report."""
    reports = [
        check_family_C7(family, eps, delta_candidates, t_samples, nu_horizon, eta)
        for eps in eps_grid
    ]
    wits: list[dict] = []
    for rep in reports:
        wits.extend(rep.witnesses[:2])
    return CertificateReport(
        "C7",
        worst_verdict(r.verdict for r in reports),
        wits,
        resolution_note=f"merged over eps grid {list(eps_grid)}",
    )
