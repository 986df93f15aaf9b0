"""Iteration-driven solvers and orbit diagnostics.

Covers the question the laboratory keeps asking in different guises: does an
orbit settle, and at what?  cauchy_diagnostic measures the exact sup-tail of a
stored orbit; certify_cauchy bundles it with the hypothesis checkers for one
of three declared routes; the solve_* functions extract fixed points, best
proximity points, and common fixed points with honest convergence flags; and
extract_noncauchy_witness builds the index triples that certify separation
when an orbit refuses to settle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .certificates import check_asf1, check_asf2, check_c5
from .errors import ConfigurationError, InputError
from .gauges import Gauge, GaugeFamily, iterate_gauge, require_profile, \
    verify_gauge_regularity
from .maps import NamedMap
from .reports import CertificateReport, SearchBudget, Verdict, sanitize, witness, \
    worst_verdict
from .spaces import CyclicSetting, Point, Premetric, eval_premetric, metric_premetric, \
    premetric_diagonal, premetric_matrix, verify_premetric_axioms
from .traces import ESCAPE_NORM, AlternatingSchedule, IterationTrace

CAUCHY_ROUTES = ("tau", "composed", "mixed")


@dataclass(frozen=True)
class SolveResult:
    point: Point
    residual: float
    iterations: int
    converged: bool

    def to_json_obj(self) -> dict:
        return {
            "point": [sanitize(c) for c in self.point.coords],
            "residual": sanitize(self.residual),
            "iterations": self.iterations,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# Cauchy diagnostics and certification


def _index_ladder(last: int) -> list[int]:
    ladder = {0, last}
    k = 1
    while k < last:
        ladder.add(k)
        k *= 2
    return sorted(ladder)


def cauchy_diagnostic(
    trace: IterationTrace,
    p: Premetric | None = None,
    tol: float = 1e-6,
    eta: float = 1e-9,
) -> CertificateReport:
    """Exact settling measure of a stored orbit (id CAUCHY).

    s(n) = max over stored m > n of p(x_n, x_m), evaluated on a logarithmic
    ladder of n.  Pass needs s nonincreasing within eta along the ladder and
    the last ladder value at or below tol.  A truncated (escaped) orbit can
    fail but never cleanly pass.

    Raises:
        InputError: fewer than 4 points.
    """
    if len(trace) < 4:
        raise InputError("the settling diagnostic needs at least 4 points")
    p = p if p is not None else trace.premetric
    coords = trace.coords_array()
    last = len(trace) - 2
    entries = []
    for n in _index_ladder(last):
        s_n = float(premetric_matrix(p, coords[n:n + 1], coords[n + 1:]).max())
        entries.append((n, s_n))
    wits = [witness(n=n, sup_tail=s) for n, s in entries]
    final_n, final = entries[-1]
    monotone = all(b[1] <= a[1] + eta for a, b in zip(entries, entries[1:]))
    verdict = Verdict.PASS
    if final > tol:
        verdict = Verdict.FAIL
        wits.append(witness(n=final_n, sup_tail=final, needed=tol))
    elif not monotone:
        verdict = Verdict.FAIL
        for a, b in zip(entries, entries[1:]):
            if b[1] > a[1] + eta:
                wits.append(witness(n=a[0], sup_tail=a[1], later_n=b[0],
                                    later_sup_tail=b[1]))
                break
    note = (
        f"s(n) is the exact max gap from x_n to any stored later point, sampled on "
        f"a logarithmic index ladder; pass needs s nonincreasing within {eta} and a "
        f"final value at most {tol}"
    )
    if verdict is Verdict.PASS and trace.status != "completed":
        verdict = Verdict.INCONCLUSIVE
        note += f"; orbit status is {trace.status}, so the stored prefix may mislead"
    return CertificateReport("CAUCHY", verdict, wits, None, note)


@dataclass(frozen=True)
class CauchyCertificate:
    route: str
    hypotheses: tuple[CertificateReport, ...]
    diagnostic: CertificateReport
    overall: Verdict

    def to_json_obj(self) -> dict:
        return {
            "route": self.route,
            "hypotheses": [r.to_json() for r in self.hypotheses],
            "diagnostic": self.diagnostic.to_json(),
            "overall": self.overall.value,
        }


def _trace_triples(trace: IterationTrace) -> list[tuple[Point, Point, Point]]:
    idx = sorted(set(np.linspace(0, len(trace) - 1, 10, dtype=int).tolist()))
    pts = [trace.points[i] for i in idx]
    return list(itertools.combinations(pts, 3))[:200]


def _decay_report(cid: str, gaps: np.ndarray, budget: SearchBudget, label: str) -> CertificateReport:
    q = max(1, gaps.shape[0] // 4)
    tail = float(gaps[-q:].max())
    target = min(budget.eps_grid) + budget.slack
    note = (
        f"tail of the {label} consecutive gaps over the last quarter must reach "
        f"min(eps_grid)={min(budget.eps_grid)} within the slack"
    )
    if tail <= target:
        return CertificateReport(cid, Verdict.PASS, [witness(tail=tail)], budget, note)
    return CertificateReport(cid, Verdict.FAIL, [witness(tail=tail, needed=target)],
                             budget, note)


def certify_cauchy(
    trace: IterationTrace,
    route: str,
    budget: SearchBudget | None = None,
    tol: float = 1e-6,
) -> CauchyCertificate:
    """Hypothesis checks for the declared settling route, then the diagnostic.

    Routes:
      tau       -- the trace's premetric claims the sup-tail property; runs C4
                   on the trace and C1-C3 against its forward shift.
      composed  -- the premetric is a gauge over an inner gap; additionally
                   runs C5, corroborates the gauge's declared regularity, and
                   re-runs the one-shift band condition under the inner gap
                   (reported as C4-INNER, kept separate on purpose).
      mixed     -- the premetric claims the two-sided triangle inequality with
                   a companion; checks those axioms on trace triples plus the
                   decay of both gap sequences.

    Raises:
        ConfigurationError: the declared route does not match what the
            trace's premetric provides.
    """
    budget = budget or SearchBudget()
    p = trace.premetric
    if route not in CAUCHY_ROUTES:
        raise ConfigurationError(f"unknown route {route!r}; have {CAUCHY_ROUTES}")
    hyps: list[CertificateReport] = []
    if route == "tau":
        if "tau_distance" not in p.claims:
            raise ConfigurationError(
                "route tau needs a premetric claiming the sup-tail property"
            )
        hyps.extend(check_asf1(trace, trace.companion_shift(), p, budget))
        hyps.append(check_asf2(trace, p, budget))
    elif route == "composed":
        if p.kind != "composed":
            raise ConfigurationError("route composed needs a gauge-over-inner premetric")
        hyps.extend(check_asf1(trace, trace.companion_shift(), p, budget))
        hyps.append(check_asf2(trace, p, budget))
        hyps.append(check_c5(trace, p, budget))
        hyps.extend(verify_gauge_regularity(p.gauge))
        inner = check_asf2(trace, p.inner, budget)
        inner.condition_id = "C4-INNER"
        inner.resolution_note += "; evaluated under the inner gap measure"
        hyps.append(inner)
    else:
        if "mixed_triangle" not in p.claims or p.companion is None:
            raise ConfigurationError(
                "route mixed needs a premetric claiming the two-sided triangle "
                "inequality with a companion"
            )
        hyps.extend(verify_premetric_axioms(p, _trace_triples(trace), eta=budget.slack))
        coords = trace.coords_array()
        hyps.append(_decay_report(
            "GAP-DECAY", premetric_diagonal(p, coords[:-1], coords[1:]), budget, "declared"
        ))
        hyps.append(_decay_report(
            "GAP-DECAY-COMPANION",
            premetric_diagonal(p.companion, coords[:-1], coords[1:]), budget, "companion",
        ))
    diag = cauchy_diagnostic(trace, p, tol=tol, eta=budget.slack)
    overall = worst_verdict([r.verdict for r in hyps] + [diag.verdict])
    return CauchyCertificate(route, tuple(hyps), diag, overall)


# ---------------------------------------------------------------------------
# Solvers


def solve_fixed_point(
    map_t: NamedMap,
    x0: Point,
    tol: float = 1e-9,
    max_steps: int = 10_000,
    premetric: Premetric | None = None,
) -> SolveResult:
    """Iterate until the step gap p(x_n, T x_n) reaches tol, then accept the
    image z = T(x_n).  The reported residual is p(z, Tz), recomputed, and
    converged only claims what that residual shows."""
    if max_steps < 1:
        raise InputError("need at least one step")
    p = premetric if premetric is not None else metric_premetric(map_t.space)
    x = x0
    gap = np.inf
    for n in range(1, max_steps + 1):
        try:
            nxt = map_t(x)
        except InputError:
            return SolveResult(x, float("inf"), n - 1, False)
        if nxt.norm() > ESCAPE_NORM:
            return SolveResult(x, float("inf"), n - 1, False)
        gap = eval_premetric(p, x, nxt)
        if gap <= tol:
            try:
                residual = eval_premetric(p, nxt, map_t(nxt))
            except InputError:
                residual = float("inf")
            return SolveResult(nxt, residual, n, residual <= tol)
        x = nxt
    return SolveResult(x, float(gap), max_steps, False)


def solve_best_proximity(
    map_t: NamedMap,
    setting: CyclicSetting,
    x0: Point,
    tol: float = 1e-8,
    max_pairs: int = 10_000,
) -> SolveResult:
    """Double-step iteration inside the starting set until the even-index
    displacement d(x_{2n}, x_{2n+2}) reaches tol; the residual is then
    |d(z, Tz) - gap| for the accepted even point z, verified independently
    of the stopping rule.

    Raises:
        InputError: x0 outside the starting set.
    """
    if not setting.set_a.contains(x0):
        raise InputError("starting point must lie in the first set")
    if max_pairs < 1:
        raise InputError("need at least one double step")
    space = setting.space
    prev = x0
    for n in range(1, max_pairs + 1):
        try:
            mid = map_t(prev)
            even = map_t(mid)
        except InputError:
            return SolveResult(prev, float("inf"), n - 1, False)
        if even.norm() > ESCAPE_NORM:
            return SolveResult(prev, float("inf"), n - 1, False)
        if space.distance(prev, even) <= tol:
            try:
                residual = abs(space.distance(even, map_t(even)) - setting.gap)
            except InputError:
                residual = float("inf")
            return SolveResult(even, residual, n, residual <= tol)
        prev = even
    residual = abs(space.distance(prev, map_t(prev)) - setting.gap)
    return SolveResult(prev, residual, max_pairs, False)


def solve_common_fixed_point(
    schedule: AlternatingSchedule,
    seed: Point,
    tol: float = 1e-9,
    max_steps: int = 10_000,
    premetric: Premetric | None = None,
) -> SolveResult:
    """Alternate the two maps from x_0 = S(seed) until the current point
    nearly fixes both, measured by max(p(x, Tx), p(x, Sx))."""
    if max_steps < 1:
        raise InputError("need at least one step")
    p = premetric if premetric is not None else metric_premetric(schedule.space)
    x = schedule.map_s(seed)
    residual = np.inf
    for n in range(max_steps + 1):
        try:
            tx = schedule.map_t(x)
            sx = schedule.map_s(x)
        except InputError:
            return SolveResult(x, float("inf"), n, False)
        residual = max(eval_premetric(p, x, tx), eval_premetric(p, x, sx))
        if residual <= tol:
            return SolveResult(x, float(residual), n, True)
        if n == max_steps:
            break
        x = tx if n % 2 == 0 else sx
        if x.norm() > ESCAPE_NORM:
            return SolveResult(x, float("inf"), n + 1, False)
    return SolveResult(x, float(residual), max_steps, False)


# ---------------------------------------------------------------------------
# Non-settling witnesses


@dataclass(frozen=True)
class NonCauchyWitness:
    """Index triples certifying persistent separation: for each occurrence,
    sigma < k <= rho with gap(x_sigma, x_k) > eps while the same-parity
    predecessor straddles, gap(x_sigma, x_{k-2}) <= eps."""

    sigma: tuple[int, ...]
    rho: tuple[int, ...]
    k: tuple[int, ...]
    separation_gaps: tuple[float, ...]
    straddle_gaps: tuple[float, ...]
    eps: float
    parity_note: str

    def to_json_obj(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "rho": list(self.rho),
            "k": list(self.k),
            "separation_gaps": [sanitize(g) for g in self.separation_gaps],
            "straddle_gaps": [sanitize(g) for g in self.straddle_gaps],
            "eps": self.eps,
            "parity_note": self.parity_note,
        }


@dataclass(frozen=True)
class WitnessScan:
    status: str  # found | none | not_applicable
    witness: NonCauchyWitness | None
    note: str

    def to_json_obj(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness.to_json_obj() if self.witness else None,
            "note": self.note,
        }


def extract_noncauchy_witness(
    trace: IterationTrace,
    p: Premetric | None = None,
    eps: float = 0.5,
    gap_tol: float = 1e-2,
    max_occurrences: int = 8,
) -> WitnessScan:
    """Scan a trace whose consecutive gaps have settled below gap_tol for
    pairs that stay separated by more than eps anyway.

    For each occurrence: sigma is the scan start, rho the first index past it
    with gap above 2*eps (parity-corrected by one step when needed so k - sigma
    can be even), and k the smallest same-parity index past sigma with gap
    above eps; minimality hands back the straddle gap(x_sigma, x_{k-2}) <= eps.
    Applicable only when the consecutive gaps actually decay; a trace whose
    step sizes never shrink is reported not_applicable, and a settled trace
    with no separated pairs reports none.
    """
    p = p if p is not None else trace.premetric
    coords = trace.coords_array()
    if p is trace.premetric:
        gaps = trace.gap_array()
    else:
        gaps = premetric_diagonal(p, coords[:-1], coords[1:])
    if gaps.shape[0] < 4:
        raise InputError("need at least 4 consecutive gaps to scan")
    over = np.nonzero(gaps > gap_tol)[0]
    n0 = 0 if over.size == 0 else int(over[-1]) + 1
    if n0 >= gaps.shape[0]:
        return WitnessScan(
            "not_applicable", None,
            f"consecutive gaps never settle below gap_tol={gap_tol}",
        )
    q = max(1, gaps.shape[0] // 4)
    head_max, tail_max = float(gaps[:q].max()), float(gaps[-q:].max())
    if not (tail_max < 0.5 * head_max or tail_max <= 1e-12):
        return WitnessScan(
            "not_applicable", None,
            f"consecutive gaps never decay (head max {head_max:g}, tail max {tail_max:g})",
        )

    last = coords.shape[0] - 1
    occ_sigma, occ_rho, occ_k, occ_sep, occ_straddle = [], [], [], [], []
    kept, shifted = 0, 0
    sigma = n0
    while len(occ_sigma) < max_occurrences and sigma < last:
        row = premetric_matrix(p, coords[sigma:sigma + 1], coords[sigma + 1:])[0]

        def gap_at(m: int) -> float:
            return float(row[m - sigma - 1])

        far = np.nonzero(row > 2.0 * eps)[0]
        if far.size == 0:
            break
        rho = sigma + 1 + int(far[0])
        if (rho - sigma) % 2 == 0:
            rho_adj = rho
            kept += 1
        elif rho + 1 <= last and gap_at(rho + 1) > eps:
            rho_adj = rho + 1
            shifted += 1
        elif rho - 1 > sigma and gap_at(rho - 1) > eps:
            rho_adj = rho - 1
            shifted += 1
        else:
            sigma = rho + 1
            continue
        k = next(m for m in range(sigma + 2, rho_adj + 1, 2) if gap_at(m) > eps)
        straddle = gap_at(k - 2) if k - 2 > sigma else 0.0
        occ_sigma.append(sigma)
        occ_rho.append(rho_adj)
        occ_k.append(k)
        occ_sep.append(gap_at(k))
        occ_straddle.append(straddle)
        sigma = rho_adj + 1
    if not occ_sigma:
        return WitnessScan(
            "none", None,
            f"no pair separated by more than 2*eps={2 * eps} past the settling index {n0}",
        )
    wit = NonCauchyWitness(
        sigma=tuple(occ_sigma),
        rho=tuple(occ_rho),
        k=tuple(occ_k),
        separation_gaps=tuple(occ_sep),
        straddle_gaps=tuple(occ_straddle),
        eps=eps,
        parity_note=f"parity kept {kept} time(s), corrected by one index {shifted} time(s)",
    )
    return WitnessScan(
        "found", wit,
        f"{len(occ_sigma)} occurrence(s) from settling index {n0}",
    )


def even_collapse_diagnostic(
    full_orbit: IterationTrace,
    setting: CyclicSetting,
    tol: float = 1e-6,
) -> CertificateReport:
    """For a back-and-forth orbit: the step distances must settle at the set
    gap and, when they do, the even-index displacements must collapse below
    tol (id EVEN-COLLAPSE).  Accepts the even-subsequence trace (using its
    cached full orbit) or a plain full orbit.

    Raises:
        InputError: space distance is not euclidean, or the orbit is shorter
            than 5 points.
    """
    if setting.space.norm != "euclidean":
        raise InputError("this diagnostic is limited to euclidean distances")
    pts = full_orbit.aux_points if full_orbit.aux_points is not None else full_orbit.points
    if len(pts) < 5:
        raise InputError("need a full orbit of at least 5 points")
    coords = np.asarray([pt.coords for pt in pts], dtype=float)
    step = np.sqrt(np.sum(np.diff(coords, axis=0) ** 2, axis=-1))
    even = np.sqrt(np.sum(np.diff(coords[::2], axis=0) ** 2, axis=-1))
    q_s, q_e = max(1, step.shape[0] // 4), max(1, even.shape[0] // 4)
    step_tail = float(step[-q_s:].max())
    even_tail = float(even[-q_e:].max())
    deviation = abs(step_tail - setting.gap)
    wits = [witness(step_gap_tail=step_tail, target_gap=setting.gap,
                    even_displacement_tail=even_tail)]
    note = (
        f"tails over the last quarter; pass needs the step distances within {tol} "
        f"of the set gap {setting.gap} and even displacements at most {tol}"
    )
    verdict = Verdict.PASS if (deviation <= tol and even_tail <= tol) else Verdict.FAIL
    return CertificateReport("EVEN-COLLAPSE", verdict, wits, None, note)


# ---------------------------------------------------------------------------
# Limit collapse for dominated sequence pairs


def check_E_conditions(
    f_gauge: Gauge,
    psi: Gauge | GaugeFamily,
    alpha_seq,
    beta_seq,
    gamma: float,
    eta: float = 1e-9,
    conv_tol: float = 1e-3,
    nu_horizon: int = 64,
) -> CertificateReport:
    """Limit collapse for a dominated pair of sequences (id E1, or E2 when
    psi is a family): two sequences converging to the same limit from a
    domination relation force that limit to zero.

    Hypotheses are verified numerically: both sequences settle toward gamma,
    beta stays at or above gamma, psi sits strictly below the identity on the
    relevant values (for a family: some member does, per step), and the
    domination holds in the limit.  With a single gauge the domination is
    checked at the limit value rather than stepwise, because a fixed-slack
    stepwise check rejects valid slowly-converging data.  A violated
    hypothesis is reported inconclusive (not applicable), never as a failure;
    fail is reserved for data that meets the hypotheses yet has gamma > eta.

    Raises:
        RefusalError: f_gauge misses or fails {continuous, nondecreasing}.
        InputError: malformed sequences or gamma outside f_gauge's domain.
    """
    alpha = np.asarray(alpha_seq, dtype=float)
    beta = np.asarray(beta_seq, dtype=float)
    if alpha.ndim != 1 or beta.ndim != 1 or alpha.shape != beta.shape or alpha.shape[0] < 2:
        raise InputError("need two equal-length sequences of at least 2 terms")
    if not (np.isfinite(alpha).all() and np.isfinite(beta).all() and np.isfinite(gamma)):
        raise InputError("sequences and gamma must be finite")
    if gamma < 0 or gamma > f_gauge.t_max:
        raise InputError(f"gamma must lie in [0, {f_gauge.t_max}]")
    require_profile(f_gauge, frozenset({"continuous", "nondecreasing"}), eta=eta)
    family = isinstance(psi, GaugeFamily)
    cid = "E2" if family else "E1"

    def settles(seq: np.ndarray) -> bool:
        mid = abs(float(seq[seq.shape[0] // 2]) - gamma)
        end = abs(float(seq[-1]) - gamma)
        return end <= max(conv_tol, 0.75 * mid)

    problems: list[dict] = []
    if not settles(alpha):
        problems.append(witness(hypothesis="alpha settles toward gamma",
                                last=float(alpha[-1]), gamma=gamma))
    if not settles(beta):
        problems.append(witness(hypothesis="beta settles toward gamma",
                                last=float(beta[-1]), gamma=gamma))
    low = np.nonzero(beta < gamma - eta)[0]
    if low.size:
        i = int(low[0])
        problems.append(witness(hypothesis="beta stays at or above gamma",
                                n=i, beta=float(beta[i]), gamma=gamma))

    probe = sorted({float(v) for v in np.append(f_gauge.apply_array(
        np.clip(beta, 0.0, f_gauge.t_max)), [0.5, 1.0]) if eta < v <= 1e3})
    if family:
        for n in range(alpha.shape[0]):
            lhs = f_gauge(min(alpha[n], f_gauge.t_max)) if alpha[n] >= 0 else None
            if lhs is None:
                problems.append(witness(hypothesis="alpha nonnegative", n=n,
                                        alpha=float(alpha[n])))
                break
            rhs_base = f_gauge(min(max(beta[n], 0.0), f_gauge.t_max))
            if not any(lhs <= iterate_gauge(psi, nu, rhs_base) + eta
                       for nu in range(1, nu_horizon + 1)):
                problems.append(witness(
                    hypothesis="some family member dominates the step", n=n,
                    lhs=lhs, base=rhs_base))
                break
        for t in probe[:12]:
            if not any(iterate_gauge(psi, nu, t) < t for nu in range(1, nu_horizon + 1)):
                problems.append(witness(
                    hypothesis="some family member drops below the identity", t=t))
                break
    else:
        fg = f_gauge(gamma)
        lhs, rhs = fg, float(psi(min(fg, psi.t_max)))
        if lhs > rhs + max(eta, conv_tol * abs(lhs)):
            problems.append(witness(hypothesis="domination holds in the limit",
                                    lhs=lhs, rhs=rhs))
        for t in probe[:12]:
            if t <= psi.t_max and not psi(t) < t:
                problems.append(witness(hypothesis="psi sits below the identity", t=t))
                break

    if problems:
        return CertificateReport(
            cid, Verdict.INCONCLUSIVE, problems, None,
            f"not applicable: {problems[0]['hypothesis']} fails on the supplied data",
        )
    if gamma <= eta:
        return CertificateReport(
            cid, Verdict.PASS, [witness(gamma=gamma)], None,
            f"hypotheses corroborated and the shared limit is within {eta} of zero",
        )
    return CertificateReport(
        cid, Verdict.FAIL, [witness(gamma=gamma)], None,
        "hypotheses corroborated yet the shared limit stays away from zero; this "
        "contradicts the expected collapse and flags the inputs or declared gauges",
    )
