"""Empirical checkers for the contraction conditions the laboratory studies.

Sequence-level conditions (ids C1..C5) look at the gap sequence of a pair of
traces; family conditions (C6..C9) add a comparison gauge and a gauge family;
mapping-level conditions (D1..D4) sample point pairs and iterate the map.
Each checker returns three-valued CertificateReports with explicit witnesses
and a resolution note spelling out what the verdict means at the budget used.

Band-type conditions (C2, C4, D2, D4) ask for a distance band (eps, eps+delta)
whose members all drop to eps or below within the shift horizon.  The search
scans delta candidates in decreasing order and accepts the first candidate
whose band raises no objection; a band nobody occupies counts as a witness at
this budget (the vacuous case is flagged in the report).  When every candidate
is defeated the verdict is fail, carrying the defeating item, and the note
records that the refutation is bounded by the nu horizon and the delta grid.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, InputError, RefusalError
from .gauges import Gauge, GaugeFamily, check_family_C6, check_family_C7_multi, \
    family_member_array, require_profile
from .maps import NamedMap
from .reports import CertificateReport, SearchBudget, Verdict, witness, worst_verdict
from .spaces import Box, CyclicSetting, Point, Premetric, Space, default_region, \
    eval_premetric, metric_premetric, premetric_diagonal, premetric_matrix
from .traces import ESCAPE_NORM, IterationTrace

F_PROFILE = frozenset({"right_continuous", "nondecreasing", "positive_on_positive"})
PSI_PROFILE_STANDARD = frozenset(
    {"nondecreasing", "upper_semicontinuous", "strictly_below_identity", "zero_at_zero"}
)
PSI_PROFILE_ZHANG = frozenset({"nondecreasing", "right_upper_semicontinuous"})


# ---------------------------------------------------------------------------
# Shared search machinery


def _tail_max(values: np.ndarray) -> float:
    q = max(1, values.shape[-1] // 4)
    return float(np.max(values[..., -q:]))


def _trace_gap_windows(gaps: np.ndarray, budget: SearchBudget) -> tuple[np.ndarray, np.ndarray]:
    """Front gap values and, per front index, the nu_horizon follow-up values."""
    ih, nh = budget.index_horizon, budget.nu_horizon
    if gaps.shape[0] < ih + nh:
        raise InputError(
            f"need at least {ih + nh} aligned gaps for this budget "
            f"(index_horizon + nu_horizon), got {gaps.shape[0]}"
        )
    win = np.lib.stride_tricks.sliding_window_view(gaps, nh + 1)
    return win[:ih, 0], win[:ih, 1:]


def _aligned_gaps(trace_x: IterationTrace, trace_y: IterationTrace, p: Premetric) -> np.ndarray:
    for t in (trace_x, trace_y):
        if t.points[0].space_id != p.space.id:
            raise InputError(
                f"trace on space {t.points[0].space_id!r} does not match the premetric's "
                f"space {p.space.id!r}"
            )
    n = min(len(trace_x), len(trace_y))
    return premetric_diagonal(p, trace_x.coords_array()[:n], trace_y.coords_array()[:n])


_BAND_NOTE = (
    "delta candidates scanned in decreasing order; the first candidate whose band "
    "(eps, eps+delta) raises no objection within the nu horizon is the witness; an "
    "unoccupied band counts as a witness at this budget and is flagged vacuous; fail "
    "means every candidate was defeated, a refutation bounded by the nu horizon"
)


def _check_c1(gaps: np.ndarray, budget: SearchBudget) -> CertificateReport:
    """Small-gap hypothesis: some delta for which any front index with a gap
    below delta forces the tail-limsup estimate down to eps."""
    front, _ = _trace_gap_windows(gaps, budget)
    tail_est = _tail_max(gaps)
    eta = budget.slack
    wits: list[dict] = []
    verdicts: list[Verdict] = []
    for eps in budget.eps_grid:
        if tail_est <= eps + eta:
            wits.append(witness(eps=eps, delta=budget.delta_candidates[0],
                                tail_limsup_estimate=tail_est))
            verdicts.append(Verdict.PASS)
            continue
        min_front = float(front.min())
        delta = next((d for d in budget.delta_candidates if d <= min_front), None)
        if delta is not None:
            wits.append(witness(eps=eps, delta=delta, tail_limsup_estimate=tail_est,
                                smallest_front_gap=min_front, vacuous=True))
            verdicts.append(Verdict.PASS)
        else:
            i = int(np.argmin(front))
            wits.append(witness(eps=eps, index=i, gap=float(front[i]),
                                tail_limsup_estimate=tail_est))
            verdicts.append(Verdict.FAIL)
    return CertificateReport(
        "C1", worst_verdict(verdicts), wits, budget,
        "tail-limsup estimated as the max over the last quarter of the stored gaps; "
        "vacuous pass means no front gap sits below the witnessing delta",
    )


def _band_per_index(
    trigger: np.ndarray,
    windows: np.ndarray,
    budget: SearchBudget,
    cid: str,
    item: str,
) -> CertificateReport:
    """Band condition with a per-item shift index (C2 and D2)."""
    eta = budget.slack
    esc_min = windows.min(axis=1)
    wits: list[dict] = []
    verdicts: list[Verdict] = []
    for eps in budget.eps_grid:
        outcome = None
        defeat = None
        for delta in budget.delta_candidates:
            in_band = np.nonzero((trigger > eps) & (trigger < eps + delta))[0]
            if in_band.size == 0:
                outcome = witness(eps=eps, delta=delta, in_band=0, vacuous=True)
                break
            bad = in_band[esc_min[in_band] > eps + eta]
            if bad.size == 0:
                first_nu = np.argmax(windows[in_band] <= eps + eta, axis=1) + 1
                outcome = witness(eps=eps, delta=delta, nu=int(first_nu.max()),
                                  in_band=int(in_band.size))
                break
            b = int(bad[0])
            defeat = witness(eps=eps, delta=delta, **{item: b},
                             gap=float(trigger[b]), best_follow_up=float(esc_min[b]))
        if outcome is not None:
            wits.append(outcome)
            verdicts.append(Verdict.PASS)
        else:
            wits.append(defeat)
            verdicts.append(Verdict.FAIL)
    return CertificateReport(cid, worst_verdict(verdicts), wits, budget, _BAND_NOTE)


def _band_uniform(
    mats: np.ndarray,
    budget: SearchBudget,
    cid: str,
    item: str,
) -> CertificateReport:
    """Band condition with one shift index shared by every in-band pair
    (C4 and D4).  mats has shape (k, n, n), one gap matrix per orbit."""
    ih, nh, eta = budget.index_horizon, budget.nu_horizon, budget.slack
    if mats.shape[1] < ih + nh:
        raise InputError(
            f"need gap matrices of side at least {ih + nh} for this budget, "
            f"got {mats.shape[1]}"
        )
    iu = np.triu_indices(ih, k=1)
    base = mats[:, iu[0], iu[1]]  # (k, n_pairs)
    wits: list[dict] = []
    verdicts: list[Verdict] = []
    for eps in budget.eps_grid:
        outcome = None
        defeat = None
        for delta in budget.delta_candidates:
            k_idx, p_idx = np.nonzero((base > eps) & (base < eps + delta))
            if k_idx.size == 0:
                outcome = witness(eps=eps, delta=delta, in_band=0, vacuous=True)
                break
            rows, cols = iu[0][p_idx], iu[1][p_idx]
            best_val, best_nu = np.inf, 0
            for nu in range(1, nh + 1):
                worst = float(mats[k_idx, rows + nu, cols + nu].max())
                if worst <= eps + eta:
                    outcome = witness(eps=eps, delta=delta, nu=nu,
                                      in_band=int(k_idx.size))
                    break
                if worst < best_val:
                    best_val, best_nu = worst, nu
            if outcome is not None:
                break
            shifted = mats[k_idx, rows + best_nu, cols + best_nu]
            w = int(np.argmax(shifted))
            defeat = witness(eps=eps, delta=delta, **{item: int(k_idx[w])},
                             i=int(rows[w]), j=int(cols[w]),
                             gap=float(base[k_idx[w], p_idx[w]]),
                             best_uniform_nu=best_nu, value_at_best_nu=float(shifted[w]))
        if outcome is not None:
            wits.append(outcome)
            verdicts.append(Verdict.PASS)
        else:
            wits.append(defeat)
            verdicts.append(Verdict.FAIL)
    return CertificateReport(cid, worst_verdict(verdicts), wits, budget, _BAND_NOTE)


_STRICT_NOTE = (
    "strict decrease tested as new < old - slack; items with value at or below the "
    "slack are not triggered; fail means no shift within the nu horizon decreases "
    "the item"
)


def _strict_per_index(
    trigger: np.ndarray,
    windows: np.ndarray,
    budget: SearchBudget,
    cid: str,
    item: str,
) -> CertificateReport:
    eta = budget.slack
    active = np.nonzero(trigger > eta)[0]
    if active.size == 0:
        return CertificateReport(
            cid, Verdict.PASS,
            [witness(triggered=0, note="every value is already within the slack of zero")],
            budget, _STRICT_NOTE,
        )
    esc_min = windows[active].min(axis=1)
    bad = active[esc_min >= trigger[active] - eta]
    if bad.size:
        wits = [
            witness(**{item: int(b)}, gap=float(trigger[b]),
                    best_follow_up=float(windows[b].min()))
            for b in bad[:8]
        ]
        return CertificateReport(cid, Verdict.FAIL, wits, budget, _STRICT_NOTE)
    first_nu = np.argmax(windows[active] < (trigger[active] - eta)[:, None], axis=1) + 1
    return CertificateReport(
        cid, Verdict.PASS,
        [witness(triggered=int(active.size), nu=int(first_nu.max()))],
        budget, _STRICT_NOTE,
    )


def _strict_pairs(mats: np.ndarray, budget: SearchBudget, cid: str) -> CertificateReport:
    """Pairwise strict decrease under a shared shift, one matrix per orbit."""
    ih, nh, eta = budget.index_horizon, budget.nu_horizon, budget.slack
    if mats.shape[1] < ih + nh:
        raise InputError(
            f"need gap matrices of side at least {ih + nh} for this budget, "
            f"got {mats.shape[1]}"
        )
    base = mats[:, :ih, :ih]
    best = np.full_like(base, np.inf)
    for nu in range(1, nh + 1):
        np.minimum(best, mats[:, nu:nu + ih, nu:nu + ih], out=best)
    iu = np.triu_indices(ih, k=1)
    b = base[:, iu[0], iu[1]]
    m = best[:, iu[0], iu[1]]
    triggered = b > eta
    stuck = triggered & (m >= b - eta)
    if stuck.any():
        k_idx, p_idx = np.nonzero(stuck)
        wits = [
            witness(orbit=int(k), i=int(iu[0][q]), j=int(iu[1][q]),
                    gap=float(b[k, q]), best_follow_up=float(m[k, q]))
            for k, q in list(zip(k_idx, p_idx))[:8]
        ]
        return CertificateReport(cid, Verdict.FAIL, wits, budget, _STRICT_NOTE)
    count = int(triggered.sum())
    if count == 0:
        return CertificateReport(
            cid, Verdict.PASS,
            [witness(triggered=0, note="every pair gap is already within the slack of zero")],
            budget, _STRICT_NOTE,
        )
    # Smallest shift that already decreases every triggered pair, for the record.
    nu_witness = None
    remaining = triggered.copy()
    for nu in range(1, nh + 1):
        shifted = mats[:, nu:nu + ih, nu:nu + ih][:, iu[0], iu[1]]
        remaining &= ~(shifted < b - eta)
        if not remaining.any():
            nu_witness = nu
            break
    return CertificateReport(
        cid, Verdict.PASS,
        [witness(triggered=count, nu=nu_witness)],
        budget, _STRICT_NOTE,
    )


# ---------------------------------------------------------------------------
# Sequence-pair checkers


def check_asf1(
    trace_x: IterationTrace,
    trace_y: IterationTrace,
    p: Premetric,
    budget: SearchBudget | None = None,
) -> list[CertificateReport]:
    """C1 (small gaps force small tails), C2 (band escape, per-index shift),
    C3 (strict decrease somewhere ahead) on the aligned gap sequence
    p(x_n, y_n).

    Raises:
        InputError: traces shorter than index_horizon + nu_horizon, or on a
            different space than the premetric.
    """
    budget = budget or SearchBudget()
    gaps = _aligned_gaps(trace_x, trace_y, p)
    front, windows = _trace_gap_windows(gaps, budget)
    return [
        _check_c1(gaps, budget),
        _band_per_index(front, windows, budget, "C2", "index"),
        _strict_per_index(front, windows, budget, "C3", "index"),
    ]


def _pair_matrix(trace: IterationTrace, p: Premetric, budget: SearchBudget) -> np.ndarray:
    if trace.points[0].space_id != p.space.id:
        raise InputError(
            f"trace on space {trace.points[0].space_id!r} does not match the premetric's "
            f"space {p.space.id!r}"
        )
    need = budget.index_horizon + budget.nu_horizon
    if len(trace) < need:
        raise InputError(f"need a trace of at least {need} points for this budget, "
                         f"got {len(trace)}")
    coords = trace.coords_array()[:need]
    return premetric_matrix(p, coords, coords)


def check_asf2(
    trace: IterationTrace,
    p: Premetric,
    budget: SearchBudget | None = None,
) -> CertificateReport:
    """C4: one shift index, shared by every in-band pair (i, j)."""
    budget = budget or SearchBudget()
    mats = _pair_matrix(trace, p, budget)[None, ...]
    return _band_uniform(mats, budget, "C4", "orbit")


def check_c5(
    trace: IterationTrace,
    p: Premetric,
    budget: SearchBudget | None = None,
) -> CertificateReport:
    """C5: every pair gap above the slack strictly decreases under some shift."""
    budget = budget or SearchBudget()
    mats = _pair_matrix(trace, p, budget)[None, ...]
    return _strict_pairs(mats, budget, "C5")


# ---------------------------------------------------------------------------
# Gauge-family checkers (C6-C9)


def check_asmk(
    trace_x: IterationTrace,
    trace_y: IterationTrace,
    p: Premetric,
    f_gauge: Gauge,
    family: GaugeFamily,
    budget: SearchBudget | None = None,
    variant: str = "asmk1",
) -> list[CertificateReport]:
    """Gauge-family domination of the gap sequence.

    asmk1 returns (C6, C7, C8): family tails below eps, band pulled below eps
    by some member, and the diagonal domination
    F(gap(n+i)) <= member_n(F(gap(i))).  asmk2 returns (C6, C7, C9) where the
    domination runs over cross gaps p(x_{n+i}, y_{n+j}).

    Raises:
        RefusalError: F misses or fails its required regularity profile, or
            F(0) <= 0 while the family does not declare members fixing zero.
    """
    budget = budget or SearchBudget()
    if variant not in ("asmk1", "asmk2"):
        raise ConfigurationError(f"unknown variant {variant!r}; use asmk1 or asmk2")
    require_profile(f_gauge, F_PROFILE, eta=budget.slack)
    f_zero = f_gauge(0.0)
    if f_zero <= 0.0 and not family.zero_fixed:
        raise RefusalError(
            "the gauge family must declare members fixing zero because F(0) <= 0 "
            f"(measured F(0)={f_zero})"
        )
    note = (
        f"F(0)={f_zero} measured, family {family.describe()}; domination tested with "
        f"slack {budget.slack} for shifts 1..{budget.nu_horizon}"
    )
    c6 = check_family_C6(family, budget.eps_grid, n_horizon=budget.nu_horizon,
                         eta=budget.slack)
    c7 = check_family_C7_multi(family, budget.eps_grid, budget.delta_candidates,
                               nu_horizon=budget.nu_horizon, eta=budget.slack)

    ih, nh, eta = budget.index_horizon, budget.nu_horizon, budget.slack
    if variant == "asmk1":
        gaps = _aligned_gaps(trace_x, trace_y, p)
        if gaps.shape[0] < ih + nh:
            raise InputError(f"need at least {ih + nh} aligned gaps, got {gaps.shape[0]}")
        fg = f_gauge.apply_array(gaps)
        lhs_source, base_block = fg, fg[:ih]
        cid = "C8"
    else:
        for t in (trace_x, trace_y):
            if len(t) < ih + nh:
                raise InputError(f"need traces of at least {ih + nh} points, got {len(t)}")
        cross = premetric_matrix(
            p, trace_x.coords_array()[:ih + nh], trace_y.coords_array()[:ih + nh]
        )
        fg = f_gauge.apply_array(cross)
        lhs_source, base_block = fg, fg[:ih, :ih]
        cid = "C9"

    defeats: list[dict] = []
    dominated = base_block.copy()
    for n in range(1, nh + 1):
        if family.kind == "iterated":
            dominated = family.base.apply_array(dominated)
        else:
            if n > len(family.members):
                break
            dominated = family_member_array(family, n, base_block)
        lhs = lhs_source[n:n + ih] if variant == "asmk1" else lhs_source[n:n + ih, n:n + ih]
        bad = np.nonzero(lhs > dominated + eta)
        if variant == "asmk1":
            for i in bad[0][:2]:
                defeats.append(witness(n=n, i=int(i), lhs=float(lhs[i]),
                                       rhs=float(dominated[i])))
        else:
            for i, j in list(zip(bad[0], bad[1]))[:2]:
                defeats.append(witness(n=n, i=int(i), j=int(j), lhs=float(lhs[i, j]),
                                       rhs=float(dominated[i, j])))
        if len(defeats) >= 8:
            break
    dom_report = CertificateReport(
        cid,
        Verdict.FAIL if defeats else Verdict.PASS,
        defeats if defeats else [witness(checked_shifts=nh, checked_indices=ih)],
        budget,
        note,
    )
    return [c6, c7, dom_report]


# ---------------------------------------------------------------------------
# Mapping-level checkers (D1-D4)


def _orbit_block(
    map_t: NamedMap,
    seeds: np.ndarray,
    n_steps: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Iterate the map on every seed row; returns (orbits, alive_steps).

    orbits has shape (k, n_steps, dim); an orbit that escapes (non-finite or
    beyond ESCAPE_NORM) is frozen at its last good point and its alive count
    records how many valid steps it has.
    """
    k, dim = seeds.shape
    orbits = np.empty((k, n_steps, dim))
    orbits[:, 0, :] = seeds
    alive = np.full(k, n_steps, dtype=int)
    current = [tuple(row) for row in seeds]
    for step in range(1, n_steps):
        for idx in range(k):
            if alive[idx] < n_steps:
                orbits[idx, step] = orbits[idx, step - 1]
                continue
            nxt = tuple(float(c) for c in map_t.fn(current[idx]))
            if not all(np.isfinite(nxt)) or max(abs(c) for c in nxt) > ESCAPE_NORM:
                alive[idx] = step
                orbits[idx, step] = orbits[idx, step - 1]
                continue
            current[idx] = nxt
            orbits[idx, step] = nxt
    return orbits, alive


def _pair_distance_curves(space: Space, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """d(x_step, y_step) per pair row; xs, ys shaped (k, n_steps, dim)."""
    if space.norm == "custom":
        k, n, _ = xs.shape
        out = np.empty((k, n))
        for i in range(k):
            for s in range(n):
                out[i, s] = space.distance(space.point(*xs[i, s]), space.point(*ys[i, s]))
        return out
    diff = xs - ys
    if space.norm == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    q = float(space.norm)
    return np.sum(np.abs(diff) ** q, axis=-1) ** (1.0 / q)


def _sample_orbit_data(
    map_t: NamedMap,
    space: Space,
    budget: SearchBudget,
    region: Box | None,
    seed: int,
) -> dict:
    if map_t.space.id != space.id:
        raise InputError("map and space disagree")
    region = region or default_region(space)
    rng = np.random.default_rng(seed)
    k = budget.pair_samples
    n_steps = budget.index_horizon + budget.nu_horizon
    seeds_x = region.sample_coords(rng, k)
    seeds_y = region.sample_coords(rng, k)
    orbits, alive = _orbit_block(map_t, np.concatenate([seeds_x, seeds_y]), n_steps)
    ox, oy = orbits[:k], orbits[k:]
    valid = (alive[:k] == n_steps) & (alive[k:] == n_steps)
    dists = _pair_distance_curves(space, ox, oy)
    return {
        "region": region,
        "seed": seed,
        "orbits_x": ox,
        "orbits_y": oy,
        "valid": valid,
        "dists": dists[valid],
        "escaped_pairs": int(k - valid.sum()),
        "n_steps": n_steps,
    }


def _d4_matrices(space: Space, data: dict, budget: SearchBudget) -> tuple[np.ndarray, int]:
    cap = max(4, budget.pair_samples // 16)
    chosen = data["orbits_x"][data["valid"]][:cap]
    mats = np.stack([space.distance_matrix(orbit, orbit) for orbit in chosen])
    return mats, chosen.shape[0]


def _check_d1(dists: np.ndarray, budget: SearchBudget) -> CertificateReport:
    """Delta ladder: sup of tail-limsup estimates over pairs starting below
    delta must be nonincreasing and end at or below the smallest grid eps."""
    eta = budget.slack
    d0 = dists[:, 0]
    q = max(1, dists.shape[1] // 4)
    tails = dists[:, -q:].max(axis=1)
    ladder = []
    for delta in budget.delta_candidates:
        bucket = d0 < delta
        sup = float(tails[bucket].max()) if bucket.any() else 0.0
        ladder.append((delta, sup, int(bucket.sum())))
    target = min(budget.eps_grid) + eta
    nonincreasing = all(b[1] <= a[1] + eta for a, b in zip(ladder, ladder[1:]))
    final = ladder[-1][1]
    wits = [witness(delta=d, sup_tail=s, bucket=c) for d, s, c in ladder]
    if nonincreasing and final <= target:
        verdict = Verdict.PASS
    else:
        verdict = Verdict.FAIL
        bucket = d0 < ladder[-1][0]
        if bucket.any():
            worst = int(np.argmax(np.where(bucket, tails, -np.inf)))
            wits.append(witness(pair=worst, start_gap=float(d0[worst]),
                                tail=float(tails[worst])))
        else:
            wits.append(witness(note="ladder not nonincreasing within the slack"))
    return CertificateReport(
        "D1", verdict, wits, budget,
        "tail-limsup per pair estimated over the last quarter of the orbit; the "
        f"ladder must end at or below min(eps_grid)={min(budget.eps_grid)} within "
        "the slack; empty buckets contribute 0",
    )


def _downgrade_for_escapes(reports: list[CertificateReport], escaped: int) -> list[CertificateReport]:
    if escaped == 0:
        return reports
    out = []
    for rep in reports:
        note = rep.resolution_note + (
            f"; {escaped} sampled pair(s) escaped the working bound {ESCAPE_NORM:g} "
            "and were excluded, so a clean pass is not claimed"
        )
        verdict = Verdict.INCONCLUSIVE if rep.verdict is Verdict.PASS else rep.verdict
        out.append(CertificateReport(rep.condition_id, verdict, rep.witnesses,
                                     rep.budget, note))
    return out


def check_acf_mapping(
    map_t: NamedMap,
    space: Space,
    budget: SearchBudget | None = None,
    region: Box | None = None,
    seed: int = 0,
) -> list[CertificateReport]:
    """Mapping-level contraction conditions D1-D4 over sampled point pairs.

    D1 is the delta ladder on starting distances; D2/D3 are the band-escape
    and strict-decrease conditions on each sampled pair's distance curve;
    D4 shares one shift index across the pair structure of a capped subset
    of sampled orbits (the cap is recorded in the note).
    """
    budget = budget or SearchBudget()
    data = _sample_orbit_data(map_t, space, budget, region, seed)
    dists = data["dists"]
    if dists.shape[0] == 0:
        raise InputError("every sampled pair escaped; nothing to certify")
    nh = budget.nu_horizon
    trigger = dists[:, 0]
    windows = dists[:, 1:nh + 1]
    mats, cap = _d4_matrices(space, data, budget)
    suffix = (
        f"; {dists.shape[0]} sampled pairs in region {data['region'].lows}.."
        f"{data['region'].highs}, seed {data['seed']}"
    )
    d4_suffix = f"; D4 evaluated on the first {cap} sampled orbits"
    reports = [
        _check_d1(dists, budget),
        _band_per_index(trigger, windows, budget, "D2", "pair"),
        _strict_per_index(trigger, windows, budget, "D3", "pair"),
        _band_uniform(mats, budget, "D4", "orbit"),
    ]
    annotated = []
    for rep in reports:
        extra = suffix + (d4_suffix if rep.condition_id == "D4" else "")
        annotated.append(CertificateReport(rep.condition_id, rep.verdict, rep.witnesses,
                                           rep.budget, rep.resolution_note + extra))
    return _downgrade_for_escapes(annotated, data["escaped_pairs"])


def acf_asf_agreement(
    map_t: NamedMap,
    space: Space,
    budget: SearchBudget | None = None,
    region: Box | None = None,
    seed: int = 0,
) -> dict[str, Verdict]:
    """Mapping-level and orbit-level verdicts on identical sampled data.

    Returns {"D1": v, "C1": v, ..., "D4": v, "C4": v} where each Ck is the
    worst verdict of the sequence-level checker across the same sampled pairs
    (C4 across the same orbit subset) at the same budget, so the two levels
    can be compared like for like.
    """
    budget = budget or SearchBudget()
    data = _sample_orbit_data(map_t, space, budget, region, seed)
    dists = data["dists"]
    if dists.shape[0] == 0:
        raise InputError("every sampled pair escaped; nothing to compare")
    nh = budget.nu_horizon
    mats, _ = _d4_matrices(space, data, budget)
    out: dict[str, Verdict] = {}
    out["D1"] = _check_d1(dists, budget).verdict
    out["D2"] = _band_per_index(dists[:, 0], dists[:, 1:nh + 1], budget, "D2", "pair").verdict
    out["D3"] = _strict_per_index(dists[:, 0], dists[:, 1:nh + 1], budget, "D3", "pair").verdict
    out["D4"] = _band_uniform(mats, budget, "D4", "orbit").verdict

    c1, c2, c3 = [], [], []
    for row in dists:
        front, windows = _trace_gap_windows(row, budget)
        c1.append(_check_c1(row, budget).verdict)
        c2.append(_band_per_index(front, windows, budget, "C2", "index").verdict)
        c3.append(_strict_per_index(front, windows, budget, "C3", "index").verdict)
    out["C1"] = worst_verdict(c1)
    out["C2"] = worst_verdict(c2)
    out["C3"] = worst_verdict(c3)
    out["C4"] = worst_verdict(
        _band_uniform(mats[k:k + 1], budget, "C4", "orbit").verdict
        for k in range(mats.shape[0])
    )
    return out


# ---------------------------------------------------------------------------
# Two-map machinery


def compute_M(
    map_t: NamedMap,
    map_s: NamedMap,
    p: Premetric,
    x: Point,
    y: Point,
) -> float:
    """max of the four comparison gaps: p(x,y), p(Tx,x), p(Sy,y), and the
    average of the two crossed gaps."""
    tx, sy = map_t(x), map_s(y)
    return max(
        eval_premetric(p, x, y),
        eval_premetric(p, tx, x),
        eval_premetric(p, sy, y),
        0.5 * (eval_premetric(p, tx, y) + eval_premetric(p, sy, x)),
    )


def check_f_psi_contraction(
    map_t: NamedMap,
    map_s: NamedMap,
    p: Premetric,
    f_gauge: Gauge,
    psi: Gauge,
    sample: list[tuple[Point, Point]],
    eta: float = 1e-9,
    psi_variant: str = "standard",
) -> CertificateReport:
    """F(p(Tx, Sy)) <= psi(F(M(x, y))) + eta on every sampled pair (id FPSI).

    psi_variant picks the regularity demanded of psi: "standard" wants a
    nondecreasing upper-semicontinuous gauge strictly below the identity and
    fixing zero, "zhang" only nondecreasing right-upper-semicontinuity.

    Raises:
        RefusalError: a gauge misses or fails its required profile.
        InputError: empty sample.
    """
    if not sample:
        raise InputError("need at least one sampled pair")
    if psi_variant == "standard":
        psi_profile = PSI_PROFILE_STANDARD
    elif psi_variant == "zhang":
        psi_profile = PSI_PROFILE_ZHANG
    else:
        raise ConfigurationError(f"unknown psi variant {psi_variant!r}")
    require_profile(f_gauge, F_PROFILE, eta=eta)
    require_profile(psi, psi_profile, eta=eta)
    defeats: list[dict] = []
    worst_margin = -np.inf
    for x, y in sample:
        lhs = float(f_gauge(eval_premetric(p, map_t(x), map_s(y))))
        rhs = float(psi(f_gauge(compute_M(map_t, map_s, p, x, y))))
        worst_margin = max(worst_margin, lhs - rhs)
        if lhs > rhs + eta:
            defeats.append(witness(x=list(x.coords), y=list(y.coords), lhs=lhs, rhs=rhs))
            if len(defeats) >= 8:
                break
    note = (
        f"{len(sample)} sampled pairs, slack {eta}, psi profile {psi_variant}; "
        f"worst lhs-rhs margin {worst_margin:.3e}"
    )
    if defeats:
        return CertificateReport("FPSI", Verdict.FAIL, defeats, None, note)
    return CertificateReport("FPSI", Verdict.PASS,
                             [witness(pairs=len(sample), worst_margin=worst_margin)],
                             None, note)


def check_cyclic(
    map_t: NamedMap,
    setting: CyclicSetting,
    sample_count: int = 64,
    seed: int = 0,
) -> CertificateReport:
    """Sampled points of each set must map into the other set (id CYC)."""
    if sample_count < 1:
        raise InputError("need at least one sample per set")
    rng = np.random.default_rng(seed)
    defeats: list[dict] = []
    for source, target, label in (
        (setting.set_a, setting.set_b, "first->second"),
        (setting.set_b, setting.set_a, "second->first"),
    ):
        for _ in range(sample_count):
            x = source.sample(rng)
            image = map_t(x)
            if not target.contains(image):
                defeats.append(witness(direction=label, point=list(x.coords),
                                       image=list(image.coords)))
                if len(defeats) >= 8:
                    break
        if len(defeats) >= 8:
            break
    note = (
        f"{sample_count} samples per set ({setting.set_a.describe()} / "
        f"{setting.set_b.describe()}), seed {seed}"
    )
    if defeats:
        return CertificateReport("CYC", Verdict.FAIL, defeats, None, note)
    return CertificateReport("CYC", Verdict.PASS, [witness(samples=2 * sample_count)],
                             None, note)


def check_p_controls_d(
    p: Premetric,
    space: Space,
    trace_pairs: list[tuple[IterationTrace, IterationTrace]],
    eta: float = 1e-9,
    d_tol: float = 1e-6,
) -> CertificateReport:
    """Refutation check (id PCD): any supplied pair whose tail p-gap is below
    eta must also have its tail d-gap below d_tol.  Evidence-based only; it
    cannot prove the implication, just contradict it."""
    if not trace_pairs:
        raise InputError("need at least one trace pair")
    defeats: list[dict] = []
    activated = 0
    for idx, (tx, ty) in enumerate(trace_pairs):
        n = min(len(tx), len(ty))
        cx, cy = tx.coords_array()[:n], ty.coords_array()[:n]
        p_tail = _tail_max(premetric_diagonal(p, cx, cy))
        if p_tail >= eta:
            continue
        activated += 1
        d_tail = _tail_max(premetric_diagonal(metric_premetric(space), cx, cy))
        if d_tail >= d_tol:
            defeats.append(witness(pair=idx, tail_p=p_tail, tail_d=d_tail))
    note = (
        f"{len(trace_pairs)} supplied pairs, {activated} with tail p-gap below {eta}; "
        f"d tolerance {d_tol}; tails over the last quarter of each pair"
    )
    if defeats:
        return CertificateReport("PCD", Verdict.FAIL, defeats, None, note)
    return CertificateReport("PCD", Verdict.PASS, [witness(activated=activated)], None, note)


def check_banach_rate(
    map_t: NamedMap,
    space: Space,
    budget: SearchBudget | None = None,
    region: Box | None = None,
    seed: int = 0,
    margin: float = 1e-3,
) -> CertificateReport:
    """Existence of a uniform contraction factor below 1 (id RATE).

    The supremum of d(Tx,Ty)/d(x,y) is estimated over sampled pairs plus a
    deterministic short-separation ladder along the first axis, which catches
    factors that approach 1 only for nearby points.
    """
    budget = budget or SearchBudget()
    region = region or default_region(space)
    rng = np.random.default_rng(seed)
    sup_ratio = -np.inf
    sup_at: dict = {}

    def consider(a: Point, b: Point) -> None:
        nonlocal sup_ratio, sup_at
        d0 = space.distance(a, b)
        if d0 <= 1e-12:
            return
        r = space.distance(map_t(a), map_t(b)) / d0
        if r > sup_ratio:
            sup_ratio = r
            sup_at = {"x": list(a.coords), "y": list(b.coords), "ratio": r}

    coords_a = region.sample_coords(rng, budget.pair_samples)
    coords_b = region.sample_coords(rng, budget.pair_samples)
    for ca, cb in zip(coords_a, coords_b):
        consider(space.point(*ca), space.point(*cb))
    lows, highs = np.asarray(region.lows), np.asarray(region.highs)
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        base = lows + frac * (highs - lows)
        for h in (10.0 ** -k for k in range(1, 8)):
            shifted = base.copy()
            shifted[0] += h
            if not region.contains_coords(shifted):
                shifted = base.copy()
                shifted[0] -= h
                if not region.contains_coords(shifted):
                    continue
            consider(space.point(*base), space.point(*shifted))
    note = (
        f"{budget.pair_samples} sampled pairs plus a deterministic short-separation "
        f"ladder; pass needs sup ratio <= {1 - margin}"
    )
    if sup_ratio <= 1.0 - margin:
        return CertificateReport("RATE", Verdict.PASS, [witness(**sup_at)], budget, note)
    return CertificateReport("RATE", Verdict.FAIL, [witness(**sup_at)], budget, note)


def consecutive_contraction_report(
    trace: IterationTrace,
    f_gauge: Gauge,
    psi: Gauge,
    eta: float = 1e-12,
) -> CertificateReport:
    """Stepwise domination F(gap_n) <= psi(F(gap_{n-1})) + eta (id INEQFP)."""
    gaps = trace.gap_array()
    if gaps.shape[0] < 2:
        raise InputError("need at least two consecutive gaps")
    fg = f_gauge.apply_array(gaps)
    rhs = psi.apply_array(fg[:-1])
    lhs = fg[1:]
    bad = np.nonzero(lhs > rhs + eta)[0]
    note = f"{gaps.shape[0] - 1} consecutive steps, slack {eta}"
    if bad.size:
        wits = [witness(n=int(i) + 1, lhs=float(lhs[i]), rhs=float(rhs[i]))
                for i in bad[:8]]
        return CertificateReport("INEQFP", Verdict.FAIL, wits, None, note)
    worst = float((lhs - rhs).max())
    return CertificateReport("INEQFP", Verdict.PASS,
                             [witness(steps=int(gaps.shape[0] - 1), worst_margin=worst)],
                             None, note)
