"""Built-in example scenarios with pinned expected outcomes.

Each entry bundles a complete scenario document, the verdicts the run is
expected to produce, and the exit code the runner should return.  The
expectations double as regression anchors: `fplab gallery` re-checks them on
every invocation and reports any drift as a violation.

Entry names are stable identifiers; `run_scenario` resolves them before
falling back to the filesystem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

_INF = math.inf


@dataclass(frozen=True)
class Expectation:
    """One pinned outcome: `path` is a key in the runner's verdict map
    ("<run>.<condition>" or "<run>.solve" / "falsify.scan"), `expected` the
    value it must hold, `basis` a one-line reason the value is forced."""

    path: str
    expected: str
    basis: str


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    description: str
    doc: dict
    expectations: tuple[Expectation, ...]
    expected_exit: int


def _e(path: str, expected: str, basis: str) -> Expectation:
    return Expectation(path, expected, basis)


def _all_pass(run: str, ids, basis: str) -> list[Expectation]:
    return [_e(f"{run}.{cid}", "pass", basis) for cid in ids]


_BANACH = GalleryEntry(
    name="banach-half",
    description="halving map on the line; every checker passes",
    doc={
        "name": "banach-half",
        "seed": 0,
        "space": {"dimension": 1},
        "region": {"lows": [-10.0], "highs": [10.0]},
        "maps": {"T": "half"},
        "gauges": {
            "F": "id",
            "family": {"kind": "iterated", "base": "half"},
            "asmk_variants": ["asmk1", "asmk2"],
        },
        "run": ["iterate", "certify", "falsify"],
        "iterate": {"x0": [1.0], "steps": 352, "tol": 1e-9},
        "certify": {"route": "tau"},
        "falsify": {"eps": 0.5, "gap_tol": 1e-2},
    },
    expectations=tuple(
        [
            _e("iterate.solve", "converged",
               "consecutive gaps halve each step and cross 1e-9 near step 30"),
        ]
        + _all_pass("certify", ["C1", "C2", "C3", "C4", "C5"],
                    "gaps 2^-(n+1) decay geometrically, so every band empties "
                    "within a short shift")
        + _all_pass("certify", ["CAUCHY", "overall"],
                    "tail sups telescope to 2^-n and fall below 1e-6")
        + _all_pass("certify", ["D1", "D2", "D3", "D4"],
                    "distance curves scale by exactly 1/2 per step for every "
                    "seed pair")
        + _all_pass("certify", ["RATE"], "the contraction factor is exactly 1/2")
        + _all_pass("certify", ["asmk1.C6", "asmk1.C7", "asmk1.C8"],
                    "the halving family dominates the orbit gaps with zero slack")
        + _all_pass("certify", ["asmk2.C6", "asmk2.C7", "asmk2.C9"],
                    "cross gaps |2^-i - 2^-(j+1)| scale by exactly 2^-n under "
                    "an n-shift")
        + [
            _e("falsify.scan", "none",
               "gaps decay below the separation threshold, leaving no "
               "separated pair to report"),
        ]
    ),
    expected_exit=0,
)

_MEIR_KEELER = GalleryEntry(
    name="meir-keeler",
    description="x/(1+x): settles without any uniform contraction factor",
    doc={
        "name": "meir-keeler",
        "seed": 0,
        "space": {"dimension": 1},
        "region": {"lows": [0.0], "highs": [10.0]},
        "maps": {"T": "mk"},
        "run": ["iterate", "certify"],
        "iterate": {"x0": [1.0], "steps": 1000, "tol": 1e-3},
        "certify": {"route": "tau"},
    },
    expectations=tuple(
        [
            _e("iterate.solve", "converged",
               "the orbit 1/(1+n) reaches a 1e-3 consecutive gap near step 30"),
        ]
        + _all_pass("certify", ["C1", "C2", "C3", "C4", "C5"],
                    "gaps 1/((n+1)(n+2)) shrink polynomially, slow but "
                    "monotone, and every band empties within the shift horizon")
        + _all_pass("certify", ["CAUCHY", "overall"],
                    "with 1000 steps the final tail sup is 1/(1000*1001), "
                    "just under 1e-6")
        + _all_pass("certify", ["D1", "D2", "D3", "D4"],
                    "|x-y|/((1+nx)(1+ny)) strictly shrinks for every pair")
        + [
            _e("certify.RATE", "fail",
               "step ratios 1/((1+x)(1+y)) approach 1 near the origin, so no "
               "factor below 1 works uniformly"),
        ]
    ),
    expected_exit=2,
)

_TRANSLATION = GalleryEntry(
    name="translation",
    description="x+1: an isometry that never settles",
    doc={
        "name": "translation",
        "seed": 0,
        "space": {"dimension": 1},
        "region": {"lows": [-10.0], "highs": [10.0]},
        "maps": {"T": "translation"},
        "run": ["iterate", "certify", "falsify"],
        "iterate": {"x0": [0.0], "steps": 352, "tol": 1e-9},
        "certify": {"route": "tau"},
        "falsify": {"eps": 0.5, "gap_tol": 1e-2},
    },
    expectations=(
        _e("iterate.solve", "not_converged",
           "consecutive gaps are constant 1 and never reach the tolerance"),
        _e("certify.C1", "pass",
           "the unit gap sits above every band, so the smallest candidate "
           "width is admissible vacuously"),
        _e("certify.C2", "pass",
           "bands below the unit gap are unoccupied once the width drops "
           "under 1 - eps"),
        _e("certify.C3", "fail",
           "every consecutive gap stays exactly 1, so nothing ever decreases"),
        _e("certify.C4", "pass",
           "pair gaps are integers, so thin bands between them are empty"),
        _e("certify.C5", "fail",
           "pair gaps |i-j| are invariant under shifting both indices"),
        _e("certify.CAUCHY", "fail",
           "the tail sup from index n is (last - n), far above tolerance"),
        _e("certify.overall", "fail", "the strict-decrease checks fail"),
        _e("certify.D1", "pass",
           "curves are constant at their starting distance, so small-start "
           "buckets stay small"),
        _e("certify.D2", "pass",
           "the thinnest bands catch no sampled starting distance"),
        _e("certify.D3", "fail",
           "no sampled pair ever moves closer under an isometry"),
        _e("certify.D4", "pass",
           "orbit points sit on an integer lattice, so thin bands are empty"),
        _e("certify.RATE", "fail", "every step ratio is exactly 1"),
        _e("falsify.scan", "not_applicable",
           "witness extraction requires decaying consecutive gaps and the "
           "gaps are constant"),
    ),
    expected_exit=2,
)

# 1 - 2^-21 sits strictly below the unit pair gap but inside every band
# (eps, eps + delta) with delta >= 2^-20, which forces the band checks to
# confront the gap instead of passing vacuously.
_PERIOD_EPS = 1.0 - 2.0 ** -21

_PERIODIC = GalleryEntry(
    name="periodic",
    description="1-x: the orbit 0,1,0,1,... oscillates forever",
    doc={
        "name": "periodic",
        "seed": 0,
        "space": {"dimension": 1},
        "region": {"lows": [-10.0], "highs": [10.0]},
        "maps": {"T": "flip"},
        "budget": {"eps_grid": [1.0, _PERIOD_EPS, 0.1]},
        "run": ["iterate", "certify"],
        "iterate": {"x0": [0.0], "steps": 352, "tol": 1e-9},
        "certify": {"route": "tau"},
    },
    expectations=(
        _e("iterate.solve", "not_converged",
           "the orbit alternates between 0 and 1 with unit gaps"),
        _e("certify.C1", "pass",
           "the tail estimate exceeds every threshold, and the unit front "
           "gap admits the widest band vacuously"),
        _e("certify.C2", "fail",
           "with the threshold a hair below 1 the unit gap lies inside every "
           "band and never escapes"),
        _e("certify.C3", "fail", "consecutive gaps never decrease"),
        _e("certify.C4", "fail",
           "the unit pair gap sits inside every band above the hairline "
           "threshold and shifting preserves it"),
        _e("certify.C5", "fail", "pair gaps keep their parity pattern under shifts"),
        _e("certify.CAUCHY", "fail", "the tail sup is identically 1"),
        _e("certify.overall", "fail", "the band and strict checks fail"),
        _e("certify.D1", "pass",
           "curves are constant at their starting distance, so small-start "
           "buckets never grow"),
        _e("certify.D3", "fail", "sampled pairs keep a constant distance"),
        _e("certify.RATE", "fail", "reflection preserves every distance"),
    ),
    expected_exit=2,
)

_CYCLIC = GalleryEntry(
    name="cyclic-line",
    description="reflecting contraction between [1,inf) and (-inf,-1]",
    doc={
        "name": "cyclic-line",
        "seed": 0,
        "space": {"dimension": 1},
        "maps": {"T": "cyclic_reflect"},
        "premetric": {"kind": "shifted_cyclic"},
        "cyclic_setting": {
            "set_a": {"kind": "interval", "lo": 1.0, "hi": _INF},
            "set_b": {"kind": "interval", "lo": -_INF, "hi": -1.0},
        },
        "run": ["cyclic"],
        "cyclic": {"x0": [3.0], "pairs": 40, "tol": 1e-8,
                   "collapse_tol": 1e-6, "samples": 64},
    },
    expectations=(
        _e("cyclic.CYC", "pass",
           "the map sends each sampled point of either set into the other"),
        _e("cyclic.solve", "converged",
           "even-index points 1 + 2*4^-n approach 1 at rate 1/4 per pair"),
        _e("cyclic.EVEN-COLLAPSE", "pass",
           "step distances settle at the set gap 2 while even-index "
           "distances vanish"),
        _e("cyclic.AX-SYM", "pass", "the shifted gap is symmetric in its arguments"),
        _e("cyclic.AX-MIX-R", "pass",
           "shifting by the set gap keeps the relaxed triangle inequality"),
        _e("cyclic.AX-MIX-L", "pass",
           "the mirrored relaxed triangle inequality holds on the same triples"),
        _e("cyclic.GAP-DECAY", "pass",
           "even-index points stay inside [1,3] where the shifted gap is 0"),
        _e("cyclic.GAP-DECAY-COMPANION", "pass",
           "plain distances between even iterates decay like 4^-n"),
        _e("cyclic.CAUCHY", "pass", "the shifted gap vanishes on the even trace"),
        _e("cyclic.overall", "pass", "every ingredient of the mixed route holds"),
    ),
    expected_exit=0,
)

_ALTERNATING = GalleryEntry(
    name="alternating-45",
    description="alternating x/4 and x/5 with a 7t/12 comparison gauge",
    doc={
        "name": "alternating-45",
        "seed": 0,
        "space": {"dimension": 1},
        "region": {"lows": [-10.0], "highs": [10.0]},
        "maps": {"T": "quarter", "S": "fifth"},
        "gauges": {
            "F": "id",
            "psi": {
                "expression": "7.0 * t / 12.0",
                "name": "seven-twelfths",
                "profile": [
                    "continuous", "right_continuous", "nondecreasing",
                    "positive_on_positive", "zero_at_zero",
                    "upper_semicontinuous", "right_upper_semicontinuous",
                    "strictly_below_identity",
                ],
            },
            "family": {"kind": "iterated", "base": "psi"},
            "asmk_variants": ["asmk1"],
        },
        "run": ["certify", "alternate"],
        "certify": {"route": "tau", "source": "alternating"},
        "alternate": {"seed": [1.0], "steps": 400, "tol": 1e-9,
                      "fpsi_pairs": 1000},
    },
    expectations=tuple(
        _all_pass("certify", ["C1", "C2", "C3", "C4", "C5"],
                  "gaps shrink by at least 3/4 per step, alternating between "
                  "two geometric ratios")
        + _all_pass("certify", ["CAUCHY", "overall"],
                    "the alternating orbit collapses at rate 1/20 per round")
        + _all_pass("certify", ["D1", "D2", "D3", "D4"],
                    "the quarter map scales every distance by exactly 1/4")
        + _all_pass("certify", ["RATE"], "the contraction factor is exactly 1/4")
        + _all_pass("certify", ["asmk1.C6", "asmk1.C7", "asmk1.C8"],
                    "orbit gap ratios 4/15 and 3/16 both sit below 7/12")
        + [
            _e("alternate.solve", "converged",
               "alternating quarter and fifth scalings reach a 1e-9 residual "
               "within about 14 steps"),
            _e("alternate.FPSI", "pass",
               "|x/4 - y/5| never exceeds 7/12 of the dominating blend of "
               "distances"),
            _e("alternate.INEQFP", "pass",
               "each consecutive gap is at most 7/12 of the previous one"),
        ]
    ),
    expected_exit=0,
)

_COMPOSED = GalleryEntry(
    name="composed-G",
    description="halving map certified through the bounded gap t/(1+t)",
    doc={
        "name": "composed-G",
        "seed": 0,
        "space": {"dimension": 1},
        "region": {"lows": [-10.0], "highs": [10.0]},
        "maps": {"T": "half"},
        "premetric": {"kind": "composed", "G": "mk"},
        "run": ["iterate", "certify"],
        "iterate": {"x0": [1.0], "steps": 352, "tol": 1e-9},
        "certify": {"route": "composed"},
    },
    expectations=tuple(
        [
            _e("iterate.solve", "converged",
               "the composed gap G(2^-n) tracks 2^-n for small arguments"),
        ]
        + _all_pass("certify", ["C1", "C2", "C3", "C4", "C5"],
                    "G is monotone, so composed gaps inherit the geometric "
                    "decay of the orbit")
        + _all_pass(
            "certify",
            [f"REG-{entry}" for entry in sorted([
                "continuous", "right_continuous", "nondecreasing",
                "positive_on_positive", "zero_at_zero",
                "upper_semicontinuous", "right_upper_semicontinuous",
                "strictly_below_identity",
            ])],
            "t/(1+t) is smooth, increasing, and strictly below the identity "
            "on positive arguments",
        )
        + _all_pass("certify", ["C4-INNER"],
                    "the band search under the plain distance repeats the "
                    "halving-orbit argument")
        + _all_pass("certify", ["CAUCHY", "overall"],
                    "composed tail sups shrink with the underlying distances")
        + _all_pass("certify", ["D1", "D2", "D3", "D4"],
                    "the halving map contracts every sampled pair")
        + _all_pass("certify", ["RATE"], "the contraction factor is exactly 1/2")
        + _all_pass("certify", ["PCD"],
                    "G(t) below 1e-9 forces t below 2e-9, well under the "
                    "distance tolerance")
    ),
    expected_exit=0,
)

_HARMONIC = GalleryEntry(
    name="harmonic-divergent",
    description="partial sums of 1/n: gaps vanish yet the trace diverges",
    doc={
        "name": "harmonic-divergent",
        "seed": 0,
        "space": {"dimension": 1},
        "sequence": "harmonic",
        "run": ["iterate", "certify", "falsify"],
        "iterate": {"steps": 999},
        "certify": {"route": "tau", "source": "sequence"},
        "falsify": {"eps": 0.5, "gap_tol": 1e-2},
    },
    expectations=tuple(
        _all_pass("certify", ["C1", "C2", "C3", "C4", "C5"],
                  "consecutive gaps 1/(n+2) decay monotonically, and wide "
                  "pair bands empty under modest shifts")
        + [
            _e("certify.CAUCHY", "fail",
               "the tail sup from index n is a harmonic tail, which never "
               "falls below tolerance"),
            _e("certify.overall", "fail", "the settling diagnostic fails"),
            _e("falsify.scan", "found",
               "partial sums grow without bound, so separated index pairs "
               "with even offset recur forever"),
        ]
    ),
    expected_exit=2,
)

GALLERY: tuple[GalleryEntry, ...] = (
    _BANACH,
    _MEIR_KEELER,
    _TRANSLATION,
    _PERIODIC,
    _CYCLIC,
    _ALTERNATING,
    _COMPOSED,
    _HARMONIC,
)


def gallery_names() -> tuple[str, ...]:
    return tuple(entry.name for entry in GALLERY)


def get_entry(name: str) -> GalleryEntry:
    for entry in GALLERY:
        if entry.name == name:
            return entry
    raise InputError(f"unknown gallery entry {name!r}; have {list(gallery_names())}")


def list_gallery() -> str:
    """One line per entry, deterministic order."""
    width = max(len(e.name) for e in GALLERY)
    lines = [f"{e.name:<{width}}  exit {e.expected_exit}  {e.description}"
             for e in GALLERY]
    return "\n".join(lines)
